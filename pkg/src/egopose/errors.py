"""Exception hierarchy shared across the package.

Errors are split by how the CLI maps them to exit codes: data/file problems,
input validation problems, and numerical failures.
"""


class EgoPoseError(Exception):
    """Base class for all package errors."""


class DataFormatError(EgoPoseError):
    """A file is missing, truncated, malformed, or has a bad version."""


class ValidationError(EgoPoseError):
    """An in-memory input violates a documented precondition."""


class NumericalError(EgoPoseError):
    """A computation failed numerically (non-finite values, failed check)."""


class DegenerateGeometryError(NumericalError):
    """Point configuration too degenerate for the requested fit."""


class SingularProjectionError(NumericalError):
    """Projection Jacobian requested at the on-axis singularity."""
