"""Omnidirectional fisheye projection with analytic derivatives.

The camera model maps a 3D point ``(x, y, z)`` in the camera frame
(x-right, y-down, z-forward) to pixels via

    rho = arctan(z / sqrt(x^2 + y^2))
    [u, v] = center + [x, y] / sqrt(x^2 + y^2) * f(rho)

where ``f`` is a calibration polynomial in ``rho`` (coefficients in
ascending order, output in pixels). ``rho`` is clamped to the calibrated
interval; outside it the polynomial would extrapolate, so the clamp keeps
the image model bounded (and makes df/drho zero there). Points on the
optical axis (x = y = 0) project to the distortion center; the Jacobian is
undefined there and callers must skip such points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularProjectionError, ValidationError

ON_AXIS_EPS = 1e-9       # below this ground-plane radius, project() returns the center
JACOBIAN_AXIS_EPS = 1e-6  # below this, the Jacobian is treated as singular


@dataclass(frozen=True)
class FisheyeCalib:
    """Polynomial fisheye calibration.

    coeffs: ascending polynomial coefficients of f(rho), pixels.
    center: distortion center (c_x, c_y), pixels.
    image_size: (W, H), pixels.
    rho_range: calibrated interval (rho_min, rho_max), radians, inside
        (-pi/2, pi/2).
    """

    coeffs: np.ndarray
    center: np.ndarray
    image_size: tuple[int, int]
    rho_range: tuple[float, float]

    def __post_init__(self):
        coeffs = np.atleast_1d(np.asarray(self.coeffs, dtype=np.float64))
        center = np.asarray(self.center, dtype=np.float64)
        if coeffs.ndim != 1 or coeffs.size < 1:
            raise ValidationError("coeffs must be a non-empty 1D array")
        if center.shape != (2,):
            raise ValidationError("center must have shape (2,)")
        w, h = self.image_size
        if w <= 0 or h <= 0:
            raise ValidationError(f"image_size must be positive, got {self.image_size}")
        lo, hi = self.rho_range
        half_pi = math.pi / 2
        if not (-half_pi < lo < hi < half_pi):
            raise ValidationError(
                f"rho_range must satisfy -pi/2 < lo < hi < pi/2, got {self.rho_range}"
            )
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "image_size", (int(w), int(h)))
        object.__setattr__(self, "rho_range", (float(lo), float(hi)))

    def radial(self, rho: np.ndarray) -> np.ndarray:
        """f(rho) via Horner on ascending coefficients."""
        rho = np.asarray(rho, dtype=np.float64)
        out = np.full_like(rho, self.coeffs[-1])
        for c in self.coeffs[-2::-1]:
            out = out * rho + c
        return out

    def radial_derivative(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=np.float64)
        n = self.coeffs.size
        if n == 1:
            return np.zeros_like(rho)
        dcoeffs = self.coeffs[1:] * np.arange(1, n)
        out = np.full_like(rho, dcoeffs[-1])
        for c in dcoeffs[-2::-1]:
            out = out * rho + c
        return out


def project(points: np.ndarray, calib: FisheyeCalib) -> np.ndarray:
    """Project camera-frame points (..., 3) to pixel coordinates (..., 2)."""
    p = np.asarray(points, dtype=np.float64)
    if p.shape[-1] != 3:
        raise ValidationError(f"points must have trailing dim 3, got {p.shape}")
    if not np.isfinite(p).all():
        raise ValidationError("non-finite point passed to project()")
    uv, _, _ = _project_impl(p, calib, want_jacobian=False)
    return uv


def project_jacobian(point: np.ndarray, calib: FisheyeCalib) -> np.ndarray:
    """Analytic d(u,v)/d(x,y,z) of a single point, shape (2, 3).

    Raises SingularProjectionError on (near-)axis points, where the pixel
    direction x/r, y/r is undefined.
    """
    p = np.asarray(point, dtype=np.float64)
    if p.shape != (3,):
        raise ValidationError(f"expected a single 3-vector, got {p.shape}")
    uv, jac, on_axis = _project_impl(p[None, :], calib, want_jacobian=True)
    if on_axis[0]:
        raise SingularProjectionError(
            "projection Jacobian is singular on the optical axis (x^2 + y^2 ~ 0)"
        )
    return jac[0]


def project_with_jacobian(
    points: np.ndarray, calib: FisheyeCalib
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized projection + Jacobian for the energy terms.

    Returns (uv (..., 2), jacobian (..., 2, 3), on_axis mask (...)). Entries
    flagged on-axis hold the center in uv and zeros in the Jacobian; callers
    skip them for that iteration.
    """
    p = np.asarray(points, dtype=np.float64)
    if p.shape[-1] != 3:
        raise ValidationError(f"points must have trailing dim 3, got {p.shape}")
    if not np.isfinite(p).all():
        raise ValidationError("non-finite point passed to project_with_jacobian()")
    return _project_impl(p, calib, want_jacobian=True)


def _project_impl(p, calib, want_jacobian):
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    r2 = x * x + y * y
    r = np.sqrt(r2)
    on_axis = r < (JACOBIAN_AXIS_EPS if want_jacobian else ON_AXIS_EPS)
    r_safe = np.where(on_axis, 1.0, r)

    rho = np.arctan2(z, r_safe)
    lo, hi = calib.rho_range
    clamped = (rho < lo) | (rho > hi)
    rho_c = np.clip(rho, lo, hi)
    fr = calib.radial(rho_c)

    dir_x = x / r_safe
    dir_y = y / r_safe
    uv = np.empty(p.shape[:-1] + (2,), dtype=np.float64)
    uv[..., 0] = calib.center[0] + dir_x * fr
    uv[..., 1] = calib.center[1] + dir_y * fr
    # on-axis limit: zero direction, i.e. exactly the center
    uv[..., 0] = np.where(on_axis, calib.center[0], uv[..., 0])
    uv[..., 1] = np.where(on_axis, calib.center[1], uv[..., 1])

    if not want_jacobian:
        return uv, None, on_axis

    dfr = np.where(clamped, 0.0, calib.radial_derivative(rho_c))
    D = r2 + z * z
    D = np.where(D == 0.0, 1.0, D)
    r3 = r_safe ** 3
    # d(rho)/d(x,y,z) with rho = atan2(z, r)
    drho_dx = -z * x / (r_safe * D)
    drho_dy = -z * y / (r_safe * D)
    drho_dz = r_safe / D

    jac = np.empty(p.shape[:-1] + (2, 3), dtype=np.float64)
    jac[..., 0, 0] = fr * y * y / r3 + dir_x * dfr * drho_dx
    jac[..., 0, 1] = -fr * x * y / r3 + dir_x * dfr * drho_dy
    jac[..., 0, 2] = dir_x * dfr * drho_dz
    jac[..., 1, 0] = -fr * x * y / r3 + dir_y * dfr * drho_dx
    jac[..., 1, 1] = fr * x * x / r3 + dir_y * dfr * drho_dy
    jac[..., 1, 2] = dir_y * dfr * drho_dz
    jac[on_axis] = 0.0
    return uv, jac, on_axis


@dataclass(frozen=True)
class RigidTransform:
    """Rotation + translation; maps p -> R @ p + t."""

    R: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.R, dtype=np.float64)
        t = np.asarray(self.t, dtype=np.float64)
        if R.shape != (3, 3) or t.shape != (3,):
            raise ValidationError(f"bad rigid transform shapes {R.shape}, {t.shape}")
        if not np.allclose(R.T @ R, np.eye(3), atol=1e-6) or not math.isclose(
            float(np.linalg.det(R)), 1.0, abs_tol=1e-6
        ):
            raise ValidationError("R must be a proper rotation (R^T R = I, det = 1)")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "t", t)

    @staticmethod
    def identity() -> "RigidTransform":
        return RigidTransform(np.eye(3), np.zeros(3))

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """self after other: (self . other)(p) = self(other(p))."""
        return RigidTransform(self.R @ other.R, self.R @ other.t + self.t)

    def inverse(self) -> "RigidTransform":
        return RigidTransform(self.R.T, -self.R.T @ self.t)


def transform_point(points: np.ndarray, transform: RigidTransform) -> np.ndarray:
    """Apply R @ p + t to points of shape (..., 3)."""
    p = np.asarray(points, dtype=np.float64)
    return p @ transform.R.T + transform.t


def quat_to_rotmat(q: np.ndarray) -> np.ndarray:
    """Unit quaternion (qx, qy, qz, qw) -> 3x3 rotation matrix."""
    qx, qy, qz, qw = np.asarray(q, dtype=np.float64)
    n = math.sqrt(qx * qx + qy * qy + qz * qz + qw * qw)
    if n == 0.0:
        raise ValidationError("zero quaternion")
    qx, qy, qz, qw = qx / n, qy / n, qz / n, qw / n
    return np.array(
        [
            [1 - 2 * (qy * qy + qz * qz), 2 * (qx * qy - qz * qw), 2 * (qx * qz + qy * qw)],
            [2 * (qx * qy + qz * qw), 1 - 2 * (qx * qx + qz * qz), 2 * (qy * qz - qx * qw)],
            [2 * (qx * qz - qy * qw), 2 * (qy * qz + qx * qw), 1 - 2 * (qx * qx + qy * qy)],
        ]
    )


def rotmat_to_quat(R: np.ndarray) -> np.ndarray:
    """3x3 rotation matrix -> unit quaternion (qx, qy, qz, qw), qw >= 0."""
    R = np.asarray(R, dtype=np.float64)
    tr = R[0, 0] + R[1, 1] + R[2, 2]
    if tr > 0:
        s = math.sqrt(tr + 1.0) * 2
        qw = 0.25 * s
        qx = (R[2, 1] - R[1, 2]) / s
        qy = (R[0, 2] - R[2, 0]) / s
        qz = (R[1, 0] - R[0, 1]) / s
    elif R[0, 0] > R[1, 1] and R[0, 0] > R[2, 2]:
        s = math.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2]) * 2
        qw = (R[2, 1] - R[1, 2]) / s
        qx = 0.25 * s
        qy = (R[0, 1] + R[1, 0]) / s
        qz = (R[0, 2] + R[2, 0]) / s
    elif R[1, 1] > R[2, 2]:
        s = math.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2]) * 2
        qw = (R[0, 2] - R[2, 0]) / s
        qx = (R[0, 1] + R[1, 0]) / s
        qy = 0.25 * s
        qz = (R[1, 2] + R[2, 1]) / s
    else:
        s = math.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1]) * 2
        qw = (R[1, 0] - R[0, 1]) / s
        qx = (R[0, 2] + R[2, 0]) / s
        qy = (R[1, 2] + R[2, 1]) / s
        qz = 0.25 * s
    q = np.array([qx, qy, qz, qw])
    if qw < 0:
        q = -q
    return q / np.linalg.norm(q)
