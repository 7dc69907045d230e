"""Fixed 15-joint body topology and pose-sequence containers.

The joint set is the neck-rooted convention used by egocentric trackers:
neck plus shoulder, elbow, wrist, hip, knee, ankle and toe on each side.
All 3D coordinates are in meters. Every container here is immutable after
construction and every function is pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

JOINT_NAMES = (
    "neck",
    "right_shoulder",
    "right_elbow",
    "right_wrist",
    "left_shoulder",
    "left_elbow",
    "left_wrist",
    "right_hip",
    "right_knee",
    "right_ankle",
    "right_toe",
    "left_hip",
    "left_knee",
    "left_ankle",
    "left_toe",
)

# Parent of each joint; the neck is the root of the tree.
_PARENTS = (-1, 0, 1, 2, 0, 4, 5, 0, 7, 8, 9, 0, 11, 12, 13)

NUM_JOINTS = len(JOINT_NAMES)


@dataclass(frozen=True)
class Skeleton:
    """Joint names, parent links and the derived bone list.

    ``bones`` lists (parent, child) index pairs ordered by child index, so
    bone k connects joint ``bones[k][1]`` to its parent. A 15-node tree has
    exactly 14 bones.
    """

    joint_names: tuple[str, ...]
    parents: tuple[int, ...]
    root_index: int

    def __post_init__(self):
        if len(self.joint_names) != NUM_JOINTS or len(self.parents) != NUM_JOINTS:
            raise ValidationError(
                f"skeleton must have exactly {NUM_JOINTS} joints, got "
                f"{len(self.joint_names)} names / {len(self.parents)} parents"
            )
        if self.parents[self.root_index] != -1:
            raise ValidationError("root joint must have parent -1")
        # parent relation must reach the root from every joint (single tree)
        for j in range(NUM_JOINTS):
            seen = set()
            cur = j
            while cur != self.root_index:
                if cur in seen or not (0 <= cur < NUM_JOINTS):
                    raise ValidationError(f"parent links do not form a tree at joint {j}")
                seen.add(cur)
                cur = self.parents[cur]

    @property
    def bones(self) -> tuple[tuple[int, int], ...]:
        return tuple(
            (self.parents[j], j) for j in range(NUM_JOINTS) if j != self.root_index
        )

    def index(self, name: str) -> int:
        return self.joint_names.index(name)


def default_skeleton() -> Skeleton:
    """The canonical neck-rooted 15-joint topology."""
    return Skeleton(joint_names=JOINT_NAMES, parents=_PARENTS, root_index=0)


LOCAL = "local"
WORLD = "world"
_SPACES = (LOCAL, WORLD)


@dataclass
class PoseSeq:
    """A segment of joint positions: ``frames`` is (B, 15, 3) in meters.

    ``space`` tags whether coordinates live in the egocentric camera frame
    ("local") or the world frame ("world"). Construction only enforces the
    array shape; corrupted data (NaN, too-short segments) is deliberately
    allowed through so that :func:`validate_sequence` can report on it and
    the optimizer can attempt repair.
    """

    frames: np.ndarray
    space: str

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim != 3 or frames.shape[1:] != (NUM_JOINTS, 3):
            raise ValidationError(
                f"frames must have shape (B, {NUM_JOINTS}, 3), got {frames.shape}"
            )
        if self.space not in _SPACES:
            raise ValidationError(f"space must be one of {_SPACES}, got {self.space!r}")
        object.__setattr__(self, "frames", frames)

    @property
    def B(self) -> int:
        return self.frames.shape[0]

    def copy(self) -> "PoseSeq":
        return PoseSeq(self.frames.copy(), self.space)


@dataclass(frozen=True)
class BoneLengths:
    """Per-bone lengths in meters, ordered as ``Skeleton.bones``."""

    lengths: np.ndarray

    def __post_init__(self):
        lengths = np.asarray(self.lengths, dtype=np.float64)
        if lengths.shape != (NUM_JOINTS - 1,):
            raise ValidationError(
                f"expected {NUM_JOINTS - 1} bone lengths, got shape {lengths.shape}"
            )
        object.__setattr__(self, "lengths", lengths)


def bone_vectors(pose: np.ndarray, skel: Skeleton) -> np.ndarray:
    """Child-minus-parent offset per bone; pose is (..., 15, 3) -> (..., 14, 3)."""
    pose = np.asarray(pose, dtype=np.float64)
    bones = skel.bones
    parents = [b[0] for b in bones]
    children = [b[1] for b in bones]
    return pose[..., children, :] - pose[..., parents, :]


def bone_lengths(pose: np.ndarray, skel: Skeleton) -> BoneLengths:
    """Euclidean length of every bone of a single (15, 3) frame.

    Zero lengths are legal (degenerate, flagged downstream); non-finite
    coordinates are rejected.
    """
    pose = np.asarray(pose, dtype=np.float64)
    if pose.shape != (NUM_JOINTS, 3):
        raise ValidationError(f"expected a single ({NUM_JOINTS}, 3) frame, got {pose.shape}")
    if not np.isfinite(pose).all():
        raise ValidationError("pose contains non-finite coordinates")
    return BoneLengths(np.linalg.norm(bone_vectors(pose, skel), axis=-1))


def bone_lengths_seq(frames: np.ndarray, skel: Skeleton) -> np.ndarray:
    """(B, 15, 3) -> (B, 14) bone lengths; no finiteness check (optimizer path)."""
    return np.linalg.norm(bone_vectors(frames, skel), axis=-1)


@dataclass
class SequenceDiagnostics:
    """Pure report emitted by :func:`validate_sequence`; never raises."""

    frame_count: int
    non_finite: list[tuple[int, int]] = field(default_factory=list)  # (frame, joint)
    zero_length_bones: list[tuple[int, int]] = field(default_factory=list)  # (frame, bone)
    notes: list[str] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not (self.non_finite or self.zero_length_bones or self.notes)

    def summary(self) -> str:
        if self.clean:
            return f"{self.frame_count} frames, no issues"
        parts = [f"{self.frame_count} frames"]
        if self.non_finite:
            parts.append(f"{len(self.non_finite)} non-finite entries")
        if self.zero_length_bones:
            parts.append(f"{len(self.zero_length_bones)} zero-length bones")
        parts.extend(self.notes)
        return ", ".join(parts)


def validate_sequence(seq: PoseSeq, skel: Skeleton, zero_tol: float = 1e-12) -> SequenceDiagnostics:
    """Report NaN/Inf entries, zero-length bones and too-short segments."""
    frames = seq.frames
    diag = SequenceDiagnostics(frame_count=seq.B)
    bad = ~np.isfinite(frames).all(axis=-1)  # (B, 15)
    for f, j in zip(*np.nonzero(bad)):
        diag.non_finite.append((int(f), int(j)))
    finite_frames = np.isfinite(frames).all(axis=(1, 2))
    if finite_frames.any():
        lengths = bone_lengths_seq(frames[finite_frames], skel)
        frame_ids = np.nonzero(finite_frames)[0]
        for fi, bi in zip(*np.nonzero(lengths <= zero_tol)):
            diag.zero_length_bones.append((int(frame_ids[fi]), int(bi)))
    if seq.B < 2:
        diag.notes.append("too short for temporal terms (B < 2)")
    return diag
