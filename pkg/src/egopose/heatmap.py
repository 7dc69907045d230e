"""Per-joint probability heatmaps: storage, differentiable sampling, synthesis.

Grid cell (row, col) is centered at image pixel ((col + 0.5) * stride,
(row + 0.5) * stride). Sampling is bilinear with zero padding: coordinates
outside the grid read 0 with zero gradient, so reprojection energy simply
loses its pull there and the pose regularizer takes over. Values are stored
as float32 (the on-disk format) and upcast for arithmetic.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError, ValidationError
from .skeleton import NUM_JOINTS


@dataclass
class HeatmapStack:
    """15 single-channel grids for one frame.

    grids: (15, H, W) float32 in [0, 1].
    stride: image pixels per heatmap cell.
    """

    grids: np.ndarray
    stride: float

    def __post_init__(self):
        grids = np.ascontiguousarray(self.grids, dtype=np.float32)
        if grids.ndim != 3 or grids.shape[0] != NUM_JOINTS:
            raise ValidationError(f"grids must be ({NUM_JOINTS}, H, W), got {grids.shape}")
        if not np.isfinite(grids).all():
            raise ValidationError("heatmap contains non-finite values")
        if grids.min() < 0.0 or grids.max() > 1.0 + 1e-6:
            raise ValidationError(
                f"heatmap values must lie in [0, 1], got range "
                f"[{grids.min():.6g}, {grids.max():.6g}]"
            )
        if self.stride <= 0:
            raise ValidationError(f"stride must be positive, got {self.stride}")
        object.__setattr__(self, "grids", grids)
        object.__setattr__(self, "stride", float(self.stride))

    @property
    def resolution(self) -> tuple[int, int]:
        """(W, H) in cells."""
        return (self.grids.shape[2], self.grids.shape[1])


def _bilinear(grid: np.ndarray, uv: np.ndarray, stride: float):
    """Shared core: returns (value, duv) for uv of shape (..., 2)."""
    g = np.asarray(grid, dtype=np.float64)
    h, w = g.shape
    uv = np.asarray(uv, dtype=np.float64)
    gx = uv[..., 0] / stride - 0.5
    gy = uv[..., 1] / stride - 0.5
    x0 = np.floor(gx).astype(np.int64)
    y0 = np.floor(gy).astype(np.int64)
    wx = gx - x0
    wy = gy - y0

    def read(yy, xx):
        inside = (yy >= 0) & (yy < h) & (xx >= 0) & (xx < w)
        return np.where(inside, g[np.clip(yy, 0, h - 1), np.clip(xx, 0, w - 1)], 0.0)

    c00 = read(y0, x0)
    c01 = read(y0, x0 + 1)
    c10 = read(y0 + 1, x0)
    c11 = read(y0 + 1, x0 + 1)

    value = (
        c00 * (1 - wx) * (1 - wy)
        + c01 * wx * (1 - wy)
        + c10 * (1 - wx) * wy
        + c11 * wx * wy
    )
    dgx = (c01 - c00) * (1 - wy) + (c11 - c10) * wy
    dgy = (c10 - c00) * (1 - wx) + (c11 - c01) * wx
    duv = np.stack([dgx, dgy], axis=-1) / stride
    return value, duv


def sample(grid: np.ndarray, uv: np.ndarray, stride: float) -> np.ndarray:
    """Bilinearly sample one grid at image coordinates uv (..., 2)."""
    value, _ = _bilinear(grid, uv, stride)
    return value


def sample_gradient(grid: np.ndarray, uv: np.ndarray, stride: float) -> np.ndarray:
    """d(sample)/d(u, v), shape (..., 2); zero outside the grid."""
    _, duv = _bilinear(grid, uv, stride)
    return duv


def sample_stack(stack: HeatmapStack, uv: np.ndarray):
    """Sample grid j at uv[j] for all 15 joints: returns (values (15,), grads (15, 2))."""
    uv = np.asarray(uv, dtype=np.float64)
    if uv.shape != (NUM_JOINTS, 2):
        raise ValidationError(f"expected ({NUM_JOINTS}, 2) coordinates, got {uv.shape}")
    values = np.empty(NUM_JOINTS)
    grads = np.empty((NUM_JOINTS, 2))
    for j in range(NUM_JOINTS):
        values[j], grads[j] = _bilinear(stack.grids[j], uv[j], stack.stride)
    return values, grads


def synth_heatmap(
    gt_uv: np.ndarray,
    sigma: float,
    resolution: tuple[int, int],
    stride: float,
    occluded: np.ndarray | None = None,
    spurious_uv: np.ndarray | None = None,
    true_peak_occluded: float = 0.5,
    spurious_peak: float = 0.8,
) -> HeatmapStack:
    """Gaussian-bump heatmaps at the true pixel positions.

    Visible joints get an isotropic bump of peak 1 at gt_uv[j]. Occluded
    joints instead get a bimodal map: a spurious peak at spurious_uv[j] and
    a weaker true peak, taking the pointwise max so both peak values are
    exact. sigma is in image pixels.
    """
    gt_uv = np.asarray(gt_uv, dtype=np.float64)
    if gt_uv.shape != (NUM_JOINTS, 2):
        raise ValidationError(f"gt_uv must be ({NUM_JOINTS}, 2), got {gt_uv.shape}")
    if sigma <= 0:
        raise ValidationError(f"sigma must be positive, got {sigma}")
    if occluded is None:
        occluded = np.zeros(NUM_JOINTS, dtype=bool)
    occluded = np.asarray(occluded, dtype=bool)
    if occluded.any():
        if spurious_uv is None:
            raise ValidationError("spurious_uv required when any joint is occluded")
        spurious_uv = np.asarray(spurious_uv, dtype=np.float64)

    w, h = resolution
    cols = (np.arange(w) + 0.5) * stride
    rows = (np.arange(h) + 0.5) * stride
    uu, vv = np.meshgrid(cols, rows)  # (h, w) each

    def bump(center, peak):
        d2 = (uu - center[0]) ** 2 + (vv - center[1]) ** 2
        return peak * np.exp(-d2 / (2.0 * sigma * sigma))

    grids = np.empty((NUM_JOINTS, h, w), dtype=np.float64)
    for j in range(NUM_JOINTS):
        if occluded[j]:
            grids[j] = np.maximum(
                bump(gt_uv[j], true_peak_occluded), bump(spurious_uv[j], spurious_peak)
            )
        else:
            grids[j] = bump(gt_uv[j], 1.0)
    return HeatmapStack(grids=grids, stride=stride)


def argmax_detections(stack: HeatmapStack) -> np.ndarray:
    """Per-joint argmax cell center in image pixels: (15, 2)."""
    h, w = stack.grids.shape[1:]
    flat = stack.grids.reshape(NUM_JOINTS, -1).argmax(axis=1)
    rows, cols = np.divmod(flat, w)
    uv = np.stack([(cols + 0.5) * stack.stride, (rows + 0.5) * stack.stride], axis=-1)
    return uv.astype(np.float64)


def write_heatmap_blob(path: str, stack: HeatmapStack) -> None:
    """Little-endian float32 blob, layout [joint][row][col]."""
    data = np.ascontiguousarray(stack.grids, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(data.tobytes())


def read_heatmap_blob(path: str, resolution: tuple[int, int], stride: float) -> HeatmapStack:
    w, h = resolution
    expected = NUM_JOINTS * h * w * 4
    actual = os.path.getsize(path)
    if actual != expected:
        raise DataFormatError(
            f"heatmap blob {path}: expected {expected} bytes "
            f"({NUM_JOINTS}x{h}x{w} float32), found {actual}"
        )
    raw = np.fromfile(path, dtype="<f4").reshape(NUM_JOINTS, h, w)
    return HeatmapStack(grids=raw, stride=stride)
