"""Window matching costs and cost-volume construction.

Convention: the left image is the reference. A pixel (x, y) at disparity
``d`` is compared with right-image pixel (x - d, y). Windows are square with
side ``2*radius + 1`` and are clipped at the image borders; only offsets
where both the left and the shifted right pixel lie inside the image take
part, and MSE/NCC/normalised SAD divide by that in-bounds count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyOverlap
from .imaging import gradients

METRICS = ("SAD", "MSE", "NCC", "GF", "HOG", "DWAC")
DEFAULT_RADIUS = 3


@dataclass
class CostVolume:
    """Matching costs indexed ``costs[y, x, d]`` for d = 0..dmax; lower is better."""

    costs: np.ndarray
    metric: str
    radius: int = DEFAULT_RADIUS

    def __post_init__(self):
        if self.costs.ndim != 3:
            raise ValueError(f"cost volume must be 3-D, got shape {self.costs.shape}")
        if not np.all(np.isfinite(self.costs)) or np.any(self.costs < 0):
            raise ValueError("cost volume entries must be finite and non-negative")

    @property
    def height(self) -> int:
        return self.costs.shape[0]

    @property
    def width(self) -> int:
        return self.costs.shape[1]

    @property
    def dmax(self) -> int:
        return self.costs.shape[2] - 1


@dataclass(frozen=True)
class DwacParams:
    alpha: float = 0.5
    radius: int = DEFAULT_RADIUS

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.radius < 0:
            raise ValueError("radius must be >= 0")


def sentinel_cost(metric: str, radius: int) -> float:
    """Cost assigned to disparities whose right window falls fully outside the image."""
    area = (2 * radius + 1) ** 2
    return {
        "SAD": float(area),
        "MSE": 1.0,
        "NCC": 1.0,
        "DWAC": 1.0,
        # |dgx| + |dgy| <= 4 per pixel for intensities in [0, 1]
        "GF": 4.0 * area,
        # squared distance of two non-negative vectors of norm <= 1
        "HOG": 2.0,
    }[metric]


# --------------------------------------------------------------------------
# single-window costs (direct evaluation)


def _window_pairs(left, right, x, y, d, radius):
    h, w = left.shape
    lv, rv = [], []
    for i in range(-radius, radius + 1):
        yy = y + i
        if not 0 <= yy < h:
            continue
        for j in range(-radius, radius + 1):
            xl, xr = x + j, x - d + j
            if 0 <= xl < w and 0 <= xr < w:
                lv.append(left[yy, xl])
                rv.append(right[yy, xr])
    return lv, rv


def sad_window(left, right, x: int, y: int, d: int, radius: int) -> float:
    """Sum of absolute differences over the clipped window."""
    lv, rv = _window_pairs(left, right, x, y, d, radius)
    return float(sum(abs(a - b) for a, b in zip(lv, rv)))


def mse_window(left, right, x: int, y: int, d: int, radius: int) -> float:
    """Mean squared difference over the clipped window."""
    lv, rv = _window_pairs(left, right, x, y, d, radius)
    if not lv:
        raise EmptyOverlap(f"no in-bounds pixels at x={x}, y={y}, d={d}")
    return float(sum((a - b) ** 2 for a, b in zip(lv, rv)) / len(lv))


def ncc_window(left, right, x: int, y: int, d: int, radius: int) -> float:
    """Normalised cross-correlation without mean removal.

    Returns 0 when either window has zero energy.
    """
    lv, rv = _window_pairs(left, right, x, y, d, radius)
    if not lv:
        raise EmptyOverlap(f"no in-bounds pixels at x={x}, y={y}, d={d}")
    slr = sum(a * b for a, b in zip(lv, rv))
    sll = sum(a * a for a in lv)
    srr = sum(b * b for b in rv)
    if sll == 0 or srr == 0:
        return 0.0
    return float(slr / math.sqrt(sll * srr))


# --------------------------------------------------------------------------
# volumes


def box_sum(a: np.ndarray, radius: int) -> np.ndarray:
    """Sum of ``a`` over the (2r+1)^2 window around each pixel, zero outside.

    Rows are accumulated first, then columns, always in the same order, so
    the result does not depend on how callers split the work.
    """
    if radius == 0:
        return a.copy()
    h, w = a.shape
    p = np.pad(a, radius)
    rows = p[:, 0:w].copy()
    for j in range(1, 2 * radius + 1):
        rows += p[:, j : j + w]
    out = rows[0:h].copy()
    for i in range(1, 2 * radius + 1):
        out += rows[i : i + h]
    return out


def _shift_right(img: np.ndarray, d: int) -> np.ndarray:
    """``out[:, x] = img[:, x - d]`` for x >= d, zero elsewhere."""
    out = np.zeros_like(img)
    if d < img.shape[1]:
        out[:, d:] = img[:, : img.shape[1] - d]
    return out


def _overlap_mask(shape, d: int) -> np.ndarray:
    m = np.zeros(shape)
    m[:, d:] = 1.0
    return m


def _check_pair(left, right):
    left = np.asarray(left, dtype=np.float64)
    right = np.asarray(right, dtype=np.float64)
    if left.shape != right.shape or left.ndim != 2:
        raise DimensionMismatch(f"image shapes differ: {left.shape} vs {right.shape}")
    return left, right


def _ncc_plane(left, rs, mask, radius):
    slr = box_sum(left * rs, radius)
    sll = box_sum(left * left * mask, radius)
    srr = box_sum(rs * rs, radius)
    denom = np.sqrt(sll * srr)
    ncc = np.zeros_like(slr)
    np.divide(slr, denom, out=ncc, where=denom > 0)
    # Cauchy-Schwarz can be overshot by rounding
    return np.clip(ncc, 0.0, 1.0)


def build_cost_volume(left, right, dmax: int, metric: str = "SAD", radius: int = DEFAULT_RADIUS) -> CostVolume:
    """Cost volume for SAD, MSE or NCC (stored as ``1 - NCC``)."""
    left, right = _check_pair(left, right)
    if metric not in ("SAD", "MSE", "NCC"):
        raise ValueError(f"unknown window metric {metric!r}")
    if dmax < 0:
        raise ValueError("dmax must be >= 0")
    h, w = left.shape
    sentinel = sentinel_cost(metric, radius)
    vol = np.empty((h, w, dmax + 1))
    for d in range(dmax + 1):
        rs = _shift_right(right, d)
        mask = _overlap_mask(left.shape, d)
        count = box_sum(mask, radius)
        if metric == "SAD":
            plane = box_sum(np.abs(left - rs) * mask, radius)
        elif metric == "MSE":
            diff = (left - rs) * mask
            plane = box_sum(diff * diff, radius)
            np.divide(plane, count, out=plane, where=count > 0)
        else:
            plane = 1.0 - _ncc_plane(left, rs, mask, radius)
        plane[count == 0] = sentinel
        vol[:, :, d] = plane
    return CostVolume(vol, metric, radius)


def dwac_cost_volume(left, right, dmax: int, params: DwacParams | None = None) -> CostVolume:
    """Blend of window-normalised SAD and ``1 - NCC`` over one fixed window.

    ``cost = alpha * SAD / n + (1 - alpha) * (1 - NCC)`` where ``n`` is the
    in-bounds pixel count, so both terms live in [0, 1].
    """
    p = params or DwacParams()
    left, right = _check_pair(left, right)
    if dmax < 0:
        raise ValueError("dmax must be >= 0")
    h, w = left.shape
    r = p.radius
    vol = np.empty((h, w, dmax + 1))
    for d in range(dmax + 1):
        rs = _shift_right(right, d)
        mask = _overlap_mask(left.shape, d)
        count = box_sum(mask, r)
        sad = box_sum(np.abs(left - rs) * mask, r)
        np.divide(sad, count, out=sad, where=count > 0)
        ncc_cost = 1.0 - _ncc_plane(left, rs, mask, r)
        plane = p.alpha * sad + (1.0 - p.alpha) * ncc_cost
        plane[count == 0] = sentinel_cost("DWAC", r)
        vol[:, :, d] = plane
    return CostVolume(vol, "DWAC", r)


def gf_cost_volume(left, right, dmax: int, radius: int = DEFAULT_RADIUS) -> CostVolume:
    """Windowed SAD of horizontal plus vertical gradient images."""
    left, right = _check_pair(left, right)
    if dmax < 0:
        raise ValueError("dmax must be >= 0")
    gl, gr = gradients(left), gradients(right)
    h, w = left.shape
    vol = np.empty((h, w, dmax + 1))
    for d in range(dmax + 1):
        mask = _overlap_mask(left.shape, d)
        count = box_sum(mask, radius)
        diff = np.abs(gl.gx - _shift_right(gr.gx, d)) * mask
        diff += np.abs(gl.gy - _shift_right(gr.gy, d)) * mask
        plane = box_sum(diff, radius)
        plane[count == 0] = sentinel_cost("GF", radius)
        vol[:, :, d] = plane
    return CostVolume(vol, "GF", radius)
