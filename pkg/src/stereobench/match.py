"""Disparity estimation: winner-take-all, scanline DP, min-sum BP, GF, HOG, DWAC."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cost import (
    DEFAULT_RADIUS,
    CostVolume,
    DwacParams,
    build_cost_volume,
    dwac_cost_volume,
    gf_cost_volume,
)
from .errors import UnsupportedCombination
from .hog import HogParams, hog_cost_volume

INVALID = -1.0
METHODS = ("BM", "BMDP", "BP", "GF", "HOG", "DWAC")
COSTFNS = ("MSE", "NCC", "SAD")


@dataclass
class DisparityMap:
    values: np.ndarray
    valid: np.ndarray
    dmax: int

    @classmethod
    def from_labels(cls, labels, dmax: int, valid=None) -> "DisparityMap":
        values = np.asarray(labels, dtype=np.float64).copy()
        if valid is None:
            valid = np.ones(values.shape, dtype=bool)
        values[~valid] = INVALID
        return cls(values, np.asarray(valid, dtype=bool), dmax)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class DpParams:
    lam: float = 0.05
    tau_s: float = 0.1

    def __post_init__(self):
        if self.lam < 0 or not self.tau_s > 0:
            raise ValueError(f"invalid DP parameters {self}")


@dataclass(frozen=True)
class BpParams:
    iterations: int = 30
    lam: float = 0.05
    tau_s: float = 0.1
    tau_d: float | None = None

    def __post_init__(self):
        if self.iterations < 1 or self.lam < 0 or not self.tau_s > 0:
            raise ValueError(f"invalid BP parameters {self}")


def smoothness_table(n_labels: int, lam: float, tau_s: float) -> np.ndarray:
    """Truncated-linear pairwise cost ``V[d, d'] = min(lam*|d - d'|, tau_s)``."""
    d = np.arange(n_labels)
    return np.minimum(lam * np.abs(d[:, None] - d[None, :]), tau_s)


def scanline_energy(costs_row: np.ndarray, labels, lam: float, tau_s: float) -> float:
    """Energy of one row labelling: data terms plus truncated-linear smoothness."""
    labels = np.asarray(labels)
    data = costs_row[np.arange(len(labels)), labels].sum()
    jumps = np.abs(np.diff(labels))
    return float(data + np.minimum(lam * jumps, tau_s).sum())


def grid_energy(cv: CostVolume | np.ndarray, labels, lam: float, tau_s: float) -> float:
    """Energy over the 4-connected grid."""
    costs = cv.costs if isinstance(cv, CostVolume) else np.asarray(cv)
    labels = np.asarray(labels)
    h, w = labels.shape
    data = np.take_along_axis(costs, labels[:, :, None], axis=2).sum()
    sx = np.minimum(lam * np.abs(np.diff(labels, axis=1)), tau_s).sum()
    sy = np.minimum(lam * np.abs(np.diff(labels, axis=0)), tau_s).sum()
    return float(data + sx + sy)


def wta_disparity(cv: CostVolume) -> DisparityMap:
    """Per-pixel argmin; ties go to the smallest disparity."""
    return DisparityMap.from_labels(np.argmin(cv.costs, axis=2), cv.dmax)


def dp_scanline(cv: CostVolume, p: DpParams | None = None) -> DisparityMap:
    """Exact per-row minimisation of data + truncated-linear smoothness.

    All rows are solved together. The running cost is re-based to zero at
    every column, which leaves the optimum unchanged and keeps magnitudes
    small; with ``lam == 0`` this makes the result coincide with WTA.
    """
    p = p or DpParams()
    costs = cv.costs
    h, w, n = costs.shape
    V = smoothness_table(n, p.lam, p.tau_s)
    back = np.empty((w, h, n), dtype=np.int32)
    acc = costs[:, 0, :] - costs[:, 0, :].min(axis=1, keepdims=True)
    for x in range(1, w):
        # tot[row, d, d'] = acc[row, d'] + V[d, d']
        tot = acc[:, None, :] + V[None, :, :]
        best = np.argmin(tot, axis=2)
        back[x] = best
        acc = costs[:, x, :] + np.take_along_axis(tot, best[:, :, None], axis=2)[:, :, 0]
        acc -= acc.min(axis=1, keepdims=True)
    labels = np.empty((h, w), dtype=np.intp)
    labels[:, w - 1] = np.argmin(acc, axis=1)
    rows = np.arange(h)
    for x in range(w - 1, 0, -1):
        labels[:, x - 1] = back[x][rows, labels[:, x]]
    return DisparityMap.from_labels(labels, cv.dmax)


# --------------------------------------------------------------------------
# belief propagation


def _truncated_linear_envelope(h: np.ndarray, lam: float, tau_s: float) -> np.ndarray:
    """min over d' of ``h[d'] + min(lam*|d - d'|, tau_s)`` along axis 0, in O(D).

    A forward and a backward sweep track, for every label, the source label
    of the lower envelope of the cones ``h[d'] + lam*|d - d'|``; each value is
    then evaluated directly from its source so the result matches the
    quadratic formula bit for bit. Clamping at ``min(h) + tau_s`` applies the
    truncation.
    """
    n = h.shape[0]
    src_val = np.empty_like(h)
    src_pos = np.empty(h.shape, dtype=np.int64)
    best_val = h[0].copy()
    best_pos = np.zeros(h.shape[1:], dtype=np.int64)
    src_val[0], src_pos[0] = best_val, best_pos
    for d in range(1, n):
        take = h[d] <= best_val + lam * (d - best_pos)
        best_val = np.where(take, h[d], best_val)
        best_pos = np.where(take, d, best_pos)
        src_val[d], src_pos[d] = best_val, best_pos
    for d in range(n - 2, -1, -1):
        own = src_val[d] + lam * (d - src_pos[d])
        nxt = src_val[d + 1] + lam * np.abs(src_pos[d + 1] - d)
        take = nxt < own
        src_val[d] = np.where(take, src_val[d + 1], src_val[d])
        src_pos[d] = np.where(take, src_pos[d + 1], src_pos[d])
    env = src_val + lam * np.abs(np.arange(n).reshape((n,) + (1,) * (h.ndim - 1)) - src_pos)
    return np.minimum(env, h.min(axis=0) + tau_s)


def message_update(data_row, incoming, lam: float, tau_s: float) -> np.ndarray:
    """Min-sum message for one edge, normalised so its minimum is 0.

    ``data_row`` is the sender's data cost and ``incoming`` the messages it
    received from every neighbour except the recipient.
    """
    h = np.array(data_row, dtype=np.float64)
    for m in incoming:
        h = h + np.asarray(m, dtype=np.float64)
    msg = _truncated_linear_envelope(h, lam, tau_s)
    return msg - msg.min()


def _send(h: np.ndarray, lam: float, tau_s: float) -> np.ndarray:
    msg = _truncated_linear_envelope(h, lam, tau_s)
    return msg - msg.min(axis=0)


def bp_beliefs(cv: CostVolume, p: BpParams | None = None) -> np.ndarray:
    """Run synchronous min-sum loopy BP and return beliefs as (H, W, D)."""
    p = p or BpParams()
    data = np.ascontiguousarray(np.moveaxis(cv.costs, 2, 0))
    if p.tau_d is not None:
        data = np.minimum(data, p.tau_d)
    # messages arriving at each pixel from its left/right/upper/lower neighbour
    from_l = np.zeros_like(data)
    from_r = np.zeros_like(data)
    from_u = np.zeros_like(data)
    from_d = np.zeros_like(data)
    for _ in range(p.iterations):
        new_l = np.zeros_like(data)
        new_r = np.zeros_like(data)
        new_u = np.zeros_like(data)
        new_d = np.zeros_like(data)
        if data.shape[2] > 1:
            new_l[:, :, 1:] = _send((data + from_l + from_u + from_d)[:, :, :-1], p.lam, p.tau_s)
            new_r[:, :, :-1] = _send((data + from_r + from_u + from_d)[:, :, 1:], p.lam, p.tau_s)
        if data.shape[1] > 1:
            new_u[:, 1:, :] = _send((data + from_l + from_r + from_u)[:, :-1, :], p.lam, p.tau_s)
            new_d[:, :-1, :] = _send((data + from_l + from_r + from_d)[:, 1:, :], p.lam, p.tau_s)
        from_l, from_r, from_u, from_d = new_l, new_r, new_u, new_d
    beliefs = data + from_l + from_r + from_u + from_d
    return np.moveaxis(beliefs, 0, 2)


def bp_disparity(cv: CostVolume, p: BpParams | None = None) -> DisparityMap:
    """Min-sum BP on the 4-connected grid; argmin of beliefs, ties to smallest d."""
    beliefs = bp_beliefs(cv, p)
    return DisparityMap.from_labels(np.argmin(beliefs, axis=2), cv.dmax)


# --------------------------------------------------------------------------
# descriptor methods and dispatch


def gf_disparity(left, right, dmax: int, radius: int = DEFAULT_RADIUS) -> DisparityMap:
    return wta_disparity(gf_cost_volume(left, right, dmax, radius))


def hog_disparity(left, right, dmax: int, p: HogParams | None = None) -> DisparityMap:
    """WTA over HOG descriptor distances; pixels without a full block are INVALID."""
    cv, valid = hog_cost_volume(left, right, dmax, p)
    return DisparityMap.from_labels(np.argmin(cv.costs, axis=2), dmax, valid)


@dataclass(frozen=True)
class MatchParams:
    radius: int = DEFAULT_RADIUS
    dp: DpParams = field(default_factory=DpParams)
    bp: BpParams = field(default_factory=BpParams)
    hog: HogParams = field(default_factory=HogParams)
    dwac: DwacParams = field(default_factory=DwacParams)


def scaled_dmax(ndisp: int, factor) -> int:
    """Disparity bound at the working resolution, ``ceil(ndisp * factor)``."""
    from .imaging import _as_fraction

    return math.ceil(ndisp * _as_fraction(factor))


def per_pixel_costs(cv: CostVolume) -> CostVolume:
    """Rescale a SAD volume to per-pixel units so smoothness weights are comparable.

    MSE and 1-NCC volumes are already per pixel and are returned unchanged.
    """
    if cv.metric != "SAD":
        return cv
    area = (2 * cv.radius + 1) ** 2
    return CostVolume(cv.costs / area, cv.metric, cv.radius)


def estimate(method: str, costfn: str, left, right, dmax: int, params: MatchParams | None = None) -> DisparityMap:
    """Run one (method, cost function) combination on a gray image pair.

    GF and HOG ignore ``costfn``; DWAC always blends SAD and NCC.
    """
    params = params or MatchParams()
    if method not in METHODS:
        raise UnsupportedCombination(f"unknown method {method!r}")
    if costfn not in COSTFNS:
        raise UnsupportedCombination(f"unknown cost function {costfn!r}")
    if method == "GF":
        return gf_disparity(left, right, dmax, params.radius)
    if method == "HOG":
        return hog_disparity(left, right, dmax, params.hog)
    if method == "DWAC":
        return wta_disparity(dwac_cost_volume(left, right, dmax, params.dwac))
    cv = build_cost_volume(left, right, dmax, costfn, params.radius)
    if method == "BM":
        return wta_disparity(cv)
    if method == "BMDP":
        return dp_scanline(per_pixel_costs(cv), params.dp)
    return bp_disparity(per_pixel_costs(cv), params.bp)
