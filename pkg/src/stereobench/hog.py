"""Histogram-of-oriented-gradients descriptors for stereo matching."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cost import CostVolume, _check_pair, sentinel_cost
from .errors import TooSmall
from .imaging import gradients, magnitude_orientation


@dataclass(frozen=True)
class HogParams:
    cell_size: int = 4
    bins: int = 9
    block_cells: int = 2
    signed: bool = False
    epsilon: float = 1e-3

    def __post_init__(self):
        if self.cell_size < 1 or self.bins < 2 or self.block_cells < 1 or not self.epsilon > 0:
            raise ValueError(f"invalid HOG parameters {self}")

    @property
    def block_pixels(self) -> int:
        return self.cell_size * self.block_cells

    @property
    def descriptor_length(self) -> int:
        return self.block_cells**2 * self.bins


def orientation_votes(img: np.ndarray, p: HogParams) -> np.ndarray:
    """Per-pixel magnitude spread into one orientation bin (hard assignment).

    Returns an array of shape (H, W, bins).
    """
    mag, ang = magnitude_orientation(gradients(img), signed=p.signed)
    period = 360.0 if p.signed else 180.0
    idx = np.minimum((ang / (period / p.bins)).astype(np.intp), p.bins - 1)
    votes = np.zeros(mag.shape + (p.bins,))
    np.put_along_axis(votes, idx[..., None], mag[..., None], axis=-1)
    return votes


def _normalize(v: np.ndarray, eps: float) -> np.ndarray:
    norm = np.sqrt(np.sum(v * v, axis=-1, keepdims=True) + eps * eps)
    return v / norm


def _check_size(img, p):
    img = np.asarray(img, dtype=np.float64)
    need = p.block_pixels
    if img.ndim != 2 or img.shape[0] < max(need, 2) or img.shape[1] < max(need, 2):
        raise TooSmall(f"image {img.shape} smaller than one {need}x{need} block")
    return img


def hog_descriptor_field(img, p: HogParams | None = None) -> np.ndarray:
    """Block-normalised HOG descriptors on the regular cell grid.

    Returns shape ``(ny, nx, block_cells**2 * bins)`` where entry ``[by, bx]``
    is the block whose top-left cell is cell ``(by, bx)``; cells in the block
    are concatenated in row-major order.
    """
    p = p or HogParams()
    img = _check_size(img, p)
    c, b = p.cell_size, p.block_cells
    ncy, ncx = img.shape[0] // c, img.shape[1] // c
    votes = orientation_votes(img, p)[: ncy * c, : ncx * c]
    cells = votes.reshape(ncy, c, ncx, c, p.bins).sum(axis=(1, 3))
    ny, nx = ncy - b + 1, ncx - b + 1
    blocks = np.empty((ny, nx, b, b, p.bins))
    for i in range(b):
        for j in range(b):
            blocks[:, :, i, j] = cells[i : i + ny, j : j + nx]
    return _normalize(blocks.reshape(ny, nx, -1), p.epsilon)


def dense_hog_descriptors(img, p: HogParams | None = None):
    """Per-pixel HOG descriptors.

    The descriptor at (y, x) is the normalised block whose top-left cell has
    its top-left corner at (y, x). Sampling the result at multiples of the
    cell size reproduces :func:`hog_descriptor_field`. Returns the descriptors
    (H, W, length) and a validity mask; pixels whose block would leave the
    image carry a zero descriptor and ``valid == False``.
    """
    p = p or HogParams()
    img = _check_size(img, p)
    h, w = img.shape
    c, b = p.cell_size, p.block_cells
    votes = orientation_votes(img, p)
    # cell histograms anchored at every pixel (top-left corner)
    ch, cw = h - c + 1, w - c + 1
    rows = votes[:, 0:cw].copy()
    for j in range(1, c):
        rows += votes[:, j : j + cw]
    cells = rows[0:ch].copy()
    for i in range(1, c):
        cells += rows[i : i + ch]
    vh, vw = h - b * c + 1, w - b * c + 1
    blocks = np.empty((vh, vw, b, b, p.bins))
    for i in range(b):
        for j in range(b):
            blocks[:, :, i, j] = cells[i * c : i * c + vh, j * c : j * c + vw]
    desc = np.zeros((h, w, p.descriptor_length))
    desc[:vh, :vw] = _normalize(blocks.reshape(vh, vw, -1), p.epsilon)
    valid = np.zeros((h, w), dtype=bool)
    valid[:vh, :vw] = True
    return desc, valid


def hog_cost_volume(left, right, dmax: int, p: HogParams | None = None):
    """Squared L2 distance between left and shifted right descriptors.

    Returns the cost volume and the mask of pixels that carry a descriptor
    in the left image.
    """
    p = p or HogParams()
    left, right = _check_pair(left, right)
    if dmax < 0:
        raise ValueError("dmax must be >= 0")
    dl, valid = dense_hog_descriptors(left, p)
    dr, _ = dense_hog_descriptors(right, p)
    h, w = left.shape
    sentinel = sentinel_cost("HOG", 0)
    vol = np.full((h, w, dmax + 1), sentinel)
    for d in range(dmax + 1):
        if d >= w:
            continue
        diff = dl[:, d:] - dr[:, : w - d]
        vol[:, d:, d] = np.sum(diff * diff, axis=-1)
    # right descriptor missing where the left one is missing too (same row, smaller x)
    vol[~valid] = 0.0
    return CostVolume(vol, "HOG", 0), valid
