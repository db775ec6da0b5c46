"""Synthetic stereo pairs with exact ground truth, for tests and demos."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy import ndimage

from .ingest import write_pfm


def textured_pattern(height: int, width: int, seed: int = 0, sigma: float = 1.5) -> np.ndarray:
    """Smoothed random texture rescaled to [0.05, 0.95]."""
    rng = np.random.default_rng(seed)
    t = ndimage.gaussian_filter(rng.random((height, width)), sigma, mode="wrap")
    t = (t - t.min()) / (t.max() - t.min())
    return 0.05 + 0.9 * t


def shifted_pair(height: int, width: int, shift: int, seed: int = 0):
    """Left/right pair with constant disparity ``shift``: ``L[y, x] == R[y, x - shift]``."""
    t = textured_pattern(height, width + shift, seed)
    return t[:, :width].copy(), t[:, shift : shift + width].copy()


def layered_scene(height: int = 96, width: int = 128, seed: int = 0, noise: float = 0.0, layers=None):
    """Fronto-parallel layers seen by a rectified pair.

    ``layers`` is a list of ``(disparity, y0, y1, x0, x1)`` rectangles in
    left-image coordinates, back to front; the first one should cover the
    whole frame. Returns ``(left, right, gt)`` with integer ground truth.
    """
    if layers is None:
        layers = [
            (4, 0, height, 0, width),
            (10, height // 5, 3 * height // 4, width // 6, width // 2),
            (16, height // 3, height - 8, 3 * width // 5, width - 12),
        ]
    rng = np.random.default_rng(seed)
    dmax = max(l[0] for l in layers)
    left = np.zeros((height, width))
    right = np.zeros((height, width))
    gt = np.zeros((height, width))
    ys, xs = np.mgrid[0:height, 0:width]
    for k, (d, y0, y1, x0, x1) in enumerate(layers):
        tex = textured_pattern(height, width + dmax, seed=int(rng.integers(1 << 31)), sigma=1.2 + 0.3 * k)
        inl = (ys >= y0) & (ys < y1) & (xs >= x0) & (xs < x1)
        left[inl] = tex[ys[inl], xs[inl]]
        gt[inl] = d
        xr = xs + d  # right pixel x' shows world point at left x' + d
        inr = (ys >= y0) & (ys < y1) & (xr >= x0) & (xr < x1)
        right[inr] = tex[ys[inr], xr[inr]]
        outside = (ys >= y0) & (ys < y1) & (xr >= width)
        if k == 0:
            right[outside] = tex[ys[outside], xr[outside]]
    if noise > 0:
        left = left + rng.normal(0, noise, left.shape)
        right = right + rng.normal(0, noise, right.shape)
    return np.clip(left, 0, 1), np.clip(right, 0, 1), gt


def to_uint8(img: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)


def write_middlebury_scene(directory, left, right, gt, ndisp: int, rgb: bool = True) -> Path:
    """Write a scene directory in the Middlebury 2014 layout.

    ``left``/``right`` are gray images in [0, 1]; ``gt`` may contain
    ``inf`` for unknown pixels.
    """
    from PIL import Image

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, img in (("im0.png", left), ("im1.png", right)):
        a = to_uint8(img)
        if rgb:
            a = np.repeat(a[:, :, None], 3, axis=2)
        Image.fromarray(a).save(directory / name)
    write_pfm(directory / "disp0.pfm", gt)
    h, w = np.asarray(left).shape
    (directory / "calib.txt").write_text(
        f"cam0=[1000 0 {w / 2} ; 0 1000 {h / 2} ; 0 0 1]\n"
        f"cam1=[1000 0 {w / 2} ; 0 1000 {h / 2} ; 0 0 1]\n"
        "doffs=0\nbaseline=100\n"
        f"width={w}\nheight={h}\nndisp={ndisp}\nisint=0\nvmin=0\nvmax={ndisp - 1}\n"
        "dyavg=0\ndymax=0\n"
    )
    return directory
