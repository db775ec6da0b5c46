"""Grayscale conversion, resizing and gradient fields.

Gray images are plain 2-D ``float64`` arrays with values in [0, 1].
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import DegenerateSize, TooSmall, UnsupportedChannels

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class GradientField(NamedTuple):
    gx: np.ndarray
    gy: np.ndarray


def to_grayscale(img) -> np.ndarray:
    """Convert a RawImage (or uint8 array) to doubles in [0, 1] using Rec.601 luma."""
    samples = getattr(img, "samples", img)
    s = np.asarray(samples)
    if s.ndim == 2:
        s = s[:, :, None]
    if s.ndim != 3 or s.shape[2] not in (1, 3):
        raise UnsupportedChannels(f"expected 1 or 3 channels, got shape {s.shape}")
    s = s.astype(np.float64)
    if s.shape[2] == 1:
        gray = s[:, :, 0] / 255.0
    else:
        wr, wg, wb = LUMA_WEIGHTS
        gray = (wr * s[:, :, 0] + wg * s[:, :, 1] + wb * s[:, :, 2]) / 255.0
    # the weights sum to 1 only up to rounding
    return np.clip(gray, 0.0, 1.0)


def _as_fraction(factor) -> Fraction:
    if isinstance(factor, float):
        return Fraction(repr(factor))
    return Fraction(factor)


def output_shape(shape, factor) -> tuple[int, int]:
    f = _as_fraction(factor)
    if not 0 < f <= 1:
        raise ValueError(f"resize factor must be in (0, 1], got {factor}")
    h, w = shape[:2]
    return math.floor(h * f), math.floor(w * f)


def _bilinear_taps(n_out: int, n_in: int, scale: float):
    src = (np.arange(n_out, dtype=np.float64) + 0.5) * scale - 0.5
    src = np.clip(src, 0.0, n_in - 1)
    i0 = np.floor(src).astype(np.intp)
    i1 = np.minimum(i0 + 1, n_in - 1)
    return i0, i1, src - i0


def resize(img: np.ndarray, factor) -> np.ndarray:
    """Bilinear downscale with half-pixel-centred sampling.

    Output size is ``floor(h*factor) x floor(w*factor)``; ``factor == 1``
    returns an exact copy.
    """
    img = np.asarray(img, dtype=np.float64)
    oh, ow = output_shape(img.shape, factor)
    if oh < 1 or ow < 1:
        raise DegenerateSize(f"resizing {img.shape} by {factor} gives {oh}x{ow}")
    if _as_fraction(factor) == 1:
        return img.copy()
    scale = 1.0 / float(_as_fraction(factor))
    y0, y1, wy = _bilinear_taps(oh, img.shape[0], scale)
    x0, x1, wx = _bilinear_taps(ow, img.shape[1], scale)
    top = img[y0][:, x0] * (1 - wx) + img[y0][:, x1] * wx
    bot = img[y1][:, x0] * (1 - wx) + img[y1][:, x1] * wx
    return top * (1 - wy)[:, None] + bot * wy[:, None]


def resize_nearest(values: np.ndarray, factor) -> np.ndarray:
    """Nearest-neighbour resize on the same output grid as :func:`resize`.

    Used for ground truth, where blending would smear invalid pixels.
    """
    values = np.asarray(values)
    oh, ow = output_shape(values.shape, factor)
    if oh < 1 or ow < 1:
        raise DegenerateSize(f"resizing {values.shape} by {factor} gives {oh}x{ow}")
    f = _as_fraction(factor)
    ys = [min(math.floor((Fraction(2 * i + 1, 2)) / f), values.shape[0] - 1) for i in range(oh)]
    xs = [min(math.floor((Fraction(2 * j + 1, 2)) / f), values.shape[1] - 1) for j in range(ow)]
    return values[np.ix_(ys, xs)]


def gradients(img: np.ndarray) -> GradientField:
    """Central differences inside, one-sided differences on the border."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] < 2 or img.shape[1] < 2:
        raise TooSmall(f"gradients need at least 2x2 pixels, got {img.shape}")
    gy, gx = np.gradient(img)
    return GradientField(gx, gy)


def magnitude_orientation(g: GradientField, signed: bool = False):
    """Return gradient magnitude and orientation in degrees.

    Orientation lies in [0, 360) when ``signed`` and in [0, 180) otherwise;
    it is 0 wherever the magnitude is 0.
    """
    gx, gy = np.asarray(g.gx, dtype=np.float64), np.asarray(g.gy, dtype=np.float64)
    mag = np.hypot(gx, gy)
    period = 360.0 if signed else 180.0
    ang = np.mod(np.degrees(np.arctan2(gy, gx)), period)
    # mod of a tiny negative angle rounds up to the period itself
    ang[ang >= period] = 0.0
    ang[mag == 0] = 0.0
    return mag, ang
