"""Readers for Middlebury-style scene directories.

PNM (P2/P3/P5/P6) and PFM are decoded in-house; PNG goes through Pillow.
Disparity maps produced by the benchmark are written back as 16-bit PGM
and little-endian PFM.
"""

from __future__ import annotations

import logging
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np

from .errors import (
    EmptyDataset,
    MalformedHeader,
    MalformedValue,
    MissingKey,
    TruncatedFile,
    UnsupportedFormat,
)

log = logging.getLogger(__name__)

PNM_MAGICS = {b"P2": (1, False), b"P3": (3, False), b"P5": (1, True), b"P6": (3, True)}


@dataclass
class RawImage:
    """8-bit image as decoded from disk, shape (height, width, channels)."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples)
        if s.ndim == 2:
            s = s[:, :, None]
        if s.ndim != 3 or s.shape[2] not in (1, 3) or s.shape[0] < 1 or s.shape[1] < 1:
            raise ValueError(f"bad RawImage shape {s.shape}")
        self.samples = s.astype(np.uint8, copy=False)

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def channels(self) -> int:
        return self.samples.shape[2]


@dataclass
class GroundTruth:
    disparities: np.ndarray
    valid: np.ndarray

    @classmethod
    def from_array(cls, values) -> "GroundTruth":
        """Wrap a float array; non-finite and negative entries become invalid."""
        d = np.asarray(values, dtype=np.float64)
        valid = np.isfinite(d)
        valid[valid] = d[valid] >= 0
        return cls(d, valid)

    @property
    def height(self) -> int:
        return self.disparities.shape[0]

    @property
    def width(self) -> int:
        return self.disparities.shape[1]


@dataclass(frozen=True)
class SceneEntry:
    scene_id: str
    left_path: Path
    right_path: Path
    gt_path: Path
    ndisp: int
    calibration_quality: Literal["perfect", "imperfect"] = "perfect"


@dataclass(frozen=True)
class DatasetLayout:
    """File names expected inside each scene directory (Middlebury 2014 defaults)."""

    left: str = "im0.png"
    right: str = "im1.png"
    gt: str = "disp0.pfm"
    calib: str = "calib.txt"


# --------------------------------------------------------------------------
# PNM


def _header_tokens(data: bytes, count: int, pos: int):
    """Read ``count`` whitespace-separated header tokens, skipping # comments.

    Returns the tokens and the offset just past the last token.
    """
    tokens = []
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        if pos >= n:
            raise MalformedHeader("header ended early")
        start = pos
        while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        tokens.append(data[start:pos])
    return tokens, pos


def _parse_pnm(data: bytes, max_maxval: int):
    magic = data[:2]
    if magic not in PNM_MAGICS:
        raise UnsupportedFormat(f"unsupported PNM magic {magic!r}")
    channels, binary = PNM_MAGICS[magic]
    tokens, pos = _header_tokens(data, 3, 2)
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise MalformedHeader(f"non-integer header field in {tokens!r}") from None
    if width <= 0 or height <= 0 or maxval <= 0:
        raise MalformedHeader(f"bad dimensions/maxval {width}x{height} max {maxval}")
    if maxval > max_maxval:
        raise UnsupportedFormat(f"maxval {maxval} > {max_maxval}")
    count = width * height * channels
    if binary:
        if pos >= len(data) or not data[pos : pos + 1].isspace():
            raise MalformedHeader("missing whitespace after maxval")
        pos += 1
        dtype = np.dtype(np.uint8) if maxval < 256 else np.dtype(">u2")
        nbytes = count * dtype.itemsize
        if len(data) - pos < nbytes:
            raise TruncatedFile(f"expected {nbytes} bytes of raster, got {len(data) - pos}")
        values = np.frombuffer(data, dtype=dtype, count=count, offset=pos)
    else:
        body = re.sub(rb"#[^\r\n]*", b"", data[pos:]).split()
        if len(body) < count:
            raise TruncatedFile(f"expected {count} samples, got {len(body)}")
        try:
            values = np.array([int(t) for t in body[:count]], dtype=np.int64)
        except ValueError:
            raise MalformedHeader("non-integer sample in ASCII raster") from None
    if values.max(initial=0) > maxval:
        raise MalformedValue("sample exceeds maxval")
    return values.reshape(height, width, channels), maxval


def load_pnm(path) -> RawImage:
    """Decode a P2/P3/P5/P6 file with maxval <= 255."""
    data = Path(path).read_bytes()
    values, _ = _parse_pnm(data, 255)
    return RawImage(values.astype(np.uint8))


def load_pgm16(path) -> np.ndarray:
    """Decode a grayscale PNM that may carry 16-bit samples (maxval <= 65535)."""
    values, _ = _parse_pnm(Path(path).read_bytes(), 65535)
    if values.shape[2] != 1:
        raise UnsupportedFormat("expected a single-channel PNM")
    return values[:, :, 0].astype(np.uint16)


def write_pnm(path, samples, maxval: int = 255) -> None:
    """Write a binary P5 (2-D input) or P6 (H x W x 3 input) file."""
    a = np.asarray(samples)
    if a.ndim == 3 and a.shape[2] == 1:
        a = a[:, :, 0]
    if a.ndim == 2:
        magic = b"P5"
    elif a.ndim == 3 and a.shape[2] == 3:
        magic = b"P6"
    else:
        raise ValueError(f"cannot write shape {a.shape} as PNM")
    if not 0 < maxval <= 65535:
        raise ValueError("maxval must be in 1..65535")
    dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
    header = b"%s\n%d %d\n%d\n" % (magic, a.shape[1], a.shape[0], maxval)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(a, dtype=dtype).tobytes())


# --------------------------------------------------------------------------
# PFM


def load_pfm(path) -> GroundTruth:
    """Read a single-channel ``Pf`` float map.

    Rows are stored bottom-to-top on disk and returned top-to-bottom. The
    sign of the scale field selects endianness (negative = little-endian).
    """
    data = Path(path).read_bytes()
    magic = data[:2]
    if magic == b"PF":
        raise UnsupportedFormat("colour PFM (PF) is not supported")
    if magic != b"Pf":
        raise UnsupportedFormat(f"not a PFM file (magic {magic!r})")
    tokens, pos = _header_tokens(data, 3, 2)
    try:
        width, height = int(tokens[0]), int(tokens[1])
        scale = float(tokens[2])
    except ValueError:
        raise MalformedHeader(f"bad PFM header {tokens!r}") from None
    if width <= 0 or height <= 0 or scale == 0.0 or not np.isfinite(scale):
        raise MalformedHeader(f"bad PFM header {tokens!r}")
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise MalformedHeader("missing whitespace after scale")
    pos += 1
    count = width * height
    if len(data) - pos < 4 * count:
        raise TruncatedFile(f"expected {4 * count} bytes of floats, got {len(data) - pos}")
    dtype = np.dtype("<f4") if scale < 0 else np.dtype(">f4")
    values = np.frombuffer(data, dtype=dtype, count=count, offset=pos)
    grid = np.flipud(values.reshape(height, width)).astype(np.float64)
    return GroundTruth.from_array(grid)


def write_pfm(path, values) -> None:
    """Write a float map as little-endian ``Pf`` (scale -1.0), bottom row first."""
    a = np.asarray(values, dtype="<f4")
    if a.ndim != 2:
        raise ValueError("PFM writer expects a 2-D array")
    with open(path, "wb") as fh:
        fh.write(b"Pf\n%d %d\n-1.0\n" % (a.shape[1], a.shape[0]))
        fh.write(np.ascontiguousarray(np.flipud(a)).tobytes())


# --------------------------------------------------------------------------
# calibration and images


def parse_calib(path) -> int:
    """Return the ``ndisp`` entry of a Middlebury calib.txt."""
    for line in Path(path).read_text().splitlines():
        key, sep, value = line.partition("=")
        if sep and key.strip() == "ndisp":
            try:
                ndisp = int(value.strip())
            except ValueError:
                raise MalformedValue(f"ndisp is not an integer: {value.strip()!r}") from None
            if ndisp < 1:
                raise MalformedValue(f"ndisp must be >= 1, got {ndisp}")
            return ndisp
    raise MissingKey(f"no ndisp line in {path}")


def load_image(path) -> RawImage:
    """Load PNM files in-house and anything else (PNG) through Pillow."""
    path = Path(path)
    if path.suffix.lower() in (".pnm", ".pgm", ".ppm"):
        return load_pnm(path)
    from PIL import Image

    with Image.open(path) as im:
        if im.mode in ("I;16", "I;16B", "I", "F"):
            raise UnsupportedFormat(f"{path}: only 8-bit images are supported (mode {im.mode})")
        if im.mode != "L":
            im = im.convert("RGB")
        return RawImage(np.asarray(im, dtype=np.uint8))


def discover_dataset(root, layout: DatasetLayout | None = None) -> list[SceneEntry]:
    """Find every complete scene directory directly under ``root``.

    Incomplete directories (or ones whose calib.txt cannot be parsed) are
    skipped with a warning. Entries are sorted by scene id.
    """
    layout = layout or DatasetLayout()
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(root)
    entries = []
    for sub in sorted(p for p in root.iterdir() if p.is_dir()):
        paths = {k: sub / getattr(layout, k) for k in ("left", "right", "gt", "calib")}
        missing = [p.name for p in paths.values() if not p.is_file()]
        if missing:
            log.warning("skipping %s: missing %s", sub.name, ", ".join(missing))
            continue
        try:
            ndisp = parse_calib(paths["calib"])
        except (MissingKey, MalformedValue) as exc:
            log.warning("skipping %s: %s", sub.name, exc)
            continue
        quality = "imperfect" if sub.name.lower().endswith("-imperfect") else "perfect"
        entries.append(
            SceneEntry(sub.name, paths["left"], paths["right"], paths["gt"], ndisp, quality)
        )
    if not entries:
        raise EmptyDataset(f"no complete scene under {os.fspath(root)}")
    entries.sort(key=lambda e: e.scene_id)
    return entries
