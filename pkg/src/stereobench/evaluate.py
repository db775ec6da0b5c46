"""Scoring disparity maps against ground truth and summarising results."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyResults, NoValidPixels
from .ingest import GroundTruth
from .match import COSTFNS, METHODS, DisparityMap

CSV_HEADER = ["scene", "method", "costfn", "correlation", "bad2", "bad5", "runtime_ms", "valid_pixels"]


@dataclass(frozen=True)
class EvalResult:
    scene_id: str
    method: str
    costfn: str
    correlation: float
    bad2: float
    bad5: float
    runtime_ms: float
    valid_pixel_count: int

    def sort_key(self):
        return (self.scene_id, _order(METHODS, self.method), _order(COSTFNS, self.costfn))


def _order(seq, item):
    return (seq.index(item), item) if item in seq else (len(seq), item)


def _joint(dm: DisparityMap, gt: GroundTruth):
    if dm.values.shape != gt.disparities.shape:
        raise DimensionMismatch(f"disparity {dm.values.shape} vs ground truth {gt.disparities.shape}")
    mask = dm.valid & gt.valid
    if not mask.any():
        raise NoValidPixels("no pixel is valid in both maps")
    return dm.values[mask], gt.disparities[mask]


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    # fsum keeps the result independent of summation order, and makes
    # sxy == sxx exactly when x and y are the same data
    n = len(x)
    dx = x - math.fsum(x) / n
    dy = y - math.fsum(y) / n
    sxx = math.fsum(dx * dx)
    syy = math.fsum(dy * dy)
    if sxx == 0 or syy == 0:
        return 0.0
    r = math.fsum(dx * dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def pearson_correlation(dm: DisparityMap, gt: GroundTruth) -> float:
    """Sample Pearson correlation over pixels valid in both maps.

    Returns 0 if either side is constant over those pixels.
    """
    x, y = _joint(dm, gt)
    return _pearson(x, y)


def bad_pixel_rate(dm: DisparityMap, gt: GroundTruth, threshold: float) -> float:
    """Fraction of jointly valid pixels with ``|dm - gt| > threshold``."""
    x, y = _joint(dm, gt)
    return float(np.count_nonzero(np.abs(x - y) > threshold)) / len(x)


def evaluate(dm: DisparityMap, gt: GroundTruth, scene_id: str, method: str, costfn: str, runtime_ms: float = 0.0) -> EvalResult:
    x, y = _joint(dm, gt)
    err = np.abs(x - y)
    return EvalResult(
        scene_id,
        method,
        costfn,
        _pearson(x, y),
        float(np.count_nonzero(err > 2)) / len(x),
        float(np.count_nonzero(err > 5)) / len(x),
        float(runtime_ms),
        int(len(x)),
    )


def as_disparity_map(gt: GroundTruth, dmax: int | None = None) -> DisparityMap:
    """View ground truth as a DisparityMap (e.g. to score it against itself)."""
    if dmax is None:
        dmax = int(np.ceil(gt.disparities[gt.valid].max())) if gt.valid.any() else 0
    return DisparityMap.from_labels(np.where(gt.valid, gt.disparities, 0.0), dmax, gt.valid)


# --------------------------------------------------------------------------
# summaries


def summarize(results) -> dict:
    """Min and max correlation per (costfn, method) over scenes.

    Only combinations that have at least one result appear.
    """
    results = list(results)
    if not results:
        raise EmptyResults("nothing to summarise")
    table: dict[tuple[str, str], tuple[float, float]] = {}
    for r in results:
        key = (r.costfn, r.method)
        lo, hi = table.get(key, (math.inf, -math.inf))
        table[key] = (min(lo, r.correlation), max(hi, r.correlation))
    return dict(sorted(table.items(), key=lambda kv: (_order(COSTFNS, kv[0][0]), _order(METHODS, kv[0][1]))))


def format_summary(table: dict) -> str:
    """Aligned text table: rows per cost function, Min/Max columns per method."""
    costfns = [c for c in COSTFNS if any(k[0] == c for k in table)]
    costfns += sorted({k[0] for k in table} - set(costfns))
    methods = [m for m in METHODS if any(k[1] == m for k in table)]
    methods += sorted({k[1] for k in table} - set(methods))
    head1 = f"{'Method':<8}" + "".join(f"{m:^16}" for m in methods)
    head2 = f"{'':<8}" + "".join(f"{'Min':>8}{'Max':>8}" for _ in methods)
    lines = [head1.rstrip(), head2.rstrip()]
    for c in costfns:
        cells = []
        for m in methods:
            if (c, m) in table:
                lo, hi = table[(c, m)]
                cells.append(f"{lo:8.3f}{hi:8.3f}")
            else:
                cells.append(f"{'-':>8}{'-':>8}")
        lines.append(f"{c:<8}" + "".join(cells))
    return "\n".join(lines) + "\n"


def emit_csv(results, path) -> None:
    """Write results sorted by scene, method and cost function."""
    rows = sorted(results, key=EvalResult.sort_key)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow([
                r.scene_id,
                r.method,
                r.costfn,
                f"{r.correlation:.6f}",
                f"{r.bad2:.6f}",
                f"{r.bad5:.6f}",
                f"{r.runtime_ms:.3f}",
                r.valid_pixel_count,
            ])


def read_csv(path) -> list[EvalResult]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        return [
            EvalResult(
                row["scene"],
                row["method"],
                row["costfn"],
                float(row["correlation"]),
                float(row["bad2"]),
                float(row["bad5"]),
                float(row["runtime_ms"]),
                int(row["valid_pixels"]),
            )
            for row in reader
        ]
