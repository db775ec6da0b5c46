"""Benchmark driver and ``stereo-bench`` command line.

Config files are ``key=value`` lines; nested parameters use dotted keys
(``bp.iterations=30``) and every key can also be given as a flag of the
same name (``--bp.iterations 30``).
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cost import DEFAULT_RADIUS, DwacParams
from .errors import ConfigError, StereoError
from .evaluate import as_disparity_map, emit_csv, evaluate, format_summary, summarize
from .hog import HogParams
from .imaging import resize, resize_nearest, to_grayscale
from .ingest import DatasetLayout, GroundTruth, discover_dataset, load_image, load_pfm, write_pfm, write_pnm
from .match import COSTFNS, METHODS, BpParams, DisparityMap, DpParams, MatchParams, estimate, scaled_dmax

log = logging.getLogger("stereobench")

PGM_SCALE = 256
# default benchmark matrix; the remaining combinations need --all
DEFAULT_MATRIX = {"BM": ("SAD", "MSE"), "BMDP": ("SAD", "MSE"), "BP": COSTFNS}
# methods whose output does not depend on the cost function
COSTFN_FREE = ("GF", "HOG", "DWAC")


@dataclass
class RunConfig:
    dataset_root: Path | None = None
    scale: float = 0.25
    methods: tuple = METHODS
    costfns: tuple = ("SAD",)
    window_radius: int = DEFAULT_RADIUS
    dp: DpParams = field(default_factory=DpParams)
    bp: BpParams = field(default_factory=BpParams)
    hog: HogParams = field(default_factory=HogParams)
    dwac: DwacParams = field(default_factory=DwacParams)
    layout: DatasetLayout = field(default_factory=DatasetLayout)
    output_dir: Path = Path("stereo-bench-out")
    threads: int = 1
    all_combinations: bool = False

    def validate(self):
        if not 0 < self.scale <= 1:
            raise ConfigError(f"scale must be in (0, 1], got {self.scale}")
        if not self.methods or not self.costfns:
            raise ConfigError("methods and costfns must be non-empty")
        bad = [m for m in self.methods if m not in METHODS] + [c for c in self.costfns if c not in COSTFNS]
        if bad:
            raise ConfigError(f"unknown method/cost function: {', '.join(bad)}")
        if self.dataset_root is None:
            raise ConfigError("no dataset root given")
        if self.threads < 0:
            raise ConfigError("threads must be >= 0")

    @property
    def match_params(self) -> MatchParams:
        return MatchParams(self.window_radius, self.dp, self.bp, self.hog, self.dwac)


def combinations(cfg: RunConfig):
    """(method, costfn) pairs to run, plus human-readable notes on skipped ones."""
    combos, notes = [], []
    for m in METHODS:
        if m not in cfg.methods:
            continue
        wanted = [c for c in COSTFNS if c in cfg.costfns]
        if cfg.all_combinations:
            combos += [(m, c) for c in wanted]
        elif m in COSTFN_FREE:
            label = "SAD" if "SAD" in wanted else wanted[0]
            combos.append((m, label))
            if len(wanted) > 1:
                notes.append(f"{m} ignores the cost function; run once, recorded as {label}")
        else:
            for c in wanted:
                if c in DEFAULT_MATRIX[m]:
                    combos.append((m, c))
                else:
                    notes.append(f"skipping {m}+{c}: not in the default matrix (use --all)")
    return combos, notes


# --------------------------------------------------------------------------
# config parsing

_SCALAR_KEYS = {
    "dataset_root": Path,
    "dataset": Path,
    "scale": float,
    "window_radius": int,
    "output_dir": Path,
    "out": Path,
    "threads": int,
}
_NESTED = {"dp": DpParams, "bp": BpParams, "hog": HogParams, "dwac": DwacParams, "layout": DatasetLayout}
# user-facing names that differ from attribute names
_ALIASES = {"lambda": "lam", "dataset": "dataset_root", "out": "output_dir"}


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _parse_list(text: str) -> tuple:
    return tuple(s.strip().upper() for s in text.split(",") if s.strip())


def _convert(cls, attr: str, raw: str):
    ftype = {f.name: f.type for f in dataclasses.fields(cls)}[attr]
    ftype = str(ftype)
    if "bool" in ftype:
        return _parse_bool(raw)
    if "int" in ftype:
        return int(raw)
    if "float" in ftype:
        if raw.strip().lower() in ("", "none", "off"):
            return None
        return float(raw)
    return raw.strip()


def apply_settings(cfg: RunConfig, settings: dict) -> RunConfig:
    """Apply ``{dotted_key: text}`` settings on top of ``cfg``."""
    nested_updates: dict[str, dict] = {}
    for key, raw in settings.items():
        try:
            if "." in key:
                group, name = key.split(".", 1)
                if group not in _NESTED:
                    raise ConfigError(f"unknown config key {key!r}")
                attr = _ALIASES.get(name, name)
                if attr not in {f.name for f in dataclasses.fields(_NESTED[group])}:
                    raise ConfigError(f"unknown config key {key!r}")
                nested_updates.setdefault(group, {})[attr] = _convert(_NESTED[group], attr, raw)
            elif key in ("methods", "costfns"):
                setattr(cfg, key, _parse_list(raw))
            elif key == "all":
                cfg.all_combinations = _parse_bool(raw)
            elif key in _SCALAR_KEYS:
                setattr(cfg, _ALIASES.get(key, key), _SCALAR_KEYS[key](raw.strip()))
            else:
                raise ConfigError(f"unknown config key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad value for {key}: {raw!r}") from None
    for group, updates in nested_updates.items():
        try:
            setattr(cfg, group, dataclasses.replace(getattr(cfg, group), **updates))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    return cfg


def read_config(path) -> dict:
    settings = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{n}: expected key=value")
        settings[key.strip()] = value.strip()
    return settings


# --------------------------------------------------------------------------
# outputs


def write_disparity(dm: DisparityMap, base_path) -> tuple[Path, Path]:
    """Write ``<base>.pgm`` (16-bit, disparity*256, invalid=0) and ``<base>.pfm`` (invalid=inf)."""
    base = Path(base_path)
    pgm, pfm = base.with_name(base.name + ".pgm"), base.with_name(base.name + ".pfm")
    scaled = np.where(dm.valid, np.rint(dm.values * PGM_SCALE), 0)
    write_pnm(pgm, np.clip(scaled, 0, 65535).astype(np.uint16), maxval=65535)
    write_pfm(pfm, np.where(dm.valid, dm.values, np.inf))
    return pgm, pfm


def load_scene(entry, scale):
    """Preprocess one scene: grayscale, resize, and resample ground truth."""
    left = resize(to_grayscale(load_image(entry.left_path)), scale)
    right = resize(to_grayscale(load_image(entry.right_path)), scale)
    gt = load_pfm(entry.gt_path)
    if left.shape != right.shape:
        raise StereoError(f"{entry.scene_id}: left/right sizes differ")
    disp = resize_nearest(gt.disparities, scale) * float(scale)
    valid = resize_nearest(gt.valid, scale)
    if disp.shape != left.shape:
        raise StereoError(f"{entry.scene_id}: ground truth {disp.shape} does not match images {left.shape}")
    return left, right, GroundTruth(np.where(valid, disp, np.inf), valid)


def _run_scene(entry, cfg: RunConfig, combos, disp_dir: Path):
    left, right, gt = load_scene(entry, cfg.scale)
    dmax = scaled_dmax(entry.ndisp, cfg.scale)
    results = []
    for method, costfn in combos:
        t0 = time.perf_counter()
        dm = estimate(method, costfn, left, right, dmax, cfg.match_params)
        runtime = (time.perf_counter() - t0) * 1000.0
        write_disparity(dm, disp_dir / f"{entry.scene_id}_{method}_{costfn}")
        results.append(evaluate(dm, gt, entry.scene_id, method, costfn, runtime))
        log.info("%s %s+%s r=%.4f (%.0f ms)", entry.scene_id, method, costfn, results[-1].correlation, runtime)
    return results


def run_benchmark(cfg: RunConfig) -> int:
    """Run every scene x combination; returns a process exit status."""
    cfg.validate()
    scenes = discover_dataset(cfg.dataset_root, cfg.layout)
    combos, notes = combinations(cfg)
    for note in notes:
        log.warning(note)
    out = Path(cfg.output_dir)
    disp_dir = out / "disparity"
    disp_dir.mkdir(parents=True, exist_ok=True)
    workers = cfg.threads or os.cpu_count() or 1

    def job(entry):
        try:
            return entry, _run_scene(entry, cfg, combos, disp_dir), None
        except (StereoError, OSError, ValueError) as exc:
            return entry, [], exc

    if workers == 1:
        outcomes = [job(e) for e in scenes]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(job, scenes))

    results, failed = [], []
    for entry, res, exc in outcomes:
        if exc is not None:
            log.error("scene %s failed: %s", entry.scene_id, exc)
            failed.append(entry.scene_id)
        results.extend(res)
    emit_csv(results, out / "results.csv")
    if results:
        text = format_summary(summarize(results))
        (out / "summary.txt").write_text(text)
        print(text, end="")
    return 1 if failed else 0


def score_files(disp_path, gt_path) -> dict:
    dm = as_disparity_map(load_pfm(disp_path))
    res = evaluate(dm, load_pfm(gt_path), Path(disp_path).stem, "-", "-")
    return {
        "correlation": res.correlation,
        "bad2": res.bad2,
        "bad5": res.bad5,
        "valid_pixels": res.valid_pixel_count,
    }


# --------------------------------------------------------------------------
# command line


def _dotted_keys():
    keys = []
    for group, cls in _NESTED.items():
        for f in dataclasses.fields(cls):
            name = "lambda" if f.name == "lam" else f.name
            keys.append(f"{group}.{name}")
    return keys


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stereo-bench", description="Stereo matching benchmark")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the benchmark over a dataset")
    run.add_argument("--config", type=Path, help="key=value file; flags override it")
    run.add_argument("--dataset", dest="dataset_root", help="directory holding one folder per scene")
    run.add_argument("--methods", help="comma list from BM,BMDP,BP,GF,HOG,DWAC (default: all)")
    run.add_argument("--costfns", help="comma list from SAD,MSE,NCC (default: SAD)")
    run.add_argument("--scale", help="resize factor in (0, 1] (default: 0.25)")
    run.add_argument("--out", dest="output_dir", help="output directory (default: stereo-bench-out)")
    run.add_argument("--all", action="store_const", const="true", dest="all",
                     help="run every method x cost pair, not just the default matrix")  # fmt: skip
    run.add_argument("--threads", help="scene-level workers, 0 = one per CPU (default: 1)")
    run.add_argument("--window-radius", "--window_radius", dest="window_radius",
                     help="aggregation window radius (default: 3)")  # fmt: skip
    for key in _dotted_keys():
        run.add_argument(f"--{key}", dest=key, metavar="VALUE")

    score = sub.add_parser("score", help="score one disparity PFM against ground truth")
    score.add_argument("--left-disp", required=True, type=Path, help="estimated disparity (.pfm)")
    score.add_argument("--gt", required=True, type=Path, help="ground truth disparity (.pfm)")
    return parser


def config_from_args(args) -> RunConfig:
    cfg = RunConfig()
    if args.config is not None:
        apply_settings(cfg, read_config(args.config))
    flags = {
        k: v
        for k, v in vars(args).items()
        if v is not None and k not in ("config", "command", "verbose")
    }
    return apply_settings(cfg, flags)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        if args.command == "score":
            for k, v in score_files(args.left_disp, args.gt).items():
                print(f"{k}={v:.6f}" if isinstance(v, float) else f"{k}={v}")
            return 0
        return run_benchmark(config_from_args(args))
    except (StereoError, OSError) as exc:
        print(f"stereo-bench: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
