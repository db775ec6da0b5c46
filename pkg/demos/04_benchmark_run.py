"""End-to-end benchmark on a generated Middlebury-style dataset.

Writes two synthetic scenes in the im0/im1/disp0.pfm/calib.txt layout to a
temporary directory and runs the same pipeline as ``stereo-bench run``.
Point ``--dataset`` at a real Middlebury 2014 download for actual numbers.
"""

import tempfile
from pathlib import Path

import numpy as np

from stereobench.cli import RunConfig, run_benchmark
from stereobench.synthetic import layered_scene, write_middlebury_scene

with tempfile.TemporaryDirectory() as tmp:
    root = Path(tmp) / "data"
    for i in range(2):
        left, right, gt = layered_scene(96, 128, seed=i, noise=0.02)
        gt[:2] = np.inf  # unknown rows, as real ground truth has
        write_middlebury_scene(root / f"toy{i}-perfect", left, right, gt, ndisp=32)

    cfg = RunConfig(
        dataset_root=root,
        scale=0.5,
        methods=("BM", "BMDP", "BP", "GF", "HOG", "DWAC"),
        costfns=("SAD", "MSE", "NCC"),
        output_dir=Path(tmp) / "out",
    )
    status = run_benchmark(cfg)
    print((cfg.output_dir / "results.csv").read_text())
    print("exit status", status)
