import shutil
import subprocess
import sys

import numpy as np
import pytest

from stereobench.cli import (
    RunConfig,
    apply_settings,
    combinations,
    config_from_args,
    build_parser,
    main,
    write_disparity,
)
from stereobench.errors import ConfigError
from stereobench.ingest import load_pfm, load_pgm16
from stereobench.match import DisparityMap

FAST = ["--bp.iterations", "5", "--window-radius", "2"]


def csv_without_runtime(path):
    lines = path.read_text().splitlines()
    return [",".join(c for i, c in enumerate(line.split(",")) if i != 6) for line in lines]


def run(args):
    return main(["run", *args])


class TestWriteDisparity:
    def test_values(self, tmp_path):
        valid = np.array([[True, True, False]])
        dm = DisparityMap.from_labels(np.array([[3.0, 0.5, 7.0]]), 10, valid)
        pgm, pfm = write_disparity(dm, tmp_path / "d")
        assert load_pgm16(pgm).tolist() == [[768, 128, 0]]
        gt = load_pfm(pfm)
        assert gt.disparities[0, :2].tolist() == [3.0, 0.5]
        assert np.isinf(gt.disparities[0, 2]) and gt.valid.tolist() == [[True, True, False]]

    def test_pfm_round_trip_single_precision(self, tmp_path):
        rng = np.random.default_rng(0)
        v = rng.uniform(0, 64, (9, 11))
        dm = DisparityMap.from_labels(v, 64)
        _, pfm = write_disparity(dm, tmp_path / "r")
        np.testing.assert_array_equal(load_pfm(pfm).disparities, v.astype(np.float32).astype(np.float64))


class TestConfig:
    def test_file_and_flag_override(self, tmp_path):
        cfg_file = tmp_path / "bench.cfg"
        cfg_file.write_text(
            "# benchmark\ndataset_root=/data\nscale=0.5\nmethods=BM,BP\n"
            "bp.iterations=12\nbp.lambda=0.2\nhog.signed=true\ndp.tau_s=0.3\n"
        )
        args = build_parser().parse_args(["run", "--config", str(cfg_file), "--bp.iterations", "7", "--scale", "0.25"])
        cfg = config_from_args(args)
        assert cfg.scale == 0.25 and cfg.methods == ("BM", "BP")
        assert cfg.bp.iterations == 7 and cfg.bp.lam == 0.2
        assert cfg.hog.signed is True and cfg.dp.tau_s == 0.3
        assert str(cfg.dataset_root) == "/data"

    @pytest.mark.parametrize(
        "settings",
        [{"nope": "1"}, {"bp.nope": "1"}, {"scale": "abc"}, {"bp.iterations": "0"}, {"hog.signed": "maybe"}],
    )
    def test_bad_settings(self, settings):
        with pytest.raises(ConfigError):
            apply_settings(RunConfig(), settings)

    def test_validation(self):
        with pytest.raises(ConfigError):
            apply_settings(RunConfig(), {"scale": "1.5", "dataset_root": "x"}).validate()
        with pytest.raises(ConfigError):
            apply_settings(RunConfig(), {"methods": "BM,SGM", "dataset_root": "x"}).validate()

    def test_default_matrix(self):
        cfg = RunConfig(methods=("BM", "BMDP", "BP", "GF", "HOG", "DWAC"), costfns=("SAD", "MSE", "NCC"))
        combos, notes = combinations(cfg)
        assert combos == [
            ("BM", "MSE"), ("BM", "SAD"),
            ("BMDP", "MSE"), ("BMDP", "SAD"),
            ("BP", "MSE"), ("BP", "NCC"), ("BP", "SAD"),
            ("GF", "SAD"), ("HOG", "SAD"), ("DWAC", "SAD"),
        ]  # fmt: skip
        assert any("BM+NCC" in n for n in notes)
        cfg.all_combinations = True
        assert len(combinations(cfg)[0]) == 18


class TestRun:
    def test_cardinality(self, tiny_dataset, tmp_path):
        out = tmp_path / "out"
        rc = run(["--dataset", str(tiny_dataset), "--methods", "BM,BP", "--costfns", "SAD",
                  "--scale", "0.5", "--out", str(out), *FAST])  # fmt: skip
        assert rc == 0
        rows = (out / "results.csv").read_text().splitlines()
        assert len(rows) == 1 + 4
        files = sorted(p.name for p in (out / "disparity").iterdir())
        assert len(files) == 8
        assert (out / "summary.txt").exists()
        dm = load_pfm(out / "disparity" / "scene0-perfect_BP_SAD.pfm")
        assert dm.disparities.shape == (24, 32)
        for line in rows[1:]:
            assert -1 <= float(line.split(",")[3]) <= 1

    def test_gf_runs_once(self, tiny_dataset, tmp_path, caplog):
        out = tmp_path / "gf"
        assert run(["--dataset", str(tiny_dataset), "--methods", "GF", "--costfns", "SAD,MSE",
                    "--scale", "0.5", "--out", str(out)]) == 0  # fmt: skip
        rows = (out / "results.csv").read_text().splitlines()[1:]
        assert [r.split(",")[:3] for r in rows] == [["scene0-perfect", "GF", "SAD"], ["scene1-perfect", "GF", "SAD"]]
        assert any("ignores the cost function" in r.getMessage() for r in caplog.records)

    def test_deterministic_across_runs_and_threads(self, tiny_dataset, tmp_path):
        base = ["--dataset", str(tiny_dataset), "--methods", "BM,BMDP,BP,HOG,DWAC", "--costfns", "SAD,MSE",
                "--scale", "0.5", *FAST]  # fmt: skip
        outs = []
        for name, threads in (("a", "1"), ("b", "1"), ("c", "2")):
            out = tmp_path / name
            assert run([*base, "--out", str(out), "--threads", threads]) == 0
            outs.append(out)
        ref = csv_without_runtime(outs[0] / "results.csv")
        for out in outs[1:]:
            assert csv_without_runtime(out / "results.csv") == ref
            for f in sorted((outs[0] / "disparity").iterdir()):
                assert (out / "disparity" / f.name).read_bytes() == f.read_bytes()

    def test_scene_failure_does_not_abort(self, tiny_dataset, tmp_path):
        data = tmp_path / "data"
        shutil.copytree(tiny_dataset, data)
        (data / "scene0-perfect" / "im1.png").write_bytes(b"not a png")
        out = tmp_path / "out"
        rc = run(["--dataset", str(data), "--methods", "BM", "--scale", "0.5", "--out", str(out)])
        assert rc == 1
        rows = (out / "results.csv").read_text().splitlines()[1:]
        assert [r.split(",")[0] for r in rows] == ["scene1-perfect"]

    def test_missing_dataset(self, tmp_path):
        assert run(["--dataset", str(tmp_path / "nothing"), "--out", str(tmp_path)]) == 2
        assert run(["--dataset", str(tmp_path), "--out", str(tmp_path / "o")]) == 2


def test_score_command(tiny_dataset, capsys):
    gt = tiny_dataset / "scene0-perfect" / "disp0.pfm"
    assert main(["score", "--left-disp", str(gt), "--gt", str(gt)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert "correlation=1.000000" in out and "bad2=0.000000" in out


def test_console_script(tiny_dataset, tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "stereobench.cli", "run", "--dataset", str(tiny_dataset),
         "--methods", "BM", "--scale", "0.5", "--out", str(tmp_path)],  # fmt: skip
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "SAD" in proc.stdout and "BM" in proc.stdout
