import logging
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from stereobench.errors import (
    EmptyDataset,
    MalformedHeader,
    MalformedValue,
    MissingKey,
    TruncatedFile,
    UnsupportedFormat,
)
from stereobench.ingest import (
    DatasetLayout,
    discover_dataset,
    load_image,
    load_pfm,
    load_pgm16,
    load_pnm,
    parse_calib,
    write_pfm,
    write_pnm,
)
from stereobench.synthetic import write_middlebury_scene


def write(tmp_path, name, data: bytes):
    p = tmp_path / name
    p.write_bytes(data)
    return p


class TestPnm:
    def test_binary_gray(self, tmp_path):
        img = load_pnm(write(tmp_path, "a.pgm", b"P5 2 1 255 " + bytes([0, 255])))
        assert (img.width, img.height, img.channels) == (2, 1, 1)
        assert img.samples.ravel().tolist() == [0, 255]

    def test_ascii_matches_binary(self, tmp_path):
        a = load_pnm(write(tmp_path, "a.pgm", b"P2 2 1 255 0 255"))
        b = load_pnm(write(tmp_path, "b.pgm", b"P5 2 1 255 " + bytes([0, 255])))
        np.testing.assert_array_equal(a.samples, b.samples)

    def test_color_ascii_and_binary(self, tmp_path):
        px = [10, 20, 30, 40, 50, 60]
        a = load_pnm(write(tmp_path, "a.ppm", b"P3\n# comment\n2 1\n255\n" + " ".join(map(str, px)).encode()))
        b = load_pnm(write(tmp_path, "b.ppm", b"P6\n2 1\n255\n" + bytes(px)))
        assert a.channels == 3
        np.testing.assert_array_equal(a.samples, b.samples)
        assert a.samples[0, 1].tolist() == [40, 50, 60]

    def test_comment_in_header(self, tmp_path):
        img = load_pnm(write(tmp_path, "c.pgm", b"P5\n# made by hand\n1 1\n# max\n255\n\x07"))
        assert img.samples.ravel().tolist() == [7]

    @pytest.mark.parametrize(
        "data, exc",
        [
            (b"P7 2 1 255 ab", UnsupportedFormat),
            (b"P5 2 1 65535 \x00\x00\x00\x00", UnsupportedFormat),
            (b"P5 2 1 255 \x00", TruncatedFile),
            (b"P2 2 1 255 0", TruncatedFile),
            (b"P5 2 x 255 \x00\x00", MalformedHeader),
            (b"P5 2 1", MalformedHeader),
        ],
    )
    def test_rejects(self, tmp_path, data, exc):
        with pytest.raises(exc):
            load_pnm(write(tmp_path, "bad.pnm", data))

    @settings(max_examples=30, deadline=None)
    @given(arrays(np.uint8, st.tuples(st.integers(1, 6), st.integers(1, 6))))
    def test_p5_round_trip(self, tmp_path_factory, samples):
        p = tmp_path_factory.mktemp("pnm") / "x.pgm"
        write_pnm(p, samples)
        np.testing.assert_array_equal(load_pnm(p).samples[:, :, 0], samples)

    def test_16bit_round_trip(self, tmp_path):
        a = np.array([[0, 768, 65535]], dtype=np.uint16)
        write_pnm(tmp_path / "d.pgm", a, maxval=65535)
        np.testing.assert_array_equal(load_pgm16(tmp_path / "d.pgm"), a)
        with pytest.raises(UnsupportedFormat):
            load_pnm(tmp_path / "d.pgm")


class TestPfm:
    def test_little_endian_value(self, tmp_path):
        p = write(tmp_path, "a.pfm", b"Pf\n1 1\n-1.0\n" + struct.pack("<f", 3.5))
        gt = load_pfm(p)
        assert gt.disparities.tolist() == [[3.5]]
        assert gt.valid.tolist() == [[True]]

    def test_big_endian(self, tmp_path):
        p = write(tmp_path, "b.pfm", b"Pf\n1 1\n1.0\n" + struct.pack(">f", 3.5))
        assert load_pfm(p).disparities[0, 0] == 3.5

    def test_infinity_is_invalid(self, tmp_path):
        p = write(tmp_path, "a.pfm", b"Pf\n1 1\n-1.0\n" + struct.pack("<f", float("inf")))
        assert load_pfm(p).valid.tolist() == [[False]]

    def test_rows_bottom_up(self, tmp_path):
        # stored bottom row first: [1, 2] then top row [3, 4]
        p = write(tmp_path, "r.pfm", b"Pf\n2 2\n-1.0\n" + struct.pack("<4f", 1, 2, 3, 4))
        assert load_pfm(p).disparities.tolist() == [[3, 4], [1, 2]]

    @pytest.mark.parametrize(
        "data, exc",
        [
            (b"PF\n1 1\n-1.0\n" + bytes(12), UnsupportedFormat),
            (b"P5\n1 1\n-1.0\n" + bytes(4), UnsupportedFormat),
            (b"Pf\n1 1\n0.0\n" + bytes(4), MalformedHeader),
            (b"Pf\n1 1\nabc\n" + bytes(4), MalformedHeader),
            (b"Pf\n2 2\n-1.0\n" + bytes(8), TruncatedFile),
        ],
    )
    def test_rejects(self, tmp_path, data, exc):
        with pytest.raises(exc):
            load_pfm(write(tmp_path, "bad.pfm", data))

    def test_write_round_trip_and_double_flip(self, tmp_path):
        rng = np.random.default_rng(3)
        v = rng.uniform(0, 60, (5, 7)).astype(np.float32)
        v[1, 2] = np.inf
        write_pfm(tmp_path / "x.pfm", v)
        gt = load_pfm(tmp_path / "x.pfm")
        assert np.array_equal(gt.disparities[gt.valid], v[np.isfinite(v)].astype(np.float64))
        assert not gt.valid[1, 2]
        np.testing.assert_array_equal(np.flipud(np.flipud(gt.disparities)), gt.disparities)
        assert np.all(np.isfinite(gt.disparities[gt.valid])) and np.all(gt.disparities[gt.valid] >= 0)


class TestCalib:
    def test_middlebury_calib(self, tmp_path):
        # layout of a published Middlebury 2014 calib.txt (Adirondack)
        text = (
            "cam0=[4161.221 0 1445.577; 0 4161.221 984.686; 0 0 1]\n"
            "cam1=[4161.221 0 1654.636; 0 4161.221 984.686; 0 0 1]\n"
            "doffs=209.059\nbaseline=176.252\nwidth=2880\nheight=1988\n"
            "ndisp=290\nisint=0\nvmin=33\nvmax=218\ndyavg=0.187\ndymax=0.586\n"
        )
        assert parse_calib(write(tmp_path, "calib.txt", text.encode())) == 290
        assert parse_calib(write(tmp_path, "c2.txt", b"ndisp=260\n")) == 260

    def test_minimum(self, tmp_path):
        assert parse_calib(write(tmp_path, "c.txt", b"vmin=0\nndisp=1\n")) == 1

    def test_missing(self, tmp_path):
        with pytest.raises(MissingKey):
            parse_calib(write(tmp_path, "c.txt", b"vmin=0\nvmax=3\n"))

    @pytest.mark.parametrize("value", [b"12.5", b"abc", b"0"])
    def test_malformed(self, tmp_path, value):
        with pytest.raises(MalformedValue):
            parse_calib(write(tmp_path, "c.txt", b"ndisp=" + value + b"\n"))


def _scene(root, name, shape=(12, 16), ndisp=8):
    left = np.linspace(0, 1, shape[0] * shape[1]).reshape(shape)
    return write_middlebury_scene(root / name, left, left, np.zeros(shape), ndisp)


class TestDiscover:
    def test_complete_and_incomplete(self, tmp_path, caplog):
        _scene(tmp_path, "b-perfect")
        _scene(tmp_path, "a-imperfect")
        broken = _scene(tmp_path, "c")
        (broken / "disp0.pfm").unlink()
        with caplog.at_level(logging.WARNING):
            entries = discover_dataset(tmp_path)
        assert [e.scene_id for e in entries] == ["a-imperfect", "b-perfect"]
        assert [e.calibration_quality for e in entries] == ["imperfect", "perfect"]
        assert entries[0].ndisp == 8
        skips = [r for r in caplog.records if "skipping c" in r.getMessage()]
        assert len(skips) == 1 and "disp0.pfm" in skips[0].getMessage()

    def test_empty(self, tmp_path):
        with pytest.raises(EmptyDataset):
            discover_dataset(tmp_path)

    def test_custom_layout(self, tmp_path):
        d = _scene(tmp_path, "s")
        (d / "im0.png").rename(d / "left.png")
        layout = DatasetLayout(left="left.png")
        assert len(discover_dataset(tmp_path, layout)) == 1
        with pytest.raises(EmptyDataset):
            discover_dataset(tmp_path)

    def test_stable_order(self, tmp_path):
        for name in ["Zeta", "alpha", "Beta", "beta2"]:
            _scene(tmp_path, name)
        ids = [e.scene_id for e in discover_dataset(tmp_path)]
        assert ids == sorted(ids)
        assert ids == [e.scene_id for e in discover_dataset(tmp_path)]


def test_png_loading(tmp_path):
    d = _scene(tmp_path, "s")
    img = load_image(d / "im0.png")
    assert img.channels == 3 and (img.height, img.width) == (12, 16)
