import contextlib
import time

import numpy as np
import pytest

from stereobench.synthetic import layered_scene, write_middlebury_scene


def make_dataset(root, n_scenes=2, shape=(48, 64)):
    for i in range(n_scenes):
        h, w = shape
        layers = [
            (6, 0, h, 0, w),
            (12, h // 4, 3 * h // 4, w // 4, w // 2 + i * 4),
        ]
        left, right, gt = layered_scene(h, w, seed=10 + i, noise=0.01, layers=layers)
        gt[0, :3] = np.inf  # a few unknown pixels, as in real ground truth
        write_middlebury_scene(root / f"scene{i}-perfect", left, right, gt, ndisp=16)
    return root


@pytest.fixture(scope="session")
def tiny_dataset(tmp_path_factory):
    return make_dataset(tmp_path_factory.mktemp("middlebury"))


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Context manager recording one PASS/FAIL line per acceptance criterion."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    @contextlib.contextmanager
    def record(name):
        t0 = time.perf_counter()
        try:
            yield
        except BaseException as exc:
            lines.append(f"FAIL  {name} ({time.perf_counter() - t0:.1f}s): {str(exc).splitlines()[0] if str(exc) else type(exc).__name__}")
            raise
        lines.append(f"PASS  {name} ({time.perf_counter() - t0:.1f}s)")

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
