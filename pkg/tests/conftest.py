import numpy as np
import pytest

from lapdiag import kernels
from lapdiag.graph import Graph

BACKENDS = ["numpy"] + (["numba"] if kernels.NUMBA else [])


def random_connected_graph(n, extra, rng, w_low=0.5, w_high=2.0):
    """Random spanning tree plus ``extra`` distinct chords, uniform weights."""
    pairs = {(int(rng.integers(0, v)), v) for v in range(1, n)}
    target = min(n - 1 + extra, n * (n - 1) // 2)
    while len(pairs) < target:
        a, b = sorted(int(x) for x in rng.choice(n, 2, replace=False))
        pairs.add((a, b))
    e = np.array(sorted(pairs))
    return Graph(n, e[:, 0], e[:, 1], rng.uniform(w_low, w_high, len(e)))


@pytest.fixture
def triangle():
    return Graph(3, [0, 1, 0], [1, 2, 2])


@pytest.fixture
def path3():
    return Graph(3, [0, 1], [1, 2])


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


# -- acceptance report ---------------------------------------------------------

_CRITERIA = []


@pytest.fixture
def criterion():
    """Record one acceptance line; the test still asserts on ``ok``."""

    def record(number, name, ok, detail):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {name}: {detail}"
        _CRITERIA.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_CRITERIA):
        terminalreporter.write_line(line)
