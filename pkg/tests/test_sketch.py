import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lapdiag.errors import DisconnectedGraphError, DomainError, SolverError
from lapdiag.graph import Graph
from lapdiag.models import koch_generate, urt_generate
from lapdiag.oracle import error_metrics, exact_pseudoinverse_diag
from lapdiag.sketch import (
    DELTA_FLOOR,
    SketchConfig,
    approx_diag,
    jl_dimension,
    row_signs,
    sketch_rows,
    solver_tolerance,
)

from conftest import random_connected_graph


@pytest.mark.parametrize("n,eps,k", [(9, 0.5, 211), (198, 0.3, 1411), (2, 0.5, 67)])
def test_jl_dimension_examples(n, eps, k):
    assert jl_dimension(n, eps) == k


@pytest.mark.parametrize("eps", [0.0, 1.0, -0.1, 1.5])
def test_jl_dimension_domain(eps):
    with pytest.raises(DomainError):
        jl_dimension(10, eps)


def test_solver_tolerance_examples():
    assert solver_tolerance(9, 0.3, 1, 1) == pytest.approx(2.5623e-3, abs=1e-7)
    # (0.3/3) * sqrt(2 * 0.7 / (81 * 1.3)) evaluated independently
    assert solver_tolerance(3, 0.3, 1, 1) == pytest.approx(0.1 * math.sqrt(1.4 / 105.3), rel=1e-14)
    assert solver_tolerance(3, 0.3, 1, 1) == pytest.approx(1.15305e-2, abs=1e-7)


@settings(max_examples=50)
@given(st.integers(2, 10**6), st.floats(1e-3, 0.5), st.floats(1e-6, 1e6))
def test_solver_tolerance_common_weight_cancels(n, eps, w):
    assert solver_tolerance(n, eps, w, w) == pytest.approx(solver_tolerance(n, eps, 1, 1), rel=1e-12)


def test_solver_tolerance_domain():
    for args in [(1, 0.3, 1, 1), (5, 0.6, 1, 1), (5, 0.0, 1, 1), (5, 0.3, 2, 1), (5, 0.3, 0, 1)]:
        with pytest.raises(DomainError):
            solver_tolerance(*args)


def test_row_signs_are_pure_functions_of_seed_and_row():
    a = row_signs(7, 3, 1000)
    assert set(np.unique(a)) <= {-1.0, 1.0}
    np.testing.assert_array_equal(a, row_signs(7, 3, 1000))
    # prefix stable in the edge count, different across rows and seeds
    np.testing.assert_array_equal(row_signs(7, 3, 100), a[:100])
    assert not np.array_equal(a, row_signs(7, 4, 1000))
    assert not np.array_equal(a, row_signs(8, 3, 1000))
    assert abs(a.mean()) < 0.1


def test_sketch_rows_sum_to_zero(triangle):
    rows = sketch_rows(triangle, 50, seed=1)
    np.testing.assert_allclose(rows.sum(axis=1), 0.0, atol=1e-15)


def test_single_edge_rows():
    g = Graph(2, [0], [1])
    outcomes = {tuple(sketch_rows(g, 1, s)[0]) for s in range(20)}
    assert outcomes == {(1.0, -1.0), (-1.0, 1.0)}


def test_sketch_rows_order_independent(triangle):
    rows = sketch_rows(triangle, 10, seed=5)
    from lapdiag.sketch import sketch_row

    for i in reversed(range(10)):
        np.testing.assert_array_equal(sketch_row(triangle, 10, 5, i), rows[i])


def test_norm_preserved_in_expectation(triangle):
    # column 0 of Q W^{1/2} B is Q v with v = W^{1/2} B e_0 and ||v||^2 = deg(0) = 2
    k = jl_dimension(3, 0.5)
    norms = [np.sum(sketch_rows(triangle, k, seed)[:, 0] ** 2) for seed in range(1000)]
    assert np.mean(norms) == pytest.approx(2.0, rel=0.05)


def test_triangle_envelope(triangle):
    for seed in range(10):
        est = approx_diag(triangle, 0.3, seed)
        assert np.all(est.values >= 0.49 * 2 / 9)
        assert np.all(est.values <= 1.69 * 2 / 9)


def test_koch1_envelope():
    lg = koch_generate(1)
    hubs = lg.creation_level == 0
    good = 0
    for seed in range(10):
        v = approx_diag(lg.graph, 0.2, seed).values
        ok_h = np.all((v[hubs] >= 0.64 * 8 / 27) & (v[hubs] <= 1.44 * 8 / 27))
        ok_l = np.all((v[~hubs] >= 0.64 * 20 / 27) & (v[~hubs] <= 1.44 * 20 / 27))
        good += bool(ok_h and ok_l)
    assert good >= 9


def test_kirchhoff_is_n_times_sum():
    g = urt_generate(3, 2).graph
    est = approx_diag(g, 0.4, 3)
    assert est.kirchhoff == float(g.node_count * np.sum(est.values))
    assert np.all(est.values >= 0)
    assert est.n == g.node_count
    assert len(est.solve_iterations) == est.config.k


def test_determinism_across_threads_and_backends():
    rng = np.random.default_rng(2)
    g = random_connected_graph(80, 100, rng)
    a = approx_diag(g, 0.4, 11, threads=1)
    b = approx_diag(g, 0.4, 11, threads=4)
    c = approx_diag(g, 0.4, 11, threads=3)
    assert a.values.tobytes() == b.values.tobytes() == c.values.tobytes()
    assert a.kirchhoff == b.kirchhoff
    d = approx_diag(g, 0.4, 12)
    assert not np.array_equal(a.values, d.values)
    e = approx_diag(g, 0.4, 11, backend="numpy")
    np.testing.assert_allclose(e.values, a.values, rtol=1e-6)


@pytest.mark.parametrize("c", [4.0, 0.37, 1e3])
def test_weight_scaling(c):
    rng = np.random.default_rng(9)
    g = random_connected_graph(40, 40, rng)
    scaled = g.with_weights(g.weight * c)
    a = approx_diag(g, 0.4, 5)
    b = approx_diag(scaled, 0.4, 5)
    assert a.config.delta == pytest.approx(b.config.delta, rel=1e-12)
    # each row is solved to relative accuracy delta, which bounds the mismatch
    np.testing.assert_allclose(b.values * c, a.values, rtol=10 * a.config.delta + 1e-12)


def test_concentration_and_mean_error():
    graphs = [koch_generate(2).graph, urt_generate(4, 3).graph,
              random_connected_graph(150, 200, np.random.default_rng(4))]
    eps = 0.5
    for g in graphs:
        exact = exact_pseudoinverse_diag(g)
        n = g.node_count
        assert n <= 500
        outside = []
        for seed in range(20):
            est = approx_diag(g, eps, seed)
            bad = (est.values < (1 - eps) ** 2 * exact) | (est.values > (1 + eps) ** 2 * exact)
            outside.append(bad.mean())
            assert error_metrics(exact, est).sigma <= eps
        assert np.mean(outside) <= 1.0 / n + 0.05


def test_errors():
    with pytest.raises(DisconnectedGraphError):
        approx_diag(Graph(4, [0, 2], [1, 3]), 0.3)
    tri = Graph(3, [0, 1, 0], [1, 2, 2])
    for eps in (0.0, 0.51, 1.0):
        with pytest.raises(DomainError):
            approx_diag(tri, eps)
    with pytest.raises(DomainError):
        approx_diag(tri, 0.3, threads=0)
    g = random_connected_graph(100, 300, np.random.default_rng(0))
    with pytest.raises(SolverError) as info:
        approx_diag(g, 0.5, preconditioner="none", max_iterations=1)
    assert info.value.row == 0
    assert "row 0" in str(info.value)


def test_delta_floor_clamps_with_warning(caplog):
    g = Graph(3, [0, 1], [1, 2], [1e-30, 1.0])
    cfg = SketchConfig.bind(g, 0.3)
    assert cfg.delta_clamped and cfg.delta == DELTA_FLOOR
    assert "clamped" in caplog.text
    assert not SketchConfig.bind(Graph(2, [0], [1]), 0.3).delta_clamped
