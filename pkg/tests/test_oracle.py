from fractions import Fraction

import networkx as nx
import numpy as np
import pytest

from lapdiag.errors import CapExceededError, DisconnectedGraphError, DomainError
from lapdiag.graph import Graph, laplacian_dense
from lapdiag.models import koch_generate
from lapdiag.oracle import (
    error_metrics,
    exact_pseudoinverse,
    exact_pseudoinverse_diag,
    exact_resistance,
    forest_weight_diag,
    forest_weights,
    foster_check,
    kirchhoff_exact,
    node_resistance_distance,
    node_resistance_distances,
    resistance_matrix,
)

from conftest import random_connected_graph


def atlas_graphs(max_nodes=6):
    for h in nx.graph_atlas_g():
        if 1 <= h.number_of_nodes() <= max_nodes and nx.is_connected(h):
            e = np.array(h.edges(), dtype=np.int64).reshape(-1, 2)
            yield Graph(h.number_of_nodes(), e[:, 0], e[:, 1])


def test_dense_examples(triangle, path3):
    np.testing.assert_allclose(exact_pseudoinverse_diag(triangle), [2 / 9] * 3, atol=1e-15)
    np.testing.assert_allclose(exact_pseudoinverse_diag(path3), [5 / 9, 2 / 9, 5 / 9], atol=1e-15)
    lg = koch_generate(1)
    expect = np.where(lg.creation_level == 0, 8 / 27, 20 / 27)
    np.testing.assert_allclose(exact_pseudoinverse_diag(lg.graph), expect, atol=1e-14)


def test_resistance_examples(triangle, path3):
    assert exact_resistance(triangle, 0, 2) == pytest.approx(2 / 3, abs=1e-15)
    assert exact_resistance(path3, 0, 2) == pytest.approx(2, abs=1e-14)
    assert exact_resistance(triangle, 1, 1) == 0.0
    lg = koch_generate(1)
    hubs = np.flatnonzero(lg.creation_level == 0)
    assert exact_resistance(lg.graph, hubs[0], hubs[1]) == pytest.approx(2 / 3, abs=1e-14)
    with pytest.raises(DomainError):
        exact_resistance(triangle, 0, 3)


def test_node_resistance_examples(triangle):
    np.testing.assert_allclose(node_resistance_distances(triangle), [4 / 3] * 3, atol=1e-14)
    lg = koch_generate(1)
    hub = int(np.flatnonzero(lg.creation_level == 0)[0])
    leaf = int(np.flatnonzero(lg.creation_level == 1)[0])
    assert node_resistance_distance(lg.graph, hub) == pytest.approx(8, abs=1e-12)
    assert node_resistance_distance(lg.graph, leaf) == pytest.approx(12, abs=1e-12)


def test_node_resistance_is_row_sum_of_resistances():
    g = random_connected_graph(25, 30, np.random.default_rng(8))
    r = resistance_matrix(exact_pseudoinverse(g))
    np.testing.assert_allclose(node_resistance_distances(g), r.sum(axis=1), rtol=1e-10)
    assert kirchhoff_exact(g) == pytest.approx(0.5 * r.sum(), rel=1e-10)


def test_kirchhoff_examples(triangle, path3):
    assert kirchhoff_exact(triangle) == pytest.approx(2, rel=1e-14)
    assert kirchhoff_exact(path3) == pytest.approx(4, rel=1e-14)
    assert kirchhoff_exact(koch_generate(1).graph) == pytest.approx(48, rel=1e-13)


def test_foster_examples(triangle):
    assert foster_check(triangle) == pytest.approx(2, abs=1e-12)
    assert foster_check(koch_generate(1).graph) == pytest.approx(8, abs=1e-12)
    rng = np.random.default_rng(0)
    tree = random_connected_graph(50, 0, rng)
    assert tree.edge_count == 49
    assert foster_check(tree) == pytest.approx(49, abs=1e-8)


def test_forest_examples(triangle):
    f1, f2, f2ii = forest_weights(triangle)
    assert (f1, f2, f2ii[0]) == (9, 6, 4)
    assert forest_weight_diag(triangle)[0] == pytest.approx(2 / 9, abs=1e-15)
    edge = Graph(2, [0], [1])
    f1, f2, f2ii = forest_weights(edge)
    assert (f1, f2, list(f2ii)) == (2, 1, [1, 1])
    np.testing.assert_allclose(forest_weight_diag(edge), [0.25, 0.25], atol=1e-15)


def test_forest_matches_dense_on_atlas():
    count = 0
    for g in atlas_graphs():
        np.testing.assert_allclose(forest_weight_diag(g), exact_pseudoinverse_diag(g), atol=1e-9, rtol=0)
        count += 1
    # connected graphs on 1..6 unlabeled nodes: 1 + 1 + 2 + 6 + 21 + 112
    assert count == 143


def test_forest_weights_in_rational_arithmetic():
    # recompute the triangle with weights (1, 2, 3) by hand in exact arithmetic
    g = Graph(3, [0, 1, 0], [1, 2, 2], [1.0, 2.0, 3.0])
    f1, f2, f2ii = forest_weights(g)
    # spanning trees: 1*2 + 2*3 + 1*3 = 11, each with 3 roots
    assert f1 == 33
    # two-tree forests: one edge of weight w, trees of sizes 2 and 1 -> 2 rootings
    assert f2 == 2 * (1 + 2 + 3)
    dense = exact_pseudoinverse_diag(g)
    expect = (f2ii - Fraction(f2) / 3) / f1
    np.testing.assert_allclose(dense, np.asarray(expect, dtype=float), atol=1e-15)


def test_forest_cap():
    g = random_connected_graph(10, 20, np.random.default_rng(1))
    with pytest.raises(CapExceededError):
        forest_weight_diag(g)


def test_dense_cap(monkeypatch, triangle):
    with pytest.raises(CapExceededError, match="approx_diag"):
        exact_pseudoinverse_diag(triangle, cap=2)
    monkeypatch.setenv("LAPDIAG_DENSE_CAP", "2")
    with pytest.raises(CapExceededError):
        kirchhoff_exact(triangle)
    monkeypatch.setenv("LAPDIAG_DENSE_CAP", "x")
    with pytest.raises(DomainError):
        kirchhoff_exact(triangle)


def test_disconnected():
    with pytest.raises(DisconnectedGraphError):
        exact_pseudoinverse_diag(Graph(4, [0, 2], [1, 3]))


@pytest.mark.parametrize("seed", range(5))
def test_dense_invariants(seed):
    rng = np.random.default_rng(seed)
    g = random_connected_graph(40, 60, rng, 0.5, 2.0)
    p = exact_pseudoinverse(g)
    assert np.abs(p.sum(axis=1)).max() <= 1e-10
    d = exact_pseudoinverse_diag(g)
    assert d.sum() == pytest.approx(kirchhoff_exact(g) / g.node_count, rel=1e-10)
    assert foster_check(g) == pytest.approx(g.node_count - 1, abs=1e-8)
    np.testing.assert_allclose(d, np.diag(np.linalg.pinv(laplacian_dense(g), hermitian=True)), rtol=1e-9)


def test_resistance_is_a_metric_on_small_graphs():
    for g in atlas_graphs():
        r = resistance_matrix(exact_pseudoinverse(g))
        np.testing.assert_allclose(r, r.T, atol=1e-10)
        assert np.all(np.diag(r) == 0)
        n = g.node_count
        if n > 1:
            assert r[~np.eye(n, dtype=bool)].min() > 0
        # r_ik <= r_ij + r_jk for all triples
        assert np.all(r[:, None, :] <= r[:, :, None] + r[None, :, :] + 1e-10)


def test_error_metrics_examples():
    rep = error_metrics([1.0, 1.0], [1.1, 0.8])
    assert rep.sigma == pytest.approx(0.15) and rep.sigma_max == pytest.approx(0.2)
    assert rep.n == 2
    same = error_metrics([0.5, 2.0], [0.5, 2.0])
    assert same.sigma == same.sigma_max == same.rho == 0.0
    assert error_metrics([1.0], [1.0], 2.0, 1.9).rho == pytest.approx(0.05)
    assert set(rep.as_dict()) == {"sigma", "sigma_max", "rho", "n"}
    assert 0 <= rep.sigma <= rep.sigma_max


def test_error_metrics_domain():
    with pytest.raises(DomainError):
        error_metrics([1.0, 0.0], [1.0, 1.0])
    with pytest.raises(DomainError):
        error_metrics([1.0, 1.0], [1.0])
