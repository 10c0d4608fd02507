"""Ground truth for small graphs, and error metrics for estimates.

Two independent routes to ``L^+_ii``:

* dense: ``L^+ = (L + J/N)^{-1} - J/N`` through a Cholesky factorization
  (``L + J/N`` is positive definite on a connected graph);
* combinatorial: weights of spanning rooted forests,
  ``L^+_ii = (e(F2^ii) - e(F2)/N) / e(F1)``.
"""

import itertools
import math
import os
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import CapExceededError, DomainError, NumericalError
from .graph import laplacian_dense, require_connected
from .unionfind import DisjointSet

DENSE_CAP_ENV = "LAPDIAG_DENSE_CAP"
DEFAULT_DENSE_CAP = 20000
FOREST_EDGE_CAP = 20


def dense_cap():
    """Node cap for dense work; ``LAPDIAG_DENSE_CAP`` overrides the default."""
    raw = os.environ.get(DENSE_CAP_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_DENSE_CAP
    try:
        return int(raw)
    except ValueError:
        raise DomainError(f"{DENSE_CAP_ENV} must be an integer, got {raw!r}") from None


def _check_cap(g, cap):
    cap = dense_cap() if cap is None else cap
    if g.node_count > cap:
        raise CapExceededError(
            f"N={g.node_count} exceeds the dense cap of {cap} nodes; use approx_diag "
            f"(or raise the cap with --dense-cap / {DENSE_CAP_ENV})"
        )


def exact_pseudoinverse(g, cap=None):
    """Full dense ``L^+``."""
    require_connected(g)
    _check_cap(g, cap)
    n = g.node_count
    shifted = laplacian_dense(g) + 1.0 / n
    try:
        factor = scipy.linalg.cho_factor(shifted, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"L + J/N is not positive definite ({exc}); is the graph connected?") from exc
    inv = scipy.linalg.cho_solve(factor, np.eye(n), check_finite=False)
    inv = 0.5 * (inv + inv.T)
    return inv - 1.0 / n


def exact_pseudoinverse_diag(g, cap=None):
    return np.diag(exact_pseudoinverse(g, cap)).copy()


def resistance_matrix(pinv):
    d = np.diag(pinv)
    r = d[:, None] + d[None, :] - pinv - pinv.T
    np.fill_diagonal(r, 0.0)
    return r


def exact_resistance(g, u, v, cap=None):
    """Effective resistance between ``u`` and ``v`` (0 when ``u == v``)."""
    n = g.node_count
    if not (0 <= u < n and 0 <= v < n):
        raise DomainError("node id out of range")
    if u == v:
        return 0.0
    p = exact_pseudoinverse(g, cap)
    return float(p[u, u] + p[v, v] - p[u, v] - p[v, u])


def node_resistance_distances(g, cap=None):
    """``R_i = N L^+_ii + tr(L^+)`` for every node."""
    d = exact_pseudoinverse_diag(g, cap)
    return g.node_count * d + d.sum()


def node_resistance_distance(g, u, cap=None):
    if not 0 <= u < g.node_count:
        raise DomainError("node id out of range")
    return float(node_resistance_distances(g, cap)[u])


def kirchhoff_exact(g, cap=None):
    """Kirchhoff index ``N tr(L^+)``."""
    return float(g.node_count * exact_pseudoinverse_diag(g, cap).sum())


def foster_check(g, cap=None):
    """``sum over edges of w_ij r_ij``; equals ``N - 1`` on a connected graph."""
    return foster_sum(g, exact_pseudoinverse(g, cap))


def foster_sum(g, pinv):
    d = np.diag(pinv)
    r = d[g.tail] + d[g.head] - 2.0 * pinv[g.tail, g.head]
    return float(np.sum(g.weight * r))


# --------------------------------------------------------------------------
# spanning rooted forests
# --------------------------------------------------------------------------


def forest_weights(g, max_edges=FOREST_EDGE_CAP):
    """Weights of the rooted-forest sets with one and two trees.

    Only edge subsets of size ``N-1`` and ``N-2`` can be spanning forests
    with one or two trees, so only those are enumerated.

    Returns:
        ``(eF1, eF2, eF2ii)`` where ``eF2ii[i]`` is the weight of two-tree
        rooted forests in which ``i`` roots its own tree.
    """
    if g.edge_count > max_edges:
        raise CapExceededError(f"forest enumeration limited to M <= {max_edges}, got M={g.edge_count}")
    n = g.node_count
    edges = g.edges()
    f1 = 0.0
    f2 = 0.0
    f2ii = np.zeros(n)
    for size in (n - 1, n - 2):
        if size < 0:
            continue
        for subset in itertools.combinations(edges, size):
            ds = DisjointSet(n)
            acyclic = True
            for u, v, _ in subset:
                if not ds.union(u, v):
                    acyclic = False
                    break
            if not acyclic:
                continue
            weight = math.prod(w for _, _, w in subset)
            if size == n - 1:
                # one tree, any of the n nodes can be its root
                f1 += weight * n
                continue
            sizes = [ds.set_size(i) for i in range(n)]
            root_a = ds.find(0)
            size_a = sizes[0]
            size_b = n - size_a
            f2 += weight * size_a * size_b
            for i in range(n):
                other = size_b if ds.find(i) == root_a else size_a
                f2ii[i] += weight * other
    return f1, f2, f2ii


def forest_weight_diag(g, max_edges=FOREST_EDGE_CAP):
    """``L^+_ii`` from spanning rooted forest weights (small graphs only)."""
    require_connected(g)
    f1, f2, f2ii = forest_weights(g, max_edges)
    return (f2ii - f2 / g.node_count) / f1


# --------------------------------------------------------------------------
# error metrics
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ErrorReport:
    """Relative errors of an estimated diagonal against the exact one.

    ``sigma`` is the mean and ``sigma_max`` the maximum of
    ``|exact_u - est_u| / exact_u``; ``rho = (K - K_est) / K`` for the
    Kirchhoff index ``K``.
    """

    sigma: float
    sigma_max: float
    rho: float
    n: int

    def as_dict(self):
        return {"sigma": self.sigma, "sigma_max": self.sigma_max, "rho": self.rho, "n": self.n}


def error_metrics(exact, estimate, exact_kirchhoff=None, estimated_kirchhoff=None):
    """Compare an estimate (array or DiagEstimate) with the exact diagonal.

    Kirchhoff indices default to ``N * sum`` of the respective diagonals
    (or the estimate's own ``kirchhoff`` field).
    """
    exact = np.asarray(exact, dtype=np.float64)
    values = getattr(estimate, "values", estimate)
    values = np.asarray(values, dtype=np.float64)
    if exact.shape != values.shape or exact.ndim != 1:
        raise DomainError(f"length mismatch: exact {exact.shape} vs estimate {values.shape}")
    if np.any(exact <= 0):
        raise DomainError("exact diagonal entries must be positive to form relative errors")
    n = exact.shape[0]
    rel = np.abs(exact - values) / exact
    if exact_kirchhoff is None:
        exact_kirchhoff = n * exact.sum()
    if estimated_kirchhoff is None:
        estimated_kirchhoff = getattr(estimate, "kirchhoff", None)
        if estimated_kirchhoff is None:
            estimated_kirchhoff = n * values.sum()
    rho = (exact_kirchhoff - estimated_kirchhoff) / exact_kirchhoff
    return ErrorReport(float(rel.mean()), float(rel.max()), float(rho), n)
