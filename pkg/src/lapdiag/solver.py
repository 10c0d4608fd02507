"""Laplacian solves on the subspace orthogonal to the all-ones vector.

The solver is preconditioned conjugate gradient with the iterate and the
residual re-projected onto ``1^perp`` every iteration.  It targets the
contract

    1^T x = 0   and   ||x - L^+ y||_L <= theta ||L^+ y||_L

through a residual surrogate: iteration stops once
``||L x - y||_2 / ||y||_2 <= theta / 10`` (``y`` centred first).

Three preconditioners are available:

``tree`` (default)
    Exact solve on a maximum-weight spanning tree, ``O(N)`` per
    application.  On graphs whose cycles are edge-disjoint short cycles
    (Koch networks, trees) the preconditioned spectrum has a handful of
    distinct values and PCG finishes in a few iterations.
``diagonal``
    Strength (Jacobi) scaling.
``none``
    Plain CG.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, minimum_spanning_tree

from . import kernels
from .errors import DisconnectedGraphError, DomainError, SolverError
from .graph import _check_len, _use_numba, is_connected

PRECONDITIONERS = {
    "none": kernels.PRECOND_NONE,
    "diagonal": kernels.PRECOND_DIAGONAL,
    "tree": kernels.PRECOND_TREE,
}

RESIDUAL_SAFETY_FACTOR = 10.0


def default_max_iterations(n):
    return 10 * math.ceil(math.sqrt(n)) + 1000


@dataclass(frozen=True)
class SolveOptions:
    """Accuracy and budget of one Laplacian solve.

    ``max_iterations=None`` means ``10 * ceil(sqrt(N)) + 1000``.
    """

    tolerance: float = 1e-6
    max_iterations: Optional[int] = None
    preconditioner: str = "tree"

    def __post_init__(self):
        if not (0.0 < self.tolerance < 1.0):
            raise DomainError(f"tolerance must lie in (0, 1), got {self.tolerance}")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise DomainError("max_iterations must be >= 1")
        if self.preconditioner not in PRECONDITIONERS:
            raise DomainError(
                f"preconditioner must be one of {sorted(PRECONDITIONERS)}, got {self.preconditioner!r}"
            )

    @property
    def residual_tolerance(self):
        return self.tolerance / RESIDUAL_SAFETY_FACTOR

    def iteration_budget(self, n):
        return self.max_iterations if self.max_iterations is not None else default_max_iterations(n)


@dataclass(frozen=True)
class SolveInfo:
    x: np.ndarray
    iterations: int
    relative_residual: float


def spanning_tree(g):
    """Maximum-weight spanning tree of a connected graph, in BFS order from node 0.

    Returns ``(order, parent, parent_weight)``; ``parent[order[0]] == -1``
    and ``parent_weight`` of the root is 1.0 (never read).
    """
    n = g.node_count
    if n == 1:
        return np.zeros(1, dtype=np.int64), np.full(1, -1, dtype=np.int64), np.ones(1)
    # a minimum spanning tree on resistances 1/w is a maximum-weight tree
    resist = csr_matrix((1.0 / g.weight, (g.tail, g.head)), shape=(n, n))
    tree = minimum_spanning_tree(resist)
    tree = (tree + tree.T).tocsr()
    order, pred = breadth_first_order(tree, 0, directed=False, return_predecessors=True)
    if order.shape[0] != n:
        raise DisconnectedGraphError("graph must be connected")
    order = order.astype(np.int64)
    parent = pred.astype(np.int64)
    parent[parent < 0] = -1
    parent_weight = np.ones(n)
    kids = order[1:]
    parent_weight[kids] = 1.0 / np.asarray(tree[kids, parent[kids]]).ravel()
    return order, parent, parent_weight


class LaplacianSolver:
    """Reusable solver bound to one connected graph.

    Setup (spanning tree, depth levels) is paid once; :meth:`solve` is a
    pure function of ``y`` and may be called from several threads.
    """

    def __init__(self, g, options=None, backend=None):
        if not is_connected(g):
            raise DisconnectedGraphError("Laplacian solve requires a connected graph")
        self.graph = g
        self.options = options or SolveOptions()
        self.numba = _use_numba(backend)
        self.precond = PRECONDITIONERS[self.options.preconditioner]
        n = g.node_count
        if self.precond == kernels.PRECOND_TREE:
            self.order, self.parent, self.parent_weight = spanning_tree(g)
        else:
            self.order = np.arange(n, dtype=np.int64)
            self.parent = np.full(n, -1, dtype=np.int64)
            self.parent_weight = np.ones(n)
        self.levels = None
        if not self.numba and self.precond == kernels.PRECOND_TREE:
            self.levels = kernels.tree_levels(self.order, self.parent)
        self.maxiter = self.options.iteration_budget(n)

    def solve(self, y):
        g = self.graph
        y = _check_len(y, g.node_count, "nodes")
        tol = self.options.residual_tolerance
        if self.numba:
            x, it, relres, ok = kernels.NUMBA["pcg"](
                g.indptr, g.indices, g.adj_weight, g.strengths, self.order, self.parent,
                self.parent_weight, self.precond, y, tol, self.maxiter,
            )
        else:
            x, it, relres, ok = kernels.NUMPY["pcg"](
                g.tail, g.head, g.weight, g.strengths, self.levels, self.parent,
                self.parent_weight, self.precond, y, tol, self.maxiter,
            )
        if not ok:
            raise SolverError(
                f"PCG did not converge in {it} iterations (relative residual {relres:.3e}, "
                f"target {tol:.3e})",
                relative_residual=float(relres),
                iterations=int(it),
            )
        # exact zero-sum on return
        x = x - x.mean()
        return SolveInfo(x, int(it), float(relres))


def lapl_solve(g, y, options=None, backend=None):
    """Solve ``L x = y - mean(y)`` with ``1^T x = 0``.

    Raises:
        DisconnectedGraphError: ``g`` is not connected.
        SolverError: no convergence within the iteration budget.
    """
    return LaplacianSolver(g, options, backend).solve(y).x
