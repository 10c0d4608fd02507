"""Random-projection estimate of every diagonal entry of ``L^+``.

``L^+_uu = ||W^{1/2} B L^+ e_u||^2``.  A ``k x M`` random sign matrix ``Q``
(entries ``+-1/sqrt(k)``) preserves those norms, and each row of
``Q W^{1/2} B L^+`` is one Laplacian solve, so the estimate costs ``k``
solves with ``k = ceil(24 ln N / eps^2)``.

Row ``i`` of the sign matrix is drawn from a Philox counter-based generator
keyed by the seed with the counter set to ``i``; a row never depends on
which worker produced it.  Rows are grouped into fixed-size blocks whose
partial sums are merged in block order, so the result is bit-identical for
any thread count.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, SolverError
from .graph import require_connected, weighted_incidence_transpose_apply
from .solver import LaplacianSolver, SolveOptions

log = logging.getLogger(__name__)

JL_CONSTANT = 24.0
DELTA_FLOOR = 1e-14
ROW_BLOCK = 16
_MASK64 = (1 << 64) - 1


def jl_dimension(n, epsilon):
    """Number of projection rows, ``ceil(24 ln n / epsilon^2)``."""
    if n < 2:
        raise DomainError("need at least two nodes")
    if not (0.0 < epsilon < 1.0):
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")
    return math.ceil(JL_CONSTANT * math.log(n) / epsilon**2)


def solver_tolerance(n, epsilon, w_min, w_max):
    """Per-row solve accuracy that keeps the overall error within ``(1 +- eps)^2``.

    ``(eps/3) * sqrt((n-1)(1-eps) w_min / (n^4 (1+eps) w_max))``
    """
    if n < 2:
        raise DomainError("need at least two nodes")
    if not (0.0 < epsilon <= 0.5):
        raise DomainError(f"epsilon must lie in (0, 1/2], got {epsilon}")
    if not (0.0 < w_min <= w_max):
        raise DomainError("need 0 < w_min <= w_max")
    ratio = (n - 1) * (1.0 - epsilon) * w_min / (float(n) ** 4 * (1.0 + epsilon) * w_max)
    return epsilon / 3.0 * math.sqrt(ratio)


def _check_epsilon(epsilon):
    if not (0.0 < epsilon <= 0.5):
        raise DomainError(f"epsilon must lie in (0, 1/2], got {epsilon}")


def row_signs(seed, row, m):
    """``+-1`` entries of sign-matrix row ``row`` (length ``m``)."""
    bitgen = np.random.Philox(key=int(seed) & _MASK64, counter=int(row) << 128)
    words = bitgen.random_raw((m + 63) // 64).astype("<u8")
    bits = np.unpackbits(words.view(np.uint8), bitorder="little")[:m]
    return 1.0 - 2.0 * bits


def sketch_row(g, k, seed, row, backend=None):
    """Row ``row`` of ``Q W^{1/2} B`` as a vector over nodes."""
    signs = row_signs(seed, row, g.edge_count)
    return weighted_incidence_transpose_apply(g, signs / math.sqrt(k), backend=backend)


def sketch_rows(g, k, seed, backend=None):
    """All ``k`` rows of ``Q W^{1/2} B`` as a ``(k, N)`` array."""
    if k < 1:
        raise DomainError("k must be >= 1")
    return np.stack([sketch_row(g, k, seed, i, backend) for i in range(k)])


@dataclass(frozen=True)
class SketchConfig:
    """Parameters of one estimator run, bound to a graph."""

    epsilon: float
    seed: int
    k: int
    delta: float
    solver: SolveOptions
    delta_clamped: bool = False

    @classmethod
    def bind(cls, g, epsilon, seed=0, preconditioner="tree", max_iterations=None):
        _check_epsilon(epsilon)
        n = g.node_count
        k = jl_dimension(n, epsilon)
        delta = solver_tolerance(n, epsilon, g.w_min, g.w_max)
        clamped = delta < DELTA_FLOOR
        if clamped:
            log.warning("solver tolerance %.3e clamped to %.1e", delta, DELTA_FLOOR)
            delta = DELTA_FLOOR
        solver = SolveOptions(delta, max_iterations, preconditioner)
        return cls(float(epsilon), int(seed), k, delta, solver, clamped)


@dataclass
class DiagEstimate:
    """Estimated ``L^+`` diagonal and the Kirchhoff index derived from it."""

    values: np.ndarray
    kirchhoff: float
    config: SketchConfig
    solve_iterations: np.ndarray
    elapsed_s: float = 0.0
    warnings: list = field(default_factory=list)

    @property
    def n(self):
        return int(self.values.shape[0])


def approx_diag(g, epsilon, seed=0, *, threads=1, preconditioner="tree",
                max_iterations=None, backend=None):
    """Estimate all ``L^+_uu`` of a connected graph.

    With probability at least ``1 - 1/N`` every estimate lies within
    ``[(1-eps)^2, (1+eps)^2] * L^+_uu``.

    Args:
        g: connected :class:`~lapdiag.graph.Graph` with ``N >= 2``.
        epsilon: accuracy parameter in ``(0, 1/2]``.
        seed: 64-bit seed of the sign matrix.
        threads: worker threads for the row solves; does not change the result.
        preconditioner: see :mod:`lapdiag.solver`.

    Raises:
        DomainError: bad ``epsilon`` or disconnected graph.
        SolverError: a row solve failed; ``.row`` identifies it.
    """
    _check_epsilon(epsilon)
    require_connected(g)
    if threads < 1:
        raise DomainError("threads must be >= 1")
    start = time.perf_counter()
    config = SketchConfig.bind(g, epsilon, seed, preconditioner, max_iterations)
    solver = LaplacianSolver(g, config.solver, backend=backend)
    k, n = config.k, g.node_count

    def run_block(lo):
        partial = np.zeros(n)
        iters = []
        for i in range(lo, min(lo + ROW_BLOCK, k)):
            q = sketch_row(g, k, config.seed, i, backend)
            try:
                info = solver.solve(q)
            except SolverError as exc:
                raise SolverError(f"row {i}: {exc}", exc.relative_residual, exc.iterations, row=i) from exc
            partial += info.x * info.x
            iters.append(info.iterations)
        return partial, iters

    starts = range(0, k, ROW_BLOCK)
    values = np.zeros(n)
    iterations = []
    if threads == 1:
        results = map(run_block, starts)
        for partial, iters in results:
            values += partial
            iterations.extend(iters)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for partial, iters in pool.map(run_block, starts):
                values += partial
                iterations.extend(iters)

    warnings = []
    if config.delta_clamped:
        warnings.append(f"solver tolerance clamped to {DELTA_FLOOR:g}")
    kirchhoff = float(n * np.sum(values))
    return DiagEstimate(
        values=values,
        kirchhoff=kirchhoff,
        config=config,
        solve_iterations=np.asarray(iterations, dtype=np.int64),
        elapsed_s=time.perf_counter() - start,
        warnings=warnings,
    )
