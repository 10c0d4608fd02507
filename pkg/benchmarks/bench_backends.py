"""Compare the numba and numpy backends on the hot kernels.

    python benchmarks/bench_backends.py [--koch 6] [--repeat 5] [--eps 0.3]

Times Laplacian matvec, incidence transpose, tree-preconditioner solve,
one PCG solve per preconditioner, and a full approx_diag run, each under
both backends on the same Koch network.  Results are printed as a table
of best-of-``repeat`` milliseconds.
"""

import argparse
import time

import numpy as np

from lapdiag import kernels
from lapdiag.graph import laplacian_matvec, weighted_incidence_transpose_apply
from lapdiag.models import koch_generate
from lapdiag.sketch import approx_diag, sketch_row
from lapdiag.solver import LaplacianSolver, SolveOptions, spanning_tree


def best_ms(fn, repeat):
    fn()  # warm-up, includes numba compilation on first use
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best * 1000.0


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--koch", type=int, default=6, help="Koch generation of the test graph")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--eps", type=float, default=0.3, help="epsilon of the approx_diag run")
    args = ap.parse_args()

    if not kernels.NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    g = koch_generate(args.koch).graph
    n, m = g.node_count, g.edge_count
    rng = np.random.default_rng(0)
    x = rng.standard_normal(n)
    y = rng.standard_normal(m)
    q = sketch_row(g, 1, 0, 0)
    order, parent, pw = spanning_tree(g)
    levels = kernels.tree_levels(order, parent)
    r = x - x.mean()

    rows = []

    def add(name, np_fn, nb_fn):
        a = best_ms(np_fn, args.repeat)
        b = best_ms(nb_fn, args.repeat)
        rows.append((name, a, b))

    add("laplacian matvec",
        lambda: laplacian_matvec(g, x, "numpy"),
        lambda: laplacian_matvec(g, x, "numba"))
    add("incidence transpose",
        lambda: weighted_incidence_transpose_apply(g, y, "numpy"),
        lambda: weighted_incidence_transpose_apply(g, y, "numba"))
    add("tree solve",
        lambda: kernels.NUMPY["tree_solve"](levels, parent, pw, r),
        lambda: kernels.NUMBA["tree_solve"](order, parent, pw, r))
    for pre in ("tree", "diagonal"):
        opts = SolveOptions(1e-8, preconditioner=pre)
        s_np = LaplacianSolver(g, opts, backend="numpy")
        s_nb = LaplacianSolver(g, opts, backend="numba")
        its = s_nb.solve(q).iterations
        add(f"pcg {pre} ({its} it)", lambda: s_np.solve(q), lambda: s_nb.solve(q))
    reps = max(1, args.repeat // 5)
    a = best_ms(lambda: approx_diag(g, args.eps, 0, backend="numpy"), reps)
    b = best_ms(lambda: approx_diag(g, args.eps, 0, backend="numba"), reps)
    rows.append((f"approx_diag eps={args.eps}", a, b))

    print(f"Koch K_{args.koch}: N={n}, M={m}")
    print(f"{'kernel':<28}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, a, b in rows:
        print(f"{name:<28}{a:>12.3f}{b:>12.3f}{a / b:>10.1f}")


if __name__ == "__main__":
    main()
