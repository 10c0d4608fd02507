"""Hot numeric kernels, in a numba flavour and a pure-numpy flavour.

Both flavours take plain arrays (no Graph objects) so they can be called
from worker threads with the GIL released.  ``NUMBA`` and ``NUMPY`` map
kernel names to implementations; ``ACTIVE`` is the one picked by
:mod:`lapdiag._backend`.

Preconditioner codes used by the PCG kernels: 0 none, 1 diagonal
(strength), 2 spanning tree.
"""

import numpy as np

from ._backend import BACKEND, HAVE_NUMBA

PRECOND_NONE = 0
PRECOND_DIAGONAL = 1
PRECOND_TREE = 2

# --------------------------------------------------------------------------
# pure numpy
# --------------------------------------------------------------------------


def lap_matvec_np(tail, head, weight, strength, x):
    n = strength.shape[0]
    out = strength * x
    out -= np.bincount(tail, weights=weight * x[head], minlength=n)
    out -= np.bincount(head, weights=weight * x[tail], minlength=n)
    return out


def incidence_apply_np(tail, head, sqrt_weight, x):
    return sqrt_weight * (x[tail] - x[head])


def incidence_transpose_apply_np(tail, head, sqrt_weight, y, n):
    wy = sqrt_weight * y
    return np.bincount(tail, weights=wy, minlength=n) - np.bincount(head, weights=wy, minlength=n)


def tree_levels(order, parent):
    """Group BFS-ordered tree nodes by depth (numpy tree solve helper)."""
    n = order.shape[0]
    depth = np.zeros(n, dtype=np.int64)
    for v in order[1:]:
        depth[v] = depth[parent[v]] + 1
    d_sorted = depth[order]
    cuts = np.flatnonzero(np.diff(d_sorted)) + 1
    return np.split(order, cuts)


def tree_solve_np(levels, parent, parent_weight, r):
    """Solve ``L_T x = r`` on a spanning tree; result has zero mean.

    ``levels[d]`` holds the nodes at depth ``d``; ``levels[0]`` is the root.
    """
    n = r.shape[0]
    flow = r.astype(np.float64, copy=True)
    for nodes in levels[:0:-1]:
        flow += np.bincount(parent[nodes], weights=flow[nodes], minlength=n)
    x = np.zeros(n)
    for nodes in levels[1:]:
        x[nodes] = x[parent[nodes]] + flow[nodes] / parent_weight[nodes]
    x -= x.mean()
    return x


def pcg_np(tail, head, weight, strength, levels, parent, parent_weight,
           precond, y, tol, maxiter):
    """Projected PCG on the complement of the all-ones vector.

    Returns ``(x, iterations, relative_residual, converged)``.
    """
    n = y.shape[0]
    y = y - y.mean()
    ny = np.sqrt(y @ y)
    x = np.zeros(n)
    if ny == 0.0:
        return x, 0, 0.0, True

    def apply_precond(r):
        if precond == PRECOND_TREE:
            return tree_solve_np(levels, parent, parent_weight, r)
        if precond == PRECOND_DIAGONAL:
            z = r / strength
        else:
            z = r.copy()
        z -= z.mean()
        return z

    r = y.copy()
    z = apply_precond(r)
    p = z.copy()
    rz = r @ z
    relres = 1.0
    it = 0
    while it < maxiter:
        it += 1
        ap = lap_matvec_np(tail, head, weight, strength, p)
        alpha = rz / (p @ ap)
        x += alpha * p
        x -= x.mean()
        r -= alpha * ap
        r -= r.mean()
        relres = np.sqrt(r @ r) / ny
        if relres <= tol:
            # recursive residual can drift; confirm with the true one
            r = y - lap_matvec_np(tail, head, weight, strength, x)
            r -= r.mean()
            relres = np.sqrt(r @ r) / ny
            if relres <= tol:
                return x, it, relres, True
            z = apply_precond(r)
            p = z.copy()
            rz = r @ z
            continue
        z = apply_precond(r)
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, it, relres, False


NUMPY = {
    "lap_matvec": lap_matvec_np,
    "incidence_apply": incidence_apply_np,
    "incidence_transpose_apply": incidence_transpose_apply_np,
    "tree_solve": tree_solve_np,
    "pcg": pcg_np,
}

# --------------------------------------------------------------------------
# numba
# --------------------------------------------------------------------------

NUMBA = {}

if HAVE_NUMBA:
    from numba import njit

    @njit(cache=True, nogil=True)
    def lap_matvec_nb(indptr, indices, adj_weight, strength, x):
        n = strength.shape[0]
        out = np.empty(n)
        for i in range(n):
            acc = strength[i] * x[i]
            for k in range(indptr[i], indptr[i + 1]):
                acc -= adj_weight[k] * x[indices[k]]
            out[i] = acc
        return out

    @njit(cache=True, nogil=True)
    def incidence_apply_nb(tail, head, sqrt_weight, x):
        m = tail.shape[0]
        out = np.empty(m)
        for e in range(m):
            out[e] = sqrt_weight[e] * (x[tail[e]] - x[head[e]])
        return out

    @njit(cache=True, nogil=True)
    def incidence_transpose_apply_nb(tail, head, sqrt_weight, y, n):
        out = np.zeros(n)
        for e in range(tail.shape[0]):
            val = sqrt_weight[e] * y[e]
            out[tail[e]] += val
            out[head[e]] -= val
        return out

    @njit(cache=True, nogil=True)
    def _center(x):
        n = x.shape[0]
        s = 0.0
        for i in range(n):
            s += x[i]
        s /= n
        for i in range(n):
            x[i] -= s

    @njit(cache=True, nogil=True)
    def _dot(a, b):
        s = 0.0
        for i in range(a.shape[0]):
            s += a[i] * b[i]
        return s

    @njit(cache=True, nogil=True)
    def tree_solve_into_nb(order, parent, parent_weight, r, flow, out):
        n = order.shape[0]
        for i in range(n):
            flow[i] = r[i]
        for idx in range(n - 1, 0, -1):
            v = order[idx]
            flow[parent[v]] += flow[v]
        out[order[0]] = 0.0
        for idx in range(1, n):
            v = order[idx]
            out[v] = out[parent[v]] + flow[v] / parent_weight[v]
        _center(out)

    @njit(cache=True, nogil=True)
    def tree_solve_nb(order, parent, parent_weight, r):
        n = r.shape[0]
        out = np.empty(n)
        flow = np.empty(n)
        tree_solve_into_nb(order, parent, parent_weight, r, flow, out)
        return out

    @njit(cache=True, nogil=True)
    def _precond_nb(precond, strength, order, parent, parent_weight, r, flow, z):
        n = r.shape[0]
        if precond == 2:
            tree_solve_into_nb(order, parent, parent_weight, r, flow, z)
            return
        if precond == 1:
            for i in range(n):
                z[i] = r[i] / strength[i]
        else:
            for i in range(n):
                z[i] = r[i]
        _center(z)

    @njit(cache=True, nogil=True)
    def _matvec_into(indptr, indices, adj_weight, strength, x, out):
        for i in range(strength.shape[0]):
            acc = strength[i] * x[i]
            for k in range(indptr[i], indptr[i + 1]):
                acc -= adj_weight[k] * x[indices[k]]
            out[i] = acc

    @njit(cache=True, nogil=True)
    def pcg_nb(indptr, indices, adj_weight, strength, order, parent,
               parent_weight, precond, y_in, tol, maxiter):
        n = y_in.shape[0]
        y = y_in.copy()
        _center(y)
        ny = np.sqrt(_dot(y, y))
        x = np.zeros(n)
        if ny == 0.0:
            return x, 0, 0.0, True
        r = y.copy()
        z = np.empty(n)
        flow = np.empty(n)
        ap = np.empty(n)
        _precond_nb(precond, strength, order, parent, parent_weight, r, flow, z)
        p = z.copy()
        rz = _dot(r, z)
        relres = 1.0
        it = 0
        while it < maxiter:
            it += 1
            _matvec_into(indptr, indices, adj_weight, strength, p, ap)
            alpha = rz / _dot(p, ap)
            for i in range(n):
                x[i] += alpha * p[i]
                r[i] -= alpha * ap[i]
            _center(x)
            _center(r)
            relres = np.sqrt(_dot(r, r)) / ny
            if relres <= tol:
                _matvec_into(indptr, indices, adj_weight, strength, x, ap)
                for i in range(n):
                    r[i] = y[i] - ap[i]
                _center(r)
                relres = np.sqrt(_dot(r, r)) / ny
                if relres <= tol:
                    return x, it, relres, True
                _precond_nb(precond, strength, order, parent, parent_weight, r, flow, z)
                for i in range(n):
                    p[i] = z[i]
                rz = _dot(r, z)
                continue
            _precond_nb(precond, strength, order, parent, parent_weight, r, flow, z)
            rz_new = _dot(r, z)
            beta = rz_new / rz
            for i in range(n):
                p[i] = z[i] + beta * p[i]
            rz = rz_new
        return x, it, relres, False

    NUMBA = {
        "lap_matvec": lap_matvec_nb,
        "incidence_apply": incidence_apply_nb,
        "incidence_transpose_apply": incidence_transpose_apply_nb,
        "tree_solve": tree_solve_nb,
        "pcg": pcg_nb,
    }

ACTIVE = NUMBA if BACKEND == "numba" else NUMPY
