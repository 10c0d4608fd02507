"""Weighted undirected graphs and the Laplacian / incidence operators.

A :class:`Graph` is immutable after construction.  Edges are stored as a
flat ``(tail, head, weight)`` triple of arrays with ``tail < head`` (the
orientation used for the incidence matrix) plus a CSR adjacency layout, so
every operator runs in ``O(N + M)``.
"""

import hashlib
import io
import logging
import math

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import kernels
from ._backend import BACKEND
from .errors import DisconnectedGraphError, DomainError, ParseError

log = logging.getLogger(__name__)

DEFAULT_COMMENT_PREFIXES = ("#", "%")


def _frozen(a, dtype):
    a = np.ascontiguousarray(a, dtype=dtype)
    a.setflags(write=False)
    return a


class Graph:
    """Simple undirected graph with strictly positive edge weights.

    Args:
        node_count: number of nodes ``N``; ids are ``0..N-1``.
        tail, head: edge endpoints.  Each edge is re-oriented so that
            ``tail < head``; input order of edges is preserved.
        weight: positive edge weights (default 1.0 for every edge).
        node_names: optional original identifiers, one per node.

    Raises:
        DomainError: on self-loops, repeated node pairs, out-of-range ids or
            non-positive weights.
    """

    __slots__ = (
        "node_count", "tail", "head", "weight", "sqrt_weight", "strengths",
        "w_min", "w_max", "indptr", "indices", "adj_weight", "node_names",
        "duplicates_dropped", "self_loops_dropped",
    )

    def __init__(self, node_count, tail, head, weight=None, node_names=None,
                 duplicates_dropped=0, self_loops_dropped=0):
        n = int(node_count)
        if n < 0:
            raise DomainError("node_count must be non-negative")
        tail = np.asarray(tail, dtype=np.int64).reshape(-1)
        head = np.asarray(head, dtype=np.int64).reshape(-1)
        if tail.shape != head.shape:
            raise DomainError("tail and head must have equal length")
        m = tail.shape[0]
        weight = np.ones(m) if weight is None else np.asarray(weight, dtype=np.float64).reshape(-1)
        if weight.shape[0] != m:
            raise DomainError("weight must have one entry per edge")
        if m:
            if tail.min() < 0 or head.min() < 0 or max(tail.max(), head.max()) >= n:
                raise DomainError("edge endpoint outside 0..N-1")
            if np.any(tail == head):
                raise DomainError("self-loops are not allowed")
            if not np.all(np.isfinite(weight)) or np.any(weight <= 0):
                raise DomainError("edge weights must be finite and strictly positive")
        lo = np.minimum(tail, head)
        hi = np.maximum(tail, head)
        if m:
            key = lo * n + hi
            if np.unique(key).shape[0] != m:
                raise DomainError("repeated node pair; graph must be simple")

        self.node_count = n
        self.tail = _frozen(lo, np.int64)
        self.head = _frozen(hi, np.int64)
        self.weight = _frozen(weight, np.float64)
        self.sqrt_weight = _frozen(np.sqrt(weight), np.float64)
        self.strengths = _frozen(
            np.bincount(lo, weights=weight, minlength=n) + np.bincount(hi, weights=weight, minlength=n),
            np.float64,
        )
        self.w_min = float(weight.min()) if m else None
        self.w_max = float(weight.max()) if m else None

        # CSR adjacency, neighbours of each row in edge order
        rows = np.concatenate([lo, hi])
        cols = np.concatenate([hi, lo])
        vals = np.concatenate([weight, weight])
        perm = np.argsort(rows, kind="stable")
        self.indptr = _frozen(np.concatenate([[0], np.cumsum(np.bincount(rows, minlength=n))]), np.int64)
        self.indices = _frozen(cols[perm], np.int64)
        self.adj_weight = _frozen(vals[perm], np.float64)

        self.node_names = tuple(node_names) if node_names is not None else None
        if self.node_names is not None and len(self.node_names) != n:
            raise DomainError("node_names must have one entry per node")
        self.duplicates_dropped = int(duplicates_dropped)
        self.self_loops_dropped = int(self_loops_dropped)

    def __setattr__(self, name, value):
        if hasattr(self, "node_count") and name in Graph.__slots__ and hasattr(self, name):
            raise AttributeError("Graph is immutable")
        object.__setattr__(self, name, value)

    @property
    def edge_count(self):
        return int(self.tail.shape[0])

    def edges(self):
        """List of ``(u, v, w)`` with ``u < v``, in stored edge order."""
        return list(zip(self.tail.tolist(), self.head.tolist(), self.weight.tolist()))

    def canonical_edges(self):
        """Edge arrays sorted by ``(u, v)``."""
        order = np.lexsort((self.head, self.tail))
        return self.tail[order], self.head[order], self.weight[order]

    def with_weights(self, weight):
        """Same topology, new weights (in stored edge order)."""
        return Graph(self.node_count, self.tail, self.head, weight, self.node_names)

    def scipy_adjacency(self):
        n = self.node_count
        return csr_matrix((self.adj_weight, self.indices, self.indptr), shape=(n, n))

    def fingerprint(self):
        """64-bit hex digest of the canonical edge list."""
        h = hashlib.blake2b(digest_size=8)
        h.update(serialize_edge_list(self, header=True).encode())
        return h.hexdigest()

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        if self.node_count != other.node_count or self.edge_count != other.edge_count:
            return False
        a, b = self.canonical_edges(), other.canonical_edges()
        return all(np.array_equal(x, y) for x, y in zip(a, b))

    __hash__ = None

    def __repr__(self):
        return f"Graph(N={self.node_count}, M={self.edge_count})"


# --------------------------------------------------------------------------
# text format
# --------------------------------------------------------------------------


def parse_edge_list(source, comment_prefixes=DEFAULT_COMMENT_PREFIXES, weighted=None,
                    integer_ids=False):
    """Read a whitespace-separated edge list.

    Each non-comment line is ``u v`` or ``u v w``; further columns are
    ignored.  Node ids are compacted to ``0..N-1`` in order of first
    appearance, unless ``integer_ids`` is set, in which case every id must be
    a non-negative integer and is used as-is (``N = max id + 1``).

    Repeated node pairs keep the first weight; self-loops are dropped.  Both
    are counted on the returned graph.

    Args:
        source: text, or a file-like object.
        comment_prefixes: lines starting with one of these are skipped.
        weighted: ``None`` reads a third column when present, ``True``
            requires it, ``False`` ignores it.
        integer_ids: keep integer node ids instead of compacting them.

    Raises:
        ParseError: malformed line (reports its line number).
        DomainError: a weight ``<= 0``.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    prefixes = tuple(comment_prefixes)
    ids = {}
    names = []
    tails, heads, weights = [], [], []
    seen = set()
    duplicates = 0
    loops = 0

    def node_id(token, lineno):
        if integer_ids:
            try:
                value = int(token)
            except ValueError:
                raise ParseError(f"node id {token!r} is not an integer", lineno) from None
            if value < 0:
                raise ParseError(f"negative node id {value}", lineno)
            return value
        idx = ids.get(token)
        if idx is None:
            idx = ids[token] = len(names)
            names.append(token)
        return idx

    max_id = -1
    for lineno, line in enumerate(source, start=1):
        stripped = line.strip()
        if not stripped or (prefixes and stripped.startswith(prefixes)):
            continue
        tokens = stripped.split()
        if len(tokens) < 2:
            raise ParseError("expected 'u v' or 'u v w'", lineno)
        if weighted is True and len(tokens) < 3:
            raise ParseError("missing edge weight", lineno)
        w = 1.0
        if weighted is not False and len(tokens) >= 3:
            try:
                w = float(tokens[2])
            except ValueError:
                raise ParseError(f"weight {tokens[2]!r} is not a number", lineno) from None
            if not math.isfinite(w) or w <= 0:
                raise DomainError(f"line {lineno}: edge weight must be positive, got {tokens[2]}")
        if tokens[0] == tokens[1]:
            loops += 1
            continue
        u = node_id(tokens[0], lineno)
        v = node_id(tokens[1], lineno)
        if u == v:
            loops += 1
            continue
        max_id = max(max_id, u, v)
        key = (u, v) if u < v else (v, u)
        if key in seen:
            duplicates += 1
            continue
        seen.add(key)
        tails.append(u)
        heads.append(v)
        weights.append(w)

    if loops:
        log.warning("dropped %d self-loop line(s)", loops)
    if duplicates:
        log.warning("dropped %d duplicate edge line(s)", duplicates)
    if integer_ids:
        n, node_names = max_id + 1, None
    else:
        n, node_names = len(names), names
    return Graph(n, tails, heads, weights, node_names=node_names,
                 duplicates_dropped=duplicates, self_loops_dropped=loops)


def read_edge_list(path, **options):
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh, **options)


def serialize_edge_list(g, header=False):
    """Edge-list text with edges sorted by ``(u, v)`` and 17 significant digits."""
    tail, head, weight = g.canonical_edges()
    lines = []
    if header:
        lines.append(f"# N={g.node_count} M={g.edge_count}")
    lines.extend(f"{u} {v} {w:.17g}" for u, v, w in zip(tail.tolist(), head.tolist(), weight.tolist()))
    return "\n".join(lines) + ("\n" if lines else "")


def write_edge_list(g, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_edge_list(g, header=True))


# --------------------------------------------------------------------------
# connectivity
# --------------------------------------------------------------------------


def component_labels(g):
    if g.node_count == 0:
        return 0, np.zeros(0, dtype=np.int64)
    count, labels = connected_components(g.scipy_adjacency(), directed=False)
    return count, labels


def is_connected(g):
    return g.node_count > 0 and component_labels(g)[0] == 1


def require_connected(g):
    if not is_connected(g):
        raise DisconnectedGraphError("graph must be connected and non-empty")


def induced_subgraph(g, nodes):
    """Subgraph induced by ``nodes`` (ascending), ids recompacted in that order."""
    nodes = np.asarray(nodes, dtype=np.int64)
    remap = np.full(g.node_count, -1, dtype=np.int64)
    remap[nodes] = np.arange(nodes.shape[0])
    keep = (remap[g.tail] >= 0) & (remap[g.head] >= 0)
    names = None
    if g.node_names is not None:
        names = [g.node_names[i] for i in nodes.tolist()]
    return Graph(nodes.shape[0], remap[g.tail[keep]], remap[g.head[keep]], g.weight[keep], names)


def largest_connected_component(g):
    """Induced subgraph on the largest component.

    Ties go to the component containing the smallest node id.

    Raises:
        DomainError: empty graph.
    """
    if g.node_count == 0:
        raise DomainError("largest connected component of an empty graph")
    count, labels = component_labels(g)
    if count == 1:
        return g
    sizes = np.bincount(labels, minlength=count)
    first = np.full(count, g.node_count, dtype=np.int64)
    np.minimum.at(first, labels, np.arange(g.node_count))
    best = min(range(count), key=lambda c: (-sizes[c], first[c]))
    return induced_subgraph(g, np.flatnonzero(labels == best))


# --------------------------------------------------------------------------
# operators
# --------------------------------------------------------------------------


def _check_len(x, n, what):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != n:
        raise DomainError(f"expected a vector over {what} of length {n}, got shape {x.shape}")
    return np.ascontiguousarray(x)


def _use_numba(backend):
    backend = backend or BACKEND
    if backend not in ("numba", "numpy"):
        raise DomainError(f"unknown backend {backend!r}")
    if backend == "numba" and not kernels.NUMBA:
        raise DomainError("numba backend requested but numba is unavailable")
    return backend == "numba"


def laplacian_matvec(g, x, backend=None):
    """``(S - A) x`` computed edge-wise."""
    x = _check_len(x, g.node_count, "nodes")
    if _use_numba(backend):
        return kernels.NUMBA["lap_matvec"](g.indptr, g.indices, g.adj_weight, g.strengths, x)
    return kernels.NUMPY["lap_matvec"](g.tail, g.head, g.weight, g.strengths, x)


def weighted_incidence_apply(g, x, backend=None):
    """``W^{1/2} B x``; entry ``e = (i, j), i < j`` is ``sqrt(w_e) (x_i - x_j)``."""
    x = _check_len(x, g.node_count, "nodes")
    impl = kernels.NUMBA if _use_numba(backend) else kernels.NUMPY
    return impl["incidence_apply"](g.tail, g.head, g.sqrt_weight, x)


def weighted_incidence_transpose_apply(g, y, backend=None):
    """``B^T W^{1/2} y`` for a vector over edges."""
    y = _check_len(y, g.edge_count, "edges")
    impl = kernels.NUMBA if _use_numba(backend) else kernels.NUMPY
    return impl["incidence_transpose_apply"](g.tail, g.head, g.sqrt_weight, y, g.node_count)


def laplacian_dense(g):
    """Dense ``N x N`` Laplacian; only for oracle-sized graphs."""
    n = g.node_count
    lap = np.zeros((n, n))
    np.add.at(lap, (g.tail, g.head), -g.weight)
    np.add.at(lap, (g.head, g.tail), -g.weight)
    lap[np.diag_indices(n)] = g.strengths
    return lap
