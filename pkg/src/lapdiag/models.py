"""Deterministic model networks and their closed-form resistance quantities.

Families:

* Koch network ``K_g``: a triangle; each iteration attaches, at every corner
  of every existing triangle, a new triangle made of that corner and two
  new nodes.  ``N = 2*4^g + 1``, ``M = 3*4^g``.
* Uniform recursive tree ``U_g(f)``: one node; each iteration gives every
  existing node ``f`` new leaf children.  ``N = (f+1)^g``.
* Pseudofractal scale-free web ``F_g``: a triangle; each iteration adds, for
  every existing edge, a node joined to both of its ends.
  ``N = (3^{g+1}+3)/2``, ``M = 3^{g+1}``.

Nodes are numbered in creation order, parents first.  Koch and tree nodes
carry a :class:`NodeLabel`: the creation levels along the parent chain from
a level-0 node, ending with the node's own level.  Closed forms are exact
:class:`fractions.Fraction` values.
"""

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Optional

import numpy as np

from .errors import CapExceededError, DomainError
from .graph import Graph

MAX_GENERATED_NODES = 1 << 24

FAMILIES = ("koch", "urt", "psfw")


@dataclass(frozen=True)
class NodeLabel:
    """Level sequence ``(0, i_1, ..., i_n)`` with strictly increasing entries."""

    levels: tuple
    family: Optional[str] = None

    def __post_init__(self):
        levels = tuple(int(x) for x in self.levels)
        object.__setattr__(self, "levels", levels)
        if not levels or levels[0] != 0:
            raise DomainError(f"label must start with 0, got {levels}")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise DomainError(f"label levels must be strictly increasing, got {levels}")
        if self.family is not None and self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}")

    @property
    def n(self):
        return len(self.levels) - 1

    @property
    def steps(self):
        """``(i_1, ..., i_n)``."""
        return self.levels[1:]

    def check_generation(self, g):
        if self.levels[-1] > g:
            raise DomainError(f"label {self} is not valid in generation {g}")

    def __str__(self):
        return ",".join(map(str, self.levels))

    @classmethod
    def parse(cls, text, family=None):
        return cls(tuple(int(t) for t in text.split(",")), family)


def _label(label, family):
    if not isinstance(label, NodeLabel):
        return NodeLabel(tuple(label), family)
    if label.family is not None and label.family != family:
        raise DomainError(f"{label.family} label used with a {family} formula")
    return label


@dataclass
class LabeledGraph:
    """A generated model network with per-node creation data.

    ``parent[v]`` is the node that ``v`` hangs off (``-1`` for level-0
    nodes and for every pseudofractal node); ``creation_level[v]`` is the
    iteration that created ``v``.
    """

    graph: Graph
    generation: int
    family: str
    creation_level: np.ndarray
    parent: np.ndarray
    f: Optional[int] = None
    _label_cache: dict = field(default_factory=dict, repr=False)

    @cached_property
    def labels(self):
        """Per-node :class:`NodeLabel` (``None`` for the pseudofractal web)."""
        if self.family == "psfw":
            return None
        seqs = []
        parent = self.parent.tolist()
        level = self.creation_level.tolist()
        for v in range(self.graph.node_count):
            p = parent[v]
            seqs.append((0,) if p < 0 else seqs[p] + (level[v],))
        interned = {}
        return [interned.setdefault(s, NodeLabel(s, self.family)) for s in seqs]

    def closed_form_diag(self):
        """Exact ``L^+_xx`` for every node (Koch and recursive trees)."""
        if self.family == "koch":
            fn = lambda lab: koch_diag_closed_form(lab, self.generation)  # noqa: E731
        elif self.family == "urt":
            fn = lambda lab: urt_diag_closed_form(lab, self.generation, self.f)  # noqa: E731
        else:
            raise DomainError("no per-node closed form for the pseudofractal web")
        cache = {}
        out = []
        for lab in self.labels:
            val = cache.get(lab)
            if val is None:
                val = cache[lab] = fn(lab)
            out.append(val)
        return out

    def closed_form_kirchhoff(self):
        if self.family == "koch":
            return koch_kirchhoff(self.generation)
        if self.family == "urt":
            return urt_kirchhoff(self.generation, self.f)
        return psfw_kirchhoff(self.generation)

    def describe(self):
        if self.family == "urt":
            return f"urt:{self.generation}:{self.f}"
        return f"{self.family}:{self.generation}"


# --------------------------------------------------------------------------
# generators
# --------------------------------------------------------------------------


def _check_size(n, what):
    if n > MAX_GENERATED_NODES:
        raise CapExceededError(f"{what} would have {n} nodes, above the cap of {MAX_GENERATED_NODES}")


def koch_node_count(g):
    return 2 * 4**g + 1


def koch_edge_count(g):
    return 3 * 4**g


def koch_generate(g):
    if g < 0:
        raise DomainError("generation must be >= 0")
    _check_size(koch_node_count(g), f"Koch network K_{g}")
    tris = np.array([[0, 1, 2]], dtype=np.int64)
    edges = [np.array([[0, 1], [1, 2], [0, 2]], dtype=np.int64)]
    parent = [np.full(3, -1, dtype=np.int64)]
    level = [np.zeros(3, dtype=np.int64)]
    n = 3
    for it in range(1, g + 1):
        corners = tris.reshape(-1)
        a = n + 2 * np.arange(corners.shape[0], dtype=np.int64)
        b = a + 1
        new_edges = np.stack([np.stack([corners, a], 1), np.stack([corners, b], 1), np.stack([a, b], 1)], 1)
        edges.append(new_edges.reshape(-1, 2))
        parent.append(np.repeat(corners, 2))
        level.append(np.full(2 * corners.shape[0], it, dtype=np.int64))
        n += 2 * corners.shape[0]
        tris = np.concatenate([tris, np.stack([corners, a, b], 1)])
    e = np.concatenate(edges)
    graph = Graph(n, e[:, 0], e[:, 1])
    return LabeledGraph(graph, g, "koch", np.concatenate(level), np.concatenate(parent))


def urt_generate(g, f):
    if g < 0:
        raise DomainError("generation must be >= 0")
    if f < 1:
        raise DomainError("f must be >= 1")
    _check_size((f + 1) ** g, f"recursive tree U_{g}(f={f})")
    parent = [np.full(1, -1, dtype=np.int64)]
    level = [np.zeros(1, dtype=np.int64)]
    n = 1
    for it in range(1, g + 1):
        kids_parent = np.repeat(np.arange(n, dtype=np.int64), f)
        parent.append(kids_parent)
        level.append(np.full(kids_parent.shape[0], it, dtype=np.int64))
        n += kids_parent.shape[0]
    parent = np.concatenate(parent)
    child = np.arange(1, n, dtype=np.int64)
    graph = Graph(n, parent[1:], child)
    return LabeledGraph(graph, g, "urt", np.concatenate(level), parent, f=f)


def psfw_node_count(g):
    return (3 ** (g + 1) + 3) // 2


def psfw_generate(g):
    if g < 0:
        raise DomainError("generation must be >= 0")
    _check_size(psfw_node_count(g), f"pseudofractal web F_{g}")
    tail = np.array([0, 1, 0], dtype=np.int64)
    head = np.array([1, 2, 2], dtype=np.int64)
    level = [np.zeros(3, dtype=np.int64)]
    n = 3
    for it in range(1, g + 1):
        m = tail.shape[0]
        new = n + np.arange(m, dtype=np.int64)
        tail = np.concatenate([tail, np.stack([tail, head], 1).reshape(-1)])
        head = np.concatenate([head, np.repeat(new, 2)])
        level.append(np.full(m, it, dtype=np.int64))
        n += m
    graph = Graph(n, tail, head)
    return LabeledGraph(graph, g, "psfw", np.concatenate(level), np.full(n, -1, dtype=np.int64))


def generate(family, g, f=None):
    """Dispatch on family name: ``koch``, ``urt`` (needs ``f``) or ``psfw``."""
    if family == "koch":
        return koch_generate(g)
    if family == "urt":
        if f is None:
            raise DomainError("urt needs f")
        return urt_generate(g, f)
    if family == "psfw":
        return psfw_generate(g)
    raise DomainError(f"unknown family {family!r}; expected one of {FAMILIES}")


# --------------------------------------------------------------------------
# Koch closed forms
# --------------------------------------------------------------------------


def koch_shortest_path_sum(label, g):
    """Sum of hop distances from a node with this label to all nodes of ``K_g``."""
    label = _label(label, "koch")
    label.check_generation(g)
    p = 4**g
    return (g + 2) * p + 2 * label.n * p - sum(2 * 4 ** (g - i) for i in label.steps)


def koch_node_resistance(label, g):
    """Sum of resistance distances from the node; two thirds of the hop sum."""
    return Fraction(2, 3) * koch_shortest_path_sum(label, g)


def koch_kirchhoff(g):
    if g < 0:
        raise DomainError("generation must be >= 0")
    return Fraction(2 ** (4 * g + 1) * (6 * g + 7) + 4 ** (g + 1), 9)


def koch_diag_closed_form(label, g):
    """Exact ``L^+_xx`` in ``K_g``, i.e. ``(R_x - tr L^+) / N``."""
    label = _label(label, "koch")
    label.check_generation(g)
    p = 4**g
    n_g = 2 * p + 1
    depth_term = 2 * label.n * p - sum(2 * 4 ** (g - i) for i in label.steps)
    return Fraction(2 * depth_term, 3 * n_g) + Fraction(2 ** (2 * g + 1) * (5 * p + 3 * g + 4), 9 * n_g**2)


# --------------------------------------------------------------------------
# uniform recursive tree closed forms
# --------------------------------------------------------------------------


def _inv_powers(label, f):
    return sum(Fraction(1, (f + 1) ** i) for i in label.steps)


def urt_node_resistance(label, g, f):
    label = _label(label, "urt")
    label.check_generation(g)
    base = f + 1
    central = Fraction(g * f * base**g, base)
    return central + base**g * (label.n - 2 * _inv_powers(label, f))


def urt_kirchhoff(g, f):
    """Kirchhoff index of ``U_g(f)``; 0 for the single-node ``U_0``."""
    if g < 0 or f < 1:
        raise DomainError("need g >= 0 and f >= 1")
    if g == 0:
        return Fraction(0)
    base = f + 1
    return Fraction((f * g - 1) * base ** (2 * g - 1) + base ** (g - 1))


def urt_diag_closed_form(label, g, f):
    label = _label(label, "urt")
    label.check_generation(g)
    base = f + 1
    return label.n - 2 * _inv_powers(label, f) + Fraction(1, base) - Fraction(1, base ** (g + 1))


# --------------------------------------------------------------------------
# pseudofractal web
# --------------------------------------------------------------------------


def psfw_kirchhoff(g):
    if g < 0:
        raise DomainError("generation must be >= 0")
    two = 2 ** (g + 1)
    num = (
        50 * 3 ** (3 * g + 3)
        - 35 * 3 ** (2 * g + 2) * two
        + 48 * 3 ** (2 * g + 2)
        + 30 * 3 ** (g + 2) * two
        - 14 * 3 ** (g + 2)
        + 225 * two
    )
    return Fraction(num, 112 * 3 ** (g + 2))


# --------------------------------------------------------------------------
# ordering
# --------------------------------------------------------------------------


class Ordering(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def label_compare(a, b, f=None):
    """Predicted order of ``L^+_aa`` versus ``L^+_bb`` from labels alone.

    Longer labels come first; equal lengths are decided by the first
    differing level, the larger level giving the larger diagonal.  For
    recursive trees the prediction needs ``f >= 2``.
    """
    a = a if isinstance(a, NodeLabel) else NodeLabel(tuple(a))
    b = b if isinstance(b, NodeLabel) else NodeLabel(tuple(b))
    if a.family is not None and b.family is not None and a.family != b.family:
        raise DomainError(f"cannot compare a {a.family} label with a {b.family} label")
    family = a.family or b.family
    if family == "psfw":
        raise DomainError("pseudofractal nodes carry no label ordering")
    if family == "urt" and f is not None and f < 2:
        raise DomainError("recursive-tree ordering requires f >= 2")
    if a.n != b.n:
        return Ordering.GREATER if a.n > b.n else Ordering.LESS
    for x, y in zip(a.levels, b.levels):
        if x != y:
            return Ordering.GREATER if x > y else Ordering.LESS
    return Ordering.EQUAL


# --------------------------------------------------------------------------
# label sidecar files
# --------------------------------------------------------------------------


def format_labels(lg):
    """Sidecar text: ``node_id<TAB>levels`` (creation level for the web)."""
    if lg.family == "psfw":
        rows = (f"{v}\t{lvl}" for v, lvl in enumerate(lg.creation_level.tolist()))
    else:
        rows = (f"{v}\t{lab}" for v, lab in enumerate(lg.labels))
    return "\n".join(rows) + "\n"


def write_labels(lg, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_labels(lg))


def parse_labels(text, family=None):
    """Inverse of :func:`format_labels`; returns ``{node_id: NodeLabel or int}``."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            node, levels = line.split("\t")
            if family == "psfw":
                out[int(node)] = int(levels)
            else:
                out[int(node)] = NodeLabel.parse(levels, family)
        except ValueError as exc:
            raise DomainError(f"label file line {lineno}: {exc}") from None
    return out
