"""Finite graphs, probability vectors, and the one-step locality predicate.

Conventions used throughout the package:

* nodes are ``0 .. n-1``; an edge ``(v, v')`` means probability mass may
  flow from ``v`` to ``v'``;
* every node carries a self-loop, inserted automatically at construction;
* undirected input graphs are stored as their symmetric closure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

#: tolerance for probability sums
SUM_TOL = 1e-9
#: tolerance for exact-equality assertions
EQ_TOL = 1e-12
#: entries more negative than this are rejected, above it clamped to zero
DUST_TOL = 1e-12

#: largest node count for exhaustive 2^n subset scans
MAX_SCAN_NODES = 20


class Graph:
    """Directed graph on ``n`` nodes with mandatory self-loops.

    Parameters
    ----------
    n:
        Node count.
    edges:
        Iterable of ordered pairs ``(v, v')``. For undirected graphs
        (default) the reversed pair is added automatically.
    directed:
        Keep the edge set as given (plus self-loops) instead of taking
        the symmetric closure.
    """

    __slots__ = ("n", "directed", "edges", "edge_matrix", "in_masks", "out_masks")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = (), directed: bool = False):
        if n < 1:
            raise ValueError(f"graph needs at least one node, got n={n}")
        pairs = set()
        for v, w in edges:
            if not (0 <= v < n and 0 <= w < n):
                raise ValueError(f"edge ({v}, {w}) out of range for n={n}")
            pairs.add((int(v), int(w)))
            if not directed:
                pairs.add((int(w), int(v)))
        for v in range(n):
            pairs.add((v, v))
        self.n = int(n)
        self.directed = bool(directed)
        self.edges = frozenset(pairs)
        em = np.zeros((n, n), dtype=bool)
        in_masks = [0] * n
        out_masks = [0] * n
        for v, w in pairs:
            em[v, w] = True
            in_masks[w] |= 1 << v
            out_masks[v] |= 1 << w
        em.flags.writeable = False
        self.edge_matrix = em  # edge_matrix[v, w] == ((v, w) in edges)
        self.in_masks = tuple(in_masks)
        self.out_masks = tuple(out_masks)

    def has_edge(self, v: int, w: int) -> bool:
        return bool(self.edge_matrix[v, w])

    @property
    def mask(self) -> np.ndarray:
        """Allowed zero pattern for column-stochastic matrices.

        ``mask[v', v]`` is True iff a transition ``v -> v'`` is permitted,
        i.e. iff ``(v, v')`` is an edge.
        """
        return self.edge_matrix.T

    @classmethod
    def cycle(cls, n: int) -> "Graph":
        if n < 2:
            raise ValueError("cycle needs n >= 2")
        return cls(n, [(v, (v + 1) % n) for v in range(n)])

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(n, [(v, w) for v in range(n) for w in range(v + 1, n)])

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls(n, [(v, v + 1) for v in range(n - 1)])

    def __repr__(self) -> str:
        kind = "directed" if self.directed else "undirected"
        return f"Graph(n={self.n}, {kind}, |E|={len(self.edges)})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Graph)
            and self.n == other.n
            and self.edges == other.edges
        )

    def __hash__(self) -> int:
        return hash((self.n, self.edges))


@dataclass(frozen=True)
class NodeSet:
    """Subset of nodes stored as a bitmask over ``0 .. n-1``."""

    n: int
    mask: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("NodeSet needs n >= 1")
        if not 0 <= self.mask < (1 << self.n):
            raise ValueError(f"mask {self.mask:#x} out of range for n={self.n}")

    @classmethod
    def from_nodes(cls, n: int, nodes: Iterable[int]) -> "NodeSet":
        mask = 0
        for v in nodes:
            if not 0 <= v < n:
                raise ValueError(f"node {v} out of range for n={n}")
            mask |= 1 << v
        return cls(n, mask)

    @classmethod
    def full(cls, n: int) -> "NodeSet":
        return cls(n, (1 << n) - 1)

    def members(self) -> tuple[int, ...]:
        return tuple(v for v in range(self.n) if self.mask >> v & 1)

    def complement(self) -> "NodeSet":
        return NodeSet(self.n, ((1 << self.n) - 1) ^ self.mask)

    def indicator(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=bool)
        for v in self.members():
            out[v] = True
        return out

    def __contains__(self, v: int) -> bool:
        return 0 <= v < self.n and bool(self.mask >> v & 1)

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __iter__(self):
        return iter(self.members())

    def __repr__(self) -> str:
        return f"NodeSet(n={self.n}, {{{', '.join(map(str, self.members()))}}})"


class Dist:
    """Probability vector over an index set (nodes, or coin-node pairs).

    Entries are validated to be nonnegative (tiny negative dust is clamped
    to zero) and to sum to one within ``SUM_TOL``.
    """

    __slots__ = ("w",)

    def __init__(self, weights):
        w = np.array(weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("distribution must be a nonempty 1-D vector")
        lo = w.min()
        if lo < -DUST_TOL:
            raise ValueError(f"negative probability {lo!r}")
        np.clip(w, 0.0, None, out=w)
        total = w.sum()
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"weights sum to {total!r}, not 1")
        w.flags.writeable = False
        self.w = w

    @classmethod
    def delta(cls, n: int, v: int) -> "Dist":
        w = np.zeros(n)
        w[v] = 1.0
        return cls(w)

    @classmethod
    def uniform(cls, n: int) -> "Dist":
        return cls(np.full(n, 1.0 / n))

    @property
    def n(self) -> int:
        return self.w.size

    def mass(self, X: NodeSet) -> float:
        return float(self.w[list(X.members())].sum()) if len(X) else 0.0

    def restricted_to(self, X: NodeSet) -> "Dist":
        """Conditional distribution given ``X``: proportional on ``X``, zero outside."""
        idx = list(X.members())
        total = self.w[idx].sum()
        if total <= 0.0:
            raise ValueError("restriction to a zero-mass set")
        out = np.zeros_like(self.w)
        out[idx] = self.w[idx] / total
        return Dist(out)

    def __getitem__(self, v: int) -> float:
        return float(self.w[v])

    def __len__(self) -> int:
        return self.w.size

    def __repr__(self) -> str:
        return f"Dist({np.array2string(self.w, precision=6, threshold=8)})"


def as_weights(p) -> np.ndarray:
    """Accept a Dist or an array-like and return the weight vector."""
    if isinstance(p, Dist):
        return p.w
    return np.asarray(p, dtype=float)


def tv_distance(p, q) -> float:
    """Total variation distance ``(1/2) sum_v |p(v) - q(v)|``."""
    pw, qw = as_weights(p), as_weights(q)
    if pw.shape != qw.shape:
        raise ValueError(f"dimension mismatch: {pw.shape} vs {qw.shape}")
    return 0.5 * float(np.abs(pw - qw).sum())


def neighborhood(g: Graph, X: NodeSet) -> NodeSet:
    """Nodes outside ``X`` with an edge into ``X``.

    Returns ``{v not in X : (v, v') in E for some v' in X}``; mass on the
    result may flow into ``X`` in one step.
    """
    if X.n != g.n:
        raise ValueError(f"node set over {X.n} nodes, graph has {g.n}")
    union = 0
    for v in X.members():
        union |= g.in_masks[v]
    return NodeSet(g.n, union & ~X.mask)


@dataclass(frozen=True)
class LocalityReport:
    """Outcome of the exhaustive one-step locality scan of a trace."""

    ok: bool
    step: int | None = None  # transition p_step -> p_{step+1} that fails
    cut: NodeSet | None = None
    lhs: float | None = None  # mass of the cut after the step
    rhs: float | None = None  # mass of cut plus neighborhood before the step

    def __bool__(self) -> bool:
        return self.ok


def _subset_masses(w: np.ndarray, member: list[np.ndarray]) -> np.ndarray:
    out = np.zeros(1 << w.size)
    for v in range(w.size):
        out[member[v]] += w[v]
    return out


def check_locality_trace(trace: Sequence, g: Graph, slack: float = SUM_TOL) -> LocalityReport:
    """Verify the population inequality along a trace of node distributions.

    For every consecutive pair ``(p_t, p_{t+1})`` and every subset ``X``
    the mass of ``X`` after the step must not exceed the prior mass of
    ``X`` plus the prior mass of its in-neighborhood. Scans all ``2^n``
    subsets, so ``n <= MAX_SCAN_NODES`` is required.
    """
    n = g.n
    if n > MAX_SCAN_NODES:
        raise ValueError(f"locality scan needs n <= {MAX_SCAN_NODES}, got {n}")
    dists = [as_weights(p) for p in trace]
    for w in dists:
        if w.shape != (n,):
            raise ValueError(f"trace entry has shape {w.shape}, expected ({n},)")
    if len(dists) < 2:
        return LocalityReport(ok=True)

    size = 1 << n
    masks = np.arange(size, dtype=np.int64)
    member = [np.nonzero(masks >> v & 1)[0] for v in range(n)]
    union = np.zeros(size, dtype=np.int64)
    for v in range(n):
        union[member[v]] |= g.in_masks[v]
    bmask = union & ~masks

    prev = _subset_masses(dists[0], member)
    for t in range(len(dists) - 1):
        nxt = _subset_masses(dists[t + 1], member)
        bound = prev + prev[bmask] + slack
        bad = nxt > bound
        if bad.any():
            m = int(np.argmax(bad))
            return LocalityReport(
                ok=False,
                step=t,
                cut=NodeSet(n, m),
                lhs=float(nxt[m]),
                rhs=float(prev[m] + prev[bmask[m]]),
            )
        prev = nxt
    return LocalityReport(ok=True)


def parse_edge_list(text: str, directed: bool = False) -> Graph:
    """Parse the edge-list text format: first line ``n``, then 1-indexed
    ``v v'`` pairs, one per line. Self-loops are implied."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError("empty edge-list input")
    try:
        n = int(lines[0])
    except ValueError as exc:
        raise ValueError(f"first line must be the node count, got {lines[0]!r}") from exc
    edges = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"expected 'v v\\'' pair, got {ln!r}")
        v, w = int(parts[0]), int(parts[1])
        if not (1 <= v <= n and 1 <= w <= n):
            raise ValueError(f"edge ({v}, {w}) out of range for n={n} (1-indexed)")
        edges.append((v - 1, w - 1))
    return Graph(n, edges, directed=directed)


def format_edge_list(g: Graph) -> str:
    """Inverse of :func:`parse_edge_list` (self-loops omitted, 1-indexed)."""
    lines = [str(g.n)]
    for v, w in sorted(g.edges):
        if v != w:
            lines.append(f"{v + 1} {w + 1}")
    return "\n".join(lines) + "\n"
