"""Synthesis of local stochastic matrices that carry one distribution of a
trace to the next, via max-flow on a small capacitated network.

The network has a source feeding each node copy with the outgoing
distribution, unit-capacity middle arcs along graph edges, and sink arcs
draining the target distribution. A max flow of value one yields the
matrix columns directly.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .chains import StochMatrix
from .graphs import Dist, Graph, as_weights
from .processes import StochProcess

RESIDUAL_TOL = 1e-12
FEASIBLE_TOL = 1e-9
#: columns with source mass below this use the self-loop convention
FREE_COLUMN_TOL = 1e-12
TRACE_MATCH_TOL = 1e-8


class BridgeInfeasibleError(ValueError):
    """Max-flow value fell short of one: the pair of distributions cannot
    be connected by any matrix that respects the graph locality."""

    def __init__(self, value: float, step: int | None = None):
        self.value = value
        self.step = step
        loc = f" at step {step}" if step is not None else ""
        super().__init__(f"infeasible bridge{loc}: max-flow value {value!r} < 1")


@dataclass(frozen=True)
class FlowNetwork:
    """Capacitated network for transporting ``y`` to ``z`` along graph edges.

    Node layout: source 0, outgoing copies ``1 + v``, incoming copies
    ``1 + n + v'``, sink ``2n + 1``.
    """

    y: np.ndarray
    z: np.ndarray
    graph: Graph

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def source(self) -> int:
        return 0

    @property
    def sink(self) -> int:
        return 2 * self.n + 1

    def capacity_matrix(self) -> np.ndarray:
        n = self.n
        cap = np.zeros((2 * n + 2, 2 * n + 2))
        cap[0, 1 : n + 1] = self.y
        for v, w in self.graph.edges:
            cap[1 + v, 1 + n + w] = 1.0
        cap[1 + n : 1 + 2 * n, 2 * n + 1] = self.z
        return cap


def build_flow_network(y, z, g: Graph) -> FlowNetwork:
    yw = as_weights(y if isinstance(y, Dist) else Dist(y))
    zw = as_weights(z if isinstance(z, Dist) else Dist(z))
    if yw.size != g.n or zw.size != g.n:
        raise ValueError(
            f"distributions over {yw.size}/{zw.size} nodes, graph has {g.n}"
        )
    return FlowNetwork(yw, zw, g)


@dataclass(frozen=True)
class FlowResult:
    """Max-flow value plus the flow routed on each arc.

    ``middle[v, v']`` is the flow carried from the outgoing copy of ``v``
    to the incoming copy of ``v'``; ``source_flows`` and ``sink_flows``
    are the per-node flows on the outer arcs.
    """

    value: float
    middle: np.ndarray
    source_flows: np.ndarray
    sink_flows: np.ndarray

    def conservation_residual(self) -> float:
        """Worst imbalance between inflow and outflow at an internal node."""
        out_bad = np.abs(self.middle.sum(axis=1) - self.source_flows).max()
        in_bad = np.abs(self.middle.sum(axis=0) - self.sink_flows).max()
        return float(max(out_bad, in_bad))


def max_flow(net: FlowNetwork) -> FlowResult:
    """Shortest-augmenting-path max flow with floating-point capacities."""
    cap = net.capacity_matrix()
    residual = cap.copy()
    size = residual.shape[0]
    s, r = net.source, net.sink
    total = 0.0
    while True:
        # BFS for the shortest residual path
        parent = np.full(size, -1, dtype=int)
        parent[s] = s
        queue = deque([s])
        while queue and parent[r] < 0:
            u = queue.popleft()
            for v in np.nonzero(residual[u] > RESIDUAL_TOL)[0]:
                if parent[v] < 0:
                    parent[v] = u
                    queue.append(int(v))
        if parent[r] < 0:
            break
        # bottleneck along the path
        bottleneck = np.inf
        v = r
        while v != s:
            u = parent[v]
            bottleneck = min(bottleneck, residual[u, v])
            v = u
        v = r
        while v != s:
            u = parent[v]
            residual[u, v] -= bottleneck
            residual[v, u] += bottleneck
            v = u
        total += bottleneck
    n = net.n
    middle = np.maximum(cap[1 : n + 1, 1 + n : 1 + 2 * n] - residual[1 : n + 1, 1 + n : 1 + 2 * n], 0.0)
    src = np.maximum(cap[0, 1 : n + 1] - residual[0, 1 : n + 1], 0.0)
    snk = np.maximum(cap[1 + n : 1 + 2 * n, r] - residual[1 + n : 1 + 2 * n, r], 0.0)
    return FlowResult(value=total, middle=middle, source_flows=src, sink_flows=snk)


def extract_bridge(flow: FlowResult, y, g: Graph) -> StochMatrix:
    """Turn a unit-value flow into a column-stochastic local matrix.

    Column ``v`` is the flow out of ``v`` scaled by ``1/y(v)``; columns
    with no source mass fall back to the self-loop. Columns are
    renormalized to sum to exactly one so products of many bridges do not
    drift.
    """
    if flow.value < 1.0 - FEASIBLE_TOL:
        raise BridgeInfeasibleError(flow.value)
    yw = as_weights(y)
    n = g.n
    out = np.zeros((n, n))
    for v in range(n):
        if yw[v] <= FREE_COLUMN_TOL:
            out[v, v] = 1.0
            continue
        col = np.maximum(flow.middle[v], 0.0)
        total = col.sum()
        if total <= 0.0:
            out[v, v] = 1.0
            continue
        out[:, v] = col / total
    return StochMatrix(out, g)


@dataclass(frozen=True)
class BridgeSequence:
    """Local matrices carrying a process's trace forward one step at a time.

    ``matrices[t]`` maps the distribution at time ``t`` to the one at
    ``t + 1``; the recorded trace is the exact one produced by the source
    process.
    """

    matrices: tuple[StochMatrix, ...]
    p0: Dist
    trace: np.ndarray
    kind: str = "unknown"
    flow_values: tuple[float, ...] = field(default=())

    @property
    def horizon(self) -> int:
        return len(self.matrices)

    def replay(self) -> np.ndarray:
        """Distributions obtained by applying the bridges to ``p0``."""
        out = np.empty_like(self.trace)
        out[0] = self.p0.w
        for t, P in enumerate(self.matrices):
            out[t + 1] = P.m @ out[t]
        return out

    def max_residual(self) -> float:
        replay = self.replay()
        return float(np.abs(replay - self.trace).sum(axis=1).max())


def bridge_sequence(proc: StochProcess, p0, T: int, graph: Graph | None = None) -> BridgeSequence:
    """Build one bridge per step of the process trace from ``p0``.

    Raises :class:`BridgeInfeasibleError` when some step's max-flow value
    falls short of one, which certifies a locality violation of the trace.
    """
    if T < 1:
        raise ValueError("need T >= 1")
    g = graph or proc.graph
    if g is None:
        raise ValueError("no graph available; pass one explicitly")
    start = p0 if isinstance(p0, Dist) else Dist(p0)
    trace = proc.trajectory(start, T)
    matrices = []
    values = []
    for t in range(T):
        y = Dist(trace[t])
        z = Dist(trace[t + 1])
        result = max_flow(build_flow_network(y, z, g))
        if result.value < 1.0 - FEASIBLE_TOL:
            raise BridgeInfeasibleError(result.value, step=t + 1)
        values.append(result.value)
        matrices.append(extract_bridge(result, y, g))
    return BridgeSequence(
        matrices=tuple(matrices),
        p0=start,
        trace=trace,
        kind=proc.kind,
        flow_values=tuple(values),
    )


def locality_inequality_holds(y, z, g: Graph, slack: float = FEASIBLE_TOL) -> bool:
    """Exhaustively test the population inequality for the pair ``(y, z)``:
    feasibility of a one-step local transport."""
    from .graphs import check_locality_trace

    return check_locality_trace([as_weights(y), as_weights(z)], g, slack=slack).ok
