"""Compile per-start bridge sequences into a single time-invariant lifted
chain whose coin stores (start node, clock value), plus the restarted
("amplified") variant that wraps the clock around to re-initialize from
the current marginal.

State layout: flat index ``(v0 * (T+1) + l) * n + v`` for coin ``(v0, l)``
and node ``v`` (start-node major, then clock, then node).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .bridges import BridgeSequence, bridge_sequence
from .graphs import Dist, Graph
from .mixing import mixing_time
from .processes import ChainProcess, StochProcess

VERIFY_TOL_PLAIN = 1e-8
VERIFY_TOL_AMPLIFIED = 1e-7


class ClockLift:
    """Lifted chain executing one bridge sequence per start node, stepped
    by a clock register."""

    __slots__ = ("n", "T", "amplified", "epsilon0", "graph", "transition", "bridges")

    def __init__(
        self,
        bridges: Sequence[BridgeSequence],
        graph: Graph,
        amplified: bool = False,
        epsilon0: float | None = None,
    ):
        n = graph.n
        if len(bridges) != n:
            raise ValueError(f"need one bridge sequence per start node: got {len(bridges)}, n={n}")
        T = bridges[0].horizon
        for v0, seq in enumerate(bridges):
            if seq.horizon != T:
                raise ValueError(
                    f"bridge length mismatch: start {v0} has {seq.horizon}, expected {T}"
                )
            if abs(seq.p0.w[v0] - 1.0) > 1e-12:
                raise ValueError(f"bridge sequence {v0} does not start from the basis vector")
        if T < 1:
            raise ValueError("clock lift needs T >= 1")
        self.n = n
        self.T = T
        self.amplified = bool(amplified)
        self.epsilon0 = epsilon0
        self.graph = graph
        self.bridges = tuple(bridges)
        self.transition = self._build_transition()

    def flat(self, v0: int, l: int, v: int) -> int:
        return (v0 * (self.T + 1) + l) * self.n + v

    @property
    def state_dim(self) -> int:
        return self.n * (self.T + 1) * self.n

    def _build_transition(self) -> sp.csr_matrix:
        n, T = self.n, self.T
        rows, cols, vals = [], [], []
        for v0 in range(n):
            for l in range(T):
                B = self.bridges[v0].matrices[l].m
                vp, v = np.nonzero(B)
                rows.append((v0 * (T + 1) + l + 1) * n + vp)
                cols.append((v0 * (T + 1) + l) * n + v)
                vals.append(B[vp, v])
            v = np.arange(n)
            if self.amplified:
                rows.append((v * (T + 1)) * n + v)  # jump to (v, 0, v)
            else:
                rows.append((v0 * (T + 1) + T) * n + v)  # stay put
            cols.append((v0 * (T + 1) + T) * n + v)
            vals.append(np.ones(n))
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        vals = np.concatenate(vals)
        dim = self.state_dim
        return sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))

    def init_indices(self) -> np.ndarray:
        """Flat index of ``(v, 0, v)`` for each node v: the image of the
        initialization map on basis vectors."""
        v = np.arange(self.n)
        return (v * (self.T + 1)) * self.n + v

    def as_process(self) -> ChainProcess:
        return ChainProcess(
            self.transition, self.n, self.init_indices(), graph=self.graph, kind="lmc"
        )

    def triplets(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        coo = self.transition.tocoo()
        order = np.lexsort((coo.row, coo.col))
        return coo.row[order], coo.col[order], coo.data[order]

    def node_locality_violations(self) -> list[tuple[int, int]]:
        """Transitions whose node components do not follow a base edge."""
        coo = self.transition.tocoo()
        src = coo.col % self.n
        dst = coo.row % self.n
        ok = self.graph.edge_matrix[src, dst]
        return [(int(c), int(r)) for c, r in zip(coo.col[~ok], coo.row[~ok])]

    def __repr__(self) -> str:
        mode = "amplified" if self.amplified else "plain"
        return f"ClockLift(n={self.n}, T={self.T}, {mode}, dim={self.state_dim})"


def clock_lift(
    bridges: Mapping[int, BridgeSequence] | Sequence[BridgeSequence],
    T: int | None = None,
    graph: Graph | None = None,
    epsilon0: float | None = None,
) -> ClockLift:
    """Assemble the plain clock lift from one bridge sequence per start node."""
    if isinstance(bridges, Mapping):
        if not bridges:
            raise ValueError("no bridge sequences given")
        n = max(bridges) + 1
        missing = [v for v in range(n) if v not in bridges]
        if missing:
            raise ValueError(f"missing bridge sequences for start nodes {missing}")
        seqs = [bridges[v] for v in range(n)]
    else:
        seqs = list(bridges)
    if not seqs:
        raise ValueError("no bridge sequences given")
    if T is not None and any(s.horizon != T for s in seqs):
        raise ValueError(f"bridge sequences do not all have horizon T={T}")
    g = graph or seqs[0].matrices[0].graph
    return ClockLift(seqs, g, amplified=False, epsilon0=epsilon0)


def amplified_lift(lift: ClockLift) -> ClockLift:
    """Replace the terminal hold by a jump back to clock zero at the
    current node, so the first T steps repeat from the reached marginal."""
    if lift.amplified:
        raise ValueError("lift is already amplified")
    return ClockLift(lift.bridges, lift.graph, amplified=True, epsilon0=lift.epsilon0)


def lift_from_process(
    proc: StochProcess,
    pbar=None,
    epsilon0: float = 0.25,
    T: int | None = None,
    horizon: int | None = None,
    graph: Graph | None = None,
) -> ClockLift:
    """Measure the process's mixing time at ``epsilon0`` against ``pbar``
    (unless ``T`` is given directly), build bridges from every basis start,
    and compile the plain lift."""
    g = graph or proc.graph
    if g is None:
        raise ValueError("no graph available; pass one explicitly")
    if T is None:
        if pbar is None:
            raise ValueError("need pbar to measure the mixing horizon, or pass T")
        result = mixing_time(proc, pbar, epsilon0, horizon)
        if result.tau is None:
            raise ValueError(
                f"process did not mix to {epsilon0} within horizon {result.horizon}"
            )
        T = max(result.tau, 1)
    seqs = [bridge_sequence(proc, Dist.delta(proc.n, v), T, graph=g) for v in range(proc.n)]
    return ClockLift(seqs, g, amplified=False, epsilon0=epsilon0)


@dataclass(frozen=True)
class SimulationReport:
    """Residuals of the lift's marginals against its target process."""

    max_residual: float
    residual_per_t: tuple[float, ...]
    locality_ok: bool
    horizon: int
    amplified: bool

    def ok(self, tol: float | None = None) -> bool:
        if tol is None:
            tol = VERIFY_TOL_AMPLIFIED if self.amplified else VERIFY_TOL_PLAIN
        return self.locality_ok and self.max_residual <= tol

    def __bool__(self) -> bool:
        return self.ok()


def verify_simulation(lift: ClockLift, proc: StochProcess, horizon: int) -> SimulationReport:
    """Compare the lift's marginal evolution from every basis start against
    the source process (plain lift) or its restarted composition
    (amplified lift), and check node locality of the lift.

    The amplified lift realizes blocks of period T+1: the clock-wrap jump
    spends one step with the marginal frozen, so the target at time
    ``t = k (T+1) + r`` is the map at ``min(r, T)`` composed with the k-th
    power of the map at T.
    """
    if proc.n != lift.n:
        raise ValueError(f"process over {proc.n} nodes, lift over {lift.n}")
    if not lift.amplified and horizon > lift.T:
        raise ValueError(f"plain lift only simulates up to T={lift.T}, asked for {horizon}")
    T = lift.T
    psi = proc.psi_matrices(min(horizon, T))
    psi_T = psi[T] if horizon >= T else None
    lift_marginals = lift.as_process().iter_basis_marginals(horizon)
    residuals = []
    power = np.eye(lift.n)
    for t, got in enumerate(lift_marginals):
        if lift.amplified:
            k, r = divmod(t, T + 1)
            if r == 0 and k > 0:
                power = psi_T @ power
            target = psi[min(r, T)] @ power
        else:
            target = psi[t]
        residuals.append(float(np.abs(got - target).sum(axis=0).max()))
    violations = lift.node_locality_violations()
    return SimulationReport(
        max_residual=max(residuals),
        residual_per_t=tuple(residuals),
        locality_ok=not violations,
        horizon=horizon,
        amplified=lift.amplified,
    )
