"""Stochastic process views: the family of linear maps sending an initial
node distribution to the node distribution at time t.

A process evaluates lazily: it holds whatever state machinery it needs
(density operators for channels, joint probability vectors for lifted
chains) and exposes node distributions. All processes are linear,
positivity- and sum-preserving, which callers may verify on basis vectors.
"""

from __future__ import annotations

from typing import Iterator

import numpy as np
import scipy.sparse as sp

from .channels import CoinAssignment, KrausChannel, node_marginal_raw
from .graphs import Dist, Graph, as_weights, tv_distance

INVARIANCE_TOL = 1e-9


class StochProcess:
    """Base class; subclasses fill in state initialization, stepping, and
    marginal extraction."""

    kind: str = "abstract"

    def __init__(self, n: int, graph: Graph | None = None):
        self.n = n
        self.graph = graph
        self._psi_cache: list[np.ndarray] = []

    # -- state machinery -------------------------------------------------
    def _initial_state(self, p0: np.ndarray):
        raise NotImplementedError

    def _advance(self, state):
        raise NotImplementedError

    def _marginal(self, state) -> np.ndarray:
        raise NotImplementedError

    # -- public API -------------------------------------------------------
    def trajectory(self, p0, horizon: int) -> np.ndarray:
        """Node distributions at times ``0 .. horizon`` (rows)."""
        w = as_weights(p0)
        if w.shape != (self.n,):
            raise ValueError(f"initial distribution has shape {w.shape}, expected ({self.n},)")
        if horizon < 0:
            raise ValueError("horizon must be nonnegative")
        out = np.empty((horizon + 1, self.n))
        state = self._initial_state(w)
        out[0] = self._marginal(state)
        for t in range(1, horizon + 1):
            state = self._advance(state)
            out[t] = self._marginal(state)
        return out

    def distribution(self, p0, t: int) -> Dist:
        return Dist(self.trajectory(p0, t)[t])

    def iter_basis_marginals(self, horizon: int) -> Iterator[np.ndarray]:
        """Yield, for each time ``0 .. horizon``, the matrix whose column v
        is the node distribution reached from the basis start at v."""
        states = [self._initial_state(_basis(self.n, v)) for v in range(self.n)]
        yield np.column_stack([self._marginal(s) for s in states])
        for _ in range(horizon):
            states = [self._advance(s) for s in states]
            yield np.column_stack([self._marginal(s) for s in states])

    def psi_matrices(self, horizon: int) -> list[np.ndarray]:
        """Matrices of the maps at times ``0 .. horizon`` (cached)."""
        if len(self._psi_cache) <= horizon:
            self._psi_cache = [m.copy() for m in self.iter_basis_marginals(horizon)]
        return self._psi_cache[: horizon + 1]

    def psi_matrix(self, t: int) -> np.ndarray:
        return self.psi_matrices(t)[t]

    def stochasticity_residual(self, horizon: int) -> float:
        """Max deviation from column-stochasticity of the maps up to
        ``horizon``, evaluated on basis vectors."""
        worst = 0.0
        for m in self.iter_basis_marginals(horizon):
            worst = max(worst, float(np.abs(m.sum(axis=0) - 1.0).max()))
            worst = max(worst, float(max(0.0, -m.min())))
        return worst


def _basis(n: int, v: int) -> np.ndarray:
    w = np.zeros(n)
    w[v] = 1.0
    return w


class ChannelProcess(StochProcess):
    """Node-distribution process induced by a quantum channel with a fixed
    initial coin assignment.

    ``channels`` may be a single channel or a sequence used as a per-step
    schedule (the last entry repeats once exhausted).
    """

    kind = "qw"

    def __init__(self, channels, coins: CoinAssignment):
        if isinstance(channels, KrausChannel):
            schedule: tuple[KrausChannel, ...] = (channels,)
        else:
            schedule = tuple(channels)
            if not schedule:
                raise ValueError("empty channel schedule")
        space = schedule[0].space
        for ch in schedule:
            if ch.space != space:
                raise ValueError("all channels in a schedule must share one space")
        if coins.space != space:
            raise ValueError("coin assignment does not match the channel space")
        super().__init__(space.n_nodes, schedule[0].graph)
        self.schedule = schedule
        self.coins = coins
        self.space = space

    @property
    def channel(self) -> KrausChannel:
        return self.schedule[0]

    def _channel_at(self, t: int) -> KrausChannel:
        return self.schedule[min(t, len(self.schedule) - 1)]

    def _initial_state(self, p0: np.ndarray):
        dim = self.space.dim
        rho = np.zeros((dim, dim), dtype=complex)
        idx = self.coins.flat_indices()
        rho[idx, idx] = p0
        return (0, rho)

    def _advance(self, state):
        t, rho = state
        out = self._channel_at(t).apply(rho)
        out = (out + out.conj().T) / 2.0
        return (t + 1, out)

    def _marginal(self, state) -> np.ndarray:
        _, rho = state
        return node_marginal_raw(rho, self.space.n_coins, self.space.n_nodes)


class ChainProcess(StochProcess):
    """Node-distribution process of a joint (lifted) Markov chain.

    The joint space must store the node index fastest, i.e. flat joint
    index ``c * n_nodes + v``; marginalization is then a reshape and sum.
    """

    kind = "lmc"

    def __init__(self, transition, n_nodes: int, init_indices, graph: Graph | None = None,
                 kind: str | None = None):
        t = sp.csr_matrix(transition)
        if t.shape[0] != t.shape[1]:
            raise ValueError("transition matrix must be square")
        if t.shape[0] % n_nodes != 0:
            raise ValueError(f"joint dimension {t.shape[0]} not a multiple of n={n_nodes}")
        idx = np.asarray(init_indices, dtype=int)
        if idx.shape != (n_nodes,):
            raise ValueError("need one initial joint index per node")
        super().__init__(n_nodes, graph)
        self.transition = t
        self.joint_dim = t.shape[0]
        self.init_indices = idx
        if kind is not None:
            self.kind = kind

    def _initial_state(self, p0: np.ndarray) -> np.ndarray:
        joint = np.zeros(self.joint_dim)
        np.add.at(joint, self.init_indices, p0)
        return joint

    def _advance(self, state: np.ndarray) -> np.ndarray:
        return self.transition @ state

    def _marginal(self, state: np.ndarray) -> np.ndarray:
        return state.reshape(-1, self.n).sum(axis=0)

    def joint_trajectory(self, p0, horizon: int) -> np.ndarray:
        """Joint distributions at times ``0 .. horizon`` (diagnostic view)."""
        w = as_weights(p0)
        state = self._initial_state(w)
        out = np.empty((horizon + 1, self.joint_dim))
        out[0] = state
        for t in range(1, horizon + 1):
            state = self._advance(state)
            out[t] = state
        return out

    def iter_basis_marginals(self, horizon: int) -> Iterator[np.ndarray]:
        # all basis starts evolve together as one joint matrix
        states = np.zeros((self.joint_dim, self.n))
        states[self.init_indices, np.arange(self.n)] = 1.0
        yield states.reshape(-1, self.n, self.n).sum(axis=0)
        for _ in range(horizon):
            states = self.transition @ states
            yield states.reshape(-1, self.n, self.n).sum(axis=0)


class CesaroProcess(StochProcess):
    """Running time-average of another process's distributions."""

    kind = "cesaro"

    def __init__(self, base: StochProcess):
        super().__init__(base.n, base.graph)
        self.base = base

    def _initial_state(self, p0: np.ndarray):
        inner = self.base._initial_state(p0)
        first = self.base._marginal(inner)
        return (inner, first.copy(), 1)

    def _advance(self, state):
        inner, acc, count = state
        inner = self.base._advance(inner)
        return (inner, acc + self.base._marginal(inner), count + 1)

    def _marginal(self, state) -> np.ndarray:
        _, acc, count = state
        return acc / count


def induced_process(ch: KrausChannel, F: CoinAssignment) -> ChannelProcess:
    """Node-distribution process of a channel under the initialization F."""
    return ChannelProcess(ch, F)


def cesaro(proc: StochProcess) -> CesaroProcess:
    return CesaroProcess(proc)


def check_invariance(proc: StochProcess, pbar, horizon: int, tol: float = INVARIANCE_TOL) -> bool:
    """True iff the process maps ``pbar`` to itself at every time up to
    ``horizon`` (within ``tol`` in total variation)."""
    w = as_weights(pbar)
    traj = proc.trajectory(w, horizon)
    return all(tv_distance(traj[t], w) <= tol for t in range(horizon + 1))
