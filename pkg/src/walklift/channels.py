"""Quantum channels over a coin-node space and density-operator evolution.

The joint space has flat index ``i = c * n_nodes + v`` (coin-major). A
channel is a set of Kraus operators tied to a reference graph; graph
locality means every operator has exact zeros between non-adjacent nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
import scipy.sparse as sp

from .graphs import Dist, Graph, as_weights

HERM_TOL = 1e-10
TRACE_TOL = 1e-9
PSD_TOL = 1e-10
COMPLETENESS_TOL = 1e-9
UNITARY_TOL = 1e-9

#: above this fill ratio a unitary is applied densely
_SPARSE_FILL = 0.25


@dataclass(frozen=True)
class LiftedSpace:
    """Index bookkeeping for the coin-node product space."""

    n_coins: int
    n_nodes: int

    def __post_init__(self):
        if self.n_coins < 1 or self.n_nodes < 1:
            raise ValueError("need n_coins >= 1 and n_nodes >= 1")

    @property
    def dim(self) -> int:
        return self.n_coins * self.n_nodes

    def flat(self, c: int, v: int) -> int:
        if not (0 <= c < self.n_coins and 0 <= v < self.n_nodes):
            raise ValueError(f"({c}, {v}) out of range")
        return c * self.n_nodes + v

    def unflat(self, i: int) -> tuple[int, int]:
        return divmod(i, self.n_nodes)


class CoinAssignment:
    """Fixed initial coin value per node, used by the initialization map."""

    __slots__ = ("values", "n_coins")

    def __init__(self, values, n_coins: int):
        vals = np.array(values, dtype=int)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("coin assignment must be a nonempty 1-D vector")
        if n_coins < 1 or vals.min() < 0 or vals.max() >= n_coins:
            raise ValueError(f"coin values must lie in [0, {n_coins})")
        vals.flags.writeable = False
        self.values = vals
        self.n_coins = int(n_coins)

    @classmethod
    def constant(cls, n_nodes: int, n_coins: int, coin: int = 0) -> "CoinAssignment":
        return cls(np.full(n_nodes, coin, dtype=int), n_coins)

    @property
    def n_nodes(self) -> int:
        return self.values.size

    @property
    def space(self) -> LiftedSpace:
        return LiftedSpace(self.n_coins, self.n_nodes)

    def flat_indices(self) -> np.ndarray:
        """Flat joint index of ``(c_v, v)`` for each node ``v``."""
        return self.values * self.n_nodes + np.arange(self.n_nodes)

    def __len__(self) -> int:
        return self.values.size

    def __repr__(self) -> str:
        return f"CoinAssignment(n_coins={self.n_coins}, values={self.values.tolist()})"


class DensityOp:
    """Density operator over a coin-node space.

    Validation checks Hermiticity, unit trace, and positive semidefiniteness
    (the latter via an eigenvalue decomposition, skipped for trusted
    internal constructions).
    """

    __slots__ = ("mat", "space")

    def __init__(self, mat, space: LiftedSpace, validate: bool = True):
        m = np.array(mat, dtype=complex)
        if m.shape != (space.dim, space.dim):
            raise ValueError(f"matrix shape {m.shape} does not match dim {space.dim}")
        if validate:
            herm = np.abs(m - m.conj().T).max()
            if herm > HERM_TOL:
                raise ValueError(f"not Hermitian: max asymmetry {herm:.3e}")
            tr = m.trace()
            if abs(tr - 1.0) > TRACE_TOL:
                raise ValueError(f"trace {tr!r} differs from 1")
            lo = np.linalg.eigvalsh((m + m.conj().T) / 2).min()
            if lo < -PSD_TOL:
                raise ValueError(f"negative eigenvalue {lo:.3e}")
        m.flags.writeable = False
        self.mat = m
        self.space = space

    @classmethod
    def pure(cls, psi, space: LiftedSpace) -> "DensityOp":
        v = np.asarray(psi, dtype=complex).reshape(-1)
        if v.size != space.dim:
            raise ValueError("state vector has wrong dimension")
        nrm = np.linalg.norm(v)
        if abs(nrm - 1.0) > TRACE_TOL:
            raise ValueError(f"state vector norm {nrm!r} differs from 1")
        return cls(np.outer(v, v.conj()), space, validate=False)

    @classmethod
    def basis(cls, space: LiftedSpace, c: int, v: int) -> "DensityOp":
        m = np.zeros((space.dim, space.dim), dtype=complex)
        i = space.flat(c, v)
        m[i, i] = 1.0
        return cls(m, space, validate=False)

    def __repr__(self) -> str:
        return f"DensityOp(dim={self.space.dim})"


@dataclass(frozen=True)
class ChannelReport:
    """Validation outcome for a Kraus channel."""

    ok: bool
    completeness_residual: float
    # tuples (k, coin_to, node_to, coin_from, node_from, amplitude)
    locality_violations: tuple = ()

    def __bool__(self) -> bool:
        return self.ok


class KrausChannel:
    """Quantum channel given by Kraus operators over a coin-node space."""

    def __init__(self, kraus: Iterable[np.ndarray], space: LiftedSpace, graph: Graph):
        if graph.n != space.n_nodes:
            raise ValueError(f"graph has {graph.n} nodes, space expects {space.n_nodes}")
        ops = []
        for m in kraus:
            a = np.array(m, dtype=complex)
            if a.shape != (space.dim, space.dim):
                raise ValueError(f"Kraus operator shape {a.shape}, expected square side {space.dim}")
            a.flags.writeable = False
            ops.append(a)
        if not ops:
            raise ValueError("channel needs at least one Kraus operator")
        self._kraus = tuple(ops)
        self.space = space
        self.graph = graph

    @property
    def kraus(self) -> tuple[np.ndarray, ...]:
        return self._kraus

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """One step on a raw density matrix (no validation, no hermitization)."""
        out = np.zeros_like(rho)
        for m in self.kraus:
            out += m @ rho @ m.conj().T
        return out

    def completeness_residual(self) -> float:
        dim = self.space.dim
        acc = np.zeros((dim, dim), dtype=complex)
        for m in self.kraus:
            acc += m.conj().T @ m
        return float(np.abs(acc - np.eye(dim)).max())

    def locality_violations(self, graph: Graph | None = None) -> list[tuple]:
        space, nv = self.space, self.space.n_nodes
        ref = graph if graph is not None else self.graph
        if ref.n != nv:
            raise ValueError(f"reference graph has {ref.n} nodes, channel expects {nv}")
        forbidden = ~ref.edge_matrix  # forbidden[v, v'] == no edge v -> v'
        out = []
        for k, m in enumerate(self.kraus):
            # row index = (c', v'), column index = (c, v); hop v -> v'
            blocks = np.abs(m).reshape(space.n_coins, nv, space.n_coins, nv)
            hop = blocks.transpose(1, 3, 0, 2)  # [v', v, c', c]
            bad = (hop > 0) & forbidden.T[:, :, None, None]
            for vp, v, cp, c in zip(*np.nonzero(bad)):
                out.append((k, int(cp), int(vp), int(c), int(v), complex(m[cp * nv + vp, c * nv + v])))
        return out

    def validate(self) -> ChannelReport:
        res = self.completeness_residual()
        viols = tuple(self.locality_violations())
        return ChannelReport(ok=(res <= COMPLETENESS_TOL and not viols),
                             completeness_residual=res,
                             locality_violations=viols)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.space.dim}, n_kraus={len(self.kraus)})"


class MeasuredUnitaryChannel(KrausChannel):
    """Unitary step followed by a canonical-basis measurement with probability q.

    Ensemble form: with probability ``1 - q`` the unitary acts coherently,
    with probability ``q`` the post-unitary state dephases in the canonical
    basis. Kraus set ``{sqrt(1-q) U} + {sqrt(q) |i><i| U}``.
    """

    def __init__(self, unitary: np.ndarray, q: float, space: LiftedSpace, graph: Graph):
        u = np.array(unitary, dtype=complex)
        if u.shape != (space.dim, space.dim):
            raise ValueError(f"unitary shape {u.shape}, expected side {space.dim}")
        dev = np.abs(u.conj().T @ u - np.eye(space.dim)).max()
        if dev > UNITARY_TOL:
            raise ValueError(f"matrix is not unitary: residual {dev:.3e}")
        if not 0.0 <= q <= 1.0:
            raise ValueError(f"measurement probability q={q} outside [0, 1]")
        u.flags.writeable = False
        self.unitary = u
        self.q = float(q)
        fill = np.count_nonzero(u) / u.size
        self._u_sparse = sp.csr_matrix(u) if fill < _SPARSE_FILL else None
        self._u_sparse_h = self._u_sparse.conj().T.tocsr() if self._u_sparse is not None else None
        self._kraus_cache = None
        self.space = space
        self.graph = graph
        if graph.n != space.n_nodes:
            raise ValueError(f"graph has {graph.n} nodes, space expects {space.n_nodes}")

    @property
    def kraus(self) -> tuple[np.ndarray, ...]:
        if self._kraus_cache is None:
            ops = []
            if self.q < 1.0:
                ops.append(math.sqrt(1.0 - self.q) * self.unitary)
            if self.q > 0.0:
                root = math.sqrt(self.q)
                for i in range(self.space.dim):
                    m = np.zeros_like(self.unitary)
                    m[i, :] = root * self.unitary[i, :]
                    ops.append(m)
            self._kraus_cache = tuple(ops)
        return self._kraus_cache

    def apply(self, rho: np.ndarray) -> np.ndarray:
        if self._u_sparse is not None:
            mid = self._u_sparse @ rho
            mid = mid @ self._u_sparse_h
        else:
            mid = self.unitary @ rho @ self.unitary.conj().T
        mid = np.asarray(mid)
        if self.q == 0.0:
            return mid
        d = mid.diagonal().copy()
        if self.q == 1.0:
            return np.diag(d)
        out = (1.0 - self.q) * mid
        idx = np.arange(out.shape[0])
        out[idx, idx] += self.q * d
        return out


class DephasingChainChannel(KrausChannel):
    """Channel of a classical chain: rank-one Kraus operators in the
    canonical basis, one per nonzero transition probability. Output states
    are always diagonal."""

    def __init__(self, transition: np.ndarray, space: LiftedSpace, graph: Graph):
        t = np.asarray(transition, dtype=float)
        if t.shape != (space.dim, space.dim):
            raise ValueError(f"transition shape {t.shape}, expected side {space.dim}")
        rows, cols = np.nonzero(t)
        self.transition = t.copy()
        self.transition.flags.writeable = False
        self._to = rows
        self._from = cols
        self._probs = t[rows, cols]
        self._kraus_cache = None
        self.space = space
        self.graph = graph
        if graph.n != space.n_nodes:
            raise ValueError(f"graph has {graph.n} nodes, space expects {space.n_nodes}")

    @property
    def kraus(self) -> tuple[np.ndarray, ...]:
        if self._kraus_cache is None:
            ops = []
            for a, b, p in zip(self._to, self._from, self._probs):
                m = np.zeros((self.space.dim, self.space.dim), dtype=complex)
                m[a, b] = math.sqrt(p)
                ops.append(m)
            self._kraus_cache = tuple(ops)
        return self._kraus_cache

    def apply(self, rho: np.ndarray) -> np.ndarray:
        # sum_k p_k rho[b_k, b_k] |a_k><a_k|
        picked = self._probs * rho.diagonal()[self._from]
        diag = np.zeros(self.space.dim, dtype=complex)
        np.add.at(diag, self._to, picked)
        return np.diag(diag)


def validate_channel(ch: KrausChannel) -> ChannelReport:
    """Check completeness and graph locality of a channel."""
    return ch.validate()


def measured_unitary_channel(unitary, q: float, g: Graph, n_coins: int | None = None) -> MeasuredUnitaryChannel:
    """Build the measured-unitary channel for ``unitary`` over ``g``.

    ``n_coins`` is inferred from the matrix side when omitted.
    """
    u = np.asarray(unitary, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError("unitary must be square")
    if n_coins is None:
        if u.shape[0] % g.n != 0:
            raise ValueError(f"matrix side {u.shape[0]} is not a multiple of n={g.n}")
        n_coins = u.shape[0] // g.n
    space = LiftedSpace(n_coins, g.n)
    return MeasuredUnitaryChannel(u, q, space, g)


def step(ch: KrausChannel, rho: DensityOp) -> DensityOp:
    """Apply one channel step, re-hermitize, and validate the result."""
    if rho.space != ch.space:
        raise ValueError("state and channel live on different spaces")
    out = ch.apply(rho.mat)
    out = (out + out.conj().T) / 2.0
    return DensityOp(out, ch.space, validate=True)


def init_map(p0, F: CoinAssignment) -> DensityOp:
    """Initialization map: ``p0`` on nodes becomes the diagonal mixture of
    ``|c_v, v><c_v, v|`` with weights ``p0(v)``."""
    w = as_weights(p0 if isinstance(p0, Dist) else Dist(p0))
    if w.size != F.n_nodes:
        raise ValueError(f"distribution over {w.size} nodes, assignment has {F.n_nodes}")
    space = F.space
    m = np.zeros((space.dim, space.dim), dtype=complex)
    idx = F.flat_indices()
    m[idx, idx] = w
    return DensityOp(m, space, validate=False)


def node_marginal(rho: DensityOp) -> Dist:
    """Node distribution induced by the canonical-basis diagonal of ``rho``."""
    diag = rho.mat.diagonal().real
    return Dist(diag.reshape(rho.space.n_coins, rho.space.n_nodes).sum(axis=0))


def node_marginal_raw(mat: np.ndarray, n_coins: int, n_nodes: int) -> np.ndarray:
    return mat.diagonal().real.reshape(n_coins, n_nodes).sum(axis=0)
