"""Column-stochastic matrices with a graph locality mask, lifted Markov
chains over a coin-node space, stationary distributions, and the induced
chain on the base nodes.

Column convention throughout: ``p_{t+1} = P p_t``, so entry ``(v', v)`` is
the transition probability from ``v`` to ``v'``.
"""

from __future__ import annotations

import warnings

import numpy as np

from .channels import CoinAssignment, DephasingChainChannel
from .graphs import Dist, DUST_TOL, Graph, as_weights
from .processes import ChainProcess

COLUMN_TOL = 1e-9
STATIONARY_TOL = 1e-12
STATIONARY_MAX_ITER = 10**6


class StochMatrix:
    """Column-stochastic matrix whose zero pattern respects a graph mask.

    Entries at positions forbidden by the mask must be exactly zero; on
    allowed positions any nonnegative value is fine.
    """

    __slots__ = ("m", "graph")

    def __init__(self, matrix, graph: Graph, check: bool = True):
        m = np.array(matrix, dtype=float)
        if m.shape != (graph.n, graph.n):
            raise ValueError(f"matrix shape {m.shape} does not match graph n={graph.n}")
        if check:
            lo = m.min()
            if lo < -DUST_TOL:
                raise ValueError(f"negative entry {lo!r}")
            np.clip(m, 0.0, None, out=m)
            sums = m.sum(axis=0)
            worst = np.abs(sums - 1.0).max()
            if worst > COLUMN_TOL:
                col = int(np.argmax(np.abs(sums - 1.0)))
                raise ValueError(f"column {col} sums to {sums[col]!r}")
            off = m[~graph.mask]
            if off.size and np.abs(off).max() > 0.0:
                bad = np.argwhere((~graph.mask) & (m != 0.0))[0]
                raise ValueError(
                    f"entry ({bad[0]}, {bad[1]}) = {m[bad[0], bad[1]]!r} outside the locality mask"
                )
        m.flags.writeable = False
        self.m = m
        self.graph = graph

    @property
    def n(self) -> int:
        return self.graph.n

    def apply(self, p) -> np.ndarray:
        return self.m @ as_weights(p)

    def __matmul__(self, other):
        if isinstance(other, StochMatrix):
            return self.m @ other.m
        return self.m @ other

    @classmethod
    def identity(cls, graph: Graph) -> "StochMatrix":
        return cls(np.eye(graph.n), graph, check=False)

    def __repr__(self) -> str:
        return f"StochMatrix(n={self.n})"


def lifted_graph(g: Graph, n_coins: int) -> Graph:
    """Graph on the coin-node product: ``(c, v) -> (c', v')`` allowed for
    every coin pair whenever ``(v, v')`` is an edge of the base graph."""
    n = g.n
    edges = []
    for v, w in g.edges:
        for c in range(n_coins):
            for cp in range(n_coins):
                edges.append((c * n + v, cp * n + w))
    return Graph(n_coins * n, edges, directed=True)


class LiftedChain:
    """Markov chain on the coin-node product with an initialization map."""

    __slots__ = ("transition", "coins", "graph", "space")

    def __init__(self, transition: StochMatrix, coins: CoinAssignment, graph: Graph):
        space = coins.space
        if space.n_nodes != graph.n:
            raise ValueError(f"coin assignment covers {space.n_nodes} nodes, graph has {graph.n}")
        if transition.n != space.dim:
            raise ValueError(
                f"transition side {transition.n} does not match coin-node dim {space.dim}"
            )
        self.transition = transition
        self.coins = coins
        self.graph = graph
        self.space = space

    @property
    def n_coins(self) -> int:
        return self.space.n_coins

    @property
    def n_nodes(self) -> int:
        return self.space.n_nodes

    def process(self) -> ChainProcess:
        return ChainProcess(
            self.transition.m, self.n_nodes, self.coins.flat_indices(), graph=self.graph
        )

    def __repr__(self) -> str:
        return f"LiftedChain(n_coins={self.n_coins}, n_nodes={self.n_nodes})"


def from_matrix(P: StochMatrix) -> LiftedChain:
    """View a plain chain on nodes as a lifted chain with a single coin."""
    coins = CoinAssignment.constant(P.n, n_coins=1)
    return LiftedChain(P, coins, P.graph)


def lmc_evolve(chain: LiftedChain, p0, t: int) -> Dist:
    """Node marginal after ``t`` steps of the joint chain started at F[p0]."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return chain.process().distribution(p0, t)


def as_channel(chain: LiftedChain) -> DephasingChainChannel:
    """Embed the chain as a quantum channel with one rank-one Kraus
    operator per nonzero transition probability."""
    return DephasingChainChannel(chain.transition.m, chain.space, chain.graph)


def _strongly_connected(pattern: np.ndarray) -> bool:
    n = pattern.shape[0]

    def reach(adj: np.ndarray) -> np.ndarray:
        seen = np.zeros(n, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            v = stack.pop()
            for w in np.nonzero(adj[:, v])[0]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(int(w))
        return seen

    return bool(reach(pattern).all() and reach(pattern.T).all())


def is_irreducible(P) -> bool:
    """Strong connectivity of the nonzero pattern (column convention)."""
    m = P.m if isinstance(P, StochMatrix) else np.asarray(P, dtype=float)
    return _strongly_connected(m != 0.0)


def stationary(P, tol: float = STATIONARY_TOL, max_iter: int = STATIONARY_MAX_ITER) -> Dist:
    """Stationary distribution of an irreducible column-stochastic matrix.

    Power iteration on the lazy chain ``(P + I)/2``, which has the same
    fixed point but no periodicity, until the residual of the original
    chain drops below ``tol`` in 1-norm.
    """
    m = P.m if isinstance(P, StochMatrix) else np.asarray(P, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("transition matrix must be square")
    if not is_irreducible(m):
        raise ValueError("chain is reducible; stationary distribution not unique")
    n = m.shape[0]
    p = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        moved = m @ p
        if np.abs(moved - p).sum() <= tol:
            return Dist(p)
        p = 0.5 * (moved + p)
    raise RuntimeError(f"power iteration did not converge within {max_iter} iterations")


def joint_stationary(chain: LiftedChain) -> Dist:
    """Stationary distribution of the joint chain over coin-node pairs."""
    return stationary(chain.transition)


def induced_chain(chain: LiftedChain) -> StochMatrix:
    """Average the lifted transitions under the joint stationary
    distribution into a chain on the base nodes.

    Built so that ergodic flows through every base cut match those of the
    lifted chain through the corresponding lifted cut.
    """
    phat = joint_stationary(chain).w
    nc, nv = chain.n_coins, chain.n_nodes
    weights = phat.reshape(nc, nv)
    pbar = weights.sum(axis=0)
    keep = pbar > 0.0
    if not keep.all():
        warnings.warn(
            "nodes with zero stationary mass removed from the induced chain",
            RuntimeWarning,
        )
    # P_V(v', v) = sum_{c, c'} phat(c, v)/pbar(v) * P((c', v'), (c, v))
    lifted = chain.transition.m.reshape(nc, nv, nc, nv)
    cond = np.zeros((nc, nv))
    cond[:, keep] = weights[:, keep] / pbar[keep]
    out = np.einsum("aubv,bv->uv", lifted, cond)
    out[np.ix_(~keep, ~keep)] += np.eye(int((~keep).sum()))  # park dead nodes on loops
    return StochMatrix(out, chain.graph)


def ergodic_flow_matrix(P, pbar) -> np.ndarray:
    """Matrix ``F[v', v] = P[v', v] * pbar(v)`` of stationary edge flows."""
    m = P.m if isinstance(P, StochMatrix) else np.asarray(P, dtype=float)
    return m * as_weights(pbar)[np.newaxis, :]
