"""Shared deterministic fixture builders for the test suite."""

from __future__ import annotations

import itertools
import zlib

import numpy as np
import pytest

from walklift import (
    CoinAssignment,
    CycleParams,
    Graph,
    LiftedChain,
    StochMatrix,
    cycle_qw,
    induced_process,
    lifted_graph,
)


def rng_for(name: str) -> np.random.Generator:
    return np.random.default_rng(zlib.crc32(name.encode()))


def random_connected_graph(rng: np.random.Generator, n: int, extra_edges: int = 2) -> Graph:
    """Random spanning tree plus a few chords; undirected, loops implied."""
    order = rng.permutation(n)
    edges = [(int(order[i]), int(order[rng.integers(0, i)])) for i in range(1, n)]
    for _ in range(extra_edges):
        v, w = rng.integers(0, n, size=2)
        if v != w:
            edges.append((int(v), int(w)))
    return Graph(n, edges)


def random_local_matrix(rng: np.random.Generator, g: Graph) -> StochMatrix:
    """Column-stochastic matrix supported exactly on the graph mask."""
    n = g.n
    m = np.zeros((n, n))
    mask = g.mask
    for v in range(n):
        rows = np.nonzero(mask[:, v])[0]
        weights = rng.gamma(1.0, 1.0, size=rows.size)
        m[rows, v] = weights / weights.sum()
    return StochMatrix(m, g)


def random_lifted_chain(rng: np.random.Generator, g: Graph, n_coins: int) -> LiftedChain:
    """Lifted chain with full support on the lifted mask (irreducible when
    the base graph is connected)."""
    lg = lifted_graph(g, n_coins)
    trans = random_local_matrix(rng, lg)
    coins = CoinAssignment(rng.integers(0, n_coins, size=g.n), n_coins)
    return LiftedChain(trans, coins, g)


def random_cycle_channel(rng: np.random.Generator, n: int | None = None):
    """Measured coined cycle walk with random parameters; preserves the
    uniform distribution by translation symmetry."""
    if n is None:
        n = int(rng.integers(4, 9))
    params = CycleParams(
        n=n,
        alpha=float(rng.uniform(0.1, 0.9)),
        phi=float(rng.uniform(0, 2 * np.pi)),
        theta=float(rng.uniform(0, 2 * np.pi)),
        q=float(rng.uniform(0.05, 1.0)),
    )
    return cycle_qw(params)


def random_dist(rng: np.random.Generator, n: int) -> np.ndarray:
    w = rng.gamma(1.0, 1.0, size=n)
    return w / w.sum()


def brute_force_locality_ok(y, z, g: Graph, slack: float = 1e-9) -> bool:
    """Independent check of the population inequality by explicit subset
    iteration (no bitmask tricks)."""
    n = g.n
    nodes = list(range(n))
    for r in range(1, n + 1):
        for X in itertools.combinations(nodes, r):
            Xset = set(X)
            boundary = {
                v
                for v in nodes
                if v not in Xset and any(g.has_edge(v, w) for w in Xset)
            }
            lhs = sum(z[v] for v in Xset)
            rhs = sum(y[v] for v in Xset) + sum(y[v] for v in boundary)
            if lhs > rhs + slack:
                return False
    return True


def brute_force_phi(P: np.ndarray, pbar: np.ndarray):
    """Independent chain conductance by explicit cut iteration."""
    n = P.shape[0]
    best, best_cut = np.inf, None
    for r in range(1, n + 1):
        for X in itertools.combinations(range(n), r):
            mass = sum(pbar[v] for v in X)
            if not 0.0 < mass <= 0.5 + 1e-12:
                continue
            flow = sum(P[w, v] * pbar[v] for v in X for w in range(n) if w not in X)
            phi = flow / mass
            if phi < best:
                best, best_cut = phi, X
    return best, best_cut


@pytest.fixture
def rng(request) -> np.random.Generator:
    return rng_for(request.node.nodeid)
