"""Concrete walk families: the coined cycle walk (quantum and classical
coin), the plain cycle random walk, and the torus chain with one coin
value per axis direction, plus the floor checks and the multiscale
experiment that contrast them.

Torus node indexing is mixed-radix: node ``(i_1, .., i_d)`` with
``i_k in 0..M-1`` has flat index ``sum_k i_k * M^(k-1)`` (first axis
fastest).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .chains import LiftedChain, StochMatrix, lifted_graph
from .channels import CoinAssignment, LiftedSpace, MeasuredUnitaryChannel
from .graphs import Dist, Graph
from .processes import induced_process

FLOOR_TOL = 1e-12


@dataclass(frozen=True)
class CycleParams:
    """Cycle walk parameters: size, coin bias, coin phases, measurement
    probability (defaults to 1/n when omitted)."""

    n: int
    alpha: float = 0.5
    phi: float = 0.0
    theta: float = 0.0
    q: float | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("cycle needs n >= 2")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha={self.alpha} outside [0, 1]")
        if self.q is not None and not 0.0 <= self.q <= 1.0:
            raise ValueError(f"q={self.q} outside [0, 1]")

    @property
    def q_value(self) -> float:
        return 1.0 / self.n if self.q is None else self.q


@dataclass(frozen=True)
class TorusParams:
    """Torus chain parameters: side, dimension, coin switch probability
    (defaults to 1/(2 d m)), and laziness (defaults to lazy iff m is even,
    which repairs the parity problem of the non-lazy chain)."""

    m: int
    d: int
    alpha: float | None = None
    lazy: bool | None = None

    def __post_init__(self):
        if self.m < 2 or self.d < 1:
            raise ValueError("torus needs m >= 2 and d >= 1")
        if self.alpha is not None:
            if self.alpha < 0.0 or 2 * self.d * self.alpha > 1.0 + 1e-12:
                raise ValueError(f"need 0 <= alpha and 2*d*alpha <= 1, got alpha={self.alpha}")

    @property
    def alpha_value(self) -> float:
        return 1.0 / (2 * self.d * self.m) if self.alpha is None else self.alpha

    @property
    def lazy_value(self) -> bool:
        return (self.m % 2 == 0) if self.lazy is None else self.lazy


def shift_matrix(n: int, sign: int) -> np.ndarray:
    """Cyclic permutation of node index by ``sign`` (+1 or -1)."""
    out = np.zeros((n, n))
    v = np.arange(n)
    out[(v + sign) % n, v] = 1.0
    return out


def coin_unitary(alpha: float, phi: float = 0.0, theta: float = 0.0) -> np.ndarray:
    """Two-level unitary coin with bias ``alpha`` and phases."""
    a, b = math.sqrt(1.0 - alpha), math.sqrt(alpha)
    return np.array(
        [
            [np.exp(-1j * phi) * a, np.exp(1j * theta) * b],
            [-np.exp(-1j * theta) * b, np.exp(1j * phi) * a],
        ]
    )


def stochastic_coin(alpha: float) -> np.ndarray:
    """Two-state coin flip matrix: switch with probability ``alpha``."""
    return np.array([[1.0 - alpha, alpha], [alpha, 1.0 - alpha]])


def cycle_walk_unitary(params: CycleParams) -> np.ndarray:
    """Conditional shift times the coin toss on the two-coin cycle space."""
    n = params.n
    cond = np.zeros((2 * n, 2 * n))
    cond[:n, :n] = shift_matrix(n, +1)
    cond[n:, n:] = shift_matrix(n, -1)
    coin = coin_unitary(params.alpha, params.phi, params.theta)
    return cond @ np.kron(coin, np.eye(n))


def cycle_qw(params: CycleParams) -> tuple[MeasuredUnitaryChannel, CoinAssignment]:
    """Measured coined walk on the cycle; coin 0 shifts forward, coin 1
    backward; all nodes start on coin 0."""
    g = Graph.cycle(params.n)
    space = LiftedSpace(2, params.n)
    channel = MeasuredUnitaryChannel(cycle_walk_unitary(params), params.q_value, space, g)
    return channel, CoinAssignment.constant(params.n, n_coins=2)


def cycle_lmc(n: int, alpha: float) -> LiftedChain:
    """Coined cycle chain: flip the direction coin with probability
    ``alpha``, then shift along the new direction."""
    if n < 2:
        raise ValueError("cycle needs n >= 2")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha={alpha} outside [0, 1]")
    g = Graph.cycle(n)
    coin = stochastic_coin(alpha)
    trans = np.zeros((2 * n, 2 * n))
    v = np.arange(n)
    for c_new, sign in ((0, +1), (1, -1)):
        dest = (v + sign) % n
        for c_old in (0, 1):
            trans[c_new * n + dest, c_old * n + v] = coin[c_new, c_old]
    sm = StochMatrix(trans, lifted_graph(g, 2))
    return LiftedChain(sm, CoinAssignment.constant(n, n_coins=2), g)


def classical_walk(n: int) -> StochMatrix:
    """Simple random walk on the cycle: step left or right with equal
    probability. Even cycles are periodic, so they get the lazy variant."""
    if n < 2:
        raise ValueError("cycle needs n >= 2")
    g = Graph.cycle(n)
    P = 0.5 * (shift_matrix(n, +1) + shift_matrix(n, -1))
    if n % 2 == 0:
        warnings.warn(
            f"cycle of even size {n} is periodic; using the lazy walk", RuntimeWarning
        )
        P = 0.5 * (P + np.eye(n))
    return StochMatrix(P, g)


# -- torus ---------------------------------------------------------------


def torus_shift_index(m: int, d: int, axis: int, sign: int) -> np.ndarray:
    """Permutation array: entry v is the flat index of node v with its
    ``axis`` coordinate shifted by ``sign`` (mod m)."""
    if not 0 <= axis < d:
        raise ValueError(f"axis {axis} out of range for d={d}")
    v = np.arange(m**d)
    stride = m**axis
    coord = (v // stride) % m
    return v + (((coord + sign) % m) - coord) * stride


def torus_graph(m: int, d: int) -> Graph:
    """Nearest-neighbor torus of side m in dimension d (plus loops)."""
    n = m**d
    v = np.arange(n)
    edges = []
    for axis in range(d):
        dest = torus_shift_index(m, d, axis, +1)
        edges.extend(zip(v.tolist(), dest.tolist()))
    return Graph(n, edges)


def torus_coin(d: int, alpha: float) -> np.ndarray:
    """Coin over the 2d axis directions: keep the current direction with
    probability 1 - (2d-1) alpha, switch to each other with alpha."""
    k = 2 * d
    return (1.0 - 2 * d * alpha) * np.eye(k) + alpha * np.ones((k, k))


def torus_lmc(params: TorusParams) -> LiftedChain:
    """Coined torus chain: coin 2k moves axis k forward, coin 2k+1
    backward; the coin occasionally switches direction."""
    m, d = params.m, params.d
    alpha = params.alpha_value
    n = m**d
    g = torus_graph(m, d)
    coin = torus_coin(d, alpha)
    nc = 2 * d
    trans = np.zeros((nc * n, nc * n))
    v = np.arange(n)
    for c_new in range(nc):
        axis, back = divmod(c_new, 2)
        dest = torus_shift_index(m, d, axis, -1 if back else +1)
        for c_old in range(nc):
            trans[c_new * n + dest, c_old * n + v] = coin[c_new, c_old]
    if params.lazy_value:
        trans = 0.5 * (trans + np.eye(nc * n))
    sm = StochMatrix(trans, lifted_graph(g, nc))
    return LiftedChain(sm, CoinAssignment.constant(n, n_coins=nc), g)


# -- floor checks on the torus chain --------------------------------------


def single_toss_probability(m: int) -> float:
    """Probability that exactly one coin switch occurs in 2m steps when
    each step switches with probability 1/m."""
    return 2.0 * (1.0 - 1.0 / m) ** (2 * m - 1)


def uniform_floor_horizon(m: int, d: int) -> int:
    """Number of steps after which the joint distribution provably
    dominates a constant fraction of uniform: 3m(d ln d + d) * 32e * d."""
    return math.ceil(3.0 * m * (d * math.log(d) + d) * 32.0 * math.e * d)


def coordinate_marginal(joint: np.ndarray, m: int, d: int, axis: int) -> np.ndarray:
    """Distribution of coordinate ``axis`` under a joint coin-node vector."""
    nc = joint.size // m**d
    # node part has axes (i_d, ..., i_1) when reshaped C-order
    cube = joint.reshape((nc,) + (m,) * d)
    keep = 1 + (d - 1 - axis)  # axis k is the (d-k)-th node axis
    other = tuple(i for i in range(1 + d) if i != keep)
    return cube.sum(axis=other)


@dataclass(frozen=True)
class LatticeCheckReport:
    """Floor checks on the torus chain: the single-switch closed form, the
    coordinate floor after 2m steps, and the elementwise uniform floor at
    the supplied horizon."""

    m: int
    d: int
    single_toss: float
    single_toss_ok: bool
    axis_floor: float  # min over atoms and values of the coordinate mass
    axis_threshold: float
    axis_ok: bool
    floor_horizon: int
    floor_margin: float  # min over atoms and states of p_T - q * uniform
    floor_ok: bool

    @property
    def ok(self) -> bool:
        return self.single_toss_ok and self.axis_ok and self.floor_ok

    def __bool__(self) -> bool:
        return self.ok


def lattice_floor_checks(params: TorusParams, T: int | None = None) -> LatticeCheckReport:
    """Exact-evolution verification of the torus chain floors.

    Requires odd ``m`` (the non-lazy chain is periodic otherwise) and the
    default switch probability. ``T`` defaults to the provable horizon.
    """
    m, d = params.m, params.d
    if m % 2 == 0:
        raise ValueError(f"parity problem: floor checks need odd m, got {m}")
    if params.lazy_value:
        raise ValueError("floor checks target the non-lazy chain")
    chain = torus_lmc(params)
    trans = chain.transition.m
    dim = trans.shape[0]
    nc = 2 * d

    toss = single_toss_probability(m)
    axis_threshold = 1.0 / (16.0 * d * m)

    # all atoms evolve together for 2m steps
    states = np.eye(dim)
    for _ in range(2 * m):
        states = trans @ states
    axis_floor = np.inf
    for c in range(nc):
        axis = c // 2
        for v in range(m**d):
            marg = coordinate_marginal(states[:, c * (m**d) + v], m, d, axis)
            axis_floor = min(axis_floor, float(marg.min()))

    if T is None:
        T = uniform_floor_horizon(m, d)
    power = np.linalg.matrix_power(trans, T)
    q = (1.0 - 1.0 / math.e) / 2.0
    floor_margin = float((power - q / dim).min())

    return LatticeCheckReport(
        m=m,
        d=d,
        single_toss=toss,
        single_toss_ok=toss >= 1.0 / 8.0,
        axis_floor=float(axis_floor),
        axis_threshold=axis_threshold,
        axis_ok=axis_floor >= axis_threshold - FLOOR_TOL,
        floor_horizon=T,
        floor_margin=floor_margin,
        floor_ok=floor_margin >= -FLOOR_TOL,
    )


# -- multiscale contrast ---------------------------------------------------


@dataclass(frozen=True)
class MultiscaleReport:
    """Window-restricted distances to uniform for the quantum and the
    classical coined cycle walk at one time."""

    n: int
    t: int
    start: int
    window: tuple[int, ...]
    qw_tv: float
    lmc_tv: float


def window_nodes(n: int, start: int, t: int) -> tuple[int, ...]:
    """The 2t+1 nodes nearest ``start`` on the cycle (all nodes once the
    window wraps)."""
    if 2 * t + 1 >= n:
        return tuple(range(n))
    return tuple((start + off) % n for off in range(-t, t + 1))


def window_tv(p: np.ndarray, window: tuple[int, ...]) -> float:
    """Distance between the renormalized restriction of ``p`` to the
    window and the uniform distribution on the window."""
    idx = list(window)
    mass = p[idx].sum()
    if mass <= 0.0:
        return 1.0
    local = p[idx] / mass
    return 0.5 * float(np.abs(local - 1.0 / len(idx)).sum())


def multiscale_experiment(n: int, t: int, start: int = 0) -> MultiscaleReport:
    """Compare how well the fast quantum walk and the fast coined chain
    mix over the window of nodes reachable in ``t`` steps."""
    if not 0 <= t < n:
        raise ValueError(f"need 0 <= t < n, got t={t}, n={n}")
    channel, coins = cycle_qw(CycleParams(n=n, alpha=0.5, q=1.0 / n))
    qw = induced_process(channel, coins)
    lmc = cycle_lmc(n, 1.0 / n).process()
    p0 = Dist.delta(n, start)
    window = window_nodes(n, start, t)
    q_tv = window_tv(qw.trajectory(p0, t)[t], window)
    l_tv = window_tv(lmc.trajectory(p0, t)[t], window)
    return MultiscaleReport(n=n, t=t, start=start, window=window, qw_tv=q_tv, lmc_tv=l_tv)


def multiscale_curve(n: int, t_max: int, start: int = 0) -> list[MultiscaleReport]:
    """Multiscale comparison at every time up to ``t_max`` (one evolution
    pass per walk)."""
    if not 0 <= t_max < n:
        raise ValueError(f"need 0 <= t_max < n, got t_max={t_max}, n={n}")
    channel, coins = cycle_qw(CycleParams(n=n, alpha=0.5, q=1.0 / n))
    qw = induced_process(channel, coins)
    lmc = cycle_lmc(n, 1.0 / n).process()
    p0 = Dist.delta(n, start)
    qw_traj = qw.trajectory(p0, t_max)
    lmc_traj = lmc.trajectory(p0, t_max)
    out = []
    for t in range(t_max + 1):
        window = window_nodes(n, start, t)
        out.append(
            MultiscaleReport(
                n=n,
                t=t,
                start=start,
                window=window,
                qw_tv=window_tv(qw_traj[t], window),
                lmc_tv=window_tv(lmc_traj[t], window),
            )
        )
    return out
