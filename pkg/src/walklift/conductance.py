"""Cut conductance, chain conductance, graph conductance, and the
bound checks they support.

Graph conductance is the best conductance achievable by any local chain
that keeps the target distribution invariant; it is computed exactly as a
linear program with one constraint per qualifying cut. For tori a
translation-symmetry reduction gives the same value with a tiny LP, which
keeps the torus cases tractable where materializing all cuts is not.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .chains import StochMatrix, ergodic_flow_matrix, is_irreducible
from .graphs import Dist, Graph, NodeSet, as_weights, tv_distance
from .mixing import mixing_time
from .processes import ChainProcess, ChannelProcess, CesaroProcess, StochProcess, check_invariance
from .simplex import solve_lp

INVARIANT_TOL = 1e-9
CUT_MASS_TOL = 1e-12
LP_NODE_LIMIT = 14
SCAN_NODE_LIMIT = 20
ENUM_NODE_LIMIT = 26
_CHUNK_BITS = 18


@dataclass(frozen=True)
class CutReport:
    """One cut of a chain: its ergodic outflow, mass, and conductance."""

    cut: NodeSet
    ergodic_flow: float
    cut_mass: float
    phi: float


@dataclass(frozen=True)
class ConductanceResult:
    """Graph conductance value with an optimal witness chain."""

    phi: float
    witness: StochMatrix
    witness_cut: CutReport
    method: str
    n_constraints: int


def _mask_bits(masks: np.ndarray, n: int) -> np.ndarray:
    """Bit matrix (len(masks), n) of the node memberships of each mask."""
    m32 = np.ascontiguousarray(masks.astype("<u4"))
    bits = np.unpackbits(m32.view(np.uint8).reshape(-1, 4), axis=1, bitorder="little")
    return bits[:, :n].astype(bool)


def _invariance_residual(m: np.ndarray, pbar: np.ndarray) -> float:
    return float(np.abs(m @ pbar - pbar).sum())


def ergodic_flow(P, pbar, X: NodeSet) -> float:
    """Stationary mass crossing from ``X`` to its complement in one step."""
    F = ergodic_flow_matrix(P, pbar)
    inside = X.indicator()
    return float(F[np.ix_(~inside, inside)].sum())


def phi_cut(P, pbar, X: NodeSet) -> float:
    """Conductance of one cut: crossing flow normalized by cut mass."""
    m = P.m if isinstance(P, StochMatrix) else np.asarray(P, dtype=float)
    w = as_weights(pbar)
    if _invariance_residual(m, w) > INVARIANT_TOL:
        raise ValueError("pbar is not invariant under P")
    mass = float(w[list(X.members())].sum()) if len(X) else 0.0
    if mass <= 0.0:
        raise ValueError("cut has no stationary mass")
    if mass > 0.5 + CUT_MASS_TOL:
        raise ValueError(f"cut mass {mass!r} exceeds 1/2")
    return ergodic_flow(m, w, X) / mass


def _cut_stats(F: np.ndarray, pbar: np.ndarray, support: np.ndarray):
    """Mass and crossing flow of every subset of the support nodes.

    Returns (masks, mass, flow) where entry i describes the subset of
    support nodes encoded by mask i (over the support indexing).
    """
    k = support.size
    Fs = F[np.ix_(support, support)]
    ps = pbar[support]
    colsum = Fs.sum(axis=0)
    size = 1 << k
    masks = np.arange(size, dtype=np.int64)
    mass = np.zeros(size)
    flow = np.zeros(size)
    step = 1 << min(_CHUNK_BITS, k)
    for lo in range(0, size, step):
        chunk = masks[lo : lo + step]
        bits = _mask_bits(chunk, k)
        mass[lo : lo + step] = bits @ ps
        inflow = bits @ Fs.T  # [i, v'] = flow into v' from members of mask i
        within = (inflow * bits).sum(axis=1)
        flow[lo : lo + step] = bits @ colsum - within
    return masks, mass, flow


def phi_chain(P, pbar) -> tuple[float, CutReport]:
    """Minimum cut conductance over all cuts with mass in (0, 1/2]."""
    m = P.m if isinstance(P, StochMatrix) else np.asarray(P, dtype=float)
    w = as_weights(pbar)
    n = m.shape[0]
    if n > SCAN_NODE_LIMIT:
        raise ValueError(f"exhaustive cut scan needs n <= {SCAN_NODE_LIMIT}, got {n}")
    if _invariance_residual(m, w) > INVARIANT_TOL:
        raise ValueError("pbar is not invariant under P")
    support = np.nonzero(w > 0.0)[0]
    if support.size < n:
        warnings.warn("zero-mass nodes excluded from cut enumeration", RuntimeWarning)
    if support.size < 2:
        raise ValueError("no qualifying cut: need at least two nodes with mass")
    F = ergodic_flow_matrix(m, w)
    masks, mass, flow = _cut_stats(F, w, support)
    ok = (masks > 0) & (mass > 0.0) & (mass <= 0.5 + CUT_MASS_TOL)
    if not ok.any():
        raise ValueError("no qualifying cut")
    phis = np.where(ok, flow / np.where(mass > 0, mass, 1.0), np.inf)
    best = int(np.argmin(phis))
    cut = NodeSet.from_nodes(n, [int(support[v]) for v in range(support.size) if best >> v & 1])
    report = CutReport(
        cut=cut,
        ergodic_flow=float(flow[best]),
        cut_mass=float(mass[best]),
        phi=float(phis[best]),
    )
    return report.phi, report


def graph_conductance(g: Graph, pbar) -> ConductanceResult:
    """Best conductance of any local chain leaving ``pbar`` invariant.

    Exact LP over the transition probabilities with one crossing-flow
    constraint per qualifying cut. Cut rows are generated on demand: each
    round solves the LP over the active cuts and then scans every cut of
    the candidate chain (vectorized, exhaustive); the round ends when no
    cut is violated, which certifies the value over the full cut family.
    """
    n = g.n
    if n > LP_NODE_LIMIT:
        raise ValueError(f"graph conductance LP needs n <= {LP_NODE_LIMIT}, got {n}")
    w = as_weights(pbar)
    if w.shape != (n,):
        raise ValueError("pbar does not match the graph")
    support = np.nonzero(w > 0.0)[0]
    if support.size < n:
        warnings.warn("zero-mass nodes excluded from cut enumeration", RuntimeWarning)
    if support.size < 2:
        raise ValueError("no qualifying cut: need at least two nodes with mass")

    edges = sorted(g.edges)
    eidx = {e: i for i, e in enumerate(edges)}
    nvar = len(edges) + 1  # transition probabilities plus the bound t
    t_col = len(edges)

    A_eq = np.zeros((2 * n, nvar))
    b_eq = np.zeros(2 * n)
    for v in range(n):  # columns sum to one
        for w_ in range(n):
            if (v, w_) in eidx:
                A_eq[v, eidx[(v, w_)]] = 1.0
        b_eq[v] = 1.0
    for v_ in range(n):  # invariance rows
        for u in range(n):
            if (u, v_) in eidx:
                A_eq[n + v_, eidx[(u, v_)]] = w[u]
        b_eq[n + v_] = w[v_]

    def cut_row(members: frozenset[int]) -> np.ndarray:
        row = np.zeros(nvar)
        for i, (v, vp) in enumerate(edges):
            if v in members and vp not in members:
                row[i] = -w[v]
        row[t_col] = sum(w[v] for v in members)
        return row

    # singleton cuts bound t from the start; further cuts join as violated
    active: list[frozenset[int]] = [
        frozenset([int(v)]) for v in support if w[v] <= 0.5 + CUT_MASS_TOL
    ]
    seen = set(active)
    c = np.zeros(nvar)
    c[t_col] = -1.0  # maximize t
    max_rounds = 1 << min(support.size, LP_NODE_LIMIT)
    for _ in range(max_rounds):
        A_ub = np.array([cut_row(m) for m in active])
        res = solve_lp(c, A_ub=A_ub, b_ub=np.zeros(len(active)), A_eq=A_eq, b_eq=b_eq)
        phi = float(res.x[t_col])
        P = np.zeros((n, n))
        for i, (v, vp) in enumerate(edges):
            P[vp, v] = max(res.x[i], 0.0)
        P /= P.sum(axis=0, keepdims=True)
        witness = StochMatrix(P, g)
        value, report = phi_chain(witness, w)
        if value >= phi - 1e-9:
            return ConductanceResult(
                phi=phi,
                witness=witness,
                witness_cut=report,
                method="lp",
                n_constraints=len(active),
            )
        violated = frozenset(report.cut.members())
        if violated in seen:  # numerically stuck; accept the certified value
            return ConductanceResult(
                phi=value,
                witness=witness,
                witness_cut=report,
                method="lp",
                n_constraints=len(active),
            )
        active.append(violated)
        seen.add(violated)
    raise RuntimeError("cut generation did not converge")


def _cycle_profiles(n: int):
    """Analytic cut profiles of the cycle: a cut of size s splits into b
    maximal arcs for any 1 <= b <= min(s, n - s), each arc contributing one
    boundary crossing per direction."""
    profiles = []
    masks = []
    for s in range(1, n // 2 + 1):
        for b in range(1, min(s, n - s) + 1):
            # representative: b arcs, sizes as equal as possible, single gaps
            sizes = [s // b + (1 if i < s % b else 0) for i in range(b)]
            mask, pos = 0, 0
            for size in sizes:
                for _ in range(size):
                    mask |= 1 << pos
                    pos += 1
                pos += 1  # gap
            profiles.append((float(b), float(s)))
            masks.append(mask)
    b = np.array([[p[0]] for p in profiles])
    s = np.array([p[1] for p in profiles])
    return b, s, np.array(masks, dtype=object)


def _torus_profiles(m: int, d: int):
    """Distinct (boundary-per-axis, size) profiles over all qualifying cuts
    of the d-dimensional torus of side m, with one representative mask each."""
    from .lattices import torus_shift_index

    if d == 1:
        return _cycle_profiles(m)
    n = m**d
    if n > ENUM_NODE_LIMIT:
        raise ValueError(f"cut profile enumeration needs m**d <= {ENUM_NODE_LIMIT}, got {n}")
    perms = [torus_shift_index(m, d, axis, -1) for axis in range(d)]
    half = n // 2
    base = n + 1
    reps: dict[int, int] = {}
    size = 1 << n
    step = 1 << min(_CHUNK_BITS, n)
    for lo in range(0, size, step):
        masks = np.arange(lo, min(lo + step, size), dtype=np.int64)
        bits = _mask_bits(masks, n)
        s = bits.sum(axis=1)
        ok = (s >= 1) & (s <= half)
        if not ok.any():
            continue
        bits = bits[ok]
        masks = masks[ok]
        s = s[ok]
        code = s.astype(np.int64)
        mult = base
        for axis in range(d):
            overlap = (bits & bits[:, perms[axis]]).sum(axis=1)
            b_axis = s - overlap
            code = code + mult * b_axis
            mult *= base
        uniq, first = np.unique(code, return_index=True)
        for u, f in zip(uniq.tolist(), first.tolist()):
            if u not in reps:
                reps[u] = int(masks[f])
    codes = np.array(sorted(reps), dtype=np.int64)
    s = (codes % base).astype(float)
    b = np.empty((codes.size, d))
    rest = codes // base
    for axis in range(d):
        b[:, axis] = (rest % base).astype(float)
        rest = rest // base
    masks_rep = np.array([reps[int(c)] for c in codes], dtype=np.int64)
    return b, s, masks_rep


def _pareto_keep(b: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Drop LP rows implied by another row with fewer boundary crossings
    and at least the same size."""
    p = b.shape[0]
    keep = np.ones(p, dtype=bool)
    for i in range(p):
        if not keep[i]:
            continue
        dominated = (b >= b[i]).all(axis=1) & (s <= s[i])
        dominated[i] = False
        strict = (b > b[i]).any(axis=1) | (s < s[i])
        keep &= ~(dominated & strict)
        keep[i] = True
    return keep


def torus_graph_conductance(m: int, d: int) -> ConductanceResult:
    """Graph conductance of the d-dimensional torus of side m under the
    uniform distribution.

    Averaging any feasible chain over the translation group preserves
    feasibility and cannot lower its conductance, so the optimum is
    attained by a convolution chain. That collapses the LP to one weight
    per axis, with one constraint per distinct cut boundary profile.
    """
    from .lattices import torus_graph, torus_shift_index

    n = m**d
    b, s, masks_rep = _torus_profiles(m, d)
    keep = _pareto_keep(b, s)
    bk, sk = b[keep], s[keep]

    nvar = d + 1
    A_ub = np.zeros((keep.sum() + 1, nvar))
    A_ub[:-1, :d] = -bk
    A_ub[:-1, d] = sk
    A_ub[-1, :d] = 1.0  # axis weights total at most one
    b_ub = np.zeros(keep.sum() + 1)
    b_ub[-1] = 1.0
    c = np.zeros(nvar)
    c[d] = -1.0
    res = solve_lp(c, A_ub=A_ub, b_ub=b_ub)
    u = np.maximum(res.x[:d], 0.0)
    phi = float(res.x[d])

    g = torus_graph(m, d)
    P = np.zeros((n, n))
    nodes = np.arange(n)
    P[nodes, nodes] = max(1.0 - u.sum(), 0.0)
    for axis in range(d):
        for sign in (+1, -1):
            perm = torus_shift_index(m, d, axis, sign)
            P[perm, nodes] += u[axis] / 2.0
    P /= P.sum(axis=0, keepdims=True)
    witness = StochMatrix(P, g)

    # exact conductance of the witness over every cut, via the profiles
    values = (b @ u) / s
    arg = int(np.argmin(values))
    cut = NodeSet(n, int(masks_rep[arg]))
    report = CutReport(
        cut=cut,
        ergodic_flow=float((b[arg] @ u) / n),
        cut_mass=float(s[arg] / n),
        phi=float(values[arg]),
    )
    return ConductanceResult(
        phi=phi,
        witness=witness,
        witness_cut=report,
        method="translation-symmetric",
        n_constraints=int(keep.sum()),
    )


def structural_locality_ok(proc: StochProcess, g: Graph) -> bool:
    """Locality of a process with respect to ``g``, certified from its
    generating object: the zero pattern of a chain, or the Kraus zero
    patterns of a channel."""
    if isinstance(proc, CesaroProcess):
        return structural_locality_ok(proc.base, g)
    if isinstance(proc, ChannelProcess):
        return all(not ch.locality_violations(g) for ch in proc.schedule)
    if isinstance(proc, ChainProcess):
        n = proc.n
        if g.n != n:
            return False
        coo = proc.transition.tocoo()
        src = coo.col % n
        dst = coo.row % n
        return bool(g.edge_matrix[src, dst].all())
    return False


@dataclass(frozen=True)
class BoundCheckReport:
    """Outcome of the conductance lower-bound check on a process."""

    applicable: bool
    local_ok: bool
    invariant_ok: bool
    phi: float | None
    bound: float | None  # 1 / (4 phi)
    tau: int | None  # measured tau(1/4), None if unresolved in the horizon
    tau_floor: int  # largest certified lower estimate of tau
    holds: bool | None  # None when the horizon cannot decide
    detail: str

    def __bool__(self) -> bool:
        return bool(self.holds)


def mixing_lower_bound_check(
    proc: StochProcess,
    pbar,
    g: Graph,
    horizon: int,
    phi: float | None = None,
) -> BoundCheckReport:
    """Check that the measured 1/4-mixing time respects the conductance
    lower bound ``1/(4 phi) - 1`` (one step of integer-time slack).

    Locality and invariance are verified first; when either fails the
    bound does not apply and the report says so instead of asserting.
    """
    local_ok = structural_locality_ok(proc, g)
    if not local_ok and g.n <= SCAN_NODE_LIMIT:
        from .graphs import check_locality_trace

        scan_steps = min(horizon, SCAN_NODE_LIMIT)
        local_ok = all(
            check_locality_trace(proc.trajectory(Dist.delta(g.n, v), scan_steps), g).ok
            for v in range(g.n)
        )
    invariant_ok = check_invariance(proc, pbar, horizon)
    if not (local_ok and invariant_ok):
        return BoundCheckReport(
            applicable=False,
            local_ok=local_ok,
            invariant_ok=invariant_ok,
            phi=None,
            bound=None,
            tau=None,
            tau_floor=0,
            holds=None,
            detail="bound not applicable: process is not local and invariant",
        )
    if phi is None:
        phi = graph_conductance(g, pbar).phi
    bound = 1.0 / (4.0 * phi)
    result = mixing_time(proc, pbar, 0.25, horizon)
    traj = np.asarray(result.trajectory)
    above = np.nonzero(traj > 0.25)[0]
    tau_floor = int(above[-1] + 1) if above.size else 0
    tau_eff = result.tau if result.tau is not None else tau_floor
    if result.tau is None and tau_eff < bound - 1.0 - INVARIANT_TOL:
        return BoundCheckReport(
            applicable=True,
            local_ok=True,
            invariant_ok=True,
            phi=phi,
            bound=bound,
            tau=None,
            tau_floor=tau_floor,
            holds=None,
            detail=f"horizon {horizon} too short to decide: tau > {tau_floor}, bound {bound:.6g}",
        )
    holds = tau_eff >= bound - 1.0 - INVARIANT_TOL
    return BoundCheckReport(
        applicable=True,
        local_ok=True,
        invariant_ok=True,
        phi=phi,
        bound=bound,
        tau=result.tau,
        tau_floor=tau_floor,
        holds=holds,
        detail=f"tau(1/4) = {result.tau if result.tau is not None else f'> {tau_floor}'}"
        f" vs bound {bound:.6g} - 1",
    )


@dataclass(frozen=True)
class EscapeReport:
    """Escape-mass bound along the evolution of a cut-conditioned start."""

    ok: bool
    phi_x: float
    escape_masses: tuple[float, ...]
    tv_distances: tuple[float, ...]
    worst_slack: float

    def __bool__(self) -> bool:
        return self.ok


def escape_bound_check(P, pbar, X: NodeSet, tmax: int, tol: float = 1e-10) -> EscapeReport:
    """Verify that mass escaping ``X`` grows at most linearly: after t
    steps from the stationary distribution conditioned on ``X``, the mass
    outside ``X`` is at most ``t * phi_X``, with the total variation to the
    start sitting between the two."""
    m = P.m if isinstance(P, StochMatrix) else np.asarray(P, dtype=float)
    w = as_weights(pbar)
    if not is_irreducible(m):
        raise ValueError("escape bound needs an irreducible chain")
    if _invariance_residual(m, w) > INVARIANT_TOL:
        raise ValueError("pbar is not invariant under P")
    phi_x = phi_cut(m, w, X)
    start = Dist(w).restricted_to(X).w
    outside = ~X.indicator()
    p = start.copy()
    masses, tvs = [], []
    worst = 0.0
    ok = True
    for t in range(tmax + 1):
        mass_out = float(p[outside].sum())
        tv = tv_distance(p, start)
        masses.append(mass_out)
        tvs.append(tv)
        slack = max(mass_out - tv, tv - t * phi_x)
        worst = max(worst, slack)
        if mass_out > tv + tol or tv > t * phi_x + tol:
            ok = False
        p = m @ p
    return EscapeReport(
        ok=ok,
        phi_x=phi_x,
        escape_masses=tuple(masses),
        tv_distances=tuple(tvs),
        worst_slack=worst,
    )
