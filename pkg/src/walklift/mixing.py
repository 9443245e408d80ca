"""Mixing times and total-variation trajectories for stochastic processes.

The worst case over initial distributions is evaluated on basis vectors
only: the maps are linear and total variation is convex, so the maximum
over the probability simplex is attained at a vertex. Every result records
that reduction. A reported mixing time is a finite-horizon certificate:
the distance stayed below the threshold from that time through the
horizon, nothing is extrapolated beyond it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .graphs import as_weights
from .processes import StochProcess

BASIS_REDUCTION_NOTE = (
    "worst case over initial distributions evaluated on basis vectors; "
    "valid because the maps are linear and total variation is convex on the simplex"
)


@dataclass(frozen=True)
class MixingResult:
    """Finite-horizon mixing-time certificate.

    ``tau`` is the smallest time from which the worst-case distance stays
    at or below ``epsilon`` through the horizon, or None when the horizon
    cannot certify any such time.
    """

    epsilon: float
    tau: int | None
    horizon: int
    worst_start: int
    trajectory: tuple[float, ...]
    argmax_starts: tuple[int, ...]
    justification: str = BASIS_REDUCTION_NOTE

    @property
    def resolved(self) -> bool:
        return self.tau is not None


def default_horizon(proc: StochProcess) -> int:
    factor = 40 if proc.kind == "qw" else 20
    return factor * proc.n


def tv_trajectory(proc: StochProcess, pbar, horizon: int) -> tuple[np.ndarray, np.ndarray]:
    """Worst-case distance to ``pbar`` at each time, over basis starts.

    Returns (max_tv, argmax_start), each of length ``horizon + 1``.
    """
    w = as_weights(pbar)
    if w.shape != (proc.n,):
        raise ValueError(f"pbar has shape {w.shape}, expected ({proc.n},)")
    max_tv = np.empty(horizon + 1)
    argmax = np.empty(horizon + 1, dtype=int)
    for t, marg in enumerate(proc.iter_basis_marginals(horizon)):
        dists = 0.5 * np.abs(marg - w[:, np.newaxis]).sum(axis=0)
        argmax[t] = int(np.argmax(dists))
        max_tv[t] = float(dists[argmax[t]])
    return max_tv, argmax


def mixing_time(proc: StochProcess, pbar, epsilon: float, horizon: int | None = None) -> MixingResult:
    """Smallest time with worst-case distance persistently at or below
    ``epsilon`` through the horizon."""
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    if horizon is None:
        horizon = default_horizon(proc)
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    max_tv, argmax = tv_trajectory(proc, pbar, horizon)
    above = np.nonzero(max_tv > epsilon)[0]
    if above.size == 0:
        tau: int | None = 0
        worst = int(argmax[0])
    elif above[-1] + 1 >= horizon:
        # a crossing at the horizon edge certifies nothing (the
        # persistence window would be empty or a single point)
        tau = None
        worst = int(argmax[above[-1]])
    else:
        tau = int(above[-1] + 1)
        worst = int(argmax[above[-1]])
    return MixingResult(
        epsilon=epsilon,
        tau=tau,
        horizon=horizon,
        worst_start=worst,
        trajectory=tuple(float(x) for x in max_tv),
        argmax_starts=tuple(int(x) for x in argmax),
    )


def amplification_bound(tau_bar: int, eps0: float, eps: float) -> int:
    """Mixing-time bound of the restarted process: ``tau_bar`` times the
    number of contraction rounds needed to push the distance below ``eps``
    when each round shrinks it by at least ``2 * eps0``."""
    if tau_bar < 0:
        raise ValueError("tau_bar must be nonnegative")
    if not 0.0 < eps0 < 0.5:
        raise ValueError(f"need 0 < eps0 < 1/2, got {eps0}")
    if eps <= 0.0:
        raise ValueError(f"need eps > 0, got {eps}")
    if eps >= 1.0:
        warnings.warn("eps >= 1 makes the bound degenerate (zero rounds)", RuntimeWarning)
        return 0
    ratio = math.log(1.0 / eps) / math.log(1.0 / (2.0 * eps0))
    rounds = max(0, math.ceil(ratio - 1e-12))  # absorb one-ulp overshoot
    return tau_bar * rounds
