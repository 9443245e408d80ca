"""Scenario runner: parse a flat key-value config, run one experiment,
emit results.json plus plot-ready CSV files.

Config format: one ``key = value`` per line, ``#`` starts a comment.
Values parse as int, float, fraction ``a/b``, bool, or string; lists are
comma-separated. Keys are flat with dotted namespaces by convention.

Scenario kinds: cycle-qw, cycle-lmc, classical-walk, torus-lmc,
bridge-build, lift-build, conductance, lower-bound-check, lattice-lemmas,
multiscale. Exit status: 0 success, 1 invalid config or parameters,
2 assertion failure (a verified bound or residual check did not hold).

The ``--seed`` flag is recorded for test-fixture generation; no scenario
uses randomness, so outputs are deterministic for a fixed config.
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys
from pathlib import Path

import numpy as np

from . import io as wio
from .bridges import BridgeInfeasibleError, bridge_sequence
from .chains import from_matrix
from .channels import validate_channel
from .conductance import (
    LP_NODE_LIMIT,
    graph_conductance,
    mixing_lower_bound_check,
    torus_graph_conductance,
)
from .graphs import Dist, Graph, check_locality_trace
from .lattices import (
    CycleParams,
    TorusParams,
    classical_walk,
    cycle_lmc,
    cycle_qw,
    lattice_floor_checks,
    multiscale_curve,
    torus_lmc,
)
from .lifts import amplified_lift, lift_from_process, verify_simulation
from .mixing import default_horizon, tv_trajectory
from .processes import check_invariance, induced_process

KINDS = (
    "cycle-qw",
    "cycle-lmc",
    "classical-walk",
    "torus-lmc",
    "bridge-build",
    "lift-build",
    "conductance",
    "lower-bound-check",
    "lattice-lemmas",
    "multiscale",
)

PROCESS_KINDS = ("cycle-qw", "cycle-lmc", "classical-walk", "torus-lmc")


class ConfigError(ValueError):
    pass


def parse_value(text: str):
    s = text.strip()
    low = s.lower()
    if low == "true":
        return True
    if low == "false":
        return False
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        pass
    if "/" in s:
        num, _, den = s.partition("/")
        try:
            return int(num.strip()) / int(den.strip())
        except ValueError:
            pass
    return s


def parse_config(text: str) -> dict:
    cfg = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        cfg[key.strip()] = parse_value(value)
    if "kind" not in cfg:
        raise ConfigError("config is missing the 'kind' key")
    if cfg["kind"] not in KINDS:
        raise ConfigError(f"unknown kind {cfg['kind']!r}; expected one of {', '.join(KINDS)}")
    return cfg


def _epsilons(cfg: dict) -> list[float]:
    raw = cfg.get("epsilons", 0.25)
    if isinstance(raw, str):
        values = [parse_value(part) for part in raw.split(",") if part.strip()]
    else:
        values = [raw]
    out = []
    for v in values:
        if not isinstance(v, (int, float)) or not 0.0 < float(v) <= 1.0:
            raise ConfigError(f"epsilon {v!r} must be a number in (0, 1]")
        out.append(float(v))
    return out


def _require_int(cfg: dict, key: str, minimum: int = 1) -> int:
    if key not in cfg:
        raise ConfigError(f"scenario kind {cfg['kind']!r} needs the {key!r} key")
    v = cfg[key]
    if not isinstance(v, int) or v < minimum:
        raise ConfigError(f"{key} must be an integer >= {minimum}, got {v!r}")
    return v


def build_source(cfg: dict, source_kind: str):
    """Build (process, pbar, graph, meta) for one of the process families."""
    if source_kind == "cycle-qw":
        n = _require_int(cfg, "n", 2)
        params = CycleParams(
            n=n,
            alpha=float(cfg.get("alpha", 0.5)),
            phi=float(cfg.get("phi", 0.0)),
            theta=float(cfg.get("theta", 0.0)),
            q=float(cfg["q"]) if "q" in cfg else None,
        )
        channel, coins = cycle_qw(params)
        proc = induced_process(channel, coins)
        meta = {"n": n, "alpha": params.alpha, "phi": params.phi,
                "theta": params.theta, "q": params.q_value}
        return proc, Dist.uniform(n), channel.graph, meta
    if source_kind == "cycle-lmc":
        n = _require_int(cfg, "n", 2)
        alpha = float(cfg.get("alpha", 1.0 / n))
        chain = cycle_lmc(n, alpha)
        return chain.process(), Dist.uniform(n), chain.graph, {"n": n, "alpha": alpha}
    if source_kind == "classical-walk":
        n = _require_int(cfg, "n", 2)
        P = classical_walk(n)
        return from_matrix(P).process(), Dist.uniform(n), P.graph, {"n": n}
    if source_kind == "torus-lmc":
        m = _require_int(cfg, "m", 2)
        d = _require_int(cfg, "d", 1)
        params = TorusParams(
            m=m,
            d=d,
            alpha=float(cfg["alpha"]) if "alpha" in cfg else None,
            lazy=bool(cfg["lazy"]) if "lazy" in cfg else None,
        )
        chain = torus_lmc(params)
        n = m**d
        meta = {"m": m, "d": d, "alpha": params.alpha_value, "lazy": params.lazy_value}
        return chain.process(), Dist.uniform(n), chain.graph, meta
    raise ConfigError(f"unknown source kind {source_kind!r}")


def _conductance_for_graph(g: Graph, pbar: Dist, cfg: dict):
    """Graph conductance via the LP when tractable, via the translation
    reduction for cycles and tori otherwise. Returns (result, how)."""
    if g.n <= LP_NODE_LIMIT:
        return graph_conductance(g, pbar), "lp"
    if "m" in cfg and "d" in cfg:
        return torus_graph_conductance(int(cfg["m"]), int(cfg["d"])), "translation"
    if "n" in cfg and g == Graph.cycle(int(cfg["n"])):
        return torus_graph_conductance(int(cfg["n"]), 1), "translation"
    raise ConfigError(
        f"graph conductance needs n <= {LP_NODE_LIMIT} (LP) or a cycle/torus family"
    )


def _verify_process(proc, pbar, g, horizon: int) -> dict:
    checks: dict = {}
    if hasattr(proc, "schedule"):
        reports = [validate_channel(ch) for ch in proc.schedule]
        checks["channel_ok"] = all(r.ok for r in reports)
        checks["completeness_residual"] = max(r.completeness_residual for r in reports)
    steps = min(horizon, 20)
    checks["stochasticity_residual"] = proc.stochasticity_residual(steps)
    checks["invariant"] = check_invariance(proc, pbar, min(horizon, 50))
    if g.n <= 12:
        checks["locality_trace_ok"] = all(
            check_locality_trace(proc.trajectory(Dist.delta(g.n, v), steps), g).ok
            for v in range(g.n)
        )
    ok = all(bool(v) for k, v in checks.items() if isinstance(v, (bool, np.bool_)))
    ok = ok and checks["stochasticity_residual"] <= 1e-9
    checks["ok"] = ok
    return checks


def run_scenario(cfg: dict, out_dir: Path, horizon_override: int | None = None,
                 verify: bool = False, seed: int | None = None) -> tuple[int, dict]:
    """Execute one scenario; returns (exit_status, results payload).
    Writes results.json and kind-specific artifacts into ``out_dir``."""
    out_dir.mkdir(parents=True, exist_ok=True)
    kind = cfg["kind"]
    results: dict = {}
    status = 0

    if kind in PROCESS_KINDS:
        proc, pbar, g, meta = build_source(cfg, kind)
        horizon = horizon_override or cfg.get("horizon") or default_horizon(proc)
        horizon = int(horizon)
        epsilons = _epsilons(cfg)
        max_tv, argmax = tv_trajectory(proc, pbar, horizon)
        wio.write_trajectory_csv(out_dir / "trajectory.csv", max_tv, argmax)
        taus = {}
        for eps in epsilons:
            above = np.nonzero(max_tv > eps)[0]
            if above.size == 0:
                taus[f"{eps:g}"] = 0
            elif above[-1] == horizon:
                taus[f"{eps:g}"] = None
            else:
                taus[f"{eps:g}"] = int(above[-1] + 1)
        results.update(meta)
        results["horizon"] = horizon
        results["pbar"] = "uniform"
        results["tau"] = taus
        try:
            cond, how = _conductance_for_graph(g, pbar, cfg)
            results["phi"] = cond.phi
            results["phi_method"] = how
            results["lower_bound"] = 1.0 / (4.0 * cond.phi)
            tau_quarter = taus.get("0.25")
            if tau_quarter is not None:
                results["bound_holds"] = bool(tau_quarter >= results["lower_bound"] - 1.0 - 1e-9)
                if not results["bound_holds"]:
                    status = 2
        except ValueError:  # conductance not computable for this graph size
            results["phi"] = None
        if verify:
            results["verify"] = _verify_process(proc, pbar, g, horizon)
            if not results["verify"]["ok"]:
                status = 2

    elif kind == "bridge-build":
        source = str(cfg.get("source", "cycle-qw"))
        proc, pbar, g, meta = build_source(cfg, source)
        steps = int(cfg.get("steps", 8))
        start = int(cfg.get("start", 0))
        if not 0 <= start < proc.n:
            raise ConfigError(f"start node {start} out of range")
        try:
            seq = bridge_sequence(proc, Dist.delta(proc.n, start), steps, graph=g)
        except BridgeInfeasibleError as exc:
            results.update({"source": source, "feasible": False, "detail": str(exc)})
            _write_results(out_dir, cfg, results, seed)
            return 2, results
        wio.write_bridge_set([seq], out_dir / "bridges")
        results.update(
            {
                "source": source,
                "params": meta,
                "start": start,
                "steps": steps,
                "feasible": True,
                "min_flow_value": min(seq.flow_values),
                "max_residual": seq.max_residual(),
            }
        )
        if verify and seq.max_residual() > 1e-8:
            status = 2

    elif kind == "lift-build":
        source = str(cfg.get("source", "cycle-qw"))
        proc, pbar, g, meta = build_source(cfg, source)
        epsilon0 = float(cfg.get("epsilon0", 0.25))
        T = int(cfg["T"]) if "T" in cfg else None
        lift = lift_from_process(proc, pbar, epsilon0=epsilon0, T=T,
                                 horizon=horizon_override or cfg.get("horizon"))
        do_amplify = bool(cfg.get("amplified", True))
        if do_amplify:
            lift = amplified_lift(lift)
        horizon = int(cfg.get("verify_horizon", (3 if do_amplify else 1) * lift.T))
        report = verify_simulation(lift, proc, horizon)
        wio.write_lift_triplets(lift, out_dir / "lift.csv", out_dir / "lift_manifest.json")
        results.update(
            {
                "source": source,
                "params": meta,
                "T": lift.T,
                "epsilon0": epsilon0,
                "amplified": lift.amplified,
                "state_dim": lift.state_dim,
                "verify_horizon": horizon,
                "max_residual": report.max_residual,
                "locality_ok": report.locality_ok,
            }
        )
        if not report.ok():
            status = 2

    elif kind == "conductance":
        family = str(cfg.get("graph", "cycle"))
        if family == "cycle":
            g = Graph.cycle(_require_int(cfg, "n", 2))
        elif family == "torus":
            m, d = _require_int(cfg, "m", 2), _require_int(cfg, "d", 1)
            from .lattices import torus_graph

            g = torus_graph(m, d)
        elif family == "complete":
            g = Graph.complete(_require_int(cfg, "n", 2))
        elif family == "edgelist":
            if "path" not in cfg:
                raise ConfigError("graph=edgelist needs a 'path' key")
            g = wio.read_graph(cfg["path"])
        else:
            raise ConfigError(f"unknown graph family {family!r}")
        pbar = Dist.uniform(g.n)
        cond, how = _conductance_for_graph(g, pbar, cfg)
        witness_path = out_dir / "witness_chain.csv"
        wio.write_matrix_csv(cond.witness, witness_path)
        results.update(
            {
                "graph": family,
                "n": g.n,
                "phi": cond.phi,
                "phi_method": how,
                "witness_cut": sorted(cond.witness_cut.cut.members()),
                "witness_cut_phi": cond.witness_cut.phi,
                "witness_chain_path": witness_path.name,
            }
        )

    elif kind == "lower-bound-check":
        source = str(cfg.get("source", "cycle-lmc"))
        proc, pbar, g, meta = build_source(cfg, source)
        horizon = int(horizon_override or cfg.get("horizon") or default_horizon(proc))
        cond, how = _conductance_for_graph(g, pbar, cfg)
        report = mixing_lower_bound_check(proc, pbar, g, horizon, phi=cond.phi)
        results.update(
            {
                "source": source,
                "params": meta,
                "horizon": horizon,
                "applicable": report.applicable,
                "phi": report.phi,
                "phi_method": how,
                "bound": report.bound,
                "tau": report.tau,
                "holds": report.holds,
                "detail": report.detail,
            }
        )
        if report.holds is False:
            status = 2

    elif kind == "lattice-lemmas":
        m, d = _require_int(cfg, "m", 2), _require_int(cfg, "d", 1)
        params = TorusParams(m=m, d=d, lazy=False)
        T = int(cfg["T"]) if "T" in cfg else None
        report = lattice_floor_checks(params, T)
        results.update(
            {
                "m": m,
                "d": d,
                "single_toss": report.single_toss,
                "single_toss_ok": report.single_toss_ok,
                "axis_floor": report.axis_floor,
                "axis_threshold": report.axis_threshold,
                "axis_ok": report.axis_ok,
                "floor_horizon": report.floor_horizon,
                "floor_margin": report.floor_margin,
                "floor_ok": report.floor_ok,
                "ok": report.ok,
            }
        )
        if not report.ok:
            status = 2

    elif kind == "multiscale":
        n = _require_int(cfg, "n", 2)
        t = int(cfg.get("t", n // 4))
        start = int(cfg.get("start", 0))
        curve = multiscale_curve(n, t, start)
        lines = ["t,qw_tv,lmc_tv"]
        lines += [f"{r.t},{r.qw_tv:.12g},{r.lmc_tv:.12g}" for r in curve]
        (out_dir / "multiscale.csv").write_text("\n".join(lines) + "\n")
        final = curve[-1]
        results.update(
            {
                "n": n,
                "t": t,
                "start": start,
                "qw_tv": final.qw_tv,
                "lmc_tv": final.lmc_tv,
                "qw_below_lmc": bool(final.qw_tv < final.lmc_tv),
            }
        )

    else:  # pragma: no cover - kinds validated in parse_config
        raise ConfigError(f"unhandled kind {kind!r}")

    _write_results(out_dir, cfg, results, seed)
    return status, results


def _write_results(out_dir: Path, cfg: dict, results: dict, seed: int | None) -> None:
    payload = {
        "scenario": {k: v for k, v in sorted(cfg.items())},
        "results": wio.round_floats(results),
        "seed": seed,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    (out_dir / "results.json").write_text(
        json.dumps(payload, indent=1, sort_keys=True) + "\n"
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="walklift",
        description="Simulate coined walks and lifted chains; verify mixing bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario config")
    run.add_argument("config", help="path to a key-value scenario config")
    run.add_argument("--out", help="output directory (default: <config stem>-out)")
    run.add_argument("--horizon", type=int, help="override the scenario horizon")
    run.add_argument("--seed", type=int, help="recorded for fixture generation; unused by scenarios")
    run.add_argument("--verify", action="store_true",
                     help="additionally run the invariant suites on the scenario objects")
    args = parser.parse_args(argv)

    cfg_path = Path(args.config)
    try:
        text = cfg_path.read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    try:
        cfg = parse_config(text)
        out_dir = Path(args.out) if args.out else (
            Path(cfg["out"]) if "out" in cfg else cfg_path.parent / f"{cfg_path.stem}-out"
        )
        status, results = run_scenario(
            cfg, out_dir, horizon_override=args.horizon, verify=args.verify, seed=args.seed
        )
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for key in sorted(results):
        print(f"{key} = {results[key]}")
    if status != 0:
        print(f"assertion failure (exit {status})", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
