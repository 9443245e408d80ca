"""File formats: edge lists, channel JSON, matrix CSV with JSON sidecar,
lift triplets with an index-layout manifest, and trajectory CSV.

Channel JSON schema::

    {"n_coins": C, "n_nodes": N,
     "kraus": [matrix, ...]}        # each matrix: row-major nested lists
                                    # of [re, im] pairs

Matrix CSV: one row per target state, comma-separated, 17 significant
digits (lossless for doubles); the sidecar carries coin metadata.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from .channels import CoinAssignment, KrausChannel, LiftedSpace
from .chains import LiftedChain, StochMatrix, lifted_graph
from .graphs import Graph, format_edge_list, parse_edge_list
from .lifts import ClockLift


def read_graph(path, directed: bool = False) -> Graph:
    return parse_edge_list(Path(path).read_text(), directed=directed)


def write_graph(g: Graph, path) -> None:
    Path(path).write_text(format_edge_list(g))


def _matrix_to_pairs(m: np.ndarray) -> list:
    return [[[float(x.real), float(x.imag)] for x in row] for row in m]


def _matrix_from_pairs(rows: list) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def channel_to_json(ch: KrausChannel) -> dict:
    return {
        "n_coins": ch.space.n_coins,
        "n_nodes": ch.space.n_nodes,
        "kraus": [_matrix_to_pairs(m) for m in ch.kraus],
    }


def channel_from_json(data: dict, graph: Graph) -> KrausChannel:
    space = LiftedSpace(int(data["n_coins"]), int(data["n_nodes"]))
    kraus = [_matrix_from_pairs(rows) for rows in data["kraus"]]
    return KrausChannel(kraus, space, graph)


def write_channel(ch: KrausChannel, path) -> None:
    Path(path).write_text(json.dumps(channel_to_json(ch), indent=1) + "\n")


def read_channel(path, graph: Graph) -> KrausChannel:
    return channel_from_json(json.loads(Path(path).read_text()), graph)


def write_matrix_csv(matrix, path, sidecar: dict | None = None) -> None:
    m = matrix.m if isinstance(matrix, StochMatrix) else np.asarray(matrix, dtype=float)
    lines = [",".join(f"{x:.17g}" for x in row) for row in m]
    Path(path).write_text("\n".join(lines) + "\n")
    if sidecar is not None:
        Path(str(path) + ".json").write_text(json.dumps(sidecar, indent=1, sort_keys=True) + "\n")


def read_matrix_csv(path) -> np.ndarray:
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            rows.append([float(x) for x in line.split(",")])
    return np.array(rows)


def write_lifted_chain(chain: LiftedChain, path) -> None:
    write_matrix_csv(
        chain.transition,
        path,
        sidecar={
            "n_coins": chain.n_coins,
            "n_nodes": chain.n_nodes,
            "coin_assignment": chain.coins.values.tolist(),
        },
    )


def read_lifted_chain(path, graph: Graph) -> LiftedChain:
    m = read_matrix_csv(path)
    meta = json.loads(Path(str(path) + ".json").read_text())
    coins = CoinAssignment(meta["coin_assignment"], int(meta["n_coins"]))
    sm = StochMatrix(m, lifted_graph(graph, int(meta["n_coins"])))
    return LiftedChain(sm, coins, graph)


def write_lift_triplets(lift: ClockLift, csv_path, manifest_path) -> None:
    """Sparse export of the clock lift: (from, to, probability) triplets
    plus a manifest describing the flat index layout."""
    rows, cols, vals = lift.triplets()
    lines = ["from,to,prob"]
    lines += [f"{c},{r},{v:.17g}" for r, c, v in zip(rows, cols, vals)]
    Path(csv_path).write_text("\n".join(lines) + "\n")
    manifest = {
        "n_nodes": lift.n,
        "horizon": lift.T,
        "amplified": lift.amplified,
        "state_dim": lift.state_dim,
        "index_layout": "flat = (v0 * (T+1) + l) * n + v  (start-node major, then clock, then node)",
        "init_map": "node v starts at flat index of (v, 0, v)",
    }
    Path(manifest_path).write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")


def read_lift_triplets(csv_path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rows, cols, vals = [], [], []
    lines = Path(csv_path).read_text().splitlines()
    for line in lines[1:]:
        if not line.strip():
            continue
        c, r, v = line.split(",")
        cols.append(int(c))
        rows.append(int(r))
        vals.append(float(v))
    return np.array(rows), np.array(cols), np.array(vals)


def write_trajectory_csv(path, max_tv, argmax_starts) -> None:
    lines = ["t,max_tv,argmax_start"]
    for t, (tv, st) in enumerate(zip(max_tv, argmax_starts)):
        lines.append(f"{t},{tv:.12g},{int(st)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_trajectory_csv(path) -> tuple[np.ndarray, np.ndarray]:
    tvs, starts = [], []
    for line in Path(path).read_text().splitlines()[1:]:
        if line.strip():
            _, tv, st = line.split(",")
            tvs.append(float(tv))
            starts.append(int(st))
    return np.array(tvs), np.array(starts, dtype=int)


def write_bridge_set(sequences, out_dir) -> dict:
    """Export bridge sequences as per-step matrix CSVs plus one manifest
    naming (start node, step index) for each file."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for v0, seq in enumerate(sequences):
        for t, sm in enumerate(seq.matrices, start=1):
            name = f"bridge_s{v0}_t{t}.csv"
            write_matrix_csv(sm, out / name)
            entries.append({"start": v0, "step": t, "file": name})
    manifest = {"entries": entries, "format": "dense CSV, row per target state"}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return manifest


def round_floats(obj, digits: int = 12):
    """Recursively round floats to ``digits`` significant digits so emitted
    JSON is stable across runs."""
    if isinstance(obj, float):
        return float(f"{obj:.{digits}g}")
    if isinstance(obj, dict):
        return {k: round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, digits) for v in obj]
    if isinstance(obj, np.ndarray):
        return round_floats(obj.tolist(), digits)
    if isinstance(obj, (np.floating,)):
        return float(f"{float(obj):.{digits}g}")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return round_floats(dataclasses.asdict(obj), digits)
    return obj
