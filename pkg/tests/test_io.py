import json

import numpy as np

from walklift import Dist
from walklift.io import (
    read_graph,
    read_lifted_chain,
    read_matrix_csv,
    read_trajectory_csv,
    round_floats,
    write_bridge_set,
    write_graph,
    write_lifted_chain,
    write_matrix_csv,
    write_trajectory_csv,
)
from walklift.lattices import cycle_lmc

from conftest import random_connected_graph, random_local_matrix


class TestGraphFiles:
    def test_roundtrip(self, tmp_path, rng):
        g = random_connected_graph(rng, 6)
        path = tmp_path / "g.txt"
        write_graph(g, path)
        assert read_graph(path) == g


class TestMatrixCsv:
    def test_lossless_roundtrip(self, tmp_path, rng):
        g = random_connected_graph(rng, 5)
        M = random_local_matrix(rng, g)
        path = tmp_path / "m.csv"
        write_matrix_csv(M, path)
        again = read_matrix_csv(path)
        assert np.array_equal(again, M.m)

    def test_sidecar_written(self, tmp_path):
        chain = cycle_lmc(4, 0.25)
        path = tmp_path / "chain.csv"
        write_lifted_chain(chain, path)
        meta = json.loads((tmp_path / "chain.csv.json").read_text())
        assert meta["n_coins"] == 2
        assert meta["n_nodes"] == 4
        assert meta["coin_assignment"] == [0, 0, 0, 0]

    def test_lifted_chain_roundtrip(self, tmp_path):
        chain = cycle_lmc(4, 0.25)
        path = tmp_path / "chain.csv"
        write_lifted_chain(chain, path)
        again = read_lifted_chain(path, chain.graph)
        assert np.array_equal(again.transition.m, chain.transition.m)
        assert np.array_equal(again.coins.values, chain.coins.values)


class TestTrajectoryCsv:
    def test_roundtrip(self, tmp_path):
        path = tmp_path / "traj.csv"
        tv = np.array([0.75, 0.5, 0.124999999999])
        starts = np.array([0, 2, 1])
        write_trajectory_csv(path, tv, starts)
        lines = path.read_text().splitlines()
        assert lines[0] == "t,max_tv,argmax_start"
        tv2, starts2 = read_trajectory_csv(path)
        assert np.allclose(tv2, tv, atol=1e-11)
        assert np.array_equal(starts2, starts)


class TestBridgeSet:
    def test_manifest_names_start_and_step(self, tmp_path, rng):
        from walklift import bridge_sequence
        from walklift.chains import from_matrix

        g = random_connected_graph(rng, 4)
        proc = from_matrix(random_local_matrix(rng, g)).process()
        seqs = [bridge_sequence(proc, Dist.delta(4, v), 3, graph=g) for v in range(4)]
        manifest = write_bridge_set(seqs, tmp_path / "bridges")
        assert len(manifest["entries"]) == 12
        entry = manifest["entries"][0]
        assert set(entry) == {"start", "step", "file"}
        stored = read_matrix_csv(tmp_path / "bridges" / entry["file"])
        assert np.array_equal(stored, seqs[0].matrices[0].m)


class TestRoundFloats:
    def test_significant_digits(self):
        assert round_floats(0.123456789012345) == 0.123456789012
        assert round_floats({"a": [1 / 3]}) == {"a": [0.333333333333]}

    def test_arrays_become_lists(self):
        out = round_floats(np.array([0.5, 0.25]))
        assert out == [0.5, 0.25]

    def test_dataclasses_unpacked(self):
        from walklift.lattices import MultiscaleReport

        rep = MultiscaleReport(n=4, t=1, start=0, window=(3, 0, 1), qw_tv=1 / 3, lmc_tv=0.5)
        out = round_floats(rep)
        assert out["qw_tv"] == 0.333333333333
