import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from walklift import (
    Dist,
    Graph,
    NodeSet,
    check_locality_trace,
    neighborhood,
    parse_edge_list,
    tv_distance,
)
from walklift.graphs import format_edge_list

from conftest import brute_force_locality_ok, random_local_matrix, rng_for


class TestGraph:
    def test_self_loops_always_present(self):
        g = Graph(3, [(0, 1)])
        for v in range(3):
            assert g.has_edge(v, v)

    def test_symmetric_closure_by_default(self):
        g = Graph(3, [(0, 1)])
        assert g.has_edge(1, 0)
        d = Graph(3, [(0, 1)], directed=True)
        assert not d.has_edge(1, 0)

    def test_out_of_range_edge_rejected(self):
        with pytest.raises(ValueError):
            Graph(2, [(0, 2)])

    def test_mask_orientation(self):
        g = Graph(3, [(0, 1)], directed=True)
        # transition 0 -> 1 sits at matrix entry (1, 0)
        assert g.mask[1, 0]
        assert not g.mask[0, 1]


class TestNodeSet:
    def test_roundtrip_members(self):
        X = NodeSet.from_nodes(5, [0, 3])
        assert X.members() == (0, 3)
        assert len(X) == 2
        assert 3 in X and 1 not in X

    def test_complement(self):
        X = NodeSet.from_nodes(4, [1, 2])
        assert X.complement().members() == (0, 3)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            NodeSet.from_nodes(3, [3])


class TestDist:
    def test_validation(self):
        with pytest.raises(ValueError):
            Dist([0.5, 0.4])  # sums to 0.9
        with pytest.raises(ValueError):
            Dist([1.5, -0.5])

    def test_dust_clamped(self):
        d = Dist([1.0 + 5e-13, -5e-13])
        assert d.w[1] == 0.0

    def test_restricted_to(self):
        d = Dist([0.2, 0.3, 0.5])
        r = d.restricted_to(NodeSet.from_nodes(3, [0, 1]))
        assert np.allclose(r.w, [0.4, 0.6, 0.0])


class TestTvDistance:
    def test_identity_is_zero(self):
        p = Dist.uniform(4)
        assert tv_distance(p, p) == 0.0

    def test_delta_vs_uniform_two_nodes(self):
        assert tv_distance(Dist.delta(2, 0), Dist.uniform(2)) == pytest.approx(0.5)

    def test_disjoint_support(self):
        assert tv_distance(Dist.delta(3, 0), Dist.delta(3, 1)) == pytest.approx(1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            tv_distance(Dist.uniform(2), Dist.uniform(3))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 6), st.integers(0, 2**31 - 1))
    def test_metric_properties(self, n, seed):
        rng = np.random.default_rng(seed)
        triples = rng.gamma(1.0, 1.0, size=(3, n))
        p, q, r = (row / row.sum() for row in triples)
        assert tv_distance(p, q) >= 0.0
        assert tv_distance(p, q) == pytest.approx(tv_distance(q, p))
        assert tv_distance(p, r) <= tv_distance(p, q) + tv_distance(q, r) + 1e-12


class TestNeighborhood:
    def test_three_path(self):
        # 1-indexed edges {(1,2), (2,3)}: the neighborhood of {3} is {2}
        g = Graph.path(3)
        B = neighborhood(g, NodeSet.from_nodes(3, [2]))
        assert B.members() == (1,)

    def test_full_set_has_empty_neighborhood(self):
        g = Graph.cycle(5)
        assert len(neighborhood(g, NodeSet.full(5))) == 0

    def test_four_cycle_pair(self):
        # nodes {0,1} of the 4-cycle: both outside nodes feed into the set
        g = Graph.cycle(4)
        B = neighborhood(g, NodeSet.from_nodes(4, [0, 1]))
        assert B.members() == (2, 3)

    def test_disjoint_from_input(self):
        g = Graph.cycle(6)
        for mask in (0b1, 0b101, 0b110):
            X = NodeSet(6, mask)
            assert neighborhood(g, X).mask & X.mask == 0

    def test_directionality(self):
        # directed edge 0 -> 1 lets mass flow into {1} only from 0
        g = Graph(3, [(0, 1), (1, 2)], directed=True)
        assert neighborhood(g, NodeSet.from_nodes(3, [1])).members() == (0,)
        assert neighborhood(g, NodeSet.from_nodes(3, [0])).members() == ()


class TestLocalityTrace:
    def test_local_matrix_trace_ok(self, rng):
        g = Graph.cycle(6)
        M = random_local_matrix(rng, g).m
        p = np.zeros(6)
        p[2] = 1.0
        trace = [p]
        for _ in range(8):
            trace.append(M @ trace[-1])
        assert check_locality_trace(trace, g).ok

    def test_three_path_teleport_violation(self):
        g = Graph.path(3)
        report = check_locality_trace([Dist.delta(3, 0), Dist.delta(3, 2)], g)
        assert not report.ok
        assert report.step == 0
        assert report.cut.members() == (2,)
        assert report.lhs == pytest.approx(1.0)
        assert report.rhs == pytest.approx(0.0)

    def test_cycle_qw_trace_ok(self):
        import walklift as wl

        ch, coins = wl.cycle_qw(wl.CycleParams(n=6, alpha=0.5, q=0.3))
        proc = wl.induced_process(ch, coins)
        trace = proc.trajectory(Dist.delta(6, 1), 12)
        assert check_locality_trace(trace, ch.graph).ok

    def test_matches_brute_force(self, rng):
        g = Graph(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
        for _ in range(20):
            y = rng.gamma(1.0, 1.0, size=5)
            y /= y.sum()
            z = rng.gamma(1.0, 1.0, size=5)
            z /= z.sum()
            fast = check_locality_trace([y, z], g).ok
            assert fast == brute_force_locality_ok(y, z, g)

    def test_node_limit(self):
        g = Graph.cycle(21)
        with pytest.raises(ValueError):
            check_locality_trace([Dist.uniform(21), Dist.uniform(21)], g)

    def test_two_element_trace_of_any_local_matrix(self):
        rng = rng_for("pair-trace")
        for trial in range(10):
            g = Graph.cycle(int(rng.integers(3, 8)))
            M = random_local_matrix(rng, g).m
            p = rng.gamma(1.0, 1.0, size=g.n)
            p /= p.sum()
            assert check_locality_trace([p, M @ p], g).ok


class TestEdgeList:
    def test_parse_basic(self):
        g = parse_edge_list("3\n1 2\n2 3\n")
        assert g.n == 3
        assert g.has_edge(0, 1) and g.has_edge(2, 1)
        assert g.has_edge(1, 1)  # loop implied

    def test_parse_rejects_bad_header(self):
        with pytest.raises(ValueError):
            parse_edge_list("x\n1 2\n")

    def test_parse_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            parse_edge_list("2\n1 3\n")

    def test_roundtrip(self):
        g = Graph.cycle(5)
        again = parse_edge_list(format_edge_list(g))
        assert again == g
