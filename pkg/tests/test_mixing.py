import numpy as np
import pytest

from walklift import (
    CoinAssignment,
    CycleParams,
    Dist,
    Graph,
    amplification_bound,
    cycle_lmc,
    cycle_qw,
    induced_process,
    joint_stationary,
    measured_unitary_channel,
    mixing_time,
    tv_trajectory,
)
from walklift.chains import from_matrix
from walklift.graphs import tv_distance
from conftest import random_connected_graph, random_lifted_chain

HADAMARD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def hadamard_process():
    g = Graph.complete(2)
    ch = measured_unitary_channel(HADAMARD, 0.0, g)
    return induced_process(ch, CoinAssignment.constant(2, n_coins=1))


class TestTvTrajectory:
    def test_identity_process_constant(self):
        import walklift as wl

        ident = from_matrix(wl.StochMatrix(np.eye(2), Graph(2, []))).process()
        tv, arg = tv_trajectory(ident, Dist.uniform(2), 5)
        assert np.allclose(tv, 0.5)

    def test_hadamard_alternates_forever(self):
        tv, _ = tv_trajectory(hadamard_process(), Dist.uniform(2), 9)
        assert np.allclose(tv[0::2], 0.5, atol=1e-12)
        assert np.allclose(tv[1::2], 0.0, atol=1e-12)

    def test_basis_max_is_reported(self):
        # worst case over basis starts is what the trajectory records,
        # even when the target is invariant for some mixture
        chain = cycle_lmc(5, 0.5)
        tv, arg = tv_trajectory(chain.process(), Dist.uniform(5), 3)
        assert tv[0] == pytest.approx(0.8)
        assert 0 <= arg[0] < 5


class TestMixingTime:
    def test_epsilon_one_is_zero(self):
        res = mixing_time(hadamard_process(), Dist.uniform(2), 1.0, horizon=6)
        assert res.tau == 0

    def test_three_cycle_chain_small_horizon(self):
        # the odd cycle resolves; hand value: alpha = 1/2 kills the coin
        # memory so the marginal is the classical lazy-free walk
        chain = cycle_lmc(3, 0.5)
        res = mixing_time(chain.process(), Dist.uniform(3), 0.25, horizon=60)
        assert res.resolved
        traj = np.asarray(res.trajectory)
        assert traj[res.tau] <= 0.25
        assert np.all(traj[res.tau :] <= 0.25)
        assert traj[res.tau - 1] > 0.25

    def test_persistence_blocks_alternating_processes(self):
        # the coinless two-node walk dips to zero every other step but
        # never stays below threshold
        res = mixing_time(hadamard_process(), Dist.uniform(2), 0.25, horizon=11)
        assert res.tau is None

    def test_even_cycle_parity_never_resolves(self):
        # walkers that move exactly one step per time alternate parity
        # classes on even cycles, so the worst-case distance to uniform is
        # pinned at one half; this regression covers the smallest chain
        # and the measured walk at a representative even size
        for n, alpha in ((2, 0.5), (6, 0.5)):
            chain = cycle_lmc(n, alpha)
            res = mixing_time(chain.process(), Dist.uniform(n), 0.25, horizon=100)
            assert res.tau is None
            assert min(res.trajectory) >= 0.5 - 1e-12
        ch, coins = cycle_qw(CycleParams(n=16, alpha=0.5, q=1 / 16))
        res = mixing_time(induced_process(ch, coins), Dist.uniform(16), 0.25, horizon=200)
        assert res.tau is None
        assert min(res.trajectory) >= 0.5 - 1e-12

    def test_cycle_walk_order_n(self):
        # fast coined walk on an odd cycle resolves within a few multiples of n
        ch, coins = cycle_qw(CycleParams(n=17, alpha=0.5, q=1 / 17))
        proc = induced_process(ch, coins)
        res = mixing_time(proc, Dist.uniform(17), 0.25, horizon=8 * 17)
        assert res.resolved
        assert res.tau <= 4 * 17

    def test_monotone_in_epsilon(self):
        chain = cycle_lmc(7, 1 / 7)
        proc = chain.process()
        taus = []
        for eps in (0.4, 0.25, 0.1, 0.05):
            res = mixing_time(proc, Dist.uniform(7), eps, horizon=300)
            assert res.resolved
            taus.append(res.tau)
        assert taus == sorted(taus)

    def test_epsilon_validation(self):
        with pytest.raises(ValueError):
            mixing_time(hadamard_process(), Dist.uniform(2), 0.0, horizon=5)

    def test_justification_recorded(self):
        res = mixing_time(hadamard_process(), Dist.uniform(2), 0.5, horizon=5)
        assert "basis" in res.justification


class TestJointContractivity:
    def test_joint_tv_nonincreasing(self, rng):
        # the joint distance to the joint stationary law never grows,
        # even when the node marginal distance oscillates
        g = random_connected_graph(rng, 4)
        chain = random_lifted_chain(rng, g, 2)
        phat = joint_stationary(chain).w
        proc = chain.process()
        joint = proc.joint_trajectory(Dist.delta(4, 0), 40)
        dists = [tv_distance(row, phat) for row in joint]
        for a, b in zip(dists, dists[1:]):
            assert b <= a + 1e-12

    def test_marginal_can_oscillate(self):
        # the same is not true of the node marginal: coherent recombination
        # pulls it back up after it touches the target
        tv, _ = tv_trajectory(hadamard_process(), Dist.uniform(2), 6)
        assert (np.diff(tv) > 1e-12).any()


class TestAmplificationBound:
    def test_quarter_to_quarter(self):
        assert amplification_bound(10, 0.25, 0.25) == 20

    def test_quarter_to_milli(self):
        assert amplification_bound(7, 0.25, 1e-3) == 70

    def test_degenerate_epsilon_warns(self):
        with pytest.warns(RuntimeWarning):
            assert amplification_bound(5, 0.25, 1.0) == 0

    def test_eps0_validation(self):
        with pytest.raises(ValueError):
            amplification_bound(5, 0.5, 0.1)

    def test_bound_respected_by_powers(self, rng):
        # iterating the time-T map contracts at least as fast as the bound
        chain = cycle_lmc(5, 0.4)
        proc = chain.process()
        pbar = Dist.uniform(5)
        res = mixing_time(proc, pbar, 0.25, horizon=100)
        T = res.tau
        psi_T = proc.psi_matrix(T)
        for eps in (1e-2, 1e-3):
            rounds = amplification_bound(T, 0.25, eps) // T
            power = np.linalg.matrix_power(psi_T, rounds)
            worst = max(
                tv_distance(power[:, v], pbar) for v in range(5)
            )
            assert worst <= eps + 1e-12
