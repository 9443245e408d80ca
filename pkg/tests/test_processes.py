import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from walklift import (
    CoinAssignment,
    CycleParams,
    Dist,
    Graph,
    cesaro,
    check_invariance,
    check_locality_trace,
    cycle_lmc,
    cycle_qw,
    induced_process,
    measured_unitary_channel,
    tv_distance,
)
from walklift.chains import as_channel, from_matrix

from conftest import random_cycle_channel, random_lifted_chain, random_local_matrix, rng_for

HADAMARD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def hadamard_process(q=0.0):
    g = Graph.complete(2)
    ch = measured_unitary_channel(HADAMARD, q, g)
    return induced_process(ch, CoinAssignment.constant(2, n_coins=1))


class TestInducedProcess:
    def test_time_zero_is_identity(self, rng):
        ch, coins = random_cycle_channel(rng)
        proc = induced_process(ch, coins)
        p0 = Dist.delta(proc.n, 1)
        assert np.allclose(proc.trajectory(p0, 0)[0], p0.w)

    def test_hadamard_period_two(self):
        proc = hadamard_process(0.0)
        traj = proc.trajectory(Dist.delta(2, 0), 4)
        assert np.allclose(traj[0], [1, 0], atol=1e-12)
        assert np.allclose(traj[1], [0.5, 0.5], atol=1e-12)
        assert np.allclose(traj[2], [1, 0], atol=1e-12)
        assert np.allclose(traj[4], [1, 0], atol=1e-12)

    def test_chain_channel_matches_chain_evolution(self, rng):
        # the embedded channel induces exactly the chain's marginals
        g = Graph.cycle(5)
        chain = random_lifted_chain(rng, g, 3)
        via_channel = induced_process(as_channel(chain), chain.coins)
        via_chain = chain.process()
        p0 = Dist.delta(5, 2)
        a = via_channel.trajectory(p0, 50)
        b = via_chain.trajectory(p0, 50)
        assert np.abs(a - b).max() <= 1e-12

    def test_psi_matrix_columns_are_basis_images(self, rng):
        ch, coins = random_cycle_channel(rng, n=5)
        proc = induced_process(ch, coins)
        m3 = proc.psi_matrix(3)
        for v in range(5):
            assert np.allclose(m3[:, v], proc.trajectory(Dist.delta(5, v), 3)[3])

    @settings(max_examples=20, deadline=None)
    @given(st.floats(0.0, 1.0), st.integers(0, 2**31 - 1))
    def test_linearity_on_convex_combinations(self, lam, seed):
        rng = np.random.default_rng(seed)
        ch, coins = random_cycle_channel(rng, n=4)
        proc = induced_process(ch, coins)
        p = rng.gamma(1.0, 1.0, size=4)
        p /= p.sum()
        q = rng.gamma(1.0, 1.0, size=4)
        q /= q.sum()
        mix = lam * p + (1 - lam) * q
        t = 5
        lhs = proc.trajectory(mix, t)[t]
        rhs = lam * proc.trajectory(p, t)[t] + (1 - lam) * proc.trajectory(q, t)[t]
        assert np.abs(lhs - rhs).max() <= 1e-10

    def test_locality_propagation(self):
        # basis traces of a validated local channel satisfy the
        # population inequality at every step
        rng = rng_for("locality-propagation")
        for _ in range(3):
            ch, coins = random_cycle_channel(rng, n=6)
            proc = induced_process(ch, coins)
            for v in range(proc.n):
                trace = proc.trajectory(Dist.delta(proc.n, v), 20)
                assert check_locality_trace(trace, ch.graph).ok

    def test_stochasticity_residual(self, rng):
        ch, coins = random_cycle_channel(rng)
        proc = induced_process(ch, coins)
        assert proc.stochasticity_residual(10) <= 1e-10


class TestChainProcess:
    def test_matches_dense_power(self, rng):
        g = Graph.cycle(4)
        chain = random_lifted_chain(rng, g, 2)
        proc = chain.process()
        p0 = np.array([0.1, 0.2, 0.3, 0.4])
        joint0 = np.zeros(8)
        joint0[chain.coins.flat_indices()] = p0
        expected = np.linalg.matrix_power(chain.transition.m, 7) @ joint0
        got = proc.trajectory(p0, 7)[7]
        assert np.allclose(got, expected.reshape(2, 4).sum(axis=0), atol=1e-12)

    def test_joint_trajectory_diagnostic(self, rng):
        g = Graph.cycle(3)
        chain = random_lifted_chain(rng, g, 2)
        proc = chain.process()
        joint = proc.joint_trajectory(Dist.delta(3, 0), 5)
        assert joint.shape == (6, 6)
        assert np.allclose(joint.sum(axis=1), 1.0)

    def test_iter_basis_matches_per_start(self, rng):
        g = Graph.cycle(5)
        chain = random_lifted_chain(rng, g, 2)
        proc = chain.process()
        mats = list(proc.iter_basis_marginals(4))
        for v in range(5):
            traj = proc.trajectory(Dist.delta(5, v), 4)
            for t in range(5):
                assert np.allclose(mats[t][:, v], traj[t], atol=1e-12)


class TestCesaro:
    def test_identity_process_fixed(self):
        # identity chain: the running average of a constant sequence
        import walklift as wl

        ident = wl.StochMatrix(np.eye(3), Graph(3, []))
        base = from_matrix(ident).process()
        avg = cesaro(base)
        p0 = Dist([0.2, 0.3, 0.5])
        traj = avg.trajectory(p0, 6)
        assert np.allclose(traj, np.tile(p0.w, (7, 1)), atol=1e-12)

    def test_hadamard_average(self):
        avg = cesaro(hadamard_process(0.0))
        traj = avg.trajectory(Dist.delta(2, 0), 1)
        assert np.allclose(traj[1], [0.75, 0.25], atol=1e-12)

    def test_preserves_invariance(self):
        chain = cycle_lmc(5, 0.3)
        avg = cesaro(chain.process())
        assert check_invariance(avg, Dist.uniform(5), 30)

    def test_averaged_trace_still_local(self):
        ch, coins = cycle_qw(CycleParams(n=6, alpha=0.5, q=0.2))
        avg = cesaro(induced_process(ch, coins))
        trace = avg.trajectory(Dist.delta(6, 0), 15)
        assert check_locality_trace(trace, ch.graph).ok


class TestCheckInvariance:
    def test_doubly_stochastic_chain_uniform(self):
        chain = cycle_lmc(6, 0.25)
        assert check_invariance(chain.process(), Dist.uniform(6), 40)

    def test_cycle_walk_uniform(self):
        ch, coins = cycle_qw(CycleParams(n=5, alpha=0.5, q=0.2))
        assert check_invariance(induced_process(ch, coins), Dist.uniform(5), 40)

    def test_biased_process_not_uniform_invariant(self, rng):
        g = Graph.complete(3)
        M = random_local_matrix(rng, g)  # generic: not doubly stochastic
        proc = from_matrix(M).process()
        assert not check_invariance(proc, Dist.uniform(3), 10)


class TestChannelSchedule:
    def test_two_phase_schedule(self):
        from walklift.processes import ChannelProcess

        g = Graph.complete(2)
        coherent = measured_unitary_channel(HADAMARD, 0.0, g)
        dephased = measured_unitary_channel(HADAMARD, 1.0, g)
        proc = ChannelProcess([coherent, dephased], CoinAssignment.constant(2, n_coins=1))
        traj = proc.trajectory(Dist.delta(2, 0), 4)
        # step 1 coherent: uniform marginal; step 2 recombines coherently to
        # the start before dephasing; from step 3 the dephased walk levels out
        assert np.allclose(traj[1], [0.5, 0.5], atol=1e-12)
        assert np.allclose(traj[2], [1.0, 0.0], atol=1e-12)
        assert np.allclose(traj[3], [0.5, 0.5], atol=1e-12)
        assert np.allclose(traj[4], [0.5, 0.5], atol=1e-12)
