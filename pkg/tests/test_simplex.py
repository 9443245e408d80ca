import numpy as np
import pytest

from walklift.simplex import InfeasibleError, UnboundedError, solve_lp

from conftest import rng_for


def test_basic_maximization():
    # max x + y st x + 2y <= 4, 3x + y <= 6  ->  optimum at (8/5, 6/5)
    res = solve_lp(c=[-1.0, -1.0], A_ub=[[1, 2], [3, 1]], b_ub=[4, 6])
    assert res.objective == pytest.approx(-2.8, abs=1e-9)
    assert np.allclose(res.x, [1.6, 1.2], atol=1e-9)


def test_equality_constraints():
    # min x + 2y st x + y == 1
    res = solve_lp(c=[1.0, 2.0], A_eq=[[1, 1]], b_eq=[1.0])
    assert res.objective == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(res.x, [1.0, 0.0], atol=1e-9)


def test_negative_rhs_normalized():
    # x >= 2 encoded as -x <= -2, minimizing x
    res = solve_lp(c=[1.0], A_ub=[[-1.0]], b_ub=[-2.0])
    assert res.x[0] == pytest.approx(2.0, abs=1e-9)


def test_infeasible_detected():
    with pytest.raises(InfeasibleError):
        solve_lp(c=[1.0], A_ub=[[1.0], [-1.0]], b_ub=[1.0, -2.0])  # x <= 1 and x >= 2


def test_unbounded_detected():
    with pytest.raises(UnboundedError):
        solve_lp(c=[-1.0], A_ub=[[-1.0]], b_ub=[0.0])  # max x with x >= 0 only


def test_redundant_equalities_handled():
    res = solve_lp(c=[1.0, 1.0], A_eq=[[1, 1], [2, 2]], b_eq=[1.0, 2.0])
    assert res.objective == pytest.approx(1.0, abs=1e-9)


def test_degenerate_cycling_terminates():
    # classic Beale cycling example; Bland's rule must terminate
    c = [-0.75, 150.0, -0.02, 6.0]
    A_ub = [
        [0.25, -60.0, -0.04, 9.0],
        [0.5, -90.0, -0.02, 3.0],
        [0.0, 0.0, 1.0, 0.0],
    ]
    b_ub = [0.0, 0.0, 1.0]
    res = solve_lp(c, A_ub=A_ub, b_ub=b_ub)
    assert res.objective == pytest.approx(-0.05, abs=1e-9)


def test_matches_scipy_on_random_problems():
    linprog = pytest.importorskip("scipy.optimize").linprog
    rng = rng_for("simplex-battery")
    for trial in range(25):
        n = int(rng.integers(2, 6))
        m = int(rng.integers(1, 5))
        c = rng.normal(size=n)
        A_ub = rng.normal(size=(m, n))
        x_feas = rng.uniform(0.2, 1.0, size=n)
        b_ub = A_ub @ x_feas + rng.uniform(0.1, 1.0, size=m)  # keep it feasible
        A_box = np.eye(n)
        b_box = np.full(n, 5.0)  # bounded region
        ref = linprog(
            c,
            A_ub=np.vstack([A_ub, A_box]),
            b_ub=np.concatenate([b_ub, b_box]),
            bounds=[(0, None)] * n,
            method="highs",
        )
        assert ref.status == 0
        res = solve_lp(c, A_ub=np.vstack([A_ub, A_box]), b_ub=np.concatenate([b_ub, b_box]))
        assert res.objective == pytest.approx(ref.fun, abs=1e-7)
