#!/usr/bin/env python3
# Tests for the Step-1 solver, its brute-force oracle and the lp reweighting

import sys

import numpy as np

from datagen import gen_gaussian_two_cluster, sigma_for, trial_rng
from errors import ContractViolation, ParameterError
from estimator import coordinate_wise_median
from linalg_core import feasibility_residual, lambda_max
from sdp_solver import (
    StepProblem,
    _support_levels,
    brute_force_step1,
    is_feasible_pair,
    lp_objective,
    reweight_lp,
    solve_step1,
    solve_step1_lp,
)

THREE_POINTS = np.array([[0.0], [0.0], [10.0]])


def _raises(call, exc):
    try:
        call()
    except exc:
        return True
    return False


def test_points_at_center_need_no_outliers():
    Y = np.tile([2.0, -1.0], (4, 1))
    sol = solve_step1(StepProblem(Y, np.array([2.0, -1.0]), 1.0))
    assert sol.feasible
    assert sol.weighted_l1 == 0.0
    assert np.array_equal(sol.h, np.zeros(4))


def test_three_point_analytic_optimum():
    sol = solve_step1(StepProblem(THREE_POINTS, np.zeros(1), 3.0))
    assert sol.feasible
    assert abs(sol.weighted_l1 - 0.97) < 1e-2
    assert sol.h[0] == 0.0 and sol.h[1] == 0.0
    assert feasibility_residual(THREE_POINTS, sol.h, np.zeros(1), 3.0) <= 1e-3


def test_loose_bound_keeps_everything():
    rng = np.random.default_rng(1)
    Y = rng.standard_normal((30, 3))
    c = Y.mean(axis=0)
    full = lambda_max(Y, np.ones(30), c).value
    sol = solve_step1(StepProblem(Y, c, full * 1.01))
    assert np.array_equal(sol.h, np.zeros(30))
    assert sol.sweeps == 0


def test_sweeps_are_monotone():
    s = gen_gaussian_two_cluster(10, 300, 0.2, 8)
    c = coordinate_wise_median(s.points)
    full = lambda_max(s.points, np.ones(300), c).value
    sol = solve_step1(StepProblem(s.points, c, 0.5 * full))
    assert sol.feasible
    hist = sol.history
    assert all(b <= a * (1 + 1e-4) for a, b in zip(hist, hist[1:]))


def test_feasible_solutions_recheck_independently():
    rng = np.random.default_rng(21)
    for _ in range(10):
        n, d = rng.integers(5, 40), rng.integers(1, 4)
        Y = rng.standard_normal((n, d))
        Y[: max(1, n // 8)] += 6.0
        c = np.median(Y, axis=0)
        full = lambda_max(Y, np.ones(n), c).value
        prob = StepProblem(Y, c, full * rng.uniform(0.3, 0.9))
        sol = solve_step1(prob)
        assert sol.feasible
        assert np.all((sol.h >= 0) & (sol.h <= 1))
        assert sol.weighted_l1 <= n * prob.u.max()
        assert feasibility_residual(Y, sol.h, c, prob.bound) <= 1e-3 + 1e-6


def test_brute_force_three_points():
    prob = StepProblem(THREE_POINTS, np.zeros(1), 3.0)
    sol = brute_force_step1(prob, grid_steps=100)
    assert abs(sol.weighted_l1 - 0.97) < 1e-9
    assert sol.residual <= 1e-12
    # 0.97 is not on the 1/50 grid; the next grid point up is 0.98
    coarse = brute_force_step1(prob, grid_steps=50)
    assert abs(coarse.weighted_l1 - 0.98) < 1e-9
    assert coarse.residual <= 0.0


def test_brute_force_edge_cases():
    rng = np.random.default_rng(4)
    Y = rng.standard_normal((4, 2))
    c = np.zeros(2)
    huge = brute_force_step1(StepProblem(Y, c, 1e9), grid_steps=10)
    assert np.array_equal(huge.h, np.zeros(4))
    tight = brute_force_step1(StepProblem(Y, c, 1e-3), grid_steps=10)
    assert tight.feasible and tight.residual <= 0.0
    assert _raises(lambda: brute_force_step1(StepProblem(np.zeros((7, 1)), np.zeros(1), 1.0)), ContractViolation)
    assert _raises(lambda: brute_force_step1(StepProblem(np.zeros((3, 3)), np.zeros(3), 1.0)), ContractViolation)
    assert _raises(lambda: brute_force_step1(StepProblem(Y, c, 1.0), grid_steps=0), ContractViolation)
    six = StepProblem(rng.standard_normal((6, 2)), np.zeros(2), 1.0)
    assert _raises(lambda: brute_force_step1(six, grid_steps=21), ContractViolation)


def _planted_instance(rng):
    n, d = int(rng.integers(3, 6)), int(rng.integers(1, 3))
    Y = rng.standard_normal((n, d))
    direction = rng.standard_normal(d)
    Y[-1] = direction / np.linalg.norm(direction) * rng.uniform(3.0, 5.0)
    c = np.zeros(d)
    w_in = np.ones(n)
    w_in[-1] = 0.0
    lam_in = lambda_max(Y, w_in, c, tol=1e-12).value
    lam_all = lambda_max(Y, np.ones(n), c, tol=1e-12).value
    bound = lam_in + rng.uniform(0.1, 0.9) * (lam_all - lam_in)
    return StepProblem(Y, c, bound)


def test_solver_matches_brute_force_oracle():
    rng = np.random.default_rng(2024)
    grid = 20
    for _ in range(50):
        prob = _planted_instance(rng)
        fast = solve_step1(prob)
        exact = brute_force_step1(prob, grid_steps=grid)
        assert fast.feasible
        assert abs(fast.weighted_l1 - exact.weighted_l1) <= max(0.05, 2.0 / grid) * prob.n


def test_planted_recovery_on_two_cluster_samples():
    c1, eps, n = 1.1, 0.1, 500
    good = 0
    for k in range(20):
        s = gen_gaussian_two_cluster(25, n, eps, trial_rng(77, k))
        sigma = sigma_for(s, "empirical")
        c2 = np.linalg.norm(coordinate_wise_median(s.points) - s.oracle_mean) / sigma
        prob = StepProblem(s.points, s.oracle_mean, (c1**2 + c2**2) * sigma**2 * n)
        sol = solve_step1(prob)
        good += sol.feasible and sol.h.sum() <= 1.5 * eps * n
    assert good >= 18


def test_reweight_examples():
    assert np.array_equal(reweight_lp(np.zeros(5), 0.5, 0.01), np.ones(5))
    u = reweight_lp(np.array([0.0, 1.0]), 0.5, 0.01)
    assert abs(u[0] - 1.0) < 1e-12
    assert abs(u[1] - 1.01**-0.5 / 10.0) < 1e-9
    assert abs(u[1] - 0.099504) < 1e-6
    u = reweight_lp(np.linspace(0, 1, 11), 0.3, 0.01)
    assert np.all(np.diff(u) < 0)
    assert _raises(lambda: reweight_lp(np.zeros(2), 1.0, 0.01), ParameterError)
    assert _raises(lambda: reweight_lp(np.zeros(2), 0.5, 0.0), ParameterError)


def test_lp_path_does_not_increase_lp_mass():
    s = gen_gaussian_two_cluster(10, 200, 0.2, 12)
    c = coordinate_wise_median(s.points)
    full = lambda_max(s.points, np.ones(200), c).value
    prob = StepProblem(s.points, c, 0.5 * full)
    l1 = solve_step1(prob)
    lp = solve_step1_lp(prob, 0.5, rw_rounds=10)
    assert lp.feasible
    assert 1 <= lp.rounds <= 10
    assert lp_objective(lp.h, 0.5) <= lp_objective(l1.h, 0.5) + 1e-9


def test_objectives_and_feasibility_predicates():
    h = np.array([0.0, 0.25, 1.0])
    assert lp_objective(h, 0) == 2.0
    assert lp_objective(h, 1) == 1.25
    assert abs(lp_objective(h, 0.5) - 1.5) < 1e-12
    x = np.zeros(1)
    assert is_feasible_pair(THREE_POINTS, np.array([0.0, 0.0, 1.0]), x, 3.0, binary=True)
    assert not is_feasible_pair(THREE_POINTS, np.array([0.0, 0.0, 0.97]), x, 3.0, binary=True)
    assert is_feasible_pair(THREE_POINTS, np.array([0.0, 0.0, 0.97]), x, 3.0)
    assert not is_feasible_pair(THREE_POINTS, np.zeros(3), x, 3.0)
    assert not is_feasible_pair(THREE_POINTS, np.array([0.0, 0.0, 1.5]), x, 3.0)


def test_problem_validation():
    assert _raises(lambda: StepProblem(THREE_POINTS, np.zeros(1), 0.0), ContractViolation)
    assert _raises(lambda: StepProblem(THREE_POINTS, np.zeros(1), 1.0, u=np.array([1.0, 0.0, 1.0])), ContractViolation)
    assert _raises(lambda: StepProblem(THREE_POINTS, np.zeros(2), 1.0), ContractViolation)
    assert _raises(lambda: solve_step1(StepProblem(THREE_POINTS, np.zeros(1), 3.0), tol_feas=0.0), ContractViolation)


def test_exhausted_sweeps_report_infeasible():
    sol = solve_step1(StepProblem(THREE_POINTS, np.zeros(1), 3.0), max_sweeps=2)
    assert not sol.feasible
    assert sol.sweeps == 2
    assert sol.residual > 1e-3


def test_support_levels_are_relative_to_the_largest_h():
    assert np.allclose(_support_levels(np.array([0.0, 0.2, 0.8]), 0.5), [0.4, 0.5, 0.6, 0.72])
    # restore_level above max h is dropped
    assert np.allclose(_support_levels(np.array([0.1, 0.4]), 0.5), [0.2, 0.3, 0.36])
    assert _support_levels(np.zeros(3), 0.5) == []


def main():
    print("🧪 sdp_solver tests")
    print("=" * 50)
    tests = [obj for name, obj in globals().items() if name.startswith("test_") and callable(obj)]
    failed = 0
    for test in tests:
        try:
            test()
            print(f"✅ {test.__name__}")
        except Exception as e:
            failed += 1
            print(f"❌ {test.__name__}: {e!r}")
    print("=" * 50)
    print(f"📊 {len(tests) - failed}/{len(tests)} passed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
