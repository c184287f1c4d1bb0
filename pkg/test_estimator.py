#!/usr/bin/env python3
# Tests for the iterative estimator, its building blocks and the baselines

import contextlib
import io
import math
import sys
from dataclasses import replace

import numpy as np
from sklearn.base import clone

import theory
from datagen import corrupt, gen_gaussian_two_cluster, sigma_for, trial_rng
from errors import ContractViolation, EmptySupportError, ParameterError
from estimator import (
    AlgoConfig,
    CoordinateMedianEstimator,
    LpMeanEstimator,
    SimpleFilterEstimator,
    TerminatedBy,
    coordinate_wise_median,
    make_estimator,
    parse_tag,
    recovery_error,
    retained_mass,
    run_algorithm1,
    sample_mean,
    simple_filter_baseline,
    step2_update,
)
from linalg_core import empirical_sigma, lambda_max


def _raises(call, exc):
    try:
        call()
    except exc:
        return True
    return False


def _planted(seed=3, d=5, n=500, eps=0.1, shift=5.0):
    """Inliers N(0, I) with an eps share of rows moved to shift * e1."""
    rng = trial_rng(seed, 0)
    Y = rng.standard_normal((n, d))
    k = int(round(eps * n))
    target = np.zeros(d)
    target[0] = shift
    return corrupt(Y, np.arange(k), np.tile(target, (k, 1)), true_mean=np.zeros(d))


def _planted_config(sample, **overrides):
    sigma = sigma_for(sample, "empirical")
    c2 = float(np.linalg.norm(coordinate_wise_median(sample.points) - sample.oracle_mean)) / sigma
    return AlgoConfig(**{"sigma": sigma, "c2_init": c2, **overrides})


def test_median_examples():
    assert np.array_equal(coordinate_wise_median([[0.0, 0.0], [1.0, 2.0], [2.0, 1.0]]), [1.0, 1.0])
    assert np.array_equal(coordinate_wise_median([[0.0], [10.0]]), [5.0])
    assert np.array_equal(coordinate_wise_median([[3.0, -4.0]]), [3.0, -4.0])
    assert np.array_equal(sample_mean([[0.0], [2.0]]), [1.0])
    assert np.array_equal(sample_mean([[7.0, 1.0]]), [7.0, 1.0])


def test_step2_examples():
    Y = np.array([[0.0, 1.0], [2.0, 3.0], [50.0, 50.0]])
    assert np.allclose(step2_update(Y, [0.0, 0.0, 1.0], 0.6), [1.0, 2.0])
    assert np.allclose(step2_update(Y, np.zeros(3), 0.6), Y.mean(axis=0))
    assert abs(step2_update([[0.0], [0.0], [3.0]], [0.5, 0.5, 0.0], 0.6)[0] - 1.5) < 1e-12
    # h above tau is dropped even when its weight would be positive
    assert np.allclose(step2_update(Y, [0.0, 0.0, 0.7], 0.6), [1.0, 2.0])


def test_step2_errors():
    Y = np.zeros((3, 2))
    assert _raises(lambda: step2_update(Y, np.ones(3), 0.6), EmptySupportError)
    assert _raises(lambda: step2_update(Y, np.full(3, 0.8), 0.6), EmptySupportError)
    assert _raises(lambda: step2_update(Y, np.zeros(3), 0.0), ParameterError)
    assert _raises(lambda: step2_update(Y, np.zeros(2), 0.6), ContractViolation)


def test_retained_mass_inequality():
    assert retained_mass([0.5, 0.5, 0.0], 0.6) == 2.0
    assert 2.0 >= (1.0 - (1.0 / 3.0) / 0.6) * 3
    rng = np.random.default_rng(8)
    for _ in range(1000):
        n = int(rng.integers(1, 200))
        tau = rng.uniform(0.01, 1.0)
        eps = rng.uniform(0.0, 1.0)
        h = rng.uniform(0.0, 1.0, n) * (rng.uniform(size=n) < rng.uniform())
        if h.sum() > eps * n:
            h *= eps * n / h.sum()
        assert retained_mass(h, tau) >= (1.0 - eps / tau) * n - 1e-9


def test_weighted_mean_minimises_spectral_norm():
    rng = np.random.default_rng(17)
    for _ in range(50):
        n, d = int(rng.integers(5, 40)), int(rng.integers(1, 5))
        Y = rng.standard_normal((n, d)) * rng.uniform(0.5, 3.0, d)
        h = rng.uniform(0.0, 1.0, n)
        h[0] = 0.0
        w = (1.0 - h) * (h <= 0.6)
        x_bar = step2_update(Y, h, 0.6)
        best = lambda_max(Y, w, x_bar, tol=1e-12, max_iters=10000).value
        for _ in range(20):
            other = x_bar + rng.standard_normal(d)
            assert lambda_max(Y, w, other, tol=1e-12, max_iters=10000).value >= best * (1.0 - 1e-6)


def test_median_concentrates_on_clean_data():
    for k in range(50):
        s = gen_gaussian_two_cluster(20, 2000, 0.0, trial_rng(31, k))
        assert np.linalg.norm(coordinate_wise_median(s.points) - s.true_mean) <= 3.0 * math.sqrt(20)


def test_clean_sample_returns_sample_mean():
    s = gen_gaussian_two_cluster(10, 2000, 0.0, trial_rng(5, 0))
    trace = run_algorithm1(s.points, AlgoConfig())
    assert np.linalg.norm(trace.final_x - s.points.mean(axis=0)) <= 0.05
    assert trace.h_support_size() == 0


def test_initial_c2_and_schedule_length():
    cfg = AlgoConfig(eps_check=0.1)
    assert abs(cfg.c2_0(100) - 32.2) < 1e-12
    assert abs(theory.gamma(0.1, 0.6) - 0.52223) < 1e-5
    assert theory.schedule_T(cfg.c2_0(100), 0.1, 0.6, cfg.c1) == 7
    assert AlgoConfig(c2_init=0.7).c2_0(100) == 0.7


def test_c2_follows_the_recursion_exactly():
    Y = trial_rng(6, 0).standard_normal((200, 100))
    cfg = AlgoConfig(eps_check=0.1)
    trace = run_algorithm1(Y, cfg)
    assert trace.schedule_T == 7
    assert trace.iterations == 7
    assert trace.terminated_by is TerminatedBy.MAX_T
    c2 = trace.c2_trace
    assert c2[0] == cfg.c2_0(100)
    for a, b in zip(c2, c2[1:]):
        assert b == theory.next_c2(a, 0.1, 0.6, cfg.c1)
        assert b < a
    assert [it.t for it in trace.iterates] == list(range(8))


def test_planted_outliers_are_excluded():
    s = _planted()
    cfg = _planted_config(s)
    trace = run_algorithm1(s.points, cfg)
    assert trace.terminated_by is TerminatedBy.MAX_T
    assert trace.schedule_T == 1
    assert trace.excluded(cfg.tau) >= 45
    err = recovery_error(trace.final_x, s)
    assert err < 0.1
    assert err < recovery_error(sample_mean(s.points), s) / 3.0


def test_lp_variant_on_planted_outliers():
    s = _planted(seed=4)
    cfg = _planted_config(s, p=0.5)
    est = LpMeanEstimator.from_config(cfg).fit(s.points)
    assert est.n_iter_ == 1
    assert est.terminated_by_ in {t.value for t in TerminatedBy}
    assert recovery_error(est.location_, s) < recovery_error(sample_mean(s.points), s) / 3.0


def test_final_threshold_reweights_last_indicator():
    s = _planted(seed=9)
    cfg = _planted_config(s, tau=1.0, final_threshold=0.6)
    trace = run_algorithm1(s.points, cfg)
    assert np.allclose(trace.final_x, step2_update(s.points, trace.final_h, 0.6))
    assert not np.allclose(trace.final_x, trace.iterates[-1].x) or trace.excluded(0.6) == 0


def test_final_threshold_without_mass_warns_and_keeps_iterate():
    # two symmetric points share the bound, so both end near h = 0.5
    Y = np.array([[-1.0], [1.0]])
    cfg = AlgoConfig(sigma=math.sqrt(1.0 / (2.0 * (1.1**2 + 0.25))), c2_init=0.5, tau=1.0, final_threshold=0.1)
    err = io.StringIO()
    with contextlib.redirect_stderr(err):
        trace = run_algorithm1(Y, cfg)
    assert trace.terminated_by is TerminatedBy.MAX_T
    assert np.all(trace.final_h > 0.1)
    assert trace.meta["final_threshold_applied"] is False
    assert np.array_equal(trace.final_x, trace.iterates[-1].x)
    assert "retains no mass" in err.getvalue()


def test_solver_failure_keeps_last_estimate():
    s = gen_gaussian_two_cluster(10, 300, 0.2, 2)
    cfg = AlgoConfig(c2_init=0.1, max_sweeps=0)
    trace = run_algorithm1(s.points, cfg)
    assert trace.terminated_by is TerminatedBy.SOLVER_FAILURE
    assert trace.iterations == 0
    assert np.array_equal(trace.final_x, coordinate_wise_median(s.points))


def _equivariance_cases(count=20):
    """Seeded random small instances, each with a random shift, scale and permutation."""
    for k in range(count):
        rng = trial_rng(77, k)
        d = int(rng.integers(2, 7))
        n = int(rng.integers(60, 300))
        s = gen_gaussian_two_cluster(d, n, float(rng.uniform(0.05, 0.2)), rng)
        yield (s.points, _planted_config(s), rng.normal(scale=10.0, size=d),
               float(rng.uniform(0.2, 5.0)), rng.permutation(n))


def test_translation_equivariance():
    for Y, cfg, b, _, _ in _equivariance_cases():
        base = run_algorithm1(Y, cfg)
        moved = run_algorithm1(Y + b, cfg)
        assert np.allclose(moved.final_x, base.final_x + b, atol=1e-6)
        assert np.allclose(moved.final_h, base.final_h, atol=1e-6)


def test_permutation_invariance():
    for Y, cfg, _, _, perm in _equivariance_cases():
        base = run_algorithm1(Y, cfg)
        shuffled = run_algorithm1(Y[perm], cfg)
        assert np.allclose(shuffled.final_x, base.final_x, atol=1e-6)
        assert np.allclose(shuffled.final_h, base.final_h[perm], atol=1e-6)


def test_scale_equivariance():
    for Y, cfg, _, a, _ in _equivariance_cases():
        base = run_algorithm1(Y, cfg)
        scaled = run_algorithm1(a * Y, replace(cfg, sigma=cfg.sigma * a))
        assert np.allclose(scaled.final_x, a * base.final_x, atol=1e-6 * a)
        assert np.allclose(scaled.final_h, base.final_h, atol=1e-6)


def test_trace_meta_describes_the_run():
    s = _planted(seed=5)
    cfg = _planted_config(s, final_threshold=0.2)
    trace = run_algorithm1(s.points, cfg)
    meta = trace.meta
    assert (meta["n"], meta["d"]) == (500, 5)
    assert meta["sigma"] == cfg.sigma
    assert meta["c2_0"] == cfg.c2_init
    assert math.isclose(meta["bound"], (cfg.c1**2 + cfg.c2_init**2) * cfg.sigma**2 * 500)
    assert meta["final_threshold_applied"] is True
    assert run_algorithm1(s.points, _planted_config(s)).meta["final_threshold_applied"] is False


def test_final_threshold_recovers_oracle_when_n_equals_d():
    # 80 inliers in 100 dimensions: outliers keep h below tau, inliers are refit to h = 0
    s = gen_gaussian_two_cluster(100, 100, 0.2, trial_rng(2024, 0))
    trace = run_algorithm1(s.points, _planted_config(s, final_threshold=0.2))
    assert trace.excluded(0.2) >= 20
    assert recovery_error(trace.final_x, s) <= 0.10
    assert recovery_error(trace.final_x, s) < recovery_error(coordinate_wise_median(s.points), s)


def test_simple_filter_on_clean_data():
    Y = trial_rng(10, 0).standard_normal((500, 5))
    assert np.allclose(simple_filter_baseline(Y, empirical_sigma(Y)), Y.mean(axis=0))


def test_simple_filter_drops_extreme_outlier_first():
    Y = np.append(np.linspace(-1.0, 1.0, 21), 1e6)[:, None]
    assert abs(simple_filter_baseline(Y, 1.0, max_rounds=1)[0]) < 1e-12
    assert abs(simple_filter_baseline(Y, 1.0)[0]) < 1e-12
    assert simple_filter_baseline(Y, 1.0, max_rounds=0)[0] > 1e4
    assert _raises(lambda: simple_filter_baseline(Y, 1.0, c=1.0), ParameterError)


def test_recovery_error():
    s = _planted()
    assert recovery_error(s.oracle_mean, s) == 0.0
    e1 = np.zeros(s.d)
    e1[0] = 1.0
    assert abs(recovery_error(s.oracle_mean + e1, s) - 1.0) < 1e-12
    assert _raises(lambda: recovery_error(np.zeros(s.d + 1), s), ContractViolation)


def test_config_validation():
    assert _raises(lambda: AlgoConfig(p=0.0), ParameterError)
    assert _raises(lambda: AlgoConfig(p=1.5), ParameterError)
    assert _raises(lambda: AlgoConfig(tau=0.0), ParameterError)
    assert _raises(lambda: AlgoConfig(c1=1.0), ParameterError)
    assert _raises(lambda: AlgoConfig(sigma=0.0), ParameterError)
    assert _raises(lambda: AlgoConfig(final_threshold=1.5), ParameterError)
    assert _raises(lambda: AlgoConfig(c2_init=0.0), ParameterError)
    assert _raises(lambda: AlgoConfig(eps_check=0.3), ParameterError)
    assert abs(AlgoConfig().eps_check - (theory.f_tau(0.6) - 1e-3)) < 1e-15
    assert not AlgoConfig().theory_violated


def test_theory_violation_runs_single_iteration():
    cfg = AlgoConfig(eps_check=0.3, allow_theory_violation=True)
    assert cfg.theory_violated
    trace = run_algorithm1(_planted().points, cfg)
    assert trace.schedule_T == 1
    assert trace.iterations <= 1


def test_sklearn_protocol():
    est = LpMeanEstimator(p=0.5, tau=0.8)
    copy = clone(est)
    assert copy.get_params()["p"] == 0.5
    assert copy.get_params()["tau"] == 0.8
    assert copy.to_config() == AlgoConfig(p=0.5, tau=0.8)
    assert SimpleFilterEstimator(sigma=2.0).get_params() == {"sigma": 2.0, "c": theory.DEFAULT_C1, "max_rounds": None}
    Y = np.array([[0.0, 0.0], [1.0, 2.0], [2.0, 1.0]])
    assert np.array_equal(CoordinateMedianEstimator().fit(Y).location_, [1.0, 1.0])
    assert LpMeanEstimator().fit(Y).location_.shape == (2,)


def test_estimator_tags():
    assert parse_tag(" L1 ") == ("lp", 1.0)
    assert parse_tag("lp(0.5)") == ("lp", 0.5)
    assert parse_tag("median") == ("median", None)
    for bad in ("lp(1.5)", "lp(0)", "lp(x)", "huber"):
        assert _raises(lambda: parse_tag(bad), ParameterError)
    cfg = AlgoConfig(tau=0.8, sigma=2.0)
    est = make_estimator("lp(0.25)", cfg)
    assert isinstance(est, LpMeanEstimator)
    assert est.p == 0.25 and est.tau == 0.8 and est.sigma == 2.0
    assert make_estimator("l1", cfg).p == 1.0
    assert make_estimator("simple_filter", cfg).get_params()["sigma"] == 2.0
    assert isinstance(make_estimator("median", cfg), CoordinateMedianEstimator)


def main():
    print("🧪 estimator tests")
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
