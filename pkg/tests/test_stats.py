"""Estimator tests: polygamma evaluation, shape solver, bootstrap moments,
covariances, tail curves, exponent fits."""

import math

import mpmath
import numpy as np
import pytest

from polymerlab.errors import InsufficientData, NonpositiveData
from polymerlab.stats import (diagonal_shape_rate, digamma,
                              estimate_covariance, estimate_moments,
                              fit_exponent, nested_conditional_covariance,
                              nested_inner_covariance, shape_minimizer, shape_value,
                              tail_curve, trigamma, wilson_interval)

EULER = 0.5772156649015329


class TestPolygamma:
    @pytest.mark.parametrize("x", [0.05, 0.3, 0.5, 1.0, 1.5, 2.0, 3.7, 9.99,
                                   10.0, 25.0, 123.4, 1e4])
    def test_digamma_matches_reference(self, x):
        want = float(mpmath.digamma(x))
        assert digamma(x) == pytest.approx(want, abs=1e-12, rel=1e-12)

    @pytest.mark.parametrize("x", [0.05, 0.3, 0.5, 1.0, 1.5, 2.0, 3.7, 9.99,
                                   10.0, 25.0, 123.4, 1e4])
    def test_trigamma_matches_reference(self, x):
        want = float(mpmath.polygamma(1, x))
        assert trigamma(x) == pytest.approx(want, abs=1e-12, rel=1e-12)

    def test_classic_identities(self):
        assert digamma(1.0) == pytest.approx(-EULER, abs=1e-13)
        assert digamma(0.5) == pytest.approx(-EULER - 2 * math.log(2), abs=1e-13)
        assert trigamma(1.0) == pytest.approx(math.pi ** 2 / 6, abs=1e-13)
        assert trigamma(0.5) == pytest.approx(math.pi ** 2 / 2, abs=1e-12)

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            digamma(0.0)
        with pytest.raises(ValueError):
            trigamma(-1.0)


class TestShapeSolver:
    def test_diagonal_rate_at_unit_shape(self):
        # -2 * digamma(1/2) = 2 * (EULER + 2 log 2), frozen from an
        # independent closed-form evaluation
        assert diagonal_shape_rate(1.0) == pytest.approx(3.9270200520428693,
                                                         abs=1e-12)
        assert diagonal_shape_rate(2.0) == pytest.approx(2 * EULER, abs=1e-12)

    def test_diagonal_minimizer_is_midpoint(self):
        for mu in (0.5, 1.0, 2.0, 3.5):
            assert shape_minimizer(mu, 1.0, 1.0) == pytest.approx(mu / 2, rel=1e-10)

    def test_minimizer_symmetry(self):
        z = shape_minimizer(1.0, 1.0, 2.0)
        z_swapped = shape_minimizer(1.0, 2.0, 1.0)
        assert z + z_swapped == pytest.approx(1.0, rel=1e-10)

    def test_stationarity_residual(self):
        for (mu, x, y) in [(1.0, 1.0, 3.0), (0.7, 2.0, 1.0), (2.5, 1.0, 1.0)]:
            z = shape_minimizer(mu, x, y)
            residual = x * trigamma(z) - y * trigamma(mu - z)
            assert abs(residual) <= 1e-9 * max(x * trigamma(z), 1.0)

    def test_shape_value_formula(self):
        mu, x, y = 1.0, 1.0, 2.0
        z = shape_minimizer(mu, x, y)
        assert shape_value(mu, x, y) == pytest.approx(
            -x * digamma(z) - y * digamma(mu - z), rel=1e-12
        )

    def test_minimizer_is_a_minimum(self):
        mu, x, y = 1.0, 1.0, 2.0
        z = shape_minimizer(mu, x, y)
        best = shape_value(mu, x, y)
        for dz in (-1e-3, 1e-3):
            assert -x * digamma(z + dz) - y * digamma(mu - z - dz) >= best


class TestMoments:
    def test_tiny_example(self):
        est = estimate_moments([1.0, 2.0, 3.0], resamples=200)
        assert est.mean == 2.0
        assert est.variance == 1.0
        assert est.n_samples == 3
        assert est.excluded == 0

    def test_mapping_records_with_key(self):
        recs = [{"values": {"a": float(i)}} for i in range(10)]
        est = estimate_moments(recs, "a", resamples=100)
        assert est.mean == 4.5

    def test_missing_values_are_counted_excluded(self):
        recs = [1.0, None, 2.0, float("nan"), 3.0]
        est = estimate_moments(recs, resamples=100)
        assert est.n_samples == 3
        assert est.excluded == 2

    def test_constant_sample_has_zero_width(self):
        est = estimate_moments([5.0] * 20, resamples=100)
        assert est.variance == 0.0
        assert est.mean_ci == (5.0, 5.0)
        assert est.variance_ci == (0.0, 0.0)

    def test_normal_surrogate_recovers_variance(self):
        vals = np.random.default_rng(3).normal(0.0, 1.0, size=100_000)
        est = estimate_moments(vals, resamples=200)
        assert est.variance == pytest.approx(1.0, abs=0.02)
        assert est.variance_ci[0] <= est.variance <= est.variance_ci[1]
        assert est.mean_ci[0] <= est.mean <= est.mean_ci[1]

    def test_bootstrap_is_seeded(self):
        vals = list(np.random.default_rng(8).normal(size=100))
        a = estimate_moments(vals, seed=5, resamples=300)
        b = estimate_moments(vals, seed=5, resamples=300)
        c = estimate_moments(vals, seed=6, resamples=300)
        assert a.mean_ci == b.mean_ci and a.variance_ci == b.variance_ci
        assert a.mean_ci != c.mean_ci

    def test_too_few_records(self):
        with pytest.raises(InsufficientData):
            estimate_moments([1.0], resamples=10)


class TestCovariance:
    def test_tiny_example(self):
        recs = [{"x": 1.0, "y": 2.0}, {"x": 2.0, "y": 4.0}, {"x": 3.0, "y": 6.0}]
        est = estimate_covariance(recs, "x", "y", resamples=200)
        assert est.covariance == 2.0
        assert est.n_samples == 3

    def test_self_covariance_equals_variance_bitwise(self):
        rng = np.random.default_rng(12)
        recs = [{"a": float(v)} for v in rng.normal(size=500)]
        mom = estimate_moments(recs, "a", seed=9, resamples=400)
        cov = estimate_covariance(recs, "a", "a", seed=9, resamples=400)
        assert cov.covariance == mom.variance
        assert cov.ci == mom.variance_ci  # same resampling stream, same fold

    def test_independent_streams_near_zero(self):
        rng = np.random.default_rng(21)
        n = 20_000
        xs = rng.normal(size=n)
        ys = rng.normal(size=n)
        recs = [{"x": float(a), "y": float(b)} for a, b in zip(xs, ys)]
        est = estimate_covariance(recs, "x", "y", resamples=200)
        assert abs(est.covariance) <= 3 / math.sqrt(n)
        assert est.ci[0] <= est.covariance <= est.ci[1]

    def test_pairing_drops_records_with_either_side_missing(self):
        recs = [{"x": 1.0, "y": 1.0}, {"x": None, "y": 2.0},
                {"x": 2.0, "y": 2.0}, {"x": 3.0, "y": None},
                {"x": 3.0, "y": 5.0}]
        est = estimate_covariance(recs, "x", "y", resamples=50)
        assert est.n_samples == 3
        assert est.excluded == 2


class TestNestedCovariance:
    def test_constant_statistic_gives_zero(self):
        stat = lambda field: (1.0, 2.0)
        val = nested_inner_covariance(1.0, 2, 8, 0, 5, 77, paired_statistic=stat)
        assert val == 0.0

    def test_full_estimator_runs_and_brackets(self):
        est = nested_conditional_covariance(1.0, 2, 8, outer=6, inner=4,
                                            master_seed=31, resamples=100)
        assert len(est.inner_covariances) == 6
        assert est.ci[0] <= est.estimate <= est.ci[1]

    def test_inner_count_must_allow_bessel(self):
        with pytest.raises(InsufficientData):
            nested_inner_covariance(1.0, 2, 8, 0, 1, 5)


class TestTailCurve:
    def test_exceedance_counts(self):
        pts = tail_curve([0.0, 1.0, 2.0, 3.0], None, 0.0, 1.0, [0.5, 1.5, 2.5, 9.0])
        probs = [p.probability for p in pts]
        assert probs == [0.75, 0.5, 0.25, 0.0]

    def test_centering_and_scaling(self):
        pts = tail_curve([10.0, 20.0], None, 10.0, 10.0, [0.5])
        assert pts[0].probability == 0.5

    def test_curve_is_nonincreasing_with_valid_ci(self):
        vals = np.random.default_rng(5).normal(size=2000)
        pts = tail_curve(vals, None, 0.0, 1.0, np.linspace(-3, 3, 25))
        probs = [p.probability for p in pts]
        assert all(a >= b for a, b in zip(probs, probs[1:]))
        for p in pts:
            assert p.ci[0] <= p.probability <= p.ci[1]
            assert 0.0 <= p.ci[0] and p.ci[1] <= 1.0

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            tail_curve([1.0], None, 0.0, 0.0, [1.0])
        with pytest.raises(ValueError):
            tail_curve([1.0], None, 0.0, 1.0, [2.0, 1.0])
        with pytest.raises(InsufficientData):
            tail_curve([None], None, 0.0, 1.0, [1.0])


class TestExponentFit:
    def test_exact_power_laws(self):
        ns = [16, 32, 64, 128, 256]
        for expo in (4.0 / 3.0, 2.0 / 3.0, -2.0 / 3.0):
            pts = [(n, 2.5 * n ** expo) for n in ns]
            fit = fit_exponent(pts)
            assert fit.slope == pytest.approx(expo, abs=1e-12)
            assert fit.intercept == pytest.approx(math.log(2.5), abs=1e-12)
            assert fit.stderr <= 1e-12

    def test_noisy_power_law(self):
        rng = np.random.default_rng(14)
        ns = [64, 128, 256, 512, 1024]
        pts = [(n, n ** (2.0 / 3.0) * math.exp(rng.normal(0, 0.05))) for n in ns]
        fit = fit_exponent(pts)
        assert 0.55 <= fit.slope <= 0.78
        assert fit.stderr > 0.0

    def test_rejects_degenerate_input(self):
        with pytest.raises(InsufficientData):
            fit_exponent([(1.0, 1.0), (2.0, 2.0)])
        with pytest.raises(NonpositiveData):
            fit_exponent([(1.0, 1.0), (2.0, -1.0), (3.0, 2.0)])


class TestWilson:
    def test_basic_bracketing(self):
        lo, hi = wilson_interval(30, 100)
        assert 0.0 < lo < 0.3 < hi < 1.0

    def test_edge_cases(self):
        lo, hi = wilson_interval(0, 50)
        assert lo == 0.0 and 0.0 < hi < 0.2
        lo, hi = wilson_interval(50, 50)
        assert 0.8 < lo < 1.0 and hi == 1.0

    def test_width_shrinks_with_n(self):
        w1 = np.diff(wilson_interval(10, 20))[0]
        w2 = np.diff(wilson_interval(100, 200))[0]
        assert w2 < w1

    def test_empty_sample_rejected(self):
        with pytest.raises(InsufficientData):
            wilson_interval(0, 0)
