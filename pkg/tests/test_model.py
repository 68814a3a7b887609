import math

import mpmath as mp
import numpy as np
import pytest
from scipy.integrate import quad

from conftest import PARAM_GRID, mp_cdf, mp_pdf
from gollgr.gr import GrParams, gr_cdf, gr_pdf, gr_quantile
from gollgr.model import (GollgrParams, ShapeClassificationError, cdf,
                          classify_shape, critical_points, hrf, limit_at_zero,
                          logsf, odds_transform, pdf, quantile, sample, sf)

TABLE_TRUTH = GollgrParams(0.35, 0.55, -0.55, 0.11)


class TestParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            GollgrParams(0.0, 1.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            GollgrParams(1.0, -2.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            GollgrParams(1.0, 1.0, -1.0, 1.0)
        with pytest.raises(ValueError):
            GollgrParams(1.0, 1.0, 0.0, -1.0)

    def test_parent_accessor(self):
        p = GollgrParams(2.0, 3.0, 0.5, 1.5)
        assert p.gr == GrParams(0.5, 1.5)


class TestCdf:
    def test_parent_reduction(self):
        p = GollgrParams(1.0, 1.0, 1.5, 15.0)
        xs = np.linspace(0.01, 2.0, 40)
        assert np.max(np.abs(cdf(xs, p) - gr_cdf(xs, p.gr))) <= 1e-12

    def test_median_roundtrip(self):
        for vals in PARAM_GRID[:8]:
            p = GollgrParams(*vals)
            assert cdf(quantile(0.5, p), p) == pytest.approx(0.5, abs=1e-9)

    def test_interior_point_vs_quadrature(self):
        # oracle: quadrature of the density formula in 40-digit arithmetic;
        # the substitution t = s^10 removes the algebraic singularity at 0
        p = TABLE_TRUTH
        ref = float(mp.quad(
            lambda s: mp_pdf(s ** 10, *p.as_tuple()) * 10 * s ** 9, [0, 1]))
        assert cdf(1.0, p) == pytest.approx(ref, abs=1e-10)

    def test_zero_and_monotone(self):
        p = GollgrParams(0.3, 2.0, 1.5, 15.0)
        assert cdf(0.0, p) == 0.0
        xs = np.linspace(0.0, 3.0, 100)
        v = cdf(xs, p)
        assert (np.diff(v) >= 0).all()
        assert cdf(1e9, p) == pytest.approx(1.0, abs=1e-12)


class TestPdf:
    def test_parent_reduction(self):
        p = GollgrParams(1.0, 1.0, 0.0, 1.0)
        xs = np.linspace(0.05, 3.0, 30)
        assert np.max(np.abs(pdf(xs, p) - gr_pdf(xs, p.gr))) <= 1e-12

    def test_origin_approach_finite_case(self):
        # alpha*beta = 1 with delta = -1/2 gives the finite origin limit
        # 2 sqrt(theta/pi); theta = pi/4 makes it exactly 1.  The correction
        # decays slowly (like x to the power beta (delta+1)), so the density
        # is probed deep and the limit itself is checked exactly.
        p = GollgrParams(2.0, 0.5, -0.5, math.pi / 4.0)
        assert pdf(1e-14, p) == pytest.approx(1.0, rel=2e-3)
        assert abs(pdf(1e-12, p) - 1.0) < abs(pdf(1e-6, p) - 1.0)
        assert limit_at_zero(p) == pytest.approx(1.0, rel=1e-12)

    def test_interior_vs_finite_difference(self):
        p = GollgrParams(0.3, 2.0, 1.5, 15.0)
        x, h = 0.5, 5e-7
        fd = (cdf(x + h, p) - cdf(x - h, p)) / (2.0 * h)
        assert pdf(0.5, p) == pytest.approx(fd, rel=1e-6)

    @pytest.mark.parametrize("vals", PARAM_GRID)
    def test_matches_reference_formula(self, vals):
        p = GollgrParams(*vals)
        for u in (0.15, 0.5, 0.85):
            x = quantile(u, p)
            ref = float(mp_pdf(x, *vals))
            assert pdf(x, p) == pytest.approx(ref, rel=1e-11)

    @pytest.mark.parametrize("vals", PARAM_GRID)
    def test_normalization(self, vals):
        # substitution t = s^10 tames the origin singularity of the
        # heavy-shape members, harmless for the smooth ones
        p = GollgrParams(*vals)
        hi = quantile(1.0 - 1e-13, p)
        val, _ = quad(lambda s: pdf(s ** 10, p) * 10.0 * s ** 9,
                      0.0, hi ** 0.1, limit=400)
        assert val == pytest.approx(1.0, abs=1e-6)


class TestHazard:
    def test_rayleigh_closed_form(self):
        # parent reduction: hazard of the Rayleigh law is 2 theta x
        p = GollgrParams(1.0, 1.0, 0.0, 1.0)
        assert hrf(1.0, p) == pytest.approx(2.0, rel=1e-12)

    def test_small_x_matches_density(self):
        p = GollgrParams(0.3, 2.5, 0.5, 1.0)
        x = quantile(1e-8, p)
        assert hrf(x, p) == pytest.approx(pdf(x, p), rel=1e-6)

    def test_ratio_vs_quadrature(self):
        p = GollgrParams(0.1, 2.5, 1.0, 1.0)
        x = 2.0
        tail, _ = quad(lambda t: pdf(t, p), x, quantile(1.0 - 1e-15, p), limit=300)
        assert hrf(x, p) == pytest.approx(pdf(x, p) / tail, rel=1e-7)

    def test_eventual_growth(self):
        p = GollgrParams(0.3, 2.5, 0.5, 1.0)
        xs = np.linspace(3.0, 12.0, 10)
        v = hrf(xs, p)
        assert (np.diff(v) > 0).all()

    def test_overflow_sentinel(self):
        p = GollgrParams(1.0, 1.0, 0.0, 1.0)
        assert hrf(1e6, p) == math.inf


class TestQuantile:
    def test_beta_one_median_is_parent_median(self):
        # at u = 1/2 the inner odds bracket is exactly 1/2 for any alpha
        for alpha in (0.2, 1.0, 4.0):
            p = GollgrParams(alpha, 1.0, 0.7, 2.0)
            assert quantile(0.5, p) == pytest.approx(
                gr_quantile(0.5, p.gr), rel=1e-12)

    def test_rayleigh_median(self):
        p = GollgrParams(1.0, 1.0, 0.0, 1.0)
        assert quantile(0.5, p) == pytest.approx(math.sqrt(math.log(2.0)), rel=1e-12)

    def test_interior_vs_bisection(self):
        p = TABLE_TRUTH
        target = 0.9
        lo, hi = 1e-12, 1.0
        while cdf(hi, p) < target:
            hi *= 2.0
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if cdf(mid, p) < target:
                lo = mid
            else:
                hi = mid
        assert quantile(0.9, p) == pytest.approx(0.5 * (lo + hi), rel=1e-9)

    @pytest.mark.parametrize("vals", PARAM_GRID)
    def test_roundtrip_grid(self, vals):
        p = GollgrParams(*vals)
        us = np.arange(0.01, 0.995, 0.01)
        assert np.max(np.abs(cdf(quantile(us, p), p) - us)) <= 1e-9

    def test_domain(self):
        with pytest.raises(ValueError):
            quantile(0.0, TABLE_TRUTH)
        with pytest.raises(ValueError):
            quantile(1.0, TABLE_TRUTH)


class TestSample:
    def test_median_uniform_path(self):
        # a uniform draw of exactly 1/2 maps through odds 1 to the parent
        # quantile at (1/2)^(1/beta)
        p = GollgrParams(1.7, 2.3, 0.5, 2.0)
        expected = gr_quantile(0.5 ** (1.0 / p.beta), p.gr)
        assert quantile(0.5, p) == pytest.approx(expected, rel=1e-12)

    def test_deterministic(self):
        x1 = sample(1000, 31415, TABLE_TRUTH)
        x2 = sample(1000, 31415, TABLE_TRUTH)
        assert np.array_equal(x1, x2)
        x3 = sample(1000, 31416, TABLE_TRUTH)
        assert not np.array_equal(x1, x3)

    def test_ks_at_study_truth(self):
        x = np.sort(sample(100_000, 7, TABLE_TRUTH))
        n = x.size
        f = cdf(x, TABLE_TRUTH)
        i = np.arange(1, n + 1)
        ks = max(np.max(np.abs(f - i / n)), np.max(np.abs(f - (i - 1) / n)))
        assert ks < 1.627 / math.sqrt(n)

    def test_size_validation(self):
        with pytest.raises(ValueError):
            sample(0, 1, TABLE_TRUTH)


class TestOddsTransform:
    def test_beta_one_at_parent_median(self):
        p = GollgrParams(0.7, 1.0, 0.5, 2.0)
        x = gr_quantile(0.5, p.gr)
        assert odds_transform(x, p) == pytest.approx(1.0, rel=1e-10)

    def test_rate_rescaling_identity(self):
        # T(x/k; theta) equals T(x; theta/k^2)
        k = 2.7
        p1 = GollgrParams(1.0, 1.3, 0.5, 2.0)
        p2 = GollgrParams(1.0, 1.3, 0.5, 2.0 / k ** 2)
        for x in (0.3, 1.0, 2.5):
            assert odds_transform(x / k, p1) == pytest.approx(
                odds_transform(x, p2), rel=1e-12)

    def test_closed_form(self):
        p = GollgrParams(1.0, 2.0, 0.0, 1.0)
        g = 1.0 - math.exp(-1.0)
        ref = g ** 2 / (1.0 - g ** 2)
        assert odds_transform(1.0, p) == pytest.approx(ref, rel=1e-12)

    def test_cdf_identity(self):
        p = GollgrParams(0.35, 0.55, -0.55, 0.11)
        for x in (0.5, 1.5, 4.0):
            t = odds_transform(x, p)
            assert t ** p.alpha / (1.0 + t ** p.alpha) == pytest.approx(
                cdf(x, p), abs=1e-10)

    def test_overflow_sentinel(self):
        p = GollgrParams(1.0, 1.0, 0.0, 1.0)
        assert odds_transform(50.0, p) == math.inf


class TestLimitAtZero:
    def test_vanishing_case(self):
        assert limit_at_zero(GollgrParams(2.0, 1.0, 0.5, 1.0)) == 0.0

    def test_divergent_case(self):
        assert limit_at_zero(GollgrParams(0.5, 1.0, -0.7, 1.0)) == math.inf

    def test_finite_case_value(self):
        # exponent zero: 2 alpha beta sqrt(theta) Gamma(delta+2)^(1-ab)/Gamma(delta+1)
        p = GollgrParams(2.0, 0.5, -0.5, math.pi / 4.0)
        assert limit_at_zero(p) == pytest.approx(1.0, rel=1e-12)

    def test_matches_density_near_origin(self):
        # the approach can be a slow power law, so check the trend toward
        # the limit rather than a fixed magnitude
        for vals in PARAM_GRID:
            p = GollgrParams(*vals)
            lim = limit_at_zero(p)
            near, nearer = pdf(1e-10, p), pdf(1e-14, p)
            if lim == 0.0:
                assert nearer <= near and nearer < 1e-5
            elif math.isinf(lim):
                assert nearer > near and nearer > 100.0
            else:
                assert nearer == pytest.approx(lim, rel=2e-3)


class TestCriticalPoints:
    def test_rayleigh_mode(self):
        p = GollgrParams(1.0, 1.0, 0.0, 1.0)
        pts = critical_points(p)
        assert len(pts) == 1
        assert pts[0] == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-8)

    @pytest.mark.parametrize("delta,theta", [(0.5, 1.0), (1.0, 1.0), (2.5, 15.0)])
    def test_parent_mode_closed_form(self, delta, theta):
        # parent log-density slope (2 delta + 1)/x - 2 theta x vanishes at
        # sqrt((2 delta + 1) / (2 theta))
        p = GollgrParams(1.0, 1.0, delta, theta)
        pts = critical_points(p)
        assert len(pts) == 1
        assert pts[0] == pytest.approx(
            math.sqrt((2.0 * delta + 1.0) / (2.0 * theta)), rel=1e-7)

    def test_bimodal_configuration(self):
        # grid-scan verified two maxima and one interior minimum
        p = GollgrParams(0.3, 2.0, 4.0, 15.0)
        pts = critical_points(p)
        assert len(pts) == 3
        v = pdf(np.array(pts), p)
        assert v[0] > v[1] < v[2]

    def test_monotone_density_reports_empty(self):
        p = GollgrParams(0.5, 1.0, -0.7, 1.0)
        assert critical_points(p) == []


class TestClassifyShape:
    def test_unimodal_parent(self):
        assert classify_shape(GollgrParams(1.0, 1.0, 1.0, 1.0)).kind == "unimodal"

    def test_unimodal_heavy_shape(self):
        # alpha*beta > 1 with delta >= 1/2 and one critical point
        assert classify_shape(GollgrParams(2.0, 1.0, 0.5, 1.0)).kind == "unimodal"

    def test_bimodal(self):
        got = classify_shape(GollgrParams(0.3, 2.0, 4.0, 15.0))
        assert got.kind == "bimodal"
        assert len(got.critical_points) == 3

    def test_decreasing(self):
        assert classify_shape(GollgrParams(0.5, 1.0, -0.7, 1.0)).kind == "decreasing"

    def test_decreasing_increasing_decreasing(self):
        # divergent origin limit with an interior dip and bump
        got = classify_shape(GollgrParams(0.2, 0.5, 0.5, 1.0))
        assert got.kind == "decreasing-increasing-decreasing"
        assert len(got.critical_points) == 2

    def test_unrecognised_pattern_is_reported(self):
        # one interior maximum but a positive origin limit: outside the
        # four-kind taxonomy, must raise instead of guessing
        with pytest.raises(ShapeClassificationError):
            classify_shape(GollgrParams(2.0, 0.5, -0.5, math.pi / 4.0))


class TestScalingLaw:
    @pytest.mark.parametrize("k", [0.25, 1.0, 3.7])
    def test_cdf_rescaling(self, k):
        p1 = TABLE_TRUTH
        p2 = GollgrParams(p1.alpha, p1.beta, p1.delta, p1.theta / k ** 2)
        xs = np.linspace(0.05, 5.0, 30)
        assert np.max(np.abs(cdf(xs, p1) - cdf(k * xs, p2))) <= 1e-12


class TestSubmodelIdentities:
    def test_exponentiated_reduction(self):
        # alpha = 1: cdf is the parent cdf raised to beta
        p = GollgrParams(1.0, 2.3, 0.5, 2.0)
        xs = np.linspace(0.01, 3.0, 50)
        assert np.max(np.abs(cdf(xs, p) - gr_cdf(xs, p.gr) ** 2.3)) <= 1e-12

    def test_odd_log_logistic_reduction(self):
        # beta = 1: cdf is G^a / (G^a + (1-G)^a)
        p = GollgrParams(2.0, 1.0, 0.0, 3.0)
        xs = np.linspace(0.01, 2.0, 50)
        g = gr_cdf(xs, p.gr)
        ref = g ** 2.0 / (g ** 2.0 + (1.0 - g) ** 2.0)
        assert np.max(np.abs(cdf(xs, p) - ref)) <= 1e-12

    def test_parent_reduction(self):
        p = GollgrParams(1.0, 1.0, -0.55, 0.11)
        xs = np.linspace(0.01, 10.0, 50)
        assert np.max(np.abs(cdf(xs, p) - gr_cdf(xs, p.gr))) <= 1e-12


class TestTails:
    @pytest.mark.parametrize("vals", [(2.0, 1.3, 0.5, 1.0), (0.7, 0.8, 0.5, 1.0)])
    def test_thinner_than_exponential(self, vals):
        # exp(-x)/(1-F(x)) must grow; compare in log space since the
        # survival underflows double precision far out
        p = GollgrParams(*vals)
        xs = np.arange(5.0, 15.5, 1.0)
        seq = -xs - logsf(xs, p)
        assert (np.diff(seq) > 0).all()

    def test_survival_complement(self):
        p = GollgrParams(0.3, 2.0, 1.5, 15.0)
        xs = np.linspace(0.05, 1.5, 30)
        assert np.max(np.abs(sf(xs, p) + cdf(xs, p) - 1.0)) <= 1e-12
