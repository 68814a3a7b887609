import math

import mpmath as mp
import numpy as np
import pytest

from conftest import mp_parent_pdf
from gollgr.gr import GrParams, gr_cdf, gr_moment, gr_pdf, gr_quantile
from gollgr.special import gamma_quantile


class TestParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            GrParams(delta=-1.0, theta=1.0)
        with pytest.raises(ValueError):
            GrParams(delta=0.0, theta=0.0)
        with pytest.raises(ValueError):
            GrParams(delta=math.inf, theta=1.0)


class TestCdf:
    def test_rayleigh_median(self):
        p = GrParams(0.0, 1.0)
        assert gr_cdf(math.sqrt(math.log(2.0)), p) == pytest.approx(0.5, rel=1e-13)

    def test_zero(self):
        for p in [GrParams(0.0, 1.0), GrParams(1.5, 15.0), GrParams(-0.5, 2.0)]:
            assert gr_cdf(0.0, p) == 0.0

    def test_interior_vs_density_quadrature(self):
        # oracle: quadrature of the density
        ref = float(mp.quad(lambda t: mp_parent_pdf(t, 1.5, 15.0), [0, mp.mpf("0.4")]))
        assert gr_cdf(0.4, GrParams(1.5, 15.0)) == pytest.approx(ref, rel=1e-11)

    def test_support(self):
        with pytest.raises(ValueError):
            gr_cdf(-0.1, GrParams(0.0, 1.0))


class TestPdf:
    def test_rayleigh_closed_form(self):
        assert gr_pdf(1.0, GrParams(0.0, 1.0)) == pytest.approx(
            2.0 * math.exp(-1.0), rel=1e-13)

    def test_maxwell_closed_form(self):
        # delta = 1/2, theta = 1/(2 lambda^2) with lambda = 1
        ref = math.sqrt(2.0 / math.pi) * math.exp(-0.5)
        assert gr_pdf(1.0, GrParams(0.5, 0.5)) == pytest.approx(ref, rel=1e-13)

    def test_interior_vs_finite_difference_of_cdf(self):
        p = GrParams(1.5, 15.0)
        x, h = 0.4, 1e-6
        fd = (gr_cdf(x + h, p) - gr_cdf(x - h, p)) / (2.0 * h)
        assert gr_pdf(x, p) == pytest.approx(fd, rel=1e-6)

    def test_at_zero_limits(self):
        assert gr_pdf(0.0, GrParams(0.5, 1.0)) == 0.0
        assert gr_pdf(0.0, GrParams(-0.5, 2.0)) == pytest.approx(
            2.0 * math.sqrt(2.0 / math.pi), rel=1e-13)
        assert gr_pdf(0.0, GrParams(-0.8, 1.0)) == math.inf

    def test_normalization(self):
        from scipy.integrate import quad
        for params in [GrParams(0.0, 1.0), GrParams(1.5, 15.0), GrParams(-0.5, 0.3)]:
            hi = gr_quantile(1.0 - 1e-12, params)
            val, _ = quad(lambda t: gr_pdf(t, params), 0.0, hi, limit=200)
            assert val == pytest.approx(1.0, abs=1e-7)


class TestQuantile:
    def test_rayleigh_median(self):
        assert gr_quantile(0.5, GrParams(0.0, 1.0)) == pytest.approx(
            math.sqrt(math.log(2.0)), rel=1e-12)

    def test_rate_scaling(self):
        # multiplying theta by k^2 divides quantiles by k
        q1 = gr_quantile(0.5, GrParams(0.0, 1.0))
        q4 = gr_quantile(0.5, GrParams(0.0, 4.0))
        assert q4 == pytest.approx(q1 / 2.0, rel=1e-13)

    def test_against_gamma_quantile(self):
        p = GrParams(2.0, 3.0)
        ref = math.sqrt(gamma_quantile(3.0, 0.9) / 3.0)
        assert gr_quantile(0.9, p) == pytest.approx(ref, rel=1e-13)

    def test_roundtrip_grid(self):
        zs = np.linspace(0.01, 0.99, 25)
        for params in [GrParams(0.0, 1.0), GrParams(1.5, 15.0),
                       GrParams(-0.5, 0.3), GrParams(4.0, 0.02)]:
            x = gr_quantile(zs, params)
            assert np.max(np.abs(gr_cdf(x, params) - zs)) <= 1e-10

    def test_domain(self):
        with pytest.raises(ValueError):
            gr_quantile(0.0, GrParams(0.0, 1.0))
        with pytest.raises(ValueError):
            gr_quantile(1.0, GrParams(0.0, 1.0))


class TestMoment:
    def test_second_moment_rayleigh(self):
        assert gr_moment(2.0, GrParams(0.0, 1.0)) == pytest.approx(1.0, rel=1e-14)

    def test_rate_scaling(self):
        assert gr_moment(2.0, GrParams(0.0, 0.25)) == pytest.approx(4.0, rel=1e-14)

    def test_first_moment_vs_quadrature(self):
        from scipy.integrate import quad
        p = GrParams(1.5, 15.0)
        ref, _ = quad(lambda t: t * gr_pdf(t, p), 0.0, 5.0, limit=200)
        assert gr_moment(1.0, p) == pytest.approx(ref, rel=1e-10)

    @pytest.mark.parametrize("s", [0.5, 1.0, 2.0, 3.0])
    def test_orders_vs_quadrature(self, s):
        from scipy.integrate import quad
        p = GrParams(0.7, 2.5)
        hi = gr_quantile(1.0 - 1e-14, p)
        ref, _ = quad(lambda t: t ** s * gr_pdf(t, p), 0.0, hi, limit=300)
        assert gr_moment(s, p) == pytest.approx(ref, rel=1e-8)

    def test_domain(self):
        with pytest.raises(ValueError):
            gr_moment(0.0, GrParams(0.0, 1.0))


class TestSubmodelReductions:
    def test_rayleigh_density_exact(self):
        p = GrParams(0.0, 2.3)
        for x in (0.1, 0.7, 1.9):
            assert gr_pdf(x, p) == pytest.approx(
                2.0 * 2.3 * x * math.exp(-2.3 * x * x), rel=1e-13)

    def test_half_normal(self):
        # delta = -1/2 is a half-normal law; the classical scale s satisfies
        # s^2 = 1/(2 theta)
        sigma = 1.7
        p = GrParams(-0.5, 2.0 / sigma ** 2)
        s = math.sqrt(1.0 / (2.0 * p.theta))
        for x in (0.2, 1.0, 2.5):
            ref = math.sqrt(2.0 / math.pi) / s * math.exp(-x * x / (2.0 * s * s))
            assert gr_pdf(x, p) == pytest.approx(ref, rel=1e-13)
