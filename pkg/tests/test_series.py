import math

import numpy as np
import pytest
from scipy.integrate import quad

from gollgr._kernels import core
from gollgr.gr import GrParams, gr_moment, gr_pdf, gr_quantile
from gollgr.model import GollgrParams, cdf, pdf, quantile
from gollgr.series import (ExpansionTable, SeriesConvergenceError, cdf_series,
                           coeff_a, coeff_a_family, coeff_c, coeff_c_family,
                           coeff_d, coeff_e, generalized_binomial,
                           incomplete_moment, mgf, mgf_t_max, mixture_pdf,
                           mixture_weights, moment)
from gollgr.series import _euler_sum, _poly_eval_mp

EGR = GollgrParams(1.0, 2.0, 0.0, 1.0)
PARENT = GollgrParams(1.0, 1.0, 0.5, 2.0)

_TABLES: dict = {}


def table_for(p: GollgrParams):
    """Module-level cache: table construction is expensive."""
    key = p.as_tuple()
    if key not in _TABLES:
        _TABLES[key] = mixture_weights(p)
    return _TABLES[key]


class TestGeneralizedBinomial:
    def test_integer_cases(self):
        assert generalized_binomial(5, 2) == pytest.approx(10.0)
        assert generalized_binomial(5, 7) == 0.0
        assert generalized_binomial(3, 0) == 1.0

    def test_real_argument_recursion(self):
        # check against the multiplicative recursion C(r,j) = C(r,j-1)(r-j+1)/j
        r = 1.65
        prev = 1.0
        for j in range(1, 40):
            prev = prev * (r - j + 1.0) / j
            assert generalized_binomial(r, j) == pytest.approx(prev, rel=1e-11)


class TestCoeffA:
    def test_integer_power_is_unit_vector(self):
        assert [coeff_a(k, 2.0) for k in range(4)] == [0.0, 0.0, 1.0, 0.0]
        assert [coeff_a(k, 1.0) for k in range(3)] == [0.0, 1.0, 0.0]

    def test_fractional_power_function_match(self):
        # matched-truncation family evaluated in extended precision must
        # reproduce y^power on the grid
        fam = coeff_a_family(1.65, 200)
        from gollgr.series import _a_family_mp
        ys = np.linspace(0.05, 0.95, 19)
        vals = _poly_eval_mp(_a_family_mp(1.65, 200, 80), ys)
        assert np.max(np.abs(vals - ys ** 1.65)) < 1e-6
        assert fam.shape == (201,)

    def test_negative_index(self):
        with pytest.raises(ValueError):
            coeff_a(-1, 2.0)


class TestCoeffC:
    def test_unit_case(self):
        # alpha = beta = 1: the defining expression is identically 1
        fam = coeff_c_family(1.0, 1.0, 10)
        assert fam[0] == pytest.approx(1.0, abs=1e-14)
        assert np.max(np.abs(fam[1:])) < 1e-14

    def test_exponentiated_case(self):
        # alpha = 1, beta = 2: y^2 + 1 - y^2 = 1
        fam = coeff_c_family(1.0, 2.0, 10)
        assert fam[0] == pytest.approx(1.0, abs=1e-14)
        assert np.max(np.abs(fam[1:])) < 1e-14

    def test_fractional_case_function_match(self):
        from gollgr.series import _c_family_mp
        alpha, beta = 0.35, 0.55
        fam = _c_family_mp(alpha, beta, 200, 80)
        ys = np.linspace(0.1, 0.9, 9)
        vals = _poly_eval_mp(fam, ys)
        ref = ys ** (alpha * beta) + (1.0 - ys ** beta) ** alpha
        assert np.max(np.abs(vals - ref)) < 1e-5


class TestCoeffD:
    def test_parent_case(self):
        d = coeff_d(5, 1.0, 1.0)
        assert np.allclose(d, [0, 1, 0, 0, 0, 0], atol=1e-14)

    def test_exponentiated_case(self):
        d = coeff_d(5, 1.0, 2.0)
        assert np.allclose(d, [0, 0, 1, 0, 0, 0], atol=1e-14)

    def test_defining_identity(self):
        # the d recursion must satisfy a_k = sum_r c_r d_{k-r}
        from gollgr.series import _a_family_mp, _c_family_mp, _d_family_mp
        alpha, beta = 2.0, 1.0
        K = 30
        a = _a_family_mp(alpha * beta, K, 80)
        c = _c_family_mp(alpha, beta, K, 80)
        d = _d_family_mp(alpha, beta, K, 80)
        for k in range(K + 1):
            conv = math.fsum(float(c[r]) * float(d[k - r]) for r in range(k + 1))
            assert conv == pytest.approx(float(a[k]), abs=1e-9)

    def test_series_matches_cdf_on_convergent_cases(self):
        # integer-structure members converge on the whole parent-cdf grid
        g_grid = np.arange(0.05, 0.9001, 0.05)
        for alpha, beta in [(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]:
            p = GollgrParams(alpha, beta, 0.0, 1.0)
            xs = np.sqrt(core.gamma_quantile_arr(1.0, g_grid))
            err = np.max(np.abs(cdf_series(xs, p) - cdf(xs, p)))
            assert err < 1e-6

    def test_rational_case_within_radius(self):
        # alpha = 2, beta = 1 has exact rational cdf in the parent cdf with
        # convergence radius sqrt(2)/2; the series must match inside it
        p = GollgrParams(2.0, 1.0, 0.0, 1.0)
        g_grid = np.arange(0.05, 0.651, 0.05)
        xs = np.sqrt(core.gamma_quantile_arr(1.0, g_grid))
        err = np.max(np.abs(cdf_series(xs, p, k_max=200) - cdf(xs, p)))
        assert err < 1e-6

    def test_partial_sums_near_one_when_convergent(self):
        d = coeff_d(60, 1.0, 2.0)
        assert float(np.sum(d)) == pytest.approx(1.0, abs=1e-12)


class TestCoeffE:
    def test_power_one_recovers_base_sequence(self):
        delta, theta = 0.5, 1.0
        e = coeff_e(1, 12, delta, theta)
        for m in range(13):
            q_m = (-1.0) ** m * theta ** m / ((delta + 1 + m) * math.factorial(m))
            assert e[1, m] == pytest.approx(q_m, rel=1e-12)

    def test_power_zero_is_delta(self):
        e = coeff_e(2, 6, 0.5, 1.0)
        assert e[0, 0] == 1.0
        assert np.max(np.abs(e[0, 1:])) == 0.0

    def test_square_against_polynomial_multiplication(self):
        delta, theta = 0.5, 1.0
        m_max = 6
        e = coeff_e(2, m_max, delta, theta)
        q = np.array([(-1.0) ** m * theta ** m / ((delta + 1 + m) * math.factorial(m))
                      for m in range(m_max + 1)])
        direct = np.convolve(q, q)[:m_max + 1]
        assert np.allclose(e[2], direct, rtol=1e-12)


class TestEulerSum:
    def test_convergent_series(self):
        terms = np.array([(-0.5) ** m for m in range(40)])
        est, err = _euler_sum(terms)
        assert est == pytest.approx(2.0 / 3.0, abs=1e-12)

    def test_abel_summable_series(self):
        # sum 2 (-1)^m (m+2) has Abel limit 3/2
        terms = np.array([2.0 * (-1) ** m * (m + 2) for m in range(50)])
        est, err = _euler_sum(terms)
        assert est == pytest.approx(1.5, abs=1e-9)


class TestMixtureWeights:
    def test_parent_single_weight(self):
        tbl = table_for(PARENT)
        assert tbl.converged
        assert tbl.w[0, 0] == pytest.approx(1.0, rel=1e-12)
        assert np.max(np.abs(tbl.w[0, 1:])) < 1e-12

    def test_exponentiated_matches_closed_form(self):
        # f = 2 G g for the squared-cdf member
        tbl = table_for(EGR)
        assert tbl.converged
        xs = np.array([0.3, 0.8, 1.5])
        ref = 2.0 * (1.0 - np.exp(-xs ** 2)) * gr_pdf(xs, GrParams(0.0, 1.0))
        assert np.max(np.abs(mixture_pdf(xs, tbl) - ref)) < 1e-12

    def test_mixture_within_tail_bound(self):
        for p in (PARENT, EGR, GollgrParams(1.0, 3.0, 0.5, 0.5)):
            tbl = table_for(p)
            assert tbl.converged
            g_grid = np.arange(0.05, 0.9001, 0.05)
            xs = gr_quantile(g_grid, p.gr)
            err = np.max(np.abs(mixture_pdf(xs, tbl) - pdf(xs, p)))
            assert err <= tbl.tail_bound

    def test_divergence_reported_for_fractional_shapes(self):
        # the series division has tiny convergence radius at the
        # simulation-study truth; the table must say so instead of lying
        tbl = table_for(GollgrParams(0.35, 0.55, -0.55, 0.11))
        assert not tbl.converged
        assert not math.isfinite(tbl.tail_bound) or tbl.tail_bound > 1e-3
        with pytest.raises(SeriesConvergenceError):
            tbl.require_converged()


class TestMoments:
    def test_parent_reduction(self):
        tbl = table_for(PARENT)
        assert moment(2.0, PARENT, tbl) == pytest.approx(
            gr_moment(2.0, PARENT.gr), rel=1e-10)

    def test_exponentiated_second_moment_closed_form(self):
        # E[X^2] = 3/2 for the squared-cdf member at unit rate
        tbl = table_for(EGR)
        assert moment(2.0, EGR, tbl) == pytest.approx(1.5, abs=1e-9)

    @pytest.mark.parametrize("s", [1.0, 2.0])
    def test_vs_quadrature(self, s):
        for p in (EGR, GollgrParams(1.0, 3.0, 0.5, 0.5)):
            tbl = table_for(p)
            hi = quantile(1.0 - 1e-14, p)
            ref, _ = quad(lambda t: t ** s * pdf(t, p), 0.0, hi, limit=300)
            assert moment(s, p, tbl) == pytest.approx(ref, abs=1e-5)

    def test_strict_flag(self):
        tbl = table_for(GollgrParams(0.35, 0.55, -0.55, 0.11))
        with pytest.raises(SeriesConvergenceError):
            moment(1.0, GollgrParams(0.35, 0.55, -0.55, 0.11), tbl)


class TestIncompleteMoments:
    def test_vanishes_at_origin_and_reaches_moment(self):
        tbl = table_for(EGR)
        full = moment(1.0, EGR, tbl)
        x_hi = quantile(1.0 - 1e-10, EGR)
        assert incomplete_moment(1.0, x_hi, EGR, tbl) == pytest.approx(full, abs=1e-5)
        assert incomplete_moment(1.0, 1e-8, EGR, tbl) == pytest.approx(0.0, abs=1e-12)

    def test_monotone_and_bounded(self):
        tbl = table_for(EGR)
        xs = [0.3, 0.8, 1.5, 3.0]
        vals = [incomplete_moment(1.0, x, EGR, tbl) for x in xs]
        assert all(b > a for a, b in zip(vals, vals[1:]))
        assert vals[-1] <= moment(1.0, EGR, tbl) + 1e-9

    def test_median_value_vs_quadrature(self):
        tbl = table_for(EGR)
        x_med = quantile(0.5, EGR)
        ref, _ = quad(lambda t: t * pdf(t, EGR), 0.0, x_med, limit=200)
        assert incomplete_moment(1.0, x_med, EGR, tbl) == pytest.approx(ref, abs=1e-8)


class TestGeneratingFunction:
    def test_at_zero(self):
        tbl = table_for(EGR)
        assert mgf(0.0, EGR, tbl) == 1.0

    def test_derivative_matches_mean(self):
        tbl = table_for(EGR)
        h = 1e-3
        fd = (mgf(h, EGR, tbl) - mgf(-h, EGR, tbl)) / (2.0 * h)
        assert fd == pytest.approx(moment(1.0, EGR, tbl), abs=1e-4)

    def test_parent_value_vs_quadrature(self):
        p = GollgrParams(1.0, 1.0, 0.0, 1.0)
        tbl = table_for(p)
        t = 0.5
        ref, _ = quad(lambda x: math.exp(t * x) * pdf(x, p), 0.0, 15.0, limit=300)
        assert mgf(t, p, tbl) == pytest.approx(ref, rel=1e-5)

    def test_range_guard(self):
        tbl = table_for(EGR)
        with pytest.raises(SeriesConvergenceError):
            mgf(2.0 * mgf_t_max(EGR), EGR, tbl)
