"""Parity between the compiled kernels and the numpy fallback."""

import os
import subprocess
import sys

import numpy as np
import pytest

from gollgr._kernels import _pycore

try:
    from gollgr._kernels import _ccore
except ImportError:
    _ccore = None

needs_compiled = pytest.mark.skipif(_ccore is None, reason="extension not built")

PARAMS = [(0.35, 0.55, -0.55, 0.11), (1.0, 1.0, 0.0, 1.0),
          (0.3, 2.0, 4.0, 15.0), (5.0, 3.0, 2.0, 0.5), (0.05, 8.0, 3.0, 2.0)]


@needs_compiled
class TestScalarParity:
    def test_incomplete_gamma(self, rng):
        ps = rng.uniform(0.02, 40.0, 200)
        xs = rng.uniform(0.0, 120.0, 200)
        for p, x in zip(ps, xs):
            a = _pycore.reg_lower_gamma(p, x)
            b = _ccore.reg_lower_gamma(p, x)
            assert b == pytest.approx(a, rel=1e-13, abs=1e-300)
            au = _pycore.log_reg_upper_gamma(p, x)
            bu = _ccore.log_reg_upper_gamma(p, x)
            assert bu == pytest.approx(au, rel=1e-12, abs=1e-12)

    def test_quantiles(self, rng):
        us = rng.uniform(1e-9, 1.0 - 1e-9, 300)
        for p in (0.05, 0.45, 2.5, 17.0):
            a = np.array([_pycore.gamma_quantile(p, u) for u in us])
            b = _ccore.gamma_quantile_arr(p, us)
            assert np.max(np.abs(a - b) / a) < 1e-10
        a = _pycore.std_normal_quantile_arr(us)
        b = _ccore.std_normal_quantile_arr(us)
        assert np.max(np.abs(a - b)) < 1e-13


@needs_compiled
class TestModelParity:
    @pytest.mark.parametrize("vals", PARAMS)
    def test_logpdf_logcdf_logsf(self, vals, rng):
        a_, b_, d_, t_ = vals
        u = rng.uniform(1e-4, 1.0 - 1e-4, 200)
        x = _ccore.gollgr_quantile_arr(u, a_, b_, d_, t_)
        for name in ("gollgr_logpdf_arr", "gollgr_logcdf_arr", "gollgr_logsf_arr"):
            va = getattr(_pycore, name)(x, a_, b_, d_, t_)
            vb = getattr(_ccore, name)(x, a_, b_, d_, t_)
            assert np.allclose(va, vb, rtol=1e-11, atol=1e-11)

    @pytest.mark.parametrize("vals", PARAMS)
    def test_quantile(self, vals, rng):
        u = rng.uniform(1e-6, 1.0 - 1e-6, 200)
        qa = _pycore.gollgr_quantile_arr(u, *vals)
        qb = _ccore.gollgr_quantile_arr(u, *vals)
        assert np.max(np.abs(qa - qb) / qa) < 1e-10

    def test_loglik_and_censored(self, rng):
        a_, b_, d_, t_ = PARAMS[0]
        u = rng.uniform(1e-4, 1.0 - 1e-4, 300)
        x = _ccore.gollgr_quantile_arr(u, a_, b_, d_, t_)
        la = _pycore.gollgr_loglik(x, a_, b_, d_, t_)
        lb = _ccore.gollgr_loglik(x, a_, b_, d_, t_)
        assert lb == pytest.approx(la, rel=1e-12)
        status = (rng.random(300) < 0.7).astype(np.uint8)
        delta_i = rng.uniform(-0.6, 2.0, 300)
        theta_i = rng.uniform(0.05, 3.0, 300)
        ca = _pycore.gollgr_censored_loglik(x, status, delta_i, theta_i, a_, b_)
        cb = _ccore.gollgr_censored_loglik(x, status, delta_i, theta_i, a_, b_)
        assert cb == pytest.approx(ca, rel=1e-12)

    def test_invalid_parameters_sentinel(self):
        x = np.array([0.5, 1.0])
        for core in (_pycore, _ccore):
            assert core.gollgr_loglik(x, -1.0, 1.0, 0.0, 1.0) == -np.inf
            assert core.gollgr_loglik(x, 1.0, 1.0, -2.0, 1.0) == -np.inf
            assert core.gollgr_loglik(x, 1.0, 1.0, 0.0, np.inf) == -np.inf


def test_env_var_selects_fallback():
    env = dict(os.environ, GOLLGR_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import gollgr; print(gollgr.backend())"],
        capture_output=True, text=True, env=env)
    assert out.stdout.strip() == "python"


def test_default_backend_reported():
    import gollgr
    assert gollgr.backend() in ("compiled", "python")
