# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementation of the numerical kernels.

Same algorithms and conventions as ``_pycore`` (the numpy fallback); see
that module's docstring for the numerical decisions.  The inner loops here
are the hot path of likelihood fitting and simulation studies.
"""

import numpy as np

from libc.math cimport (INFINITY, erfc, exp, expm1, fabs, isfinite, lgamma,
                        log, log1p, sqrt)

backend_name = "compiled"

cdef double _LN2 = 0.6931471805599453
cdef double _EPS = 1e-17
cdef double _TINY = 1e-300
cdef int _MAXIT = 500
cdef double _SQRT2 = 1.4142135623730951
cdef double _SQRT_2PI = 2.5066282746310002


# ---------------------------------------------------------------------------
# incomplete gamma pair
# ---------------------------------------------------------------------------

cdef void _lg_pair(double p, double x, double lgp, double lgp1,
                   double* ll, double* lu) nogil:
    cdef double term, total, b, c, d, h, an, delta, log_low, log_up
    cdef int n, i
    if x <= 0.0:
        ll[0] = -INFINITY
        lu[0] = 0.0
        return
    if not isfinite(x):
        ll[0] = 0.0
        lu[0] = -INFINITY
        return
    if x < p + 1.0:
        term = 1.0
        total = 1.0
        n = 0
        while n < _MAXIT:
            n += 1
            term *= x / (p + n)
            total += term
            if term < total * _EPS:
                break
        log_low = p * log(x) - x - lgp1 + log(total)
        if log_low > -_LN2:
            log_up = log(-expm1(log_low))
        else:
            log_up = log1p(-exp(log_low))
        ll[0] = log_low
        lu[0] = log_up
        return
    b = x + 1.0 - p
    c = 1e300
    d = 1.0 / b
    h = d
    for i in range(1, _MAXIT + 1):
        an = -i * (i - p)
        b += 2.0
        d = an * d + b
        if fabs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if fabs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < _EPS:
            break
    log_up = p * log(x) - x - lgp + log(h)
    if log_up > -_LN2:
        log_low = log(-expm1(log_up))
    else:
        log_low = log1p(-exp(log_up))
    ll[0] = log_low
    lu[0] = log_up


def reg_lower_gamma(double p, double x):
    cdef double ll, lu, lgp = lgamma(p)
    _lg_pair(p, x, lgp, lgp + log(p), &ll, &lu)
    return exp(ll)


def reg_upper_gamma(double p, double x):
    cdef double ll, lu, lgp = lgamma(p)
    _lg_pair(p, x, lgp, lgp + log(p), &ll, &lu)
    return exp(lu)


def log_reg_lower_gamma(double p, double x):
    cdef double ll, lu, lgp = lgamma(p)
    _lg_pair(p, x, lgp, lgp + log(p), &ll, &lu)
    return ll


def log_reg_upper_gamma(double p, double x):
    cdef double ll, lu, lgp = lgamma(p)
    _lg_pair(p, x, lgp, lgp + log(p), &ll, &lu)
    return lu


def log_gamma_pair_arr(double p, x):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], i
    ll_arr = np.empty(n, dtype=np.float64)
    lu_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] llv = ll_arr
    cdef double[::1] luv = lu_arr
    cdef double lgp = lgamma(p), lgp1 = lgamma(p) + log(p)
    with nogil:
        for i in range(n):
            _lg_pair(p, xv[i], lgp, lgp1, &llv[i], &luv[i])
    return ll_arr, lu_arr


# ---------------------------------------------------------------------------
# standard normal quantile
# ---------------------------------------------------------------------------

cdef double _acklam(double q) nogil:
    cdef double r, s, num, den
    if q < 0.02425:
        r = sqrt(-2.0 * log(q))
        num = ((((-7.784894002430293e-03 * r - 3.223964580411365e-01) * r
                 - 2.400758277161838e+00) * r - 2.549732539343734e+00) * r
               + 4.374664141464968e+00) * r + 2.938163982698783e+00
        den = (((7.784695709041462e-03 * r + 3.224671290700398e-01) * r
                + 2.445134137142996e+00) * r + 3.754408661907416e+00) * r + 1.0
        return num / den
    r = q - 0.5
    s = r * r
    num = (((((-3.969683028665376e+01 * s + 2.209460984245205e+02) * s
              - 2.759285104469687e+02) * s + 1.383577518672690e+02) * s
            - 3.066479806614716e+01) * s + 2.506628277459239e+00) * r
    den = ((((-5.447609879822406e+01 * s + 1.615858368580409e+02) * s
             - 1.556989798598866e+02) * s + 6.680131188771972e+01) * s
           - 1.328068155288572e+01) * s + 1.0
    return num / den


cdef double _norm_quantile(double u) nogil:
    cdef double q = u if u <= 0.5 else 1.0 - u
    cdef double x = _acklam(q)
    cdef double e, un
    cdef int k
    for k in range(2):
        e = 0.5 * erfc(-x / _SQRT2) - q
        un = e * _SQRT_2PI * exp(0.5 * x * x)
        x -= un / (1.0 + 0.5 * x * un)
    return x if u <= 0.5 else -x


def std_normal_quantile(double u):
    return _norm_quantile(u)


def std_normal_quantile_arr(u):
    cdef double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t n = uv.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    with nogil:
        for i in range(n):
            ov[i] = _norm_quantile(uv[i])
    return out


# ---------------------------------------------------------------------------
# inverse lower incomplete gamma ratio
# ---------------------------------------------------------------------------

cdef double _gamma_quantile2(double p, double u, double omu,
                             double lgp, double lgp1) nogil:
    cdef double g, t, z, lo, hi, ll, lu, f, log_pdf, step, znew, tol, big
    cdef int it
    if omu < 1e-8:
        # deep upper tail: invert the leading term of the upper ratio
        big = -(log(omu) + lgp) if omu > 0.0 else 745.0 + fabs(lgp)
        z = big + (p - 1.0) * log(big if big > 2.0 else 2.0)
        if z < p + 1.5:
            z = p + 1.5
    else:
        g = _norm_quantile(u)
        t = 1.0 - 1.0 / (9.0 * p) + g / (3.0 * sqrt(p))
        z = p * t * t * t if t > 0.0 else -1.0
        if not (z > 0.0) or not isfinite(z):
            z = exp((log(u) + lgp1) / p)
            if not (z > 0.0) or not isfinite(z):
                z = _TINY
    lo = 0.0
    hi = INFINITY
    tol = 1e-13 * (u if u <= 0.9 else omu)
    if tol < 1e-300:
        tol = 1e-300
    for it in range(200):
        _lg_pair(p, z, lgp, lgp1, &ll, &lu)
        if u <= 0.9:
            f = exp(ll) - u
        else:
            f = omu - exp(lu)
        if f > 0.0:
            if z < hi:
                hi = z
        else:
            if z > lo:
                lo = z
        if fabs(f) <= tol:
            break
        log_pdf = (p - 1.0) * log(z) - z - lgp
        if log_pdf > -700.0:
            step = f * exp(-log_pdf)
            znew = z - step
        else:
            znew = INFINITY
        if not isfinite(znew) or znew <= lo or znew >= hi:
            znew = z * 2.0 if hi == INFINITY else 0.5 * (lo + hi)
        if znew == z or (isfinite(hi) and hi - lo <= 1e-15 * z):
            break
        z = znew
    return z


def gamma_quantile2(double p, double u, double omu):
    cdef double lgp = lgamma(p)
    return _gamma_quantile2(p, u, omu, lgp, lgp + log(p))


def gamma_quantile(double p, double u):
    cdef double lgp = lgamma(p)
    return _gamma_quantile2(p, u, 1.0 - u, lgp, lgp + log(p))


def gamma_quantile_arr(double p, u):
    cdef double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t n = uv.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double lgp = lgamma(p), lgp1 = lgamma(p) + log(p)
    with nogil:
        for i in range(n):
            ov[i] = _gamma_quantile2(p, uv[i], 1.0 - uv[i], lgp, lgp1)
    return out


def gamma_quantile2_arr(double p, u, omu):
    cdef double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef double[::1] mv = np.ascontiguousarray(omu, dtype=np.float64)
    cdef Py_ssize_t n = uv.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double lgp = lgamma(p), lgp1 = lgamma(p) + log(p)
    with nogil:
        for i in range(n):
            ov[i] = _gamma_quantile2(p, uv[i], mv[i], lgp, lgp1)
    return out


# ---------------------------------------------------------------------------
# parent distribution helpers
# ---------------------------------------------------------------------------

def gr_logpdf_arr(x, double delta, double theta):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double p = delta + 1.0
    cdef double const = _LN2 + p * log(theta) - lgamma(p)
    with nogil:
        for i in range(n):
            ov[i] = const + (2.0 * delta + 1.0) * log(xv[i]) - theta * xv[i] * xv[i]
    return out


def gr_cdf_arr(x, double delta, double theta):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double p = delta + 1.0
    cdef double lgp = lgamma(p), lgp1 = lgamma(p) + log(p)
    cdef double ll, lu
    with nogil:
        for i in range(n):
            _lg_pair(p, theta * xv[i] * xv[i], lgp, lgp1, &ll, &lu)
            ov[i] = exp(ll)
    return out


# ---------------------------------------------------------------------------
# four-parameter model core
# ---------------------------------------------------------------------------

cdef void _model_logs(double x, double alpha, double beta, double delta,
                      double theta, double lgp, double lgp1,
                      double* lg, double* l1gb, double* logcdf,
                      double* logsf, double* log_parent) nogil:
    cdef double p = delta + 1.0
    cdef double z = theta * x * x
    cdef double ll, lu, g, blg, t1, a_term, b_term, lse
    _lg_pair(p, z, lgp, lgp1, &ll, &lu)
    if ll > -_LN2:
        g = log1p(-exp(lu))
    else:
        g = ll
    blg = beta * g
    if blg > -_LN2:
        t1 = log(-expm1(blg))
    else:
        t1 = log1p(-exp(blg))
    a_term = alpha * beta * g
    b_term = alpha * t1
    if a_term >= b_term:
        lse = a_term + log1p(exp(b_term - a_term))
    else:
        lse = b_term + log1p(exp(a_term - b_term))
    lg[0] = g
    l1gb[0] = t1
    logcdf[0] = a_term - lse
    logsf[0] = b_term - lse
    log_parent[0] = (_LN2 + p * log(theta) - lgp
                     + (2.0 * delta + 1.0) * log(x) - z)


cdef double _logpdf_full(double x, double alpha, double beta, double delta,
                         double theta, double lgp, double lgp1) nogil:
    cdef double p = delta + 1.0
    cdef double z = theta * x * x
    cdef double ll, lu, g, blg, t1, a_term, b_term, lse, lp, u1, u2
    _lg_pair(p, z, lgp, lgp1, &ll, &lu)
    if ll > -_LN2:
        g = log1p(-exp(lu))
    else:
        g = ll
    blg = beta * g
    if blg > -_LN2:
        t1 = log(-expm1(blg))
    else:
        t1 = log1p(-exp(blg))
    a_term = alpha * beta * g
    b_term = alpha * t1
    if a_term >= b_term:
        lse = a_term + log1p(exp(b_term - a_term))
    else:
        lse = b_term + log1p(exp(a_term - b_term))
    lp = _LN2 + p * log(theta) - lgp + (2.0 * delta + 1.0) * log(x) - z
    # unit exponents multiply possibly infinite logs; their term is exactly 0
    u1 = 0.0 if alpha * beta == 1.0 else (alpha * beta - 1.0) * g
    u2 = 0.0 if alpha == 1.0 else (alpha - 1.0) * t1
    return log(alpha * beta) + lp + u1 + u2 - 2.0 * lse


def gollgr_logpdf_one(double x, double alpha, double beta, double delta, double theta):
    cdef double lgp = lgamma(delta + 1.0)
    return _logpdf_full(x, alpha, beta, delta, theta, lgp, lgp + log(delta + 1.0))


def gollgr_logcdf_one(double x, double alpha, double beta, double delta, double theta):
    cdef double lg, l1gb, lc, ls, lp
    cdef double lgp = lgamma(delta + 1.0)
    if x <= 0.0:
        return -INFINITY
    _model_logs(x, alpha, beta, delta, theta, lgp, lgp + log(delta + 1.0),
                &lg, &l1gb, &lc, &ls, &lp)
    return lc


def gollgr_logsf_one(double x, double alpha, double beta, double delta, double theta):
    cdef double lg, l1gb, lc, ls, lp
    cdef double lgp = lgamma(delta + 1.0)
    if x <= 0.0:
        return 0.0
    _model_logs(x, alpha, beta, delta, theta, lgp, lgp + log(delta + 1.0),
                &lg, &l1gb, &lc, &ls, &lp)
    return ls


cdef double _quantile_one(double u, double alpha, double beta, double delta,
                          double theta, double lgp, double lgp1) nogil:
    cdef double lt = (log(u) - log1p(-u)) / alpha
    cdef double lz, z, omz
    # log(t/(1+t)) = -log1p(exp(-lt)), guarded against overflow
    if -lt > 35.0:
        lz = lt / beta
    elif -lt < -700.0:
        lz = 0.0
    else:
        lz = -log1p(exp(-lt)) / beta
    z = exp(lz)
    omz = -expm1(lz)
    return sqrt(_gamma_quantile2(delta + 1.0, z, omz, lgp, lgp1) / theta)


def gollgr_quantile_one(double u, double alpha, double beta, double delta, double theta):
    cdef double lgp = lgamma(delta + 1.0)
    return _quantile_one(u, alpha, beta, delta, theta, lgp, lgp + log(delta + 1.0))


def gollgr_logpdf_arr(x, double alpha, double beta, double delta, double theta):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double lgp = lgamma(delta + 1.0)
    cdef double lgp1 = lgp + log(delta + 1.0)
    with nogil:
        for i in range(n):
            ov[i] = _logpdf_full(xv[i], alpha, beta, delta, theta, lgp, lgp1)
    return out


def gollgr_logcdf_arr(x, double alpha, double beta, double delta, double theta):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double lgp = lgamma(delta + 1.0)
    cdef double lgp1 = lgp + log(delta + 1.0)
    cdef double lg, l1gb, lc, ls, lp
    with nogil:
        for i in range(n):
            if xv[i] <= 0.0:
                ov[i] = -INFINITY
            else:
                _model_logs(xv[i], alpha, beta, delta, theta, lgp, lgp1,
                            &lg, &l1gb, &lc, &ls, &lp)
                ov[i] = lc
    return out


def gollgr_logsf_arr(x, double alpha, double beta, double delta, double theta):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double lgp = lgamma(delta + 1.0)
    cdef double lgp1 = lgp + log(delta + 1.0)
    cdef double lg, l1gb, lc, ls, lp
    with nogil:
        for i in range(n):
            if xv[i] <= 0.0:
                ov[i] = 0.0
            else:
                _model_logs(xv[i], alpha, beta, delta, theta, lgp, lgp1,
                            &lg, &l1gb, &lc, &ls, &lp)
                ov[i] = ls
    return out


def gollgr_quantile_arr(u, double alpha, double beta, double delta, double theta):
    cdef double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t n = uv.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double lgp = lgamma(delta + 1.0)
    cdef double lgp1 = lgp + log(delta + 1.0)
    with nogil:
        for i in range(n):
            ov[i] = _quantile_one(uv[i], alpha, beta, delta, theta, lgp, lgp1)
    return out


cdef bint _params_ok(double alpha, double beta, double delta, double theta) nogil:
    return (isfinite(alpha) and alpha > 0.0 and isfinite(beta) and beta > 0.0
            and isfinite(delta) and delta > -1.0
            and isfinite(theta) and theta > 0.0)


def gollgr_loglik(x, double alpha, double beta, double delta, double theta):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], i
    cdef double total = 0.0, v
    cdef double lgp, lgp1
    if not _params_ok(alpha, beta, delta, theta):
        return -INFINITY
    lgp = lgamma(delta + 1.0)
    lgp1 = lgp + log(delta + 1.0)
    with nogil:
        for i in range(n):
            v = _logpdf_full(xv[i], alpha, beta, delta, theta, lgp, lgp1)
            if not isfinite(v):
                total = -INFINITY
                break
            total += v
    return total


def gollgr_censored_loglik(x, status, delta_i, theta_i, double alpha, double beta):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef unsigned char[::1] sv = np.ascontiguousarray(status, dtype=np.uint8)
    cdef double[::1] dv = np.ascontiguousarray(delta_i, dtype=np.float64)
    cdef double[::1] tv = np.ascontiguousarray(theta_i, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], i
    cdef double total = 0.0, v, lgp, lgp1
    cdef double lg, l1gb, lc, ls, lp
    if not (isfinite(alpha) and alpha > 0.0 and isfinite(beta) and beta > 0.0):
        return -INFINITY
    with nogil:
        for i in range(n):
            if (not isfinite(dv[i]) or not isfinite(tv[i])
                    or dv[i] <= -1.0 or tv[i] <= 0.0):
                total = -INFINITY
                break
            lgp = lgamma(dv[i] + 1.0)
            lgp1 = lgp + log(dv[i] + 1.0)
            if sv[i]:
                v = _logpdf_full(xv[i], alpha, beta, dv[i], tv[i], lgp, lgp1)
            else:
                _model_logs(xv[i], alpha, beta, dv[i], tv[i], lgp, lgp1,
                            &lg, &l1gb, &lc, &ls, &lp)
                v = ls
            if not isfinite(v):
                total = -INFINITY
                break
            total += v
    return total


def gollgr_quantile_rows(u, double alpha, double beta, delta_i, theta_i):
    cdef double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef double[::1] dv = np.ascontiguousarray(delta_i, dtype=np.float64)
    cdef double[::1] tv = np.ascontiguousarray(theta_i, dtype=np.float64)
    cdef Py_ssize_t n = uv.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double lgp, lgp1
    with nogil:
        for i in range(n):
            lgp = lgamma(dv[i] + 1.0)
            lgp1 = lgp + log(dv[i] + 1.0)
            ov[i] = _quantile_one(uv[i], alpha, beta, dv[i], tv[i], lgp, lgp1)
    return out


def gollgr_logcdf_rows(x, double alpha, double beta, delta_i, theta_i):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[::1] dv = np.ascontiguousarray(delta_i, dtype=np.float64)
    cdef double[::1] tv = np.ascontiguousarray(theta_i, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double lgp, lgp1, lg, l1gb, lc, ls, lp
    with nogil:
        for i in range(n):
            if xv[i] <= 0.0:
                ov[i] = -INFINITY
            else:
                lgp = lgamma(dv[i] + 1.0)
                lgp1 = lgp + log(dv[i] + 1.0)
                _model_logs(xv[i], alpha, beta, dv[i], tv[i], lgp, lgp1,
                            &lg, &l1gb, &lc, &ls, &lp)
                ov[i] = lc
    return out


def gollgr_logsf_rows(x, double alpha, double beta, delta_i, theta_i):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[::1] dv = np.ascontiguousarray(delta_i, dtype=np.float64)
    cdef double[::1] tv = np.ascontiguousarray(theta_i, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double lgp, lgp1, lg, l1gb, lc, ls, lp
    with nogil:
        for i in range(n):
            if xv[i] <= 0.0:
                ov[i] = 0.0
            else:
                lgp = lgamma(dv[i] + 1.0)
                lgp1 = lgp + log(dv[i] + 1.0)
                _model_logs(xv[i], alpha, beta, dv[i], tv[i], lgp, lgp1,
                            &lg, &l1gb, &lc, &ls, &lp)
                ov[i] = ls
    return out
