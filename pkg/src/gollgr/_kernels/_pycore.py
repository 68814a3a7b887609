"""Pure-Python/numpy implementation of the numerical kernels.

This module mirrors the API of the compiled extension ``_ccore`` and is
selected automatically when the extension is unavailable (or when
``GOLLGR_PURE_PYTHON=1`` is set).  Scalar routines use plain ``math`` calls;
array routines run the same algorithms vectorised with convergence masks so
the fallback stays usable for simulation work.

Numerical conventions shared by both backends:

* The regularized lower/upper incomplete gamma ratios are evaluated by the
  classic split: power series for ``x < p + 1`` and a Lentz-style continued
  fraction for ``x >= p + 1``.  Both are computed in log space so the deep
  tails keep relative accuracy.
* The four-parameter law with shape pair (alpha, beta) on top of the
  two-parameter Rayleigh-type parent (delta, theta) is always evaluated
  through ``log G``, ``log(1 - G^beta)`` and a two-term log-sum-exp, which
  keeps densities, cdfs and survival functions finite and accurate far into
  either tail.
* Probability inputs to quantile routines must lie strictly inside (0, 1);
  callers are responsible for domain checks, kernels assume valid input.
"""

import math

import numpy as np

backend_name = "python"

_LN2 = math.log(2.0)
_MAXIT = 500
_EPS = 1e-17
_TINY = 1e-300


# ---------------------------------------------------------------------------
# regularized incomplete gamma: scalar
# ---------------------------------------------------------------------------

def _log_gamma_pair(p, x):
    """Return (log of lower ratio, log of upper ratio) for shape p at x."""
    if x <= 0.0:
        return -math.inf, 0.0
    if not math.isfinite(x):
        return 0.0, -math.inf
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
        log_low = p * math.log(x) - x - math.lgamma(p + 1.0) + math.log(total)
        if log_low > -_LN2:
            log_up = math.log(-math.expm1(log_low))
        else:
            log_up = math.log1p(-math.exp(log_low))
        return log_low, log_up
    # Lentz continued fraction for the upper ratio.
    b = x + 1.0 - p
    c = 1e300
    d = 1.0 / b
    h = d
    for i in range(1, _MAXIT + 1):
        an = -i * (i - p)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    log_up = p * math.log(x) - x - math.lgamma(p) + math.log(h)
    if log_up > -_LN2:
        log_low = math.log(-math.expm1(log_up))
    else:
        log_low = math.log1p(-math.exp(log_up))
    return log_low, log_up


def reg_lower_gamma(p, x):
    return math.exp(_log_gamma_pair(p, x)[0])


def reg_upper_gamma(p, x):
    return math.exp(_log_gamma_pair(p, x)[1])


def log_reg_lower_gamma(p, x):
    return _log_gamma_pair(p, x)[0]


def log_reg_upper_gamma(p, x):
    return _log_gamma_pair(p, x)[1]


# ---------------------------------------------------------------------------
# standard normal quantile (Acklam rational initial guess + Halley polish)
# ---------------------------------------------------------------------------

_ACK_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
          1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_ACK_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
          6.680131188771972e+01, -1.328068155288572e+01)
_ACK_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
          -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_ACK_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
          3.754408661907416e+00)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _acklam(q):
    """Initial estimate of the normal quantile for q in (0, 0.5]."""
    if q < 0.02425:
        r = math.sqrt(-2.0 * math.log(q))
        num = ((((_ACK_C[0] * r + _ACK_C[1]) * r + _ACK_C[2]) * r + _ACK_C[3]) * r + _ACK_C[4]) * r + _ACK_C[5]
        den = (((_ACK_D[0] * r + _ACK_D[1]) * r + _ACK_D[2]) * r + _ACK_D[3]) * r + 1.0
        return num / den
    r = q - 0.5
    s = r * r
    num = (((((_ACK_A[0] * s + _ACK_A[1]) * s + _ACK_A[2]) * s + _ACK_A[3]) * s + _ACK_A[4]) * s + _ACK_A[5]) * r
    den = ((((_ACK_B[0] * s + _ACK_B[1]) * s + _ACK_B[2]) * s + _ACK_B[3]) * s + _ACK_B[4]) * s + 1.0
    return num / den


def std_normal_quantile(u):
    """Quantile of N(0, 1); antisymmetric by construction."""
    q = u if u <= 0.5 else 1.0 - u
    x = _acklam(q)
    # Two Halley refinements against the erfc-based cdf push the residual
    # to a few ulp.
    for _ in range(2):
        e = 0.5 * math.erfc(-x / math.sqrt(2.0)) - q
        un = e * _SQRT_2PI * math.exp(0.5 * x * x)
        x -= un / (1.0 + 0.5 * x * un)
    return x if u <= 0.5 else -x


# ---------------------------------------------------------------------------
# inverse of the regularized lower incomplete gamma ratio
# ---------------------------------------------------------------------------

def gamma_quantile2(p, u, one_minus_u):
    """Solve reg_lower_gamma(p, z) = u given both u and 1-u accurately.

    Wilson-Hilferty start (closed-form tail asymptotes for extreme inputs),
    Newton iteration on whichever tail is better conditioned, bisection
    fallback whenever a step leaves the bracket.
    """
    lgp = math.lgamma(p)
    lgp1 = lgp + math.log(p)
    if one_minus_u < 1e-8:
        # deep upper tail: invert the leading term of the upper ratio
        big = -(math.log(one_minus_u) + lgp) if one_minus_u > 0.0 else 745.0 + abs(lgp)
        z = big + (p - 1.0) * math.log(max(big, 2.0))
        z = max(z, p + 1.5)
    else:
        g = std_normal_quantile(u)
        t = 1.0 - 1.0 / (9.0 * p) + g / (3.0 * math.sqrt(p))
        z = p * t * t * t if t > 0.0 else -1.0
        if not (z > 0.0) or not math.isfinite(z):
            # small-quantile asymptote of the lower ratio
            z = math.exp((math.log(u) + lgp1) / p)
            if not (z > 0.0) or not math.isfinite(z):
                z = _TINY
    lo = 0.0
    hi = math.inf
    # residual tolerance relative to the better-conditioned tail
    tol = max(1e-13 * (u if u <= 0.9 else one_minus_u), 1e-300)
    for _ in range(200):
        ll, lu = _log_gamma_pair(p, z)
        if u <= 0.9:
            f = math.exp(ll) - u
        else:
            f = one_minus_u - math.exp(lu)
        if f > 0.0:
            hi = min(hi, z)
        else:
            lo = max(lo, z)
        if abs(f) <= tol:
            break
        log_pdf = (p - 1.0) * math.log(z) - z - lgp
        step = f * math.exp(-log_pdf) if log_pdf > -700.0 else math.inf
        znew = z - step
        if not math.isfinite(znew) or znew <= lo or znew >= hi:
            znew = z * 2.0 if math.isinf(hi) else 0.5 * (lo + hi)
        if znew == z or (math.isfinite(hi) and hi - lo <= 1e-15 * z):
            break
        z = znew
    return z


def gamma_quantile(p, u):
    return gamma_quantile2(p, u, 1.0 - u)


# ---------------------------------------------------------------------------
# four-parameter model: scalar core
# ---------------------------------------------------------------------------

def _model_logs(x, alpha, beta, delta, theta):
    """Return (log G, log(1-G^beta), log cdf, log sf, log parent pdf)."""
    p = delta + 1.0
    z = theta * x * x
    ll, lu = _log_gamma_pair(p, z)
    # prefer the tail representation of log G once G > 1/2
    lg = math.log1p(-math.exp(lu)) if ll > -_LN2 else ll
    blg = beta * lg
    if blg > -_LN2:
        l1gb = math.log(-math.expm1(blg))
    else:
        l1gb = math.log1p(-math.exp(blg))
    a_term = alpha * beta * lg
    b_term = alpha * l1gb
    if a_term >= b_term:
        lse = a_term + math.log1p(math.exp(b_term - a_term))
    else:
        lse = b_term + math.log1p(math.exp(a_term - b_term))
    log_parent = (_LN2 + p * math.log(theta) - math.lgamma(p)
                  + (2.0 * delta + 1.0) * math.log(x) - z)
    return lg, l1gb, a_term - lse, b_term - lse, log_parent, lse


def gollgr_logpdf_one(x, alpha, beta, delta, theta):
    lg, l1gb, _, _, log_parent, lse = _model_logs(x, alpha, beta, delta, theta)
    # unit exponents multiply possibly infinite logs; their term is exactly 0
    t1 = 0.0 if alpha * beta == 1.0 else (alpha * beta - 1.0) * lg
    t2 = 0.0 if alpha == 1.0 else (alpha - 1.0) * l1gb
    return math.log(alpha * beta) + log_parent + t1 + t2 - 2.0 * lse


def gollgr_logcdf_one(x, alpha, beta, delta, theta):
    if x <= 0.0:
        return -math.inf
    return _model_logs(x, alpha, beta, delta, theta)[2]


def gollgr_logsf_one(x, alpha, beta, delta, theta):
    if x <= 0.0:
        return 0.0
    return _model_logs(x, alpha, beta, delta, theta)[3]


def gollgr_quantile_one(u, alpha, beta, delta, theta):
    lt = (math.log(u) - math.log1p(-u)) / alpha
    # log of t/(1+t) where log t = lt
    lz = -_logaddexp0(-lt) / beta
    z = math.exp(lz)
    omz = -math.expm1(lz)
    inv = gamma_quantile2(delta + 1.0, z, omz)
    return math.sqrt(inv / theta)


def _logaddexp0(v):
    """log(1 + exp(v)) guarded against overflow."""
    if v > 35.0:
        return v
    if v < -700.0:
        return 0.0
    return math.log1p(math.exp(v))


# ---------------------------------------------------------------------------
# vectorised incomplete gamma machinery
# ---------------------------------------------------------------------------

def log_gamma_pair_arr(p, x):
    """Vectorised (log lower ratio, log upper ratio); p scalar, x 1-D array."""
    x = np.asarray(x, dtype=np.float64)
    ll = np.empty_like(x)
    lu = np.empty_like(x)
    zero = x <= 0.0
    infinite = ~np.isfinite(x) & ~zero
    ll[zero] = -np.inf
    lu[zero] = 0.0
    ll[infinite] = 0.0
    lu[infinite] = -np.inf
    ok = ~zero & ~infinite

    lgp = math.lgamma(p)
    lgp1 = lgp + math.log(p)

    ser = ok & (x < p + 1.0)
    if ser.any():
        xs = x[ser]
        term = np.ones_like(xs)
        total = np.ones_like(xs)
        active = np.ones(xs.shape, dtype=bool)
        n = 0
        while active.any() and n < _MAXIT:
            n += 1
            term = term * (xs / (p + n))
            total = np.where(active, total + term, total)
            active = active & (term >= total * _EPS)
        low = p * np.log(xs) - xs - lgp1 + np.log(total)
        up = np.where(low > -_LN2, np.log(-np.expm1(low)), np.log1p(-np.exp(low)))
        ll[ser] = low
        lu[ser] = up

    cfm = ok & ~ser
    if cfm.any():
        xc = x[cfm]
        b = xc + 1.0 - p
        c = np.full_like(xc, 1e300)
        d = 1.0 / b
        h = d.copy()
        active = np.ones(xc.shape, dtype=bool)
        for i in range(1, _MAXIT + 1):
            an = -i * (i - p)
            b = b + 2.0
            d = an * d + b
            np.copyto(d, _TINY, where=np.abs(d) < _TINY)
            c = b + an / c
            np.copyto(c, _TINY, where=np.abs(c) < _TINY)
            d = 1.0 / d
            delta = d * c
            h = np.where(active, h * delta, h)
            active = active & (np.abs(delta - 1.0) >= _EPS)
            if not active.any():
                break
        up = p * np.log(xc) - xc - lgp + np.log(h)
        low = np.where(up > -_LN2, np.log(-np.expm1(up)), np.log1p(-np.exp(up)))
        ll[cfm] = low
        lu[cfm] = up
    return ll, lu


def std_normal_quantile_arr(u):
    u = np.asarray(u, dtype=np.float64)
    q = np.minimum(u, 1.0 - u)
    x = np.empty_like(q)

    tail = q < 0.02425
    if tail.any():
        r = np.sqrt(-2.0 * np.log(q[tail]))
        num = ((((_ACK_C[0] * r + _ACK_C[1]) * r + _ACK_C[2]) * r + _ACK_C[3]) * r + _ACK_C[4]) * r + _ACK_C[5]
        den = (((_ACK_D[0] * r + _ACK_D[1]) * r + _ACK_D[2]) * r + _ACK_D[3]) * r + 1.0
        x[tail] = num / den
    mid = ~tail
    if mid.any():
        r = q[mid] - 0.5
        s = r * r
        num = (((((_ACK_A[0] * s + _ACK_A[1]) * s + _ACK_A[2]) * s + _ACK_A[3]) * s + _ACK_A[4]) * s + _ACK_A[5]) * r
        den = ((((_ACK_B[0] * s + _ACK_B[1]) * s + _ACK_B[2]) * s + _ACK_B[3]) * s + _ACK_B[4]) * s + 1.0
        x[mid] = num / den

    from scipy.special import erfc  # local import keeps module import light

    for _ in range(2):
        e = 0.5 * erfc(-x / math.sqrt(2.0)) - q
        un = e * _SQRT_2PI * np.exp(0.5 * x * x)
        x = x - un / (1.0 + 0.5 * x * un)
    return np.where(u <= 0.5, x, -x)


def gamma_quantile2_arr(p, u, one_minus_u):
    u = np.asarray(u, dtype=np.float64)
    one_minus_u = np.asarray(one_minus_u, dtype=np.float64)
    lgp = math.lgamma(p)
    lgp1 = lgp + math.log(p)

    deep = one_minus_u < 1e-8
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        g = std_normal_quantile_arr(np.where(deep, 0.5, u))
        t = 1.0 - 1.0 / (9.0 * p) + g / (3.0 * math.sqrt(p))
        z = np.where(t > 0.0, p * t * t * t, -1.0)
        bad = (~(z > 0.0) | ~np.isfinite(z)) & ~deep
        if bad.any():
            z = np.where(bad, np.exp((np.log(u) + lgp1) / p), z)
        if deep.any():
            big = np.where(one_minus_u > 0.0, -(np.log(one_minus_u) + lgp), 745.0 + abs(lgp))
            zd = np.maximum(big + (p - 1.0) * np.log(np.maximum(big, 2.0)), p + 1.5)
            z = np.where(deep, zd, z)
        z = np.where(~(z > 0.0) | ~np.isfinite(z), _TINY, z)

    lo = np.zeros_like(z)
    hi = np.full_like(z, np.inf)
    done = np.zeros(z.shape, dtype=bool)
    tol = np.maximum(1e-13 * np.where(u <= 0.9, u, one_minus_u), 1e-300)
    for _ in range(200):
        ll, lu = log_gamma_pair_arr(p, z)
        f = np.where(u <= 0.9, np.exp(ll) - u, one_minus_u - np.exp(lu))
        hi = np.where(f > 0.0, np.minimum(hi, z), hi)
        lo = np.where(f <= 0.0, np.maximum(lo, z), lo)
        done = done | (np.abs(f) <= tol)
        if done.all():
            break
        log_pdf = (p - 1.0) * np.log(z) - z - lgp
        with np.errstate(over="ignore", invalid="ignore"):
            step = f * np.exp(-log_pdf)
            znew = z - step
        mid = np.where(np.isinf(hi), z * 2.0, 0.5 * (lo + hi))
        znew = np.where(~np.isfinite(znew) | (znew <= lo) | (znew >= hi), mid, znew)
        stalled = (znew == z) | (np.isfinite(hi) & (hi - lo <= 1e-15 * z))
        done = done | stalled
        z = np.where(done, z, znew)
    return z


def gamma_quantile_arr(p, u):
    u = np.asarray(u, dtype=np.float64)
    return gamma_quantile2_arr(p, u, 1.0 - u)


# ---------------------------------------------------------------------------
# parent (two-parameter) helpers
# ---------------------------------------------------------------------------

def gr_logpdf_arr(x, delta, theta):
    x = np.asarray(x, dtype=np.float64)
    p = delta + 1.0
    return (_LN2 + p * math.log(theta) - math.lgamma(p)
            + (2.0 * delta + 1.0) * np.log(x) - theta * x * x)


def gr_cdf_arr(x, delta, theta):
    x = np.asarray(x, dtype=np.float64)
    ll, _ = log_gamma_pair_arr(delta + 1.0, theta * x * x)
    return np.exp(ll)


# ---------------------------------------------------------------------------
# four-parameter model: vectorised core
# ---------------------------------------------------------------------------

def _model_logs_arr(x, alpha, beta, delta, theta):
    x = np.asarray(x, dtype=np.float64)
    p = delta + 1.0
    z = theta * x * x
    ll, lu = log_gamma_pair_arr(p, z)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        lg = np.where(ll > -_LN2, np.log1p(-np.exp(lu)), ll)
        blg = beta * lg
        l1gb = np.where(blg > -_LN2, np.log(-np.expm1(blg)), np.log1p(-np.exp(blg)))
        a_term = alpha * beta * lg
        b_term = alpha * l1gb
        lse = np.logaddexp(a_term, b_term)
        log_parent = (_LN2 + p * math.log(theta) - math.lgamma(p)
                      + (2.0 * delta + 1.0) * np.log(x) - z)
    return lg, l1gb, a_term - lse, b_term - lse, log_parent, lse


def _params_ok(alpha, beta, delta, theta):
    return (math.isfinite(alpha) and alpha > 0.0 and math.isfinite(beta) and beta > 0.0
            and math.isfinite(delta) and delta > -1.0 and math.isfinite(theta) and theta > 0.0)


def gollgr_logpdf_arr(x, alpha, beta, delta, theta):
    lg, l1gb, _, _, log_parent, lse = _model_logs_arr(x, alpha, beta, delta, theta)
    with np.errstate(invalid="ignore"):
        t1 = 0.0 if alpha * beta == 1.0 else (alpha * beta - 1.0) * lg
        t2 = 0.0 if alpha == 1.0 else (alpha - 1.0) * l1gb
        return math.log(alpha * beta) + log_parent + t1 + t2 - 2.0 * lse


def gollgr_logcdf_arr(x, alpha, beta, delta, theta):
    return _model_logs_arr(x, alpha, beta, delta, theta)[2]


def gollgr_logsf_arr(x, alpha, beta, delta, theta):
    return _model_logs_arr(x, alpha, beta, delta, theta)[3]


def gollgr_quantile_arr(u, alpha, beta, delta, theta):
    u = np.asarray(u, dtype=np.float64)
    lt = (np.log(u) - np.log1p(-u)) / alpha
    lz = -np.logaddexp(0.0, -lt) / beta
    z = np.exp(lz)
    omz = -np.expm1(lz)
    inv = gamma_quantile2_arr(delta + 1.0, z, omz)
    return np.sqrt(inv / theta)


def gollgr_loglik(x, alpha, beta, delta, theta):
    if not _params_ok(alpha, beta, delta, theta):
        return -math.inf
    lp = gollgr_logpdf_arr(x, alpha, beta, delta, theta)
    if np.isnan(lp).any():
        return -math.inf
    total = float(np.sum(lp))
    return total if math.isfinite(total) else -math.inf


def gollgr_censored_loglik(x, status, delta_i, theta_i, alpha, beta):
    if not (math.isfinite(alpha) and alpha > 0.0 and math.isfinite(beta) and beta > 0.0):
        return -math.inf
    x = np.asarray(x, dtype=np.float64)
    delta_i = np.asarray(delta_i, dtype=np.float64)
    theta_i = np.asarray(theta_i, dtype=np.float64)
    if (~np.isfinite(delta_i)).any() or (~np.isfinite(theta_i)).any():
        return -math.inf
    if (delta_i <= -1.0).any() or (theta_i <= 0.0).any():
        return -math.inf
    total = 0.0
    for i in range(x.shape[0]):
        if status[i]:
            v = gollgr_logpdf_one(x[i], alpha, beta, delta_i[i], theta_i[i])
        else:
            v = gollgr_logsf_one(x[i], alpha, beta, delta_i[i], theta_i[i])
        if not math.isfinite(v):
            return -math.inf
        total += v
    return total


def gollgr_quantile_rows(u, alpha, beta, delta_i, theta_i):
    u = np.asarray(u, dtype=np.float64)
    out = np.empty_like(u)
    for i in range(u.shape[0]):
        out[i] = gollgr_quantile_one(u[i], alpha, beta, delta_i[i], theta_i[i])
    return out


def gollgr_logcdf_rows(x, alpha, beta, delta_i, theta_i):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    for i in range(x.shape[0]):
        out[i] = gollgr_logcdf_one(x[i], alpha, beta, delta_i[i], theta_i[i])
    return out


def gollgr_logsf_rows(x, alpha, beta, delta_i, theta_i):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    for i in range(x.shape[0]):
        out[i] = gollgr_logsf_one(x[i], alpha, beta, delta_i[i], theta_i[i])
    return out
