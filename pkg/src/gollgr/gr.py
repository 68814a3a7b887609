"""Two-parameter generalized Rayleigh parent distribution.

cdf  G(x) = gamma_1(delta + 1, theta x^2)
pdf  g(x) = 2 theta^(delta+1) / Gamma(delta+1) * x^(2 delta + 1) exp(-theta x^2)

with shape delta > -1 and rate theta > 0.  delta = 0 gives the Rayleigh
distribution, delta = 1/2 the Maxwell, delta = -1/2 the half-normal.
"""

import math
from dataclasses import dataclass

import numpy as np

from gollgr._kernels import core

__all__ = ["GrParams", "gr_cdf", "gr_pdf", "gr_logpdf", "gr_quantile", "gr_moment"]


@dataclass(frozen=True)
class GrParams:
    """Parent-distribution parameters (shape delta > -1, rate theta > 0)."""

    delta: float
    theta: float

    def __post_init__(self):
        if not (math.isfinite(self.delta) and self.delta > -1.0):
            raise ValueError(f"delta must be finite and > -1, got {self.delta}")
        if not (math.isfinite(self.theta) and self.theta > 0.0):
            raise ValueError(f"theta must be finite and > 0, got {self.theta}")


def _eval(x, fn):
    arr = np.asarray(x, dtype=np.float64)
    out = fn(np.atleast_1d(arr))
    return out.reshape(arr.shape) if arr.ndim else float(out[0])


def gr_cdf(x, p: GrParams):
    """Distribution function; 0 at x <= 0, increasing to 1."""
    def fn(a):
        if (a < 0.0).any():
            raise ValueError("support is x >= 0")
        return core.gr_cdf_arr(a, p.delta, p.theta)
    return _eval(x, fn)


def gr_logpdf(x, p: GrParams):
    def fn(a):
        if (a <= 0.0).any():
            raise ValueError("density evaluation requires x > 0")
        return core.gr_logpdf_arr(a, p.delta, p.theta)
    return _eval(x, fn)


def gr_pdf(x, p: GrParams):
    """Density, computed in log space to survive large delta or theta x^2."""
    def fn(a):
        return np.exp(core.gr_logpdf_arr(a, p.delta, p.theta))

    arr = np.asarray(x, dtype=np.float64)
    if (np.atleast_1d(arr) < 0.0).any():
        raise ValueError("support is x >= 0")
    flat = np.atleast_1d(arr).copy()
    out = np.empty_like(flat)
    at_zero = flat == 0.0
    if at_zero.any():
        out[at_zero] = _pdf_limit_at_zero(p)
    if (~at_zero).any():
        out[~at_zero] = fn(flat[~at_zero])
    return out.reshape(arr.shape) if arr.ndim else float(out[0])


def _pdf_limit_at_zero(p: GrParams) -> float:
    # continuous limit of the density at the origin
    two_d1 = 2.0 * p.delta + 1.0
    if two_d1 > 0.0:
        return 0.0
    if two_d1 == 0.0:
        return 2.0 * math.sqrt(p.theta / math.pi)
    return math.inf


def gr_quantile(z, p: GrParams):
    """Quantile: sqrt(inverse lower gamma ratio / theta)."""
    def fn(a):
        if ((a <= 0.0) | (a >= 1.0)).any():
            raise ValueError("probabilities must lie strictly inside (0, 1)")
        inv = core.gamma_quantile_arr(p.delta + 1.0, a)
        return np.sqrt(inv / p.theta)
    return _eval(z, fn)


def gr_moment(s: float, p: GrParams) -> float:
    """Raw moment of order s > 0: Gamma(s/2+delta+1) / (theta^(s/2) Gamma(delta+1))."""
    if not s > 0.0:
        raise ValueError(f"moment order must be positive, got {s}")
    return math.exp(math.lgamma(0.5 * s + p.delta + 1.0) - math.lgamma(p.delta + 1.0)
                    - 0.5 * s * math.log(p.theta))
