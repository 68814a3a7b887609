"""Self-contained special functions used throughout the package.

Everything here is a pure function.  The incomplete-gamma family routes
through the selected kernel backend (compiled or numpy); the parabolic
cylinder function is evaluated by adaptive quadrature of its integral
representation.

Probabilities are returned unclamped; callers that feed results into logs
are responsible for their own clamping.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from gollgr._kernels import core


@dataclass(frozen=True)
class Accuracy:
    """Tolerance bundle for iterative evaluations."""

    rel_tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if not self.rel_tol > 0.0:
            raise ValueError("rel_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


class QuadratureError(RuntimeError):
    """Raised when an adaptive quadrature fails to reach its tolerance."""


def ln_gamma(a: float) -> float:
    """Natural log of the gamma function for positive argument."""
    if not a > 0.0:
        raise ValueError(f"ln_gamma requires a > 0, got {a}")
    return math.lgamma(a)


def reg_lower_gamma(p: float, x: float) -> float:
    """Regularized lower incomplete gamma ratio, in [0, 1]."""
    if not p > 0.0:
        raise ValueError(f"shape must be positive, got {p}")
    if x < 0.0:
        raise ValueError(f"argument must be nonnegative, got {x}")
    return core.reg_lower_gamma(p, x)


def reg_upper_gamma(p: float, x: float) -> float:
    """Regularized upper incomplete gamma ratio, computed tail-accurately.

    For ``x >= p + 1`` the value comes straight from a continued fraction,
    so it keeps relative accuracy even when the lower ratio is
    indistinguishable from 1.
    """
    if not p > 0.0:
        raise ValueError(f"shape must be positive, got {p}")
    if x < 0.0:
        raise ValueError(f"argument must be nonnegative, got {x}")
    return core.reg_upper_gamma(p, x)


def log_reg_lower_gamma(p: float, x: float) -> float:
    if not p > 0.0:
        raise ValueError(f"shape must be positive, got {p}")
    if x < 0.0:
        raise ValueError(f"argument must be nonnegative, got {x}")
    return core.log_reg_lower_gamma(p, x)


def log_reg_upper_gamma(p: float, x: float) -> float:
    if not p > 0.0:
        raise ValueError(f"shape must be positive, got {p}")
    if x < 0.0:
        raise ValueError(f"argument must be nonnegative, got {x}")
    return core.log_reg_upper_gamma(p, x)


def gamma_quantile(p: float, u: float) -> float:
    """Inverse of ``reg_lower_gamma`` in its second argument."""
    if not p > 0.0:
        raise ValueError(f"shape must be positive, got {p}")
    if not 0.0 < u < 1.0:
        raise ValueError(f"probability must lie in (0, 1), got {u}")
    return core.gamma_quantile(p, u)


def std_normal_quantile(u: float) -> float:
    """Standard normal quantile; antisymmetric around u = 1/2."""
    if not 0.0 < u < 1.0:
        raise ValueError(f"probability must lie in (0, 1), got {u}")
    return core.std_normal_quantile(u)


def _pcd_log_integral(order: float, y: float, acc: Accuracy) -> float:
    """log of the integral \\int_0^inf exp(-(w y + w^2/2)) w^(-order-1) dw.

    For orders away from zero the integrand is exp(phi(w)) with concave
    phi; it is rescaled by its maximum so the quadrature works on O(1)
    values.  As the order approaches zero the endpoint singularity
    w^(order's complement - 1) becomes nearly nonintegrable, so its exact
    contribution 1/(s+1) over [0, 1] is peeled off analytically.
    """
    import warnings

    from scipy.integrate import IntegrationWarning

    s = -order - 1.0  # power of w, > -1 for order < 0

    def phi(w):
        return s * math.log(w) - w * y - 0.5 * w * w

    def smooth(w):
        return math.exp(-(w * y + 0.5 * w * w))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        if s < -0.3:
            # strong endpoint singularity: I = 1/(s+1) over [0,1] exactly,
            # plus the smooth remainders
            eps_pow = s + 1.0
            upper = 1.0 + max(10.0, -2.0 * y) + 10.0
            i1, e1 = quad(lambda w: w ** (eps_pow - 1.0) * (smooth(w) - 1.0),
                          0.0, 1.0, epsabs=0.0, epsrel=acc.rel_tol,
                          limit=acc.max_iter)
            i2, e2 = quad(lambda w: w ** (eps_pow - 1.0) * smooth(w),
                          1.0, upper, epsabs=0.0, epsrel=acc.rel_tol,
                          limit=acc.max_iter)
            val = 1.0 / eps_pow + i1 + i2
            err = e1 + e2
            if not math.isfinite(val) or val <= 0.0 or err > 10.0 * acc.rel_tol * abs(val):
                raise QuadratureError(
                    f"parabolic cylinder integral did not converge: value={val}, "
                    f"error estimate={err}, order={order}, y={y}")
            return math.log(val)

        # peak of phi: s/w - y - w = 0
        if s > 0.0:
            w_star = 0.5 * (-y + math.sqrt(y * y + 4.0 * s))
            phi_max = phi(w_star)
        else:
            w_star = max(1.0, -y)
            phi_max = max(phi(w_star), 0.0)

        def integrand(w):
            if w <= 0.0:
                return 0.0
            return math.exp(phi(w) - phi_max)

        # upper limit: Gaussian factor kills the integrand
        upper = w_star + max(10.0, abs(y)) + 10.0 * math.sqrt(1.0 + abs(s))
        while phi(upper) - phi_max > math.log(acc.rel_tol) - 5.0:
            upper *= 2.0
            if upper > 1e8:
                break
        # break-point hints need subdivision headroom
        pts = [w_star] if (0.0 < w_star < upper and acc.max_iter >= 10) else None
        val, err = quad(integrand, 0.0, upper,
                        epsabs=0.0, epsrel=acc.rel_tol, limit=acc.max_iter,
                        points=pts)
    if not math.isfinite(val) or val <= 0.0 or err > 10.0 * acc.rel_tol * abs(val):
        raise QuadratureError(
            f"parabolic cylinder integral did not converge: value={val}, "
            f"error estimate={err}, order={order}, y={y}")
    return phi_max + math.log(val)


def log_parabolic_cylinder_D(order: float, y: float,
                             acc: Accuracy = Accuracy(rel_tol=1e-10, max_iter=200)) -> float:
    """log D_order(y) for negative order (the function is positive there)."""
    if not order < 0.0:
        raise ValueError(f"order must be negative, got {order}")
    return (-0.25 * y * y - math.lgamma(-order)
            + _pcd_log_integral(order, y, acc))


def parabolic_cylinder_D(order: float, y: float,
                         acc: Accuracy = Accuracy(rel_tol=1e-10, max_iter=200)) -> float:
    """Parabolic cylinder function D of negative order, by quadrature."""
    return math.exp(log_parabolic_cylinder_D(order, y, acc))


def chi2_sf(x: float, df: float) -> float:
    """Chi-square survival function via the upper gamma ratio."""
    if x < 0.0:
        raise ValueError(f"statistic must be nonnegative, got {x}")
    return reg_upper_gamma(0.5 * df, 0.5 * x)


def std_normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def std_normal_quantile_array(u) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    if ((u <= 0.0) | (u >= 1.0)).any():
        raise ValueError("probabilities must lie strictly inside (0, 1)")
    return core.std_normal_quantile_arr(u)
