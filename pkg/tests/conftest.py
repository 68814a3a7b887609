import mpmath as mp
import numpy as np
import pytest

mp.mp.dps = 40


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240811)


def mp_parent_cdf(x, delta, theta):
    return mp.gammainc(delta + 1, 0, theta * x ** 2, regularized=True)


def mp_parent_pdf(x, delta, theta):
    x, delta, theta = mp.mpf(x), mp.mpf(delta), mp.mpf(theta)
    return 2 * theta ** (delta + 1) / mp.gamma(delta + 1) \
        * x ** (2 * delta + 1) * mp.e ** (-theta * x ** 2)


def mp_cdf(x, alpha, beta, delta, theta):
    g = mp_parent_cdf(x, delta, theta)
    num = g ** (alpha * beta)
    return num / (num + (1 - g ** beta) ** alpha)


def mp_pdf(x, alpha, beta, delta, theta):
    g = mp_parent_cdf(x, delta, theta)
    gp = mp_parent_pdf(x, delta, theta)
    num = alpha * beta * gp * g ** (alpha * beta - 1) * (1 - g ** beta) ** (alpha - 1)
    den = (g ** (alpha * beta) + (1 - g ** beta) ** alpha) ** 2
    return num / den


# parameter sets used across the suite; includes the density/hazard figure
# families and the simulation-study truth
PARAM_GRID = [
    (0.35, 0.55, -0.55, 0.11),   # simulation-study truth
    (1.0, 1.0, 0.0, 1.0),        # Rayleigh
    (1.0, 1.0, 1.5, 15.0),       # parent with larger shape
    (0.3, 2.0, 1.5, 15.0),       # density-figure family (a/b)
    (0.3, 2.0, 4.0, 15.0),       # bimodal member of the same family
    (0.3, 1.5, 1.5, 2.0),        # density-figure family (c)
    (0.1, 1.5, 1.5, 1.0),        # hazard-figure family (a)
    (0.3, 2.5, 0.5, 1.0),        # hazard-figure family (b)
    (0.1, 2.0, 0.5, 2.0),        # hazard-figure family (c)
    (2.0, 0.5, -0.5, 0.7853981633974483),  # finite positive origin limit
    (2.0, 1.3, 0.5, 1.0),        # thin-tail case, alpha >= 1
    (0.7, 0.8, 0.5, 1.0),        # thin-tail case, beta <= 1, delta > 0
    (1.0, 2.0, 0.0, 1.0),        # exponentiated submodel
    (1.0, 3.0, 0.5, 0.5),
    (5.0, 3.0, 2.0, 0.5),
    (0.5, 1.0, -0.7, 1.0),       # decreasing density
    (2.0, 1.0, 0.0, 3.0),
    (0.05, 8.0, 3.0, 2.0),
    (8.0, 0.1, -0.9, 0.4),
    (1.7, 0.6, 2.5, 0.03),
    (0.9, 1.1, -0.2, 10.0),
]
