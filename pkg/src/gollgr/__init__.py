"""gollgr: the generalized odd log-logistic generalized Rayleigh toolkit.

Distribution evaluation, exact sampling, series-based moments, maximum
likelihood, censored survival regression with covariate-dependent shape and
rate, quantile residuals, and Monte Carlo study drivers.  Hot numeric
kernels run in a compiled extension when available, with a numpy fallback.
"""

from gollgr._kernels import backend_name
from gollgr.gr import GrParams
from gollgr.model import GollgrParams

__version__ = "0.1.0"


def backend() -> str:
    """Name of the active kernel backend: 'compiled' or 'python'."""
    return backend_name


__all__ = ["GrParams", "GollgrParams", "backend", "__version__"]
