"""Monte Carlo study drivers: repeated sampling, refitting, AE/bias/MSE.

Two study kinds:

* distribution: draw i.i.d. samples by quantile inversion at a fixed truth
  and refit the four-parameter law;
* regression: draw a binary covariate per row, build per-row shape/rate
  through the links, invert uniforms row-wise, and refit the censored
  regression (no censoring in the generated data).

Estimator policy.  Replicate fits use truth-seeded cyclic coordinate
Newton with a bounded cycle budget (default 20 cycles, stopping earlier
when a full cycle improves the log likelihood by less than cycle_tol).
This matches the scoring-type fitters the reference results were produced
with: the family has a likelihood degeneracy ridge (beta unbounded, delta
at its lower limit, fitted law nearly unchanged) on a non-negligible
fraction of replicates, where no interior maximum exists at all; a global
or long-running optimizer drifts along that ridge and produces unbounded
shape estimates, while bounded local scoring stays put when the data carry
no information.  All policy knobs live in StudyConfig.  Replicates whose
fit escapes toward the boundary or yields non-finite values are dropped
and counted; everything else is kept, including fits that stopped at the
cycle cap.

Per-replicate seeds derive from (seed, sample_size, replicate_index) via
numpy SeedSequence, so any replicate is reproducible in isolation and
results do not depend on worker scheduling.
"""

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from gollgr._kernels import core
from gollgr._optim import coordinate_max
from gollgr.model import GollgrParams
from gollgr.regression import (RegressionCoefficients, Submodel,
                               SurvivalDataset, _pack, _unpack,
                               censored_loglik)

__all__ = ["StudyConfig", "StudyReport", "run_distribution_study",
           "run_regression_study"]


@dataclass(frozen=True)
class StudyConfig:
    """Configuration of one Monte Carlo study."""

    truth: GollgrParams | RegressionCoefficients
    sample_sizes: tuple[int, ...]
    replicates: int
    seed: int
    study_kind: str = "distribution"   # or "regression"
    max_cycles: int = 20
    cycle_tol: float = 5e-4
    workers: int = 1

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if any(n < 1 for n in self.sample_sizes):
            raise ValueError("sample sizes must be positive")
        if self.study_kind not in ("distribution", "regression"):
            raise ValueError(f"unknown study kind {self.study_kind!r}")
        object.__setattr__(self, "sample_sizes", tuple(int(n) for n in self.sample_sizes))


@dataclass
class StudyReport:
    """Per (parameter, sample size) aggregates plus bookkeeping."""

    study_kind: str
    parameter_names: list[str]
    truth: list[float]
    sample_sizes: list[int]
    ae: dict[int, list[float]]
    bias: dict[int, list[float]]
    mse: dict[int, list[float]]
    convergence_rate: dict[int, float]
    kept: dict[int, int]
    replicates: int
    seed: int
    runtime_seconds: float
    estimates: dict[int, np.ndarray] = field(repr=False, default_factory=dict)

    def table(self) -> str:
        """Human-readable table: one block of AE/Bias/MSE columns per n."""
        lines = []
        header = ["Parameter"]
        for n in self.sample_sizes:
            header += [f"AE(n={n})", f"Bias(n={n})", f"MSE(n={n})"]
        lines.append("  ".join(f"{h:>12}" for h in header))
        for i, name in enumerate(self.parameter_names):
            row = [name]
            for n in self.sample_sizes:
                row += [f"{self.ae[n][i]:.4f}", f"{self.bias[n][i]:.4f}",
                        f"{self.mse[n][i]:.4f}"]
            lines.append("  ".join(f"{v:>12}" for v in row))
        rates = ", ".join(f"n={n}: {self.convergence_rate[n]:.3f}"
                          for n in self.sample_sizes)
        lines.append(f"convergence rate per cell: {rates}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "study_kind": self.study_kind,
            "parameter_names": self.parameter_names,
            "truth": self.truth,
            "sample_sizes": list(self.sample_sizes),
            "replicates": self.replicates,
            "seed": self.seed,
            "ae": {str(n): v for n, v in self.ae.items()},
            "bias": {str(n): v for n, v in self.bias.items()},
            "mse": {str(n): v for n, v in self.mse.items()},
            "convergence_rate": {str(n): v for n, v in self.convergence_rate.items()},
            "kept": {str(n): v for n, v in self.kept.items()},
            "runtime_seconds": self.runtime_seconds,
        }


def _replicate_seed(seed: int, n: int, r: int) -> np.random.SeedSequence:
    return np.random.SeedSequence((seed, n, r))


# worker functions (module level so ProcessPoolExecutor can pickle them) ----

def _fit_distribution_replicate(args) -> list[float] | None:
    seed, n, r, truth_tuple, max_cycles, cycle_tol = args
    alpha, beta, delta, theta = truth_tuple
    rng = np.random.Generator(np.random.PCG64(_replicate_seed(seed, n, r)))
    u = np.clip(rng.random(n), 2.0 ** -53, 1.0 - 2.0 ** -53)
    x = core.gollgr_quantile_arr(u, alpha, beta, delta, theta)

    z0 = np.array([math.log(alpha), math.log(beta),
                   math.log(delta + 1.0), math.log(theta)])

    def ll_fn(z):
        return core.gollgr_loglik(x, math.exp(z[0]), math.exp(z[1]),
                                  math.exp(z[2]) - 1.0, math.exp(z[3]))

    res = coordinate_max(ll_fn, z0, max_cycles=max_cycles, cycle_tol=cycle_tol)
    if res.boundary_escape or not math.isfinite(res.ll):
        return None
    z = res.z
    return [math.exp(z[0]), math.exp(z[1]), math.exp(z[2]) - 1.0, math.exp(z[3])]


def _fit_regression_replicate(args) -> list[float] | None:
    seed, n, r, coef_tuple, max_cycles, cycle_tol = args
    alpha, beta, lam1, lam2 = coef_tuple
    truth = RegressionCoefficients(lambda1=np.array(lam1), lambda2=np.array(lam2),
                                   alpha=alpha, beta=beta)
    rng = np.random.Generator(np.random.PCG64(_replicate_seed(seed, n, r)))
    v = rng.binomial(1, 0.5, n).astype(np.float64)
    V = np.column_stack([np.ones(n), v])
    delta_i = np.expm1(V @ truth.lambda2)
    theta_i = np.exp(V @ truth.lambda1)
    u = np.clip(rng.random(n), 2.0 ** -53, 1.0 - 2.0 ** -53)
    x = core.gollgr_quantile_rows(u, alpha, beta, delta_i, theta_i)
    ds = SurvivalDataset(times=x, status=np.ones(n, dtype=np.uint8), covariates=V)

    p = V.shape[1]
    z0 = _pack(truth, Submodel.GOLLGR)

    def ll_fn(z):
        return censored_loglik(ds, _unpack(z, p, Submodel.GOLLGR))

    res = coordinate_max(ll_fn, z0, max_cycles=max_cycles, cycle_tol=cycle_tol)
    if res.boundary_escape or not math.isfinite(res.ll):
        return None
    cf = _unpack(res.z, p, Submodel.GOLLGR)
    # report order: alpha, beta, shape-link coefficients, rate-link coefficients
    return ([cf.alpha, cf.beta] + cf.lambda2.tolist() + cf.lambda1.tolist())


def _run_cells(cfg: StudyConfig, worker, truth_tuple, names, truth_vec) -> StudyReport:
    t_start = time.perf_counter()
    ae, bias, mse, rate, kept_count, all_est = {}, {}, {}, {}, {}, {}
    for n in cfg.sample_sizes:
        tasks = [(cfg.seed, n, r, truth_tuple, cfg.max_cycles, cfg.cycle_tol)
                 for r in range(cfg.replicates)]
        if cfg.workers > 1:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                results = list(pool.map(worker, tasks, chunksize=16))
        else:
            results = [worker(t) for t in tasks]
        kept = [r for r in results if r is not None]
        cell_rate = len(kept) / cfg.replicates
        if cell_rate < 0.5:
            raise RuntimeError(
                f"convergence rate {cell_rate:.2f} below 0.5 in cell n={n}; "
                "aborting study")
        est = np.array(kept)
        # order-independent aggregation: estimates are indexed by replicate
        # and summed with compensated accumulation
        col_ae = [math.fsum(est[:, j]) / est.shape[0] for j in range(est.shape[1])]
        col_mse = [math.fsum((est[:, j] - truth_vec[j]) ** 2) / est.shape[0]
                   for j in range(est.shape[1])]
        ae[n] = col_ae
        bias[n] = [a - t for a, t in zip(col_ae, truth_vec)]
        mse[n] = col_mse
        rate[n] = cell_rate
        kept_count[n] = len(kept)
        all_est[n] = est
    return StudyReport(
        study_kind=cfg.study_kind, parameter_names=names, truth=list(truth_vec),
        sample_sizes=list(cfg.sample_sizes), ae=ae, bias=bias, mse=mse,
        convergence_rate=rate, kept=kept_count, replicates=cfg.replicates,
        seed=cfg.seed, runtime_seconds=time.perf_counter() - t_start,
        estimates=all_est)


def run_distribution_study(cfg: StudyConfig) -> StudyReport:
    """Repeated sampling and refitting of the four-parameter law."""
    if cfg.study_kind != "distribution":
        raise ValueError("config is not a distribution study")
    truth = cfg.truth
    if not isinstance(truth, GollgrParams):
        raise TypeError("distribution study truth must be GollgrParams")
    names = ["alpha", "beta", "delta", "theta"]
    return _run_cells(cfg, _fit_distribution_replicate, truth.as_tuple(),
                      names, list(truth.as_tuple()))


def run_regression_study(cfg: StudyConfig) -> StudyReport:
    """Binary-covariate regression recipe: simulate per-row parameters
    through the links, invert uniforms row-wise, refit."""
    if cfg.study_kind != "regression":
        raise ValueError("config is not a regression study")
    truth = cfg.truth
    if not isinstance(truth, RegressionCoefficients):
        raise TypeError("regression study truth must be RegressionCoefficients")
    if truth.lambda1.shape[0] != 2:
        raise ValueError("the regression study uses one binary covariate "
                         "(intercept + slope per link)")
    names = ["alpha", "beta", "lambda2[0]", "lambda2[1]", "lambda1[0]", "lambda1[1]"]
    truth_vec = ([truth.alpha, truth.beta]
                 + truth.lambda2.tolist() + truth.lambda1.tolist())
    coef_tuple = (truth.alpha, truth.beta,
                  tuple(truth.lambda1.tolist()), tuple(truth.lambda2.tolist()))
    return _run_cells(cfg, _fit_regression_replicate, coef_tuple, names, truth_vec)
