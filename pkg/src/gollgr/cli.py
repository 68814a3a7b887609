"""Command-line interface.

Subcommands: fit, regress, sample, simulate, residuals, compare.  Every
command is deterministic given its inputs and seed; reports are JSON files
with shortest-roundtrip float serialization plus a human-readable summary
on stdout.  Exit codes: 0 success, 2 I/O error, 3 parse/validation error,
4 non-convergence.
"""

import argparse
import csv
import json
import math
import sys

import numpy as np

from gollgr import __version__
from gollgr.inference import FitResult, Submodel, fit_mle, lr_test
from gollgr.model import GollgrParams, sample as draw_sample
from gollgr.regression import (RegressionCoefficients, RegressionFit,
                               SurvivalDataset, fit_regression,
                               quantile_residuals)
from gollgr.simulation import StudyConfig, run_distribution_study, run_regression_study

EXIT_OK = 0
EXIT_IO = 2
EXIT_PARSE = 3
EXIT_NOCONV = 4


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def ingest_csv(path: str):
    """Read a dataset: required 'time' column, optional 'status', all other
    columns become covariates (an intercept column is prepended).

    Returns (times, status or None, covariate matrix with intercept,
    covariate names).
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as e:
        raise CliError(f"cannot open {path}: {e}", EXIT_IO)
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CliError(f"{path}: empty file", EXIT_PARSE)
        header = [h.strip() for h in header]
        if "time" not in header:
            raise CliError(f"{path}: missing required column 'time'", EXIT_PARSE)
        t_idx = header.index("time")
        s_idx = header.index("status") if "status" in header else None
        cov_idx = [i for i in range(len(header)) if i not in (t_idx, s_idx)]
        times, status, rows = [], [], []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise CliError(
                    f"{path}:{line_no}: expected {len(header)} fields, got {len(row)}",
                    EXIT_PARSE)
            try:
                t = float(row[t_idx])
            except ValueError:
                raise CliError(
                    f"{path}:{line_no}: malformed numeric value {row[t_idx]!r} "
                    "in column 'time'", EXIT_PARSE)
            if not t > 0.0:
                raise CliError(
                    f"{path}:{line_no}: nonpositive time {t}", EXIT_PARSE)
            times.append(t)
            if s_idx is not None:
                s_raw = row[s_idx].strip()
                if s_raw not in ("0", "1"):
                    raise CliError(
                        f"{path}:{line_no}: status must be 0 or 1, got {s_raw!r}",
                        EXIT_PARSE)
                status.append(int(s_raw))
            try:
                rows.append([float(row[i]) for i in cov_idx])
            except ValueError:
                raise CliError(
                    f"{path}:{line_no}: malformed numeric covariate value",
                    EXIT_PARSE)
    times = np.array(times)
    if times.size == 0:
        raise CliError(f"{path}: no data rows", EXIT_PARSE)
    cov = np.column_stack([np.ones(times.size)] + [np.array(rows)[:, j] for j in range(len(cov_idx))]) \
        if cov_idx else np.ones((times.size, 1))
    names = ["intercept"] + [header[i] for i in cov_idx]
    return times, (np.array(status, dtype=np.uint8) if s_idx is not None else None), cov, names


def _write_report(path: str | None, payload: dict):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path is None:
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as e:
        raise CliError(f"cannot write {path}: {e}", EXIT_IO)


def _fit_payload(fit: FitResult) -> dict:
    e = fit.estimates
    se = None
    if fit.std_errors is not None:
        se = {k: (None if math.isnan(v) else v)
              for k, v in zip(("alpha", "beta", "delta", "theta"),
                              fit.std_errors.tolist())}
    return {
        "command": "fit",
        "version": __version__,
        "submodel": fit.submodel.value,
        "estimates": {"alpha": e.alpha, "beta": e.beta,
                      "delta": e.delta, "theta": e.theta},
        "std_errors": se,
        "loglik": fit.loglik,
        "aic": fit.aic, "bic": fit.bic, "caic": fit.caic,
        "converged": fit.converged,
        "n_obs": fit.n_obs,
    }


def _regfit_payload(fit: RegressionFit, cov_names: list[str]) -> dict:
    c = fit.coefficients
    return {
        "command": "regress",
        "version": __version__,
        "submodel": fit.submodel.value,
        "covariates": cov_names,
        "coefficients": {
            "alpha": c.alpha, "beta": c.beta,
            "lambda1": c.lambda1.tolist(),
            "lambda2": c.lambda2.tolist(),
        },
        "std_errors": fit.std_errors,
        "p_values": fit.p_values,
        "loglik": fit.loglik,
        "aic": fit.aic, "bic": fit.bic, "caic": fit.caic,
        "converged": fit.converged,
        "n_obs": fit.n_obs,
    }


def _print_fit(fit: FitResult):
    e = fit.estimates
    print(f"submodel: {fit.submodel.value}   n = {fit.n_obs}   "
          f"converged = {fit.converged}")
    names = ("alpha", "beta", "delta", "theta")
    vals = (e.alpha, e.beta, e.delta, e.theta)
    ses = fit.std_errors if fit.std_errors is not None else [float("nan")] * 4
    print(f"{'parameter':>10} {'estimate':>14} {'std error':>14}")
    for n_, v, s in zip(names, vals, ses):
        se_txt = f"{s:.6g}" if s == s else "-"
        print(f"{n_:>10} {v:>14.6g} {se_txt:>14}")
    print(f"loglik = {fit.loglik:.6f}   AIC = {fit.aic:.2f}   "
          f"CAIC = {fit.caic:.2f}   BIC = {fit.bic:.2f}")


def cmd_fit(args) -> int:
    times, status, _, _ = ingest_csv(args.input)
    if status is not None and (status == 0).any():
        raise CliError(
            "dataset contains censored rows; 'fit' handles complete samples "
            "only, use 'regress'", EXIT_PARSE)
    fit = fit_mle(times, submodel=args.submodel, method=args.method)
    _print_fit(fit)
    _write_report(args.output, _fit_payload(fit))
    return EXIT_OK if fit.converged else EXIT_NOCONV


def cmd_regress(args) -> int:
    times, status, cov, names = ingest_csv(args.input)
    if status is None:
        status = np.ones(times.size, dtype=np.uint8)
    ds = SurvivalDataset(times=times, status=status, covariates=cov)
    fit = fit_regression(ds, submodel=args.submodel, method=args.method)
    c = fit.coefficients
    print(f"submodel: {fit.submodel.value}   n = {fit.n_obs} "
          f"({ds.n_failures} failures)   converged = {fit.converged}")
    print(f"{'term':>14} {'estimate':>14} {'std error':>12} {'p-value':>10}")
    rows = [("alpha", c.alpha), ("beta", c.beta)]
    rows += [(f"lambda1[{j}] ({names[j]})", c.lambda1[j]) for j in range(len(names))]
    rows += [(f"lambda2[{j}] ({names[j]})", c.lambda2[j]) for j in range(len(names))]
    for label, val in rows:
        key = label.split(" ")[0]
        se = fit.std_errors.get(key) if fit.std_errors else None
        pv = fit.p_values.get(key) if fit.p_values else None
        print(f"{label:>24} {val:>14.6g} "
              f"{se if se is None else f'{se:.4g}':>12} "
              f"{pv if pv is None else f'{pv:.4g}':>10}")
    print(f"loglik = {fit.loglik:.6f}   AIC = {fit.aic:.2f}   "
          f"CAIC = {fit.caic:.2f}   BIC = {fit.bic:.2f}")
    _write_report(args.output, _regfit_payload(fit, names))
    return EXIT_OK if fit.converged else EXIT_NOCONV


def cmd_sample(args) -> int:
    p = GollgrParams(args.alpha, args.beta, args.delta, args.theta)
    x = draw_sample(args.n, args.seed, p)
    lines = "x\n" + "\n".join(repr(v) for v in x.tolist()) + "\n"
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(lines)
        except OSError as e:
            raise CliError(f"cannot write {args.output}: {e}", EXIT_IO)
    else:
        sys.stdout.write(lines)
    return EXIT_OK


def _truth_from_config(cfg: dict):
    t = cfg["truth"]
    if cfg.get("study_kind", "distribution") == "distribution":
        return GollgrParams(t["alpha"], t["beta"], t["delta"], t["theta"])
    return RegressionCoefficients(lambda1=t["lambda1"], lambda2=t["lambda2"],
                                  alpha=t["alpha"], beta=t["beta"])


def cmd_simulate(args) -> int:
    try:
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as e:
        raise CliError(f"cannot open {args.config}: {e}", EXIT_IO)
    except json.JSONDecodeError as e:
        raise CliError(f"{args.config}: invalid JSON: {e}", EXIT_PARSE)
    try:
        kind = raw.get("study_kind", "distribution")
        cfg = StudyConfig(
            truth=_truth_from_config(raw),
            sample_sizes=tuple(raw["sample_sizes"]),
            replicates=int(raw["replicates"]),
            seed=int(raw.get("seed", args.seed)),
            study_kind=kind,
            max_cycles=int(raw.get("max_cycles", 20)),
            cycle_tol=float(raw.get("cycle_tol", 5e-4)),
            workers=int(raw.get("workers", args.workers)),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise CliError(f"{args.config}: bad study config: {e}", EXIT_PARSE)
    run = run_distribution_study if kind == "distribution" else run_regression_study
    report = run(cfg)
    print(report.table())
    print(f"runtime: {report.runtime_seconds:.1f}s")
    payload = {"command": "simulate", "version": __version__, **report.to_dict()}
    # runtime varies between runs; keep the report file deterministic
    payload.pop("runtime_seconds", None)
    _write_report(args.output, payload)
    return EXIT_OK


def cmd_residuals(args) -> int:
    try:
        with open(args.fit, encoding="utf-8") as fh:
            rep = json.load(fh)
    except OSError as e:
        raise CliError(f"cannot open {args.fit}: {e}", EXIT_IO)
    except json.JSONDecodeError as e:
        raise CliError(f"{args.fit}: invalid JSON: {e}", EXIT_PARSE)
    times, status, cov, _ = ingest_csv(args.input)
    if status is None:
        status = np.ones(times.size, dtype=np.uint8)
    ds = SurvivalDataset(times=times, status=status, covariates=cov)
    if rep.get("command") == "regress":
        coefs = rep["coefficients"]
        c = RegressionCoefficients(lambda1=coefs["lambda1"], lambda2=coefs["lambda2"],
                                   alpha=coefs["alpha"], beta=coefs["beta"])
        if cov.shape[1] != c.lambda1.shape[0]:
            raise CliError(
                f"fit report has {c.lambda1.shape[0]} coefficients per link but "
                f"the dataset provides {cov.shape[1]} covariate columns", EXIT_PARSE)
    elif rep.get("command") == "fit":
        e = rep["estimates"]
        c = RegressionCoefficients(
            lambda1=[math.log(e["theta"])] + [0.0] * (cov.shape[1] - 1),
            lambda2=[math.log(e["delta"] + 1.0)] + [0.0] * (cov.shape[1] - 1),
            alpha=e["alpha"], beta=e["beta"])
    else:
        raise CliError(f"{args.fit}: not a fit or regress report", EXIT_PARSE)
    if not rep.get("converged", False):
        raise CliError("fit report is not converged; refusing residuals",
                       EXIT_NOCONV)
    stub = RegressionFit(
        coefficients=c, std_errors=None, p_values=None,
        loglik=rep["loglik"], aic=rep["aic"], bic=rep["bic"], caic=rep["caic"],
        converged=True, n_obs=ds.n_obs, submodel=Submodel(rep["submodel"]))
    qr = quantile_residuals(ds, stub)
    summary = {
        "command": "residuals",
        "version": __version__,
        "n": int(qr.size),
        "mean": float(np.mean(qr)),
        "variance": float(np.var(qr)),
        "min": float(np.min(qr)),
        "max": float(np.max(qr)),
        "frac_beyond_3": float(np.mean(np.abs(qr) > 3.0)),
        "residuals": qr.tolist(),
    }
    print(f"n = {summary['n']}  mean = {summary['mean']:.4f}  "
          f"variance = {summary['variance']:.4f}  "
          f"|qr|>3: {100 * summary['frac_beyond_3']:.2f}%")
    _write_report(args.output, summary)
    return EXIT_OK


def cmd_compare(args) -> int:
    times, status, _, _ = ingest_csv(args.input)
    if status is not None and (status == 0).any():
        raise CliError("compare handles complete samples only", EXIT_PARSE)
    fits = {}
    for sub in (Submodel.GOLLGR, Submodel.OLLGR, Submodel.EGR, Submodel.GR):
        fits[sub] = fit_mle(times, submodel=sub, method=args.method)
    print(f"{'model':>8} {'alpha':>10} {'beta':>10} {'delta':>12} {'theta':>12} "
          f"{'AIC':>10} {'CAIC':>10} {'BIC':>10}")
    for sub, f in fits.items():
        e = f.estimates
        print(f"{sub.value:>8} {e.alpha:>10.4g} {e.beta:>10.4g} {e.delta:>12.6g} "
              f"{e.theta:>12.6g} {f.aic:>10.2f} {f.caic:>10.2f} {f.bic:>10.2f}")
    full = fits[Submodel.GOLLGR]
    tests = {}
    print(f"\n{'comparison':>20} {'hypotheses':>32} {'LR stat':>10} {'df':>4} {'p-value':>12}")
    for sub in (Submodel.OLLGR, Submodel.EGR, Submodel.GR):
        t = lr_test(full, fits[sub])
        tests[sub.value] = {"statistic": t.statistic, "df": t.df,
                            "p_value": t.p_value, "hypotheses": t.hypotheses}
        print(f"{'gollgr vs ' + sub.value:>20} {t.hypotheses:>32} "
              f"{t.statistic:>10.4f} {t.df:>4} {t.p_value:>12.6g}")
    ranked = sorted(fits.items(), key=lambda kv: kv[1].aic)
    best = ranked[0][0].value
    print(f"\nbest model by AIC: {best}")
    payload = {
        "command": "compare",
        "version": __version__,
        "fits": {sub.value: _fit_payload(f) for sub, f in fits.items()},
        "lr_tests": tests,
        "best_by_aic": best,
    }
    _write_report(args.output, payload)
    if not all(f.converged for f in fits.values()):
        return EXIT_NOCONV
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gollgr",
        description="Four-parameter extended Rayleigh lifetime models: "
                    "fitting, sampling, regression and simulation studies.")
    ap.add_argument("--version", action="version", version=__version__)
    sp = ap.add_subparsers(dest="command", required=True)

    def add_common(p, output=True):
        if output:
            p.add_argument("--output", help="JSON report path")

    p = sp.add_parser("fit", help="fit a complete (uncensored) sample")
    p.add_argument("--input", required=True, help="CSV with a 'time' column")
    p.add_argument("--submodel", default="gollgr",
                   choices=["gollgr", "ollgr", "egr", "gr"])
    p.add_argument("--method", default="simplex", choices=["simplex", "coordinate"])
    add_common(p)
    p.set_defaults(func=cmd_fit)

    p = sp.add_parser("regress", help="fit the censored survival regression")
    p.add_argument("--input", required=True,
                   help="CSV with 'time', optional 'status', covariate columns")
    p.add_argument("--submodel", default="gollgr",
                   choices=["gollgr", "ollgr", "egr", "gr"])
    p.add_argument("--method", default="simplex", choices=["simplex", "coordinate"])
    add_common(p)
    p.set_defaults(func=cmd_regress)

    p = sp.add_parser("sample", help="draw variates by quantile inversion")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", help="CSV path (stdout when omitted)")
    p.set_defaults(func=cmd_sample)

    p = sp.add_parser("simulate", help="run a Monte Carlo study from a config file")
    p.add_argument("--config", required=True, help="JSON study configuration")
    p.add_argument("--seed", type=int, default=0, help="seed when absent from config")
    p.add_argument("--workers", type=int, default=1)
    add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sp.add_parser("residuals", help="quantile residuals from a saved fit")
    p.add_argument("--fit", required=True, help="JSON report from fit/regress")
    p.add_argument("--input", required=True, help="dataset CSV")
    add_common(p)
    p.set_defaults(func=cmd_residuals)

    p = sp.add_parser("compare", help="fit all nested submodels and test them")
    p.add_argument("--input", required=True, help="CSV with a 'time' column")
    p.add_argument("--method", default="simplex", choices=["simplex", "coordinate"])
    add_common(p)
    p.set_defaults(func=cmd_compare)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
