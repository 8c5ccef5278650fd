"""Licensed under The MIT License (MIT) - Copyright (c) 2023-present the gumbel-phcs authors. See LICENSE"""

from __future__ import annotations

import argparse
import json
import logging
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from .bayes import LossFunction, McmcConfig, PosteriorChain, bayes_estimates, proposal_from_mle, run_mh
from .censoring import AdaptiveCensoredSample, censor_real_data
from .config import RunConfig, load_config_file, resolve_config
from .datasets import ingest, load_covid
from .enums import ExitStatus, IntervalMethod, LossKind
from .errors import ConfigError, DataError, DomainError, EstimationError, EvaluationError, InvalidPlan
from .gof import compare_models, plot_data, write_tables
from .intervals import IntervalEstimate, aci, bootstrap_intervals, hpd
from .mle import FitReport, fit_mle, profile_loglik
from .mps import fit_mps
from .sim import SimulationConfig, run_campaign, summary_to_table
from .utils import FloatArray, child_seeds, round_sig

__all__ = (
    "build_parser",
    "dispatch",
    "format_summary",
    "main",
)

log = logging.getLogger(__name__)

Results = dict[str, Any]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML file whose keys mirror the flags")
    source = common.add_argument_group("data")
    source.add_argument("--input", type=Path, help="one value per line or comma separated")
    source.add_argument("--bundled-covid", action="store_true", default=None, help="use the bundled Covid-19 data")
    plan = common.add_argument_group("censoring plan")
    plan.add_argument("--n", type=int, help="units on test, the data size by default")
    plan.add_argument("--m", type=int, help="failures to observe")
    plan.add_argument("--T", type=float, help="threshold time")
    plan.add_argument("--scheme", type=int, choices=(1, 2, 3), help="standard removal scheme")
    plan.add_argument("--removals", help='explicit removals such as "0*39,50"')
    estimation = common.add_argument_group("estimation")
    estimation.add_argument("--seed", type=int)
    estimation.add_argument("--reps", type=int, help="simulation replications")
    estimation.add_argument("--loss", type=str.upper, choices=[kind.value for kind in LossKind])
    estimation.add_argument("--p", type=float, help="LINEX asymmetry")
    estimation.add_argument("--q", type=float, help="GELF shape")
    estimation.add_argument("--prior", help="gamma hyper-parameters a,b,c,d")
    estimation.add_argument("--chain", type=int, help="MCMC chain length")
    estimation.add_argument("--burn-in", type=int)
    estimation.add_argument("--gamma", type=float, help="1 - nominal coverage")
    estimation.add_argument("--boot", type=int, help="bootstrap replicates")
    estimation.add_argument("--raw-boot-t", action="store_true", default=None, help="report raw t quantiles")
    estimation.add_argument("--refit", action="store_true", default=None, help="refit the gof comparators")
    estimation.add_argument("--workers", type=int, help="simulation process pool size")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(
        prog="gumbel-phcs",
        description="Gumbel type-II inference under adaptive type-II progressive hybrid censoring",
    )
    commands = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name, summary in (
        ("fit", "maximum likelihood estimates with asymptotic intervals"),
        ("mps", "maximum product spacing estimates"),
        ("bayes", "Bayes estimates and HPD intervals by Metropolis-Hastings"),
        ("intervals", "asymptotic, bootstrap and HPD intervals"),
        ("gof", "goodness of fit against the comparator models"),
        ("simulate", "Monte Carlo campaign"),
        ("censor", "censor the data under a plan"),
        ("plotdata", "ECDF, QQ, boxplot, TTT and profile tables"),
    ):
        commands.add_parser(name, help=summary, parents=[common])
    return parser


def _interval(interval: IntervalEstimate) -> Results:
    return {
        "parameter": interval.parameter,
        "method": interval.method.value,
        "lower": interval.lower,
        "upper": interval.upper,
        "level": interval.level,
        "clamped": interval.clamped,
    }


def _fit(report: FitReport) -> Results:
    try:
        errors: list[float] | None = report.standard_errors().tolist()
    except EstimationError:
        errors = None
    return {
        "method": report.method.value,
        "alpha": report.estimate.alpha,
        "beta": report.estimate.beta,
        "objective": report.loglik,
        "iterations": report.iterations,
        "converged": report.converged,
        "standard_errors": errors,
    }


def _data(cfg: RunConfig) -> FloatArray:
    if cfg.bundled_covid:
        return load_covid()
    assert cfg.input is not None
    return ingest(cfg.input)


def _sample(cfg: RunConfig, data: FloatArray) -> AdaptiveCensoredSample:
    if not cfg.censored:
        return AdaptiveCensoredSample.complete(data)
    return censor_real_data(data, cfg.plan(len(data)), child_seeds(cfg.seed, 0)[0])


def _describe(sample: AdaptiveCensoredSample) -> Results:
    return {"n": sample.n, "m": sample.m, "T": sample.T, "j": sample.j, "removals": list(sample.effective_removals)}


def _converged_mle(sample: AdaptiveCensoredSample) -> FitReport:
    report = fit_mle(sample)
    if not report.converged:
        raise EstimationError(f"the MLE did not converge, score {report.score!r}")
    return report


def _losses(cfg: RunConfig) -> list[LossFunction]:
    losses = {
        LossKind.SELF: LossFunction.squared_error(),
        LossKind.LINEX: LossFunction.linex(cfg.p),
        LossKind.GELF: LossFunction.general_entropy(cfg.q),
    }
    return [losses[cfg.loss]] if cfg.loss is not None else list(losses.values())


def _chain(cfg: RunConfig, sample: AdaptiveCensoredSample, mle: FitReport) -> PosteriorChain:
    sd_alpha, sd_beta = proposal_from_mle(mle)
    mcmc = McmcConfig(cfg.chain, cfg.resolved_burn_in, sd_alpha, sd_beta, child_seeds(cfg.seed, 1)[0])
    chain = run_mh(sample, cfg.prior_pair, mcmc, mle.estimate)
    log.info("Chain of %d draws, acceptance rate %.3f", len(chain), chain.acceptance_rate)
    return chain


def run_fit(cfg: RunConfig) -> Results:
    sample = _sample(cfg, _data(cfg))
    report = _converged_mle(sample)
    return {
        "sample": _describe(sample),
        "fit": _fit(report),
        "aci": [_interval(i) for i in aci(report, cfg.gamma)],
    }


def run_mps(cfg: RunConfig) -> Results:
    sample = _sample(cfg, _data(cfg))
    report = fit_mps(sample)
    if not report.converged:
        raise EstimationError(f"the MPS fit did not converge, score {report.score!r}")
    return {"sample": _describe(sample), "fit": _fit(report)}


def run_bayes(cfg: RunConfig) -> Results:
    sample = _sample(cfg, _data(cfg))
    chain = _chain(cfg, sample, _converged_mle(sample))
    estimates = bayes_estimates(chain, _losses(cfg), cfg.resolved_burn_in)
    return {
        "sample": _describe(sample),
        "acceptance_rate": chain.acceptance_rate,
        "burn_in": cfg.resolved_burn_in,
        "estimates": {label: {"alpha": p.alpha, "beta": p.beta} for label, p in estimates.items()},
        "hpd": [_interval(i) for i in hpd(chain, cfg.gamma, cfg.resolved_burn_in)],
    }


def run_intervals(cfg: RunConfig) -> Results:
    sample = _sample(cfg, _data(cfg))
    mle = _converged_mle(sample)
    intervals: list[IntervalEstimate] = [*aci(mle, cfg.gamma)]
    bootstrap = bootstrap_intervals(
        sample, mle, cfg.boot, cfg.gamma, seed=child_seeds(cfg.seed, 2)[0], raw=cfg.raw_boot_t
    )
    intervals += [*bootstrap[IntervalMethod.BootP], *bootstrap[IntervalMethod.BootT]]
    intervals += hpd(_chain(cfg, sample, mle), cfg.gamma, cfg.resolved_burn_in)
    return {"sample": _describe(sample), "fit": _fit(mle), "intervals": [_interval(i) for i in intervals]}


def run_gof(cfg: RunConfig) -> Results:
    table = compare_models(_data(cfg), refit=cfg.refit, B=cfg.boot, seed=child_seeds(cfg.seed, 3)[0])
    write_tables({"gof": table}, cfg.out)
    return {"models": _records(table)}


def run_simulate(cfg: RunConfig) -> Results:
    options = dict(cfg.simulate)
    options.setdefault("master_seed", cfg.seed)
    options.setdefault("gamma", cfg.gamma)
    options.setdefault("chain_length", cfg.chain)
    options.setdefault("bootstrap_B", cfg.boot)
    if cfg.burn_in is not None:
        options.setdefault("burn_in", cfg.burn_in)
    if cfg.reps is not None:
        options["replications"] = cfg.reps
    if "plans" not in options and np.isfinite(cfg.T):
        options.setdefault("T", cfg.T)
    summary = run_campaign(SimulationConfig.from_mapping(options), workers=cfg.workers)
    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / "estimators.csv").write_text(summary_to_table(summary, "estimators"), encoding="utf-8")
    (cfg.out / "intervals.csv").write_text(summary_to_table(summary, "intervals"), encoding="utf-8")
    return {"estimators": _records(summary.estimators), "intervals": _records(summary.intervals)}


def run_censor(cfg: RunConfig) -> Results:
    if not cfg.censored:
        raise ConfigError("censor needs --scheme or --removals")
    sample = _sample(cfg, _data(cfg))
    table = pd.DataFrame(
        {"i": np.arange(1, sample.m + 1), "time": sample.times, "removals": list(sample.effective_removals)}
    )
    write_tables({"censored": table}, cfg.out)
    return {"sample": _describe(sample), "times": sample.times.tolist()}


def run_plotdata(cfg: RunConfig) -> Results:
    data = _data(cfg)
    mle = _converged_mle(AdaptiveCensoredSample.complete(data))
    alpha, beta = mle.estimate
    sample = _sample(cfg, data)
    profile = profile_loglik(sample, np.linspace(0.5, 1.5, 41) * alpha, np.linspace(0.5, 1.5, 41) * beta)
    tables = plot_data(data, mle.estimate).tables()
    tables |= {"profile_alpha": profile.alpha, "profile_beta": profile.beta}
    paths = write_tables(tables, cfg.out)
    return {"fit": _fit(mle), "tables": sorted(path.name for path in paths)}


def _records(frame: pd.DataFrame) -> list[Results]:
    return [{str(key): value for key, value in row.items()} for row in frame.to_dict(orient="records")]


HANDLERS: dict[str, Callable[[RunConfig], Results]] = {
    "fit": run_fit,
    "mps": run_mps,
    "bayes": run_bayes,
    "intervals": run_intervals,
    "gof": run_gof,
    "simulate": run_simulate,
    "censor": run_censor,
    "plotdata": run_plotdata,
}


def _exit_status(exc: BaseException) -> ExitStatus:
    if isinstance(exc, (ConfigError, InvalidPlan, DomainError)):
        return ExitStatus.Config
    if isinstance(exc, (EstimationError, EvaluationError)):
        return ExitStatus.Estimation
    if isinstance(exc, (DataError, OSError)):
        return ExitStatus.IO
    return ExitStatus.Unexpected


def _text(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, list) and len(value) > 10:
        return f"{len(value)} values from {_text(value[0])} to {_text(value[-1])}"
    return str(value)


def format_summary(command: str, results: Results) -> str:
    """A plain-text summary of ``results``, one section per table and one line per scalar."""
    lines = [f"gumbel-phcs {command}"]
    for key, value in results.items():
        if isinstance(value, list) and value and all(isinstance(row, dict) for row in value):
            frame = pd.DataFrame(value)
        elif isinstance(value, dict) and value and all(isinstance(row, dict) for row in value.values()):
            frame = pd.DataFrame.from_dict(value, orient="index")
        elif isinstance(value, dict):
            lines += ["", f"{key}:", *(f"  {name}: {_text(item)}" for name, item in value.items())]
            continue
        else:
            lines.append(f"{key}: {_text(value)}")
            continue
        lines += ["", f"{key}:", frame.to_string(float_format=_text, index=isinstance(value, dict))]
    return "\n".join(lines) + "\n"


def write_report(cfg: RunConfig, results: Results) -> Path:
    """Write ``<out>/<command>.json`` holding the resolved config and the results, numbers to 10 digits."""
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / f"{cfg.command}.json"
    report = round_sig({"command": cfg.command, "config": cfg.as_dict(), "results": results})
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def dispatch(cfg: RunConfig) -> ExitStatus:
    """Run the command of ``cfg``, write its JSON report and print the text summary, also kept as
    ``<out>/<command>.txt``.

    Library errors are logged and mapped onto the exit status, configuration 2, estimation 3 and
    input/output 4.
    """
    try:
        results = HANDLERS[cfg.command](cfg)
        path = write_report(cfg, results)
        summary = format_summary(cfg.command, results)
        path.with_suffix(".txt").write_text(summary, encoding="utf-8")
    except Exception as exc:
        status = _exit_status(exc)
        if status is ExitStatus.Unexpected:
            log.exception("%s failed unexpectedly", cfg.command)
        else:
            log.error("%s failed: %s", cfg.command, exc)
        return status
    print(summary, end="")
    log.info("%s: wrote %s", cfg.command, path)
    return ExitStatus.Success


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=max(logging.DEBUG, logging.WARNING - 10 * args.verbose),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    flags = {key: value for key, value in vars(args).items() if key not in ("command", "config", "verbose")}
    try:
        file_values = load_config_file(args.config) if args.config is not None else None
        cfg = resolve_config(args.command, flags, file_values)
    except Exception as exc:
        status = _exit_status(exc)
        log.error("invalid configuration: %s", exc)
        return int(status if status is not ExitStatus.Unexpected else ExitStatus.Config)
    return int(dispatch(cfg))
