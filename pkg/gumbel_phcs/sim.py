"""Licensed under The MIT License (MIT) - Copyright (c) 2023-present the gumbel-phcs authors. See LICENSE"""

from __future__ import annotations

import logging
import math
from collections.abc import Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import pandas as pd
from typing_extensions import Literal, Self

from .bayes import (
    SIMULATION_PRIOR,
    GammaPriorPair,
    LossFunction,
    McmcConfig,
    bayes_estimates,
    proposal_from_mle,
    run_mh,
)
from .censoring import CensoringPlan, format_removals, generate, parse_removals
from .enums import Estimator, IntervalMethod, SchemeKind
from .errors import ConfigError, DomainError, EstimationError, EvaluationError, InvalidPlan
from .intervals import IntervalEstimate, aci, bootstrap_intervals, hpd
from .mle import fit_mle
from .models import Params
from .mps import fit_mps
from .utils import child_seeds

__all__ = (
    "PlanSpec",
    "SimulationConfig",
    "SimulationSummary",
    "default_grid",
    "run_campaign",
    "summary_to_table",
)

log = logging.getLogger(__name__)

ESTIMATOR_COLUMNS = ("n", "m", "T", "scheme", "estimator", "ab_alpha", "mse_alpha", "ab_beta", "mse_beta", "failures")
INTERVAL_COLUMNS = (
    "n",
    "m",
    "T",
    "scheme",
    "method",
    "length_alpha",
    "coverage_alpha",
    "length_beta",
    "coverage_beta",
    "failures",
)

_FAILURES = (DomainError, EvaluationError, EstimationError)


@dataclass(frozen=True, slots=True)
class PlanSpec:
    """A censoring plan of a campaign, given by a standard scheme or an explicit removal vector."""

    n: int
    m: int
    T: float
    scheme: SchemeKind | None = None
    removals: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if (self.scheme is None) == (self.removals is None):
            raise InvalidPlan("give exactly one of a scheme kind or a removal vector")
        self.plan()  # validates

    def plan(self) -> CensoringPlan:
        if self.scheme is not None:
            return CensoringPlan.from_scheme(self.scheme, self.n, self.m, self.T)
        assert self.removals is not None
        return CensoringPlan(self.n, self.m, self.T, self.removals)

    @property
    def scheme_label(self) -> str:
        if self.scheme is not None:
            return str(int(self.scheme))
        assert self.removals is not None
        return f"({format_removals(self.removals)})"


def default_grid(T: float = 1.5) -> tuple[PlanSpec, ...]:
    """Every ``n`` in ``(30, 40)``, ``m`` in ``(10, 15)`` and the three standard schemes at threshold ``T``."""
    return tuple(PlanSpec(n, m, T, scheme=kind) for n in (30, 40) for m in (10, 15) for kind in SchemeKind)


@dataclass(frozen=True)
class SimulationConfig:
    """A Monte Carlo campaign."""

    truth: Params = Params(1.5, 0.75)
    plans: tuple[PlanSpec, ...] = field(default_factory=default_grid)
    replications: int = 2000
    estimators: tuple[Estimator, ...] = tuple(Estimator)
    linex_p: tuple[float, ...] = (-0.25, 0.25)
    gelf_q: tuple[float, ...] = (-0.25, 0.25)
    intervals: tuple[IntervalMethod, ...] = (IntervalMethod.ACI, IntervalMethod.HPD)
    prior: GammaPriorPair = SIMULATION_PRIOR
    chain_length: int = 5000
    burn_in: int | None = None
    bootstrap_B: int = 200
    gamma: float = 0.05
    master_seed: int = 0

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise ConfigError(f"replications must be at least 1, got {self.replications}")
        if not self.plans:
            raise ConfigError("a campaign needs at least one plan")
        if not 0 < self.gamma < 1:
            raise ConfigError(f"gamma must lie in (0, 1), got {self.gamma}")
        object.__setattr__(self, "estimators", tuple(Estimator(e) for e in self.estimators))
        object.__setattr__(self, "intervals", tuple(IntervalMethod(i) for i in self.intervals))

    @property
    def losses(self) -> tuple[LossFunction, ...]:
        losses: list[LossFunction] = []
        if Estimator.SELF in self.estimators:
            losses.append(LossFunction.squared_error())
        if Estimator.LINEX in self.estimators:
            losses += [LossFunction.linex(p) for p in self.linex_p]
        if Estimator.GELF in self.estimators:
            losses += [LossFunction.general_entropy(q) for q in self.gelf_q]
        return tuple(losses)

    @property
    def needs_chain(self) -> bool:
        return bool(self.losses) or IntervalMethod.HPD in self.intervals

    @property
    def estimator_labels(self) -> tuple[str, ...]:
        labels = [e.value for e in self.estimators if e in (Estimator.MLE, Estimator.MPS)]
        return (*labels, *(loss.label for loss in self.losses))

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> Self:
        """Build a campaign from the ``[simulate]`` table of a config file.

        ``plans`` is a list of tables with ``n``, ``m``, ``T`` and either ``scheme`` or ``removals``
        (run-length text such as ``"0*39,50"``). Without it the default grid at ``T`` is used.

        Raises
        ------
        ConfigError
            Unknown keys or invalid values.
        """
        options = dict(mapping)
        known = {f for f in cls.__dataclass_fields__} | {"T"}
        unknown = set(options) - known
        if unknown:
            raise ConfigError(f"unknown simulate keys: {', '.join(sorted(unknown))}")
        try:
            T = float(options.pop("T", 1.5))
            if "truth" in options:
                options["truth"] = Params(*map(float, options["truth"]))
            if "plans" in options:
                options["plans"] = tuple(_plan_from_mapping(plan) for plan in options["plans"])
            else:
                options["plans"] = default_grid(T)
            if "prior" in options:
                options["prior"] = GammaPriorPair(*map(float, options["prior"]))
            for key in ("estimators", "intervals", "linex_p", "gelf_q"):
                if key in options:
                    options[key] = tuple(options[key])
            return cls(**options)
        except (DomainError, InvalidPlan, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid simulate config: {exc}") from exc


def _plan_from_mapping(plan: Mapping[str, Any]) -> PlanSpec:
    removals = plan.get("removals")
    if isinstance(removals, str):
        removals = parse_removals(removals)
    elif removals is not None:
        removals = tuple(int(r) for r in removals)
    scheme = SchemeKind(int(plan["scheme"])) if "scheme" in plan else None
    return PlanSpec(int(plan["n"]), int(plan["m"]), float(plan.get("T", math.inf)), scheme, removals)


@dataclass(frozen=True, eq=False)
class SimulationSummary:
    """Aggregated campaign results.

    ``estimators`` holds one row per plan and estimator with the mean absolute bias and the mean squared
    error of both parameters, ``intervals`` one row per plan and interval method with the average
    length and the coverage of the true value. ``failures`` counts the excluded replicates.
    """

    estimators: pd.DataFrame
    intervals: pd.DataFrame
    config: SimulationConfig | None = field(default=None, repr=False)

    @classmethod
    def empty(cls) -> Self:
        return cls(pd.DataFrame(columns=list(ESTIMATOR_COLUMNS)), pd.DataFrame(columns=list(INTERVAL_COLUMNS)))


@dataclass(slots=True)
class _Replicate:
    estimates: dict[str, tuple[float, float] | None] = field(default_factory=dict)
    intervals: dict[IntervalMethod, tuple[IntervalEstimate, IntervalEstimate] | None] = field(default_factory=dict)


def _replicate(cfg: SimulationConfig, plan_index: int, index: int) -> _Replicate:
    plan = cfg.plans[plan_index].plan()
    sample_seed, chain_seed, bootstrap_seed = child_seeds(cfg.master_seed, plan_index, index, count=3)
    result = _Replicate()
    try:
        sample = generate(cfg.truth, plan, sample_seed)
    except _FAILURES as exc:
        log.warning("Replicate %d of plan %s could not be generated: %s", index, plan.label, exc)
        return result

    mle = None
    try:
        mle = fit_mle(sample)
    except _FAILURES as exc:
        log.debug("MLE failed on replicate %d: %s", index, exc)
    mle_ok = mle is not None and mle.converged
    if Estimator.MLE in cfg.estimators:
        result.estimates["MLE"] = tuple(mle.estimate) if mle_ok else None
    if Estimator.MPS in cfg.estimators:
        try:
            mps = fit_mps(sample)
            result.estimates["MPS"] = tuple(mps.estimate) if mps.converged else None
        except _FAILURES:
            result.estimates["MPS"] = None

    chain = None
    burn_in = 0
    if cfg.needs_chain and mle_ok:
        try:
            sd_alpha, sd_beta = proposal_from_mle(mle)
            mcmc = McmcConfig(cfg.chain_length, cfg.burn_in, sd_alpha, sd_beta, chain_seed)
            chain = run_mh(sample, cfg.prior, mcmc, mle.estimate)
            burn_in = mcmc.resolved_burn_in
        except _FAILURES as exc:
            log.debug("MCMC failed on replicate %d: %s", index, exc)
    for loss in cfg.losses:
        result.estimates[loss.label] = None
    if chain is not None:
        for label, estimate in bayes_estimates(chain, cfg.losses, burn_in).items():
            result.estimates[label] = tuple(estimate)

    for method in cfg.intervals:
        result.intervals[method] = None
    try:
        if IntervalMethod.ACI in cfg.intervals and mle_ok:
            result.intervals[IntervalMethod.ACI] = aci(mle, cfg.gamma)
        if IntervalMethod.HPD in cfg.intervals and chain is not None:
            result.intervals[IntervalMethod.HPD] = hpd(chain, cfg.gamma, burn_in)
    except _FAILURES as exc:
        log.debug("Interval failed on replicate %d: %s", index, exc)
    bootstrap = {IntervalMethod.BootP, IntervalMethod.BootT} & set(cfg.intervals)
    if bootstrap and mle_ok:
        try:
            computed = bootstrap_intervals(sample, mle, cfg.bootstrap_B, cfg.gamma, seed=bootstrap_seed)
            for method in bootstrap:
                result.intervals[method] = computed[method]
        except _FAILURES as exc:
            log.debug("Bootstrap failed on replicate %d: %s", index, exc)
    return result


def _run_task(task: tuple[SimulationConfig, int, int]) -> _Replicate:
    return _replicate(*task)


def _estimator_row(spec: PlanSpec, label: str, truth: Params, values: Sequence[tuple[float, float] | None]) -> dict:
    found = np.array([v for v in values if v is not None], dtype=float).reshape(-1, 2)
    errors = found - truth.as_array()
    ab = np.abs(errors).mean(axis=0) if len(found) else np.full(2, math.nan)
    mse = (errors**2).mean(axis=0) if len(found) else np.full(2, math.nan)
    return {
        "n": spec.n,
        "m": spec.m,
        "T": spec.T,
        "scheme": spec.scheme_label,
        "estimator": label,
        "ab_alpha": ab[0],
        "mse_alpha": mse[0],
        "ab_beta": ab[1],
        "mse_beta": mse[1],
        "failures": len(values) - len(found),
    }


def _interval_row(
    spec: PlanSpec,
    method: IntervalMethod,
    truth: Params,
    values: Sequence[tuple[IntervalEstimate, IntervalEstimate] | None],
) -> dict:
    found = [v for v in values if v is not None]
    row: dict[str, Any] = {"n": spec.n, "m": spec.m, "T": spec.T, "scheme": spec.scheme_label, "method": method.value}
    for index, (name, true_value) in enumerate(zip(("alpha", "beta"), truth)):
        intervals = [pair[index] for pair in found]
        row[f"length_{name}"] = float(np.mean([i.length for i in intervals])) if intervals else math.nan
        row[f"coverage_{name}"] = float(np.mean([i.contains(true_value) for i in intervals])) if intervals else math.nan
    row["failures"] = len(values) - len(found)
    return row


def run_campaign(cfg: SimulationConfig, workers: int | None = None) -> SimulationSummary:
    """Run every replicate of every plan in ``cfg`` and aggregate them.

    Replicate ``r`` of plan ``k`` draws its sample, chain and bootstrap seeds from the children
    ``(k, r, 0..2)`` of ``cfg.master_seed``, so the summary does not depend on ``workers``.
    Failed estimates are excluded and counted per row.

    Parameters
    ----------
    workers
        Run replicates in a process pool of this size, in-process when ``None`` or 1.
    """
    tasks = [(cfg, plan_index, index) for plan_index in range(len(cfg.plans)) for index in range(cfg.replications)]
    log.info("Running %d replicates over %d plans", len(tasks), len(cfg.plans))
    if workers is not None and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        results = [_run_task(task) for task in tasks]

    estimator_rows: list[dict] = []
    interval_rows: list[dict] = []
    for plan_index, spec in enumerate(cfg.plans):
        replicates = results[plan_index * cfg.replications : (plan_index + 1) * cfg.replications]
        for label in cfg.estimator_labels:
            values = [replicate.estimates.get(label) for replicate in replicates]
            estimator_rows.append(_estimator_row(spec, label, cfg.truth, values))
        for method in cfg.intervals:
            pairs = [replicate.intervals.get(method) for replicate in replicates]
            interval_rows.append(_interval_row(spec, method, cfg.truth, pairs))

    summary = SimulationSummary(
        pd.DataFrame(estimator_rows, columns=list(ESTIMATOR_COLUMNS)),
        pd.DataFrame(interval_rows, columns=list(INTERVAL_COLUMNS)),
        cfg,
    )
    failed = int(summary.estimators["failures"].sum())
    if failed:
        log.warning("%d estimates failed and were excluded", failed)
    return summary


def summary_to_table(
    summary: SimulationSummary, kind: Literal["estimators", "intervals"] = "estimators", delimiter: str = ","
) -> str:
    """Render one of the summary frames as delimited text with a header line, numbers to 10 digits."""
    frame = summary.estimators if kind == "estimators" else summary.intervals
    return frame.to_csv(sep=delimiter, index=False, float_format="%.10g", lineterminator="\n")

