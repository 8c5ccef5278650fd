"""Licensed under The MIT License (MIT) - Copyright (c) 2023-present the gumbel-phcs authors. See LICENSE"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from scipy.stats import norm

from .bayes import PosteriorChain
from .censoring import AdaptiveCensoredSample, generate
from .enums import Estimator, IntervalMethod
from .errors import DomainError, EstimationError, EvaluationError
from .mle import FitReport, fit_mle
from .mps import fit_mps
from .utils import FloatArray, SeedLike, child_seeds, rank_index

__all__ = (
    "IntervalEstimate",
    "BootstrapReplicates",
    "normal_interval",
    "aci",
    "percentile_bounds",
    "studentized_bounds",
    "bootstrap_replicates",
    "boot_p",
    "boot_t",
    "bootstrap_intervals",
    "hpd_bounds",
    "hpd",
)

log = logging.getLogger(__name__)

PARAMETERS = ("alpha", "beta")
MIN_BOOTSTRAP = 100
MIN_POSTERIOR_DRAWS = 100
MAX_FAILURE_SHARE = 0.1


@dataclass(frozen=True, slots=True)
class IntervalEstimate:
    """A confidence or credible interval for one parameter."""

    lower: float
    upper: float
    level: float
    """The nominal coverage ``1 - gamma``."""
    method: IntervalMethod
    parameter: str = "alpha"
    clamped: bool = False
    """Whether :attr:`lower` was raised to 0 because the parameter is positive."""

    def __post_init__(self) -> None:
        if not self.lower <= self.upper:
            raise DomainError(f"interval bounds are out of order: ({self.lower}, {self.upper})")
        if not 0 < self.level < 1:
            raise DomainError(f"level must lie in (0, 1), got {self.level}")

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def __repr__(self) -> str:
        clamped = " clamped" if self.clamped else ""
        return (
            f"<IntervalEstimate {self.method.value} {self.parameter}=({self.lower:.6g}, {self.upper:.6g}) "
            f"level={self.level:g}{clamped}>"
        )


def _check_gamma(gamma: float) -> None:
    if not 0 < gamma < 1:
        raise DomainError(f"gamma must lie in (0, 1), got {gamma}")


def _positive(
    lower: float, upper: float, gamma: float, method: IntervalMethod, parameter: str
) -> IntervalEstimate:
    clamped = lower < 0
    if clamped:
        log.debug("%s interval for %s clamped at 0 from %g", method.value, parameter, lower)
        lower = 0.0
    return IntervalEstimate(lower, max(upper, lower), 1 - gamma, method, parameter, clamped)


def normal_interval(
    estimate: float,
    se: float,
    gamma: float,
    *,
    parameter: str = "alpha",
    method: IntervalMethod = IntervalMethod.ACI,
) -> IntervalEstimate:
    """``estimate -/+ z * se`` with ``z`` the upper ``gamma / 2`` standard normal quantile, clamped at 0."""
    _check_gamma(gamma)
    if not se >= 0:
        raise DomainError(f"standard error must be nonnegative, got {se}")
    z = float(norm.ppf(1 - gamma / 2))
    return _positive(estimate - z * se, estimate + z * se, gamma, method, parameter)


def aci(fit: FitReport, gamma: float = 0.05) -> tuple[IntervalEstimate, IntervalEstimate]:
    """Asymptotic normal intervals from the inverse observed information of ``fit``.

    Raises
    ------
    EstimationError
        The fit did not converge or its information matrix is singular.
    """
    if not fit.converged:
        raise EstimationError("asymptotic intervals need a converged fit")
    errors = fit.standard_errors()
    alpha, beta = (
        normal_interval(float(value), float(se), gamma, parameter=name)
        for name, value, se in zip(PARAMETERS, fit.estimate, errors)
    )
    return alpha, beta


def percentile_bounds(values: npt.ArrayLike, gamma: float) -> tuple[float, float]:
    """The order statistics of rank ``ceil(B * gamma / 2)`` and ``ceil(B * (1 - gamma / 2))``."""
    _check_gamma(gamma)
    ordered = np.sort(np.asarray(values, dtype=float))
    if len(ordered) == 0:
        raise DomainError("no values to take percentiles of")
    count = len(ordered)
    return float(ordered[rank_index(count, gamma / 2)]), float(ordered[rank_index(count, 1 - gamma / 2)])


def studentized_bounds(estimate: float, se: float, t_values: npt.ArrayLike, gamma: float) -> tuple[float, float]:
    """Invert the studentized statistics, ``(estimate - t_upper * se, estimate - t_lower * se)``."""
    t_lower, t_upper = percentile_bounds(t_values, gamma)
    return estimate - t_upper * se, estimate - t_lower * se


@dataclass(frozen=True, eq=False)
class BootstrapReplicates:
    """The refits of a parametric bootstrap."""

    estimates: FloatArray
    """Shape ``(k, 2)``, the refitted ``(alpha, beta)``."""
    standard_errors: FloatArray
    """Shape ``(k, 2)``, NaN where a refit has no usable information matrix."""
    failures: int
    """How many of the requested replicates could not be refitted."""


def bootstrap_replicates(
    s: AdaptiveCensoredSample, fit: FitReport, B: int = 1000, *, seed: SeedLike = 0
) -> BootstrapReplicates:
    """Draw ``B`` samples at the fitted parameters under the plan of ``s`` and refit each.

    Refits use the estimator of ``fit`` and start from its estimate. Replicate ``b`` is drawn with the
    ``b``-th child of ``seed``.

    Raises
    ------
    DomainError
        ``B`` is below 100.
    EstimationError
        More than a tenth of the refits failed.
    """
    if B < MIN_BOOTSTRAP:
        raise DomainError(f"the bootstrap needs B >= {MIN_BOOTSTRAP}, got {B}")
    refit = fit_mps if fit.method is Estimator.MPS else fit_mle

    estimates: list[tuple[float, float]] = []
    errors: list[tuple[float, float]] = []
    failures = 0
    for index, child in enumerate(child_seeds(seed, count=B)):
        try:
            replicate = refit(generate(fit.estimate, s.plan, child), init=fit.estimate)
        except (DomainError, EvaluationError, EstimationError) as exc:
            log.debug("Bootstrap replicate %d failed: %s", index, exc)
            failures += 1
            continue
        if not replicate.converged:
            failures += 1
            continue
        try:
            se = replicate.standard_errors()
        except EstimationError:
            se = np.full(2, math.nan)
        estimates.append(tuple(replicate.estimate))
        errors.append(tuple(se))

    if failures:
        log.warning("Skipped %d of %d bootstrap refits", failures, B)
    if failures > MAX_FAILURE_SHARE * B:
        raise EstimationError(f"{failures} of {B} bootstrap refits failed")
    return BootstrapReplicates(np.array(estimates).reshape(-1, 2), np.array(errors).reshape(-1, 2), failures)


def _percentile_intervals(replicates: BootstrapReplicates, gamma: float) -> tuple[IntervalEstimate, IntervalEstimate]:
    alpha, beta = (
        _positive(*percentile_bounds(replicates.estimates[:, index], gamma), gamma, IntervalMethod.BootP, name)
        for index, name in enumerate(PARAMETERS)
    )
    return alpha, beta


def _studentized_intervals(
    fit: FitReport, replicates: BootstrapReplicates, gamma: float, raw: bool
) -> tuple[IntervalEstimate, IntervalEstimate]:
    errors = fit.standard_errors()
    intervals: list[IntervalEstimate] = []
    for index, name in enumerate(PARAMETERS):
        usable = np.isfinite(replicates.standard_errors[:, index]) & (replicates.standard_errors[:, index] > 0)
        if not np.any(usable):
            raise EstimationError(f"no bootstrap refit has a usable standard error for {name}")
        estimate = float(fit.estimate.as_array()[index])
        t_values = (replicates.estimates[usable, index] - estimate) / replicates.standard_errors[usable, index]
        if raw:
            lower, upper = percentile_bounds(t_values, gamma)
            intervals.append(IntervalEstimate(lower, upper, 1 - gamma, IntervalMethod.BootT, name))
        else:
            bounds = studentized_bounds(estimate, float(errors[index]), t_values, gamma)
            intervals.append(_positive(*bounds, gamma, IntervalMethod.BootT, name))
    alpha, beta = intervals
    return alpha, beta


def boot_p(
    s: AdaptiveCensoredSample, fit: FitReport, B: int = 1000, gamma: float = 0.05, *, seed: SeedLike = 0
) -> tuple[IntervalEstimate, IntervalEstimate]:
    """Percentile bootstrap intervals, see :func:`bootstrap_replicates` for the resampling."""
    _check_gamma(gamma)
    return _percentile_intervals(bootstrap_replicates(s, fit, B, seed=seed), gamma)


def boot_t(
    s: AdaptiveCensoredSample,
    fit: FitReport,
    B: int = 1000,
    gamma: float = 0.05,
    *,
    seed: SeedLike = 0,
    raw: bool = False,
) -> tuple[IntervalEstimate, IntervalEstimate]:
    """Bootstrap-t intervals.

    Every refit gives ``t = (theta_b - theta) / se_b`` with ``se_b`` from its own observed information and
    the interval is ``(theta - t_upper * se, theta - t_lower * se)`` with ``se`` from ``fit``.

    Parameters
    ----------
    raw
        Report the quantiles of ``t`` themselves as the bounds, unclamped.
    """
    _check_gamma(gamma)
    return _studentized_intervals(fit, bootstrap_replicates(s, fit, B, seed=seed), gamma, raw)


def bootstrap_intervals(
    s: AdaptiveCensoredSample,
    fit: FitReport,
    B: int = 1000,
    gamma: float = 0.05,
    *,
    seed: SeedLike = 0,
    raw: bool = False,
) -> dict[IntervalMethod, tuple[IntervalEstimate, IntervalEstimate]]:
    """Boot-p and boot-t intervals from a single set of bootstrap refits."""
    _check_gamma(gamma)
    replicates = bootstrap_replicates(s, fit, B, seed=seed)
    return {
        IntervalMethod.BootP: _percentile_intervals(replicates, gamma),
        IntervalMethod.BootT: _studentized_intervals(fit, replicates, gamma, raw),
    }


def hpd_bounds(draws: npt.ArrayLike, gamma: float) -> tuple[float, float]:
    """The shortest window holding a ``1 - gamma`` share of the sorted draws.

    Among ``k = 1, ..., floor(gamma * M)`` the window ``(theta_(k), theta_(k + floor((1 - gamma) * M)))``
    of least width wins, the smallest ``k`` on ties.

    Raises
    ------
    EstimationError
        Fewer than 100 draws.
    """
    _check_gamma(gamma)
    ordered = np.sort(np.asarray(draws, dtype=float))
    size = len(ordered)
    if size < MIN_POSTERIOR_DRAWS:
        raise EstimationError(f"an HPD interval needs at least {MIN_POSTERIOR_DRAWS} draws, got {size}")
    span = min(math.floor((1 - gamma) * size + 1e-9), size - 1)
    candidates = max(1, min(math.floor(gamma * size + 1e-9), size - span))
    widths = ordered[span : span + candidates] - ordered[:candidates]
    k = int(np.argmin(widths))
    return float(ordered[k]), float(ordered[k + span])


def hpd(chain: PosteriorChain, gamma: float = 0.05, burn_in: int = 0) -> tuple[IntervalEstimate, IntervalEstimate]:
    """Highest posterior density intervals from the draws of ``chain`` after ``burn_in``."""
    alpha, beta = (
        IntervalEstimate(*hpd_bounds(chain.draws(name, burn_in), gamma), 1 - gamma, IntervalMethod.HPD, name)
        for name in PARAMETERS
    )
    return alpha, beta
