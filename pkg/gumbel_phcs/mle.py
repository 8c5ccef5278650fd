"""Licensed under The MIT License (MIT) - Copyright (c) 2023-present the gumbel-phcs authors. See LICENSE"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
import pandas as pd
from typing_extensions import Final

from ._kernel import Kernel, chain
from .censoring import AdaptiveCensoredSample
from .enums import Estimator
from .errors import DomainError, EstimationError, EvaluationError
from .models import Params
from .utils import FloatArray, inv_expm1, log1mexp

__all__ = (
    "FitReport",
    "ProfileLikelihood",
    "loglik",
    "score",
    "observed_information",
    "newton_fit",
    "fit_mle",
    "profile_loglik",
)

log = logging.getLogger(__name__)

RESTART_ALPHAS: Final = (0.5, 1.0, 2.0, 4.0)
MAX_LOG_STEP: Final = 2.0

Objective = Callable[[Params, AdaptiveCensoredSample], float]
Derivative = Callable[[Params, AdaptiveCensoredSample], FloatArray]


@dataclass(frozen=True, eq=False)
class FitReport:
    """The outcome of a Newton fit of ``(alpha, beta)``."""

    estimate: Params
    """The fitted parameters."""
    loglik: float
    """The maximised objective, the log-likelihood for MLE and the log product spacing for MPS."""
    iterations: int
    """How many Newton iterations the successful start took."""
    converged: bool
    """Whether the score sup-norm fell below the tolerance at a positive definite observed information."""
    observed_info: FloatArray
    """The negative Hessian of the objective at :attr:`estimate`."""
    score: FloatArray = field(default_factory=lambda: np.zeros(2))
    """The gradient of the objective at :attr:`estimate`."""
    method: Estimator = Estimator.MLE

    def covariance(self) -> FloatArray:
        """The inverse of :attr:`observed_info`.

        Raises
        ------
        EstimationError
            The information matrix is singular.
        """
        try:
            covariance = np.linalg.inv(self.observed_info)
        except np.linalg.LinAlgError:
            raise EstimationError("the observed information matrix is singular") from None
        if not np.all(np.isfinite(covariance)):
            raise EstimationError("the observed information matrix is singular")
        return covariance

    def standard_errors(self) -> FloatArray:
        variances = np.diag(self.covariance())
        if np.any(variances < 0):
            raise EstimationError(f"negative asymptotic variance {variances!r}, the fit is not at a maximum")
        return np.sqrt(variances)

    def __repr__(self) -> str:
        return (
            f"<FitReport method={self.method.value} estimate={self.estimate!r} loglik={self.loglik:.6f} "
            f"converged={self.converged}>"
        )


def _censoring_terms(z: FloatArray, weights: FloatArray) -> tuple[float, FloatArray, FloatArray]:
    # value, first and second derivative in z of sum_i R_i log(1 - exp(-z_i))
    active = weights > 0
    value = float(np.sum(weights[active] * log1mexp(z[active])))
    w = np.where(active, inv_expm1(z), 0.0)
    return value, weights * w, -weights * w * (1 + w)


def loglik(p: Params, s: AdaptiveCensoredSample) -> float:
    """The log-likelihood up to the combinatorial constant.

    ``m log(alpha) + m log(beta) - (alpha + 1) sum(log x_i) - beta sum(x_i ** -alpha)
    + sum(R_i log(1 - exp(-beta x_i ** -alpha)))`` with ``R_i`` the effective removals, so the
    adapted terminal removal ``R*_j`` sits at ``x_m``.

    Raises
    ------
    EvaluationError
        The value is not finite.
    """
    k = Kernel.at(p, s.times)
    censored, _, _ = _censoring_terms(k.z, s.removal_weights)
    value = s.m * (math.log(p.alpha) + math.log(p.beta)) - (p.alpha + 1) * k.log_x.sum() - k.z.sum() + censored
    if not math.isfinite(value):
        raise EvaluationError(f"log-likelihood is not finite at {p!r}")
    return float(value)


def _derivatives(p: Params, s: AdaptiveCensoredSample) -> tuple[FloatArray, FloatArray]:
    k = Kernel.at(p, s.times)
    _, first, second = _censoring_terms(k.z, s.removal_weights)
    gradient, hessian = chain(first - 1.0, second, k.dz, k.d2z)
    gradient += (s.m / p.alpha - k.log_x.sum(), s.m / p.beta)
    hessian += np.diag((-s.m / p.alpha**2, -s.m / p.beta**2))
    return gradient, hessian


def score(p: Params, s: AdaptiveCensoredSample) -> FloatArray:
    """The partial derivatives of :func:`loglik` in ``alpha`` and ``beta``."""
    gradient, _ = _derivatives(p, s)
    if not np.all(np.isfinite(gradient)):
        raise EvaluationError(f"score is not finite at {p!r}")
    return gradient


def observed_information(p: Params, s: AdaptiveCensoredSample) -> FloatArray:
    """The negative Hessian of :func:`loglik`, symmetric by construction."""
    _, hessian = _derivatives(p, s)
    if not np.all(np.isfinite(hessian)):
        raise EvaluationError(f"observed information is not finite at {p!r}")
    return -hessian


def _safe_value(objective: Objective, theta: FloatArray, s: AdaptiveCensoredSample) -> float:
    try:
        return objective(Params.from_array(theta), s)
    except (EvaluationError, DomainError):
        return -math.inf


def _positive_definite(matrix: FloatArray) -> bool:
    if not np.all(np.isfinite(matrix)):
        return False
    try:
        np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError:
        return False
    return True


def _ascent_direction(gradient: FloatArray, hessian: FloatArray) -> FloatArray:
    if not _positive_definite(-hessian):
        # not locally concave, fall back to a bounded gradient step
        return gradient / max(1.0, float(np.max(np.abs(gradient))))
    return np.linalg.solve(-hessian, gradient)


def _newton(
    s: AdaptiveCensoredSample,
    objective: Objective,
    gradient: Derivative,
    hessian: Derivative,
    start: Params,
    free: FloatArray,
    method: Estimator,
    *,
    tol: float,
    step_tol: float,
    max_iter: int,
    max_halvings: int,
) -> FitReport:
    theta = start.as_array()
    value = _safe_value(objective, theta, s)
    if not math.isfinite(value):
        raise EvaluationError(f"objective is not finite at the starting point {start!r}")

    iterations = 0
    for iterations in range(1, max_iter + 1):
        p = Params.from_array(theta)
        try:
            g, h = gradient(p, s), hessian(p, s)
        except (EvaluationError, DomainError):
            break
        if not (np.all(np.isfinite(g)) and np.all(np.isfinite(h))):
            break
        if np.max(np.abs(g[free])) < tol:
            break

        # positivity is structural in phi = log(theta)
        g_phi = g * theta
        h_phi = h * np.outer(theta, theta) + np.diag(g_phi)
        step = np.zeros(2)
        step[free] = _ascent_direction(g_phi[free], h_phi[np.ix_(free, free)])
        largest = float(np.max(np.abs(step)))
        if largest > MAX_LOG_STEP:
            step *= MAX_LOG_STEP / largest

        floor = value - 1e-12 * (1 + abs(value))
        for _ in range(max_halvings + 1):
            candidate = theta * np.exp(step)
            candidate_value = _safe_value(objective, candidate, s)
            if candidate_value >= floor:
                break
            step /= 2
        else:
            log.debug("Line search failed at %r after %d iterations", p, iterations)
            break

        theta, value = candidate, candidate_value
        if np.max(np.abs(step)) < step_tol:
            break

    estimate = Params.from_array(theta)
    try:
        g, h = gradient(estimate, s), hessian(estimate, s)
    except (EvaluationError, DomainError):
        g, h = np.full(2, np.nan), np.full((2, 2), np.nan)
    converged = bool(
        np.all(np.isfinite(g)) and np.max(np.abs(g[free])) < tol and _positive_definite(-h[np.ix_(free, free)])
    )
    return FitReport(estimate, value, iterations, converged, -h, g, method)


def _default_start(s: AdaptiveCensoredSample, alpha: float) -> Params:
    # beta that solves the uncensored beta score equation at this alpha
    return Params(alpha, s.m / float(np.sum(s.times**-alpha)))


def newton_fit(
    s: AdaptiveCensoredSample,
    objective: Objective,
    gradient: Derivative,
    hessian: Derivative,
    *,
    method: Estimator,
    init: Params | None = None,
    fixed_alpha: float | None = None,
    fixed_beta: float | None = None,
    tol: float = 1e-8,
    step_tol: float = 1e-10,
    max_iter: int = 200,
    max_halvings: int = 30,
) -> FitReport:
    """Maximise ``objective`` by damped Newton iterations in ``(log(alpha), log(beta))``.

    The first start is ``init`` or ``alpha = 1`` with the closed form ``beta = m / sum(x ** -alpha)``.
    When it fails the fit restarts from ``alpha`` in ``(0.5, 1, 2, 4)`` and keeps the best converged
    result. Each Newton step is halved up to ``max_halvings`` times until the objective stops decreasing.

    Parameters
    ----------
    fixed_alpha, fixed_beta
        Hold one coordinate fixed and maximise over the other only.
    tol
        Convergence threshold on the sup-norm of the free score components.
    step_tol
        Iterations stop once the log-parameter step is smaller than this.

    Raises
    ------
    DomainError
        ``tol`` is not positive or both coordinates are fixed.
    """
    if tol <= 0:
        raise DomainError(f"tol must be positive, got {tol}")
    if fixed_alpha is not None and fixed_beta is not None:
        raise DomainError("at least one parameter has to be free")
    free = np.array([fixed_alpha is None, fixed_beta is None])

    def start_at(alpha: float) -> Params:
        alpha = fixed_alpha if fixed_alpha is not None else alpha
        if fixed_beta is not None:
            return Params(alpha, fixed_beta)
        return _default_start(s, alpha)

    starts: list[Params] = [init if init is not None else start_at(1.0)]
    if init is not None and (fixed_alpha is not None or fixed_beta is not None):
        starts[0] = Params(
            fixed_alpha if fixed_alpha is not None else init.alpha,
            fixed_beta if fixed_beta is not None else init.beta,
        )
    if fixed_alpha is None:
        starts += [start_at(alpha) for alpha in RESTART_ALPHAS]

    options = dict(tol=tol, step_tol=step_tol, max_iter=max_iter, max_halvings=max_halvings)
    reports: list[FitReport] = []
    for index, start in enumerate(starts):
        try:
            report = _newton(s, objective, gradient, hessian, start, free, method, **options)
        except EvaluationError as exc:
            log.debug("Start %r rejected: %s", start, exc)
            continue
        if report.converged and index == 0:
            return report
        reports.append(report)

    if not reports:
        raise EstimationError(f"{method.value} objective is not finite at any starting point")
    converged = [report for report in reports if report.converged]
    best = max(converged or reports, key=lambda report: report.loglik)
    if not best.converged:
        log.warning("%s fit did not converge, best score %r at %r", method.value, best.score, best.estimate)
    return best


def fit_mle(
    s: AdaptiveCensoredSample,
    init: Params | None = None,
    *,
    tol: float = 1e-8,
    max_iter: int = 200,
    fixed_alpha: float | None = None,
    fixed_beta: float | None = None,
) -> FitReport:
    """Maximum likelihood estimates of ``(alpha, beta)`` by Newton-Raphson, see :func:`newton_fit`."""
    return newton_fit(
        s,
        loglik,
        score,
        lambda p, s: -observed_information(p, s),
        method=Estimator.MLE,
        init=init,
        fixed_alpha=fixed_alpha,
        fixed_beta=fixed_beta,
        tol=tol,
        max_iter=max_iter,
    )


@dataclass(frozen=True, eq=False)
class ProfileLikelihood:
    """Profile log-likelihood curves, one plot-ready frame per parameter.

    Each frame has the columns ``value`` (the fixed parameter), ``loglik`` (the profiled maximum),
    ``inner`` (the maximiser of the other parameter) and ``converged``.
    """

    alpha: pd.DataFrame
    beta: pd.DataFrame


def _profile(s: AdaptiveCensoredSample, grid: npt.ArrayLike, fixed: str) -> pd.DataFrame:
    rows = []
    inner_name = "beta" if fixed == "alpha" else "alpha"
    for value in np.asarray(grid, dtype=float):
        if not value > 0:
            raise DomainError(f"profile grids must be positive, got {value}")
        try:
            report = fit_mle(s, **{f"fixed_{fixed}": float(value)})
        except EstimationError:
            rows.append((value, math.nan, math.nan, False))
            continue
        if not report.converged:
            log.warning("Profile for %s=%g did not converge", fixed, value)
        rows.append((value, report.loglik, getattr(report.estimate, inner_name), report.converged))
    return pd.DataFrame(rows, columns=["value", "loglik", "inner", "converged"])


def profile_loglik(
    s: AdaptiveCensoredSample, grid_alpha: Sequence[float], grid_beta: Sequence[float]
) -> ProfileLikelihood:
    """Profile :func:`loglik` over each grid, maximising over the other parameter at every point.

    Raises
    ------
    DomainError
        A grid is empty or holds a nonpositive value.
    """
    if len(grid_alpha) == 0 or len(grid_beta) == 0:
        raise DomainError("profile grids must not be empty")
    return ProfileLikelihood(_profile(s, grid_alpha, "alpha"), _profile(s, grid_beta, "beta"))
