"""Licensed under The MIT License (MIT) - Copyright (c) 2023-present the gumbel-phcs authors. See LICENSE"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernel import Kernel, chain
from .censoring import AdaptiveCensoredSample
from .enums import Estimator
from .errors import EvaluationError
from .mle import FitReport, _censoring_terms, newton_fit
from .models import Params
from .utils import FloatArray, inv_expm1, log1mexp

__all__ = (
    "SpacingSet",
    "spacings",
    "log_spacing",
    "spacing_score",
    "spacing_hessian",
    "fit_mps",
)


@dataclass(frozen=True, eq=False)
class SpacingSet:
    """The ``m + 1`` spacings ``F(x_1), F(x_2) - F(x_1), ..., 1 - F(x_m)``."""

    D: FloatArray

    @property
    def total(self) -> float:
        return float(np.sum(self.D))

    def __len__(self) -> int:
        return len(self.D)


def spacings(p: Params, s: AdaptiveCensoredSample) -> SpacingSet:
    """The raw spacings of the observed failures, tied observations give a zero spacing."""
    F = np.exp(-Kernel.at(p, s.times).z)
    return SpacingSet(np.diff(F, prepend=0.0, append=1.0))


def _tied(s: AdaptiveCensoredSample, z: FloatArray) -> FloatArray:
    return (np.diff(s.times) <= 0) | (z[:-1] - z[1:] <= 0)


def log_spacing(p: Params, s: AdaptiveCensoredSample) -> float:
    """The log product spacing including the censoring factors.

    ``-z_1 + log(1 - e^-z_m) + sum_{i>=2} log(e^-z_i - e^-z_{i-1}) + sum(R_i log(1 - e^-z_i))``
    with ``z_i = beta * x_i ** -alpha`` and effective removals ``R_i``. A zero spacing between tied
    observations is replaced by the density at that observation.

    Raises
    ------
    EvaluationError
        The value is not finite.
    """
    k = Kernel.at(p, s.times)
    z = k.z
    tied = _tied(s, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        untied_terms = -z[1:] + log1mexp(np.where(tied, 1.0, z[:-1] - z[1:]))
    density_terms = math.log(p.alpha) + math.log(p.beta) - (p.alpha + 1) * k.log_x[1:] - z[1:]
    interior = np.where(tied, density_terms, untied_terms)
    censored, _, _ = _censoring_terms(z, s.removal_weights)
    value = -z[0] + float(log1mexp(z[-1])) + float(interior.sum()) + censored
    if not math.isfinite(value):
        raise EvaluationError(f"log product spacing is not finite at {p!r}")
    return float(value)


def _derivatives(p: Params, s: AdaptiveCensoredSample) -> tuple[FloatArray, FloatArray]:
    k = Kernel.at(p, s.times)
    z = k.z
    tied = _tied(s, z)
    _, first, second = _censoring_terms(z, s.removal_weights)
    first = first.copy()
    second = second.copy()

    # F(x_1) and 1 - F(x_m)
    first[0] -= 1.0
    w_last = float(inv_expm1(z[-1]))
    first[-1] += w_last
    second[-1] -= w_last * (1 + w_last)

    # -z_i is shared by untied spacings and the density substitute
    first[1:] -= 1.0
    with np.errstate(invalid="ignore"):
        w = np.where(tied, 0.0, inv_expm1(np.where(tied, 1.0, z[:-1] - z[1:])))
    first[:-1] += w
    first[1:] -= w

    gradient, hessian = chain(first, second, k.dz, k.d2z)
    d_delta = k.dz[:-1] - k.dz[1:]
    hessian += np.einsum("i,ij,ik->jk", -w * (1 + w), d_delta, d_delta)

    ties = int(np.count_nonzero(tied))
    if ties:
        gradient += (ties / p.alpha - float(k.log_x[1:][tied].sum()), ties / p.beta)
        hessian += np.diag((-ties / p.alpha**2, -ties / p.beta**2))
    return gradient, hessian


def spacing_score(p: Params, s: AdaptiveCensoredSample) -> FloatArray:
    """The gradient of :func:`log_spacing` in ``(alpha, beta)``."""
    gradient, _ = _derivatives(p, s)
    if not np.all(np.isfinite(gradient)):
        raise EvaluationError(f"spacing score is not finite at {p!r}")
    return gradient


def spacing_hessian(p: Params, s: AdaptiveCensoredSample) -> FloatArray:
    _, hessian = _derivatives(p, s)
    if not np.all(np.isfinite(hessian)):
        raise EvaluationError(f"spacing Hessian is not finite at {p!r}")
    return hessian


def fit_mps(
    s: AdaptiveCensoredSample,
    init: Params | None = None,
    *,
    tol: float = 1e-8,
    max_iter: int = 200,
) -> FitReport:
    """Maximum product spacing estimates, with the same Newton driver and thresholds as
    :func:`~gumbel_phcs.mle.fit_mle`. The report's ``loglik`` holds the maximised log product spacing.
    """
    return newton_fit(
        s, log_spacing, spacing_score, spacing_hessian, method=Estimator.MPS, init=init, tol=tol, max_iter=max_iter
    )
