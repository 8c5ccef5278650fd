"""Licensed under The MIT License (MIT) - Copyright (c) 2023-present the gumbel-phcs authors. See LICENSE"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp
from typing_extensions import Final, Self

from .censoring import AdaptiveCensoredSample
from .enums import LossKind
from .errors import DomainError, EstimationError
from .mle import FitReport, loglik
from .models import Params
from .utils import FloatArray, SeedLike, log1mexp, make_rng

__all__ = (
    "GammaPriorPair",
    "SIMULATION_PRIOR",
    "LossFunction",
    "McmcConfig",
    "PosteriorChain",
    "log_prior",
    "log_posterior",
    "conditional_log_posterior",
    "run_mh",
    "bayes_estimate",
    "bayes_estimates",
    "proposal_from_mle",
)

log = logging.getLogger(__name__)

LogTarget = Callable[[float, float], float]


@dataclass(frozen=True, slots=True)
class GammaPriorPair:
    """Independent gamma priors, ``alpha ~ Gamma(a, rate=b)`` and ``beta ~ Gamma(c, rate=d)``.

    All zeros gives the improper ``1 / (alpha * beta)`` prior.
    """

    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    def __post_init__(self) -> None:
        for name in ("a", "b", "c", "d"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise DomainError(f"hyper-parameter {name} must be finite and nonnegative, got {value!r}")


SIMULATION_PRIOR: Final = GammaPriorPair(3.0, 2.0, 3.0, 4.0)


@dataclass(frozen=True, slots=True)
class LossFunction:
    """The loss a Bayes point estimate is optimal for.

    ``LINEX`` takes its asymmetry ``p`` and ``GELF`` its shape ``q`` through :attr:`parameter`, neither
    may be zero.
    """

    kind: LossKind
    parameter: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", LossKind(self.kind))
        if self.kind is LossKind.SELF:
            if self.parameter is not None:
                raise DomainError("SELF takes no parameter")
        elif self.parameter is None or self.parameter == 0 or not math.isfinite(self.parameter):
            raise DomainError(f"{self.kind.value} needs a finite nonzero parameter, got {self.parameter!r}")

    @classmethod
    def squared_error(cls) -> Self:
        return cls(LossKind.SELF)

    @classmethod
    def linex(cls, p: float) -> Self:
        return cls(LossKind.LINEX, float(p))

    @classmethod
    def general_entropy(cls, q: float) -> Self:
        return cls(LossKind.GELF, float(q))

    @property
    def label(self) -> str:
        if self.kind is LossKind.LINEX:
            return f"LINEX(p={self.parameter:g})"
        if self.kind is LossKind.GELF:
            return f"GELF(q={self.parameter:g})"
        return "SELF"


@dataclass(frozen=True, slots=True)
class McmcConfig:
    """Settings of a Metropolis-Hastings run.

    ``burn_in`` defaults to a fifth of the chain.
    """

    chain_length: int = 5000
    burn_in: int | None = None
    proposal_sd_alpha: float = 0.1
    proposal_sd_beta: float = 0.1
    seed: SeedLike = 0

    def __post_init__(self) -> None:
        if self.chain_length < 1:
            raise DomainError(f"chain_length must be positive, got {self.chain_length}")
        if self.burn_in is not None and not 0 <= self.burn_in < self.chain_length:
            raise DomainError(f"burn_in must lie in [0, {self.chain_length}), got {self.burn_in}")
        for name in ("proposal_sd_alpha", "proposal_sd_beta"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be positive, got {value!r}")

    @property
    def resolved_burn_in(self) -> int:
        return self.burn_in if self.burn_in is not None else int(0.2 * self.chain_length)


@dataclass(frozen=True, eq=False)
class PosteriorChain:
    """The draws of a Metropolis-Hastings run, one per proposal."""

    alphas: FloatArray
    betas: FloatArray
    accepted: int
    """The number of accepted proposals."""
    log_density: FloatArray = field(repr=False, default_factory=lambda: np.empty(0))
    """The log target at each draw."""

    def __post_init__(self) -> None:
        if len(self.alphas) != len(self.betas):
            raise DomainError("alpha and beta draws differ in length")
        if not 0 <= self.accepted <= len(self.alphas):
            raise DomainError("accepted must lie in [0, chain length]")

    def __len__(self) -> int:
        return len(self.alphas)

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / len(self) if len(self) else 0.0

    def draws(self, parameter: str, burn_in: int = 0) -> FloatArray:
        """The draws of ``"alpha"`` or ``"beta"`` after discarding the first ``burn_in``.

        Raises
        ------
        DomainError
            ``burn_in`` leaves no draws or ``parameter`` is unknown.
        """
        if not 0 <= burn_in < len(self):
            raise DomainError(f"burn_in must lie in [0, {len(self)}), got {burn_in}")
        if parameter == "alpha":
            return self.alphas[burn_in:]
        if parameter == "beta":
            return self.betas[burn_in:]
        raise DomainError(f"unknown parameter {parameter!r}")


def log_prior(p: Params, prior: GammaPriorPair) -> float:
    """The unnormalised log of the joint gamma prior."""
    return (prior.a - 1) * math.log(p.alpha) - prior.b * p.alpha + (prior.c - 1) * math.log(p.beta) - prior.d * p.beta


def log_posterior(p: Params, s: AdaptiveCensoredSample, prior: GammaPriorPair) -> float:
    """The unnormalised log posterior, :func:`~gumbel_phcs.mle.loglik` plus :func:`log_prior`.

    This is ``(m + a - 1) log(alpha) - alpha (b + sum(log x_i)) + (m + c - 1) log(beta)
    - beta (d + sum(x_i ** -alpha)) + sum(R_i log(1 - exp(-beta x_i ** -alpha)))`` up to the
    constant ``-sum(log x_i)``.
    """
    return loglik(p, s) + log_prior(p, prior)


def conditional_log_posterior(parameter: str, p: Params, s: AdaptiveCensoredSample, prior: GammaPriorPair) -> float:
    """The log full conditional of ``"alpha"`` given ``beta``, or of ``"beta"`` given ``alpha``, up to a constant.

    For ``alpha`` this is ``(m + a - 1) log(alpha) - alpha (b + sum(log x_i)) - beta sum(x_i ** -alpha)
    + sum(R_i log(1 - exp(-beta x_i ** -alpha)))`` and for ``beta`` the same expression with the terms
    in ``alpha`` alone dropped. Neither has a standard form, so :func:`run_mh` samples the joint kernel.
    """
    log_x = np.log(s.times)
    z = p.beta * np.exp(-p.alpha * log_x)
    censored = float(np.dot(s.removal_weights, np.where(s.removal_weights > 0, log1mexp(z), 0.0)))
    if parameter == "alpha":
        value = (s.m + prior.a - 1) * math.log(p.alpha) - p.alpha * (prior.b + float(log_x.sum()))
        return value - float(z.sum()) + censored
    if parameter == "beta":
        return (s.m + prior.c - 1) * math.log(p.beta) - p.beta * prior.d - float(z.sum()) + censored
    raise DomainError(f"unknown parameter {parameter!r}")


def _posterior_target(s: AdaptiveCensoredSample, prior: GammaPriorPair) -> LogTarget:
    log_x = np.log(s.times)
    sum_log_x = float(log_x.sum())
    weights = s.removal_weights
    active = weights > 0
    log_x_active, weights_active = log_x[active], weights[active]
    m = s.m

    def target(alpha: float, beta: float) -> float:
        x_pow = np.exp(-alpha * log_x)
        censored = float(np.dot(weights_active, log1mexp(beta * np.exp(-alpha * log_x_active))))
        return (
            (m + prior.a - 1) * math.log(alpha)
            - alpha * (prior.b + sum_log_x)
            + (m + prior.c - 1) * math.log(beta)
            - beta * (prior.d + float(x_pow.sum()))
            + censored
            - sum_log_x
        )

    return target


def run_mh(
    s: AdaptiveCensoredSample,
    prior: GammaPriorPair,
    cfg: McmcConfig,
    init: Params,
    *,
    log_target: LogTarget | None = None,
) -> PosteriorChain:
    """Random-walk Metropolis-Hastings over ``(alpha, beta)``.

    Both coordinates are proposed together from independent normals centred on the current state with
    the fixed standard deviations of ``cfg``. Proposals outside the positive quadrant have zero density
    and are rejected without evaluating the target. The chain holds the state after each of the
    ``cfg.chain_length`` proposals.

    Parameters
    ----------
    log_target
        Replaces :func:`log_posterior` as the log density to sample from.

    Raises
    ------
    EstimationError
        The target is not finite at ``init``.
    """
    target = log_target if log_target is not None else _posterior_target(s, prior)
    rng = make_rng(cfg.seed)
    size = cfg.chain_length
    steps = rng.standard_normal((size, 2)) * (cfg.proposal_sd_alpha, cfg.proposal_sd_beta)
    with np.errstate(divide="ignore"):
        log_u = np.log(rng.uniform(size=size))

    alpha, beta = init.alpha, init.beta
    current = target(alpha, beta)
    if not math.isfinite(current):
        raise EstimationError(f"log posterior is not finite at the initial state {init!r}")

    alphas, betas, density = np.empty(size), np.empty(size), np.empty(size)
    accepted = 0
    for i in range(size):
        proposal_alpha, proposal_beta = alpha + steps[i, 0], beta + steps[i, 1]
        if proposal_alpha > 0 and proposal_beta > 0:
            proposed = target(proposal_alpha, proposal_beta)
            if log_u[i] <= proposed - current:
                alpha, beta, current = proposal_alpha, proposal_beta, proposed
                accepted += 1
        alphas[i], betas[i], density[i] = alpha, beta, current

    chain = PosteriorChain(alphas, betas, accepted, density)
    log.debug("Metropolis-Hastings accepted %d of %d proposals", accepted, size)
    return chain


def _point_estimate(values: FloatArray, loss: LossFunction) -> float:
    if loss.kind is LossKind.SELF:
        return float(np.mean(values))
    assert loss.parameter is not None
    log_count = math.log(len(values))
    if loss.kind is LossKind.LINEX:
        p = loss.parameter
        return float(-(logsumexp(-p * values) - log_count) / p)
    q = loss.parameter
    return float(math.exp(-(logsumexp(-q * np.log(values)) - log_count) / q))


def bayes_estimate(chain: PosteriorChain, loss: LossFunction, burn_in: int) -> Params:
    """The Bayes estimate under ``loss`` from the draws after ``burn_in``.

    SELF gives the posterior mean, LINEX ``-log(mean(exp(-p * theta))) / p`` and GELF
    ``mean(theta ** -q) ** (-1 / q)``, the latter two evaluated through ``logsumexp``.
    """
    return Params(
        _point_estimate(chain.draws("alpha", burn_in), loss),
        _point_estimate(chain.draws("beta", burn_in), loss),
    )


def bayes_estimates(chain: PosteriorChain, losses: Iterable[LossFunction], burn_in: int) -> dict[str, Params]:
    return {loss.label: bayes_estimate(chain, loss, burn_in) for loss in losses}


def proposal_from_mle(fit: FitReport) -> tuple[float, float]:
    """Proposal standard deviations from the asymptotic variances of a fit.

    Raises
    ------
    EstimationError
        The fit did not converge or its information matrix is singular.
    """
    if not fit.converged:
        raise EstimationError("proposal scales need a converged fit")
    sd_alpha, sd_beta = fit.standard_errors()
    if not (sd_alpha > 0 and sd_beta > 0):
        raise EstimationError(f"degenerate proposal scales {(sd_alpha, sd_beta)!r}")
    return float(sd_alpha), float(sd_beta)
