"""Licensed under The MIT License (MIT) - Copyright (c) 2023-present the gumbel-phcs authors. See LICENSE"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from typing_extensions import Final, Self

from .enums import ComparatorFamily
from .errors import DomainError
from .utils import FloatArray, SeedLike, make_rng

__all__ = (
    "Params",
    "ComparatorModel",
    "COVID19_COMPARATORS",
    "cdf",
    "pdf",
    "logpdf",
    "hazard",
    "quantile",
    "sample_iid",
    "comparator_cdf",
    "comparator_logpdf",
    "comparator_quantile",
    "comparator_loglik",
)


def _positive_support(x: npt.ArrayLike) -> FloatArray:
    x = np.asarray(x, dtype=float)
    if not np.all(x > 0):
        raise DomainError("the support is (0, inf), got a nonpositive value")
    return x


def _scalar_or_array(value: FloatArray) -> float | FloatArray:
    return float(value) if value.ndim == 0 else value


@dataclass(frozen=True, slots=True)
class Params:
    """Represents the shape and scale of a Gumbel type-II distribution, ``F(x) = exp(-beta * x ** -alpha)``."""

    alpha: float
    """The shape parameter."""
    beta: float
    """The scale parameter, in units of ``x ** alpha``."""

    def __post_init__(self) -> None:
        for name in ("alpha", "beta"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")

    def __iter__(self):
        yield self.alpha
        yield self.beta

    def as_array(self) -> FloatArray:
        return np.array([self.alpha, self.beta], dtype=float)

    @classmethod
    def from_array(cls, values: npt.ArrayLike) -> Self:
        alpha, beta = np.asarray(values, dtype=float)
        return cls(float(alpha), float(beta))

    def cdf(self, x: npt.ArrayLike) -> float | FloatArray:
        return cdf(self, x)

    def pdf(self, x: npt.ArrayLike) -> float | FloatArray:
        return pdf(self, x)

    def logpdf(self, x: npt.ArrayLike) -> float | FloatArray:
        return logpdf(self, x)

    def hazard(self, x: npt.ArrayLike) -> float | FloatArray:
        return hazard(self, x)

    def quantile(self, u: npt.ArrayLike) -> float | FloatArray:
        return quantile(self, u)

    def __repr__(self) -> str:
        return f"<Params alpha={self.alpha:.6g} beta={self.beta:.6g}>"


def cdf(p: Params, x: npt.ArrayLike) -> float | FloatArray:
    """The distribution function ``exp(-beta * x ** -alpha)``.

    Raises
    ------
    DomainError
        Any ``x <= 0``.
    """
    x = _positive_support(x)
    return _scalar_or_array(np.exp(-p.beta * x**-p.alpha))


def logpdf(p: Params, x: npt.ArrayLike) -> float | FloatArray:
    x = _positive_support(x)
    log_x = np.log(x)
    return _scalar_or_array(
        math.log(p.alpha) + math.log(p.beta) - (p.alpha + 1) * log_x - p.beta * np.exp(-p.alpha * log_x)
    )


def pdf(p: Params, x: npt.ArrayLike) -> float | FloatArray:
    """The density ``alpha * beta * x ** (-alpha - 1) * exp(-beta * x ** -alpha)``.

    Raises
    ------
    DomainError
        Any ``x <= 0``.
    """
    return _scalar_or_array(np.exp(np.asarray(logpdf(p, x))))


def hazard(p: Params, x: npt.ArrayLike) -> float | FloatArray:
    """The hazard rate ``alpha * beta * x ** (-alpha - 1) / (exp(beta * x ** -alpha) - 1)``.

    The denominator goes through ``expm1`` so the rate stays accurate as ``x`` grows and it tends to 0.

    Raises
    ------
    DomainError
        Any ``x <= 0``.
    """
    x = _positive_support(x)
    z = p.beta * x**-p.alpha
    with np.errstate(divide="ignore", over="ignore"):
        rate = p.alpha * p.beta * x ** (-p.alpha - 1) / np.expm1(z)
    return _scalar_or_array(rate)


def quantile(p: Params, u: npt.ArrayLike) -> float | FloatArray:
    """The inverse of :func:`cdf`, ``(beta / -log(u)) ** (1 / alpha)``.

    Raises
    ------
    DomainError
        Any ``u`` outside ``(0, 1)``.
    """
    u = np.asarray(u, dtype=float)
    if not np.all((u > 0) & (u < 1)):
        raise DomainError("quantile levels must lie strictly between 0 and 1")
    return _scalar_or_array((p.beta / -np.log(u)) ** (1 / p.alpha))


def sample_iid(p: Params, count: int, seed: SeedLike | np.random.Generator) -> FloatArray:
    """Draw ``count`` independent lifetimes by inverting uniform draws through :func:`quantile`.

    Raises
    ------
    DomainError
        ``count < 1``.
    """
    if count < 1:
        raise DomainError(f"count must be at least 1, got {count}")
    rng = make_rng(seed)
    # open interval so the quantile is always finite
    u = rng.uniform(np.nextafter(0.0, 1.0), 1.0, size=count)
    return np.asarray(quantile(p, u), dtype=float)


@dataclass(frozen=True, slots=True)
class ComparatorModel:
    """A two parameter lifetime model used only for goodness-of-fit comparison.

    The parameterisations are

    - ``NH``: ``F(x) = 1 - exp(1 - (1 + p2 * x) ** p1)``
    - ``BurrIII``: ``F(x) = (1 + x ** -p1) ** -p2``
    - ``IKum``: ``F(x) = (1 - (1 + x) ** -p1) ** p2``
    """

    family: ComparatorFamily
    p1: float
    """The first (shape) parameter."""
    p2: float
    """The second parameter."""

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", ComparatorFamily(self.family))
        for name in ("p1", "p2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")

    def cdf(self, x: npt.ArrayLike) -> float | FloatArray:
        return comparator_cdf(self, x)

    def logpdf(self, x: npt.ArrayLike) -> float | FloatArray:
        return comparator_logpdf(self, x)

    def pdf(self, x: npt.ArrayLike) -> float | FloatArray:
        return _scalar_or_array(np.exp(np.asarray(comparator_logpdf(self, x))))

    def quantile(self, u: npt.ArrayLike) -> float | FloatArray:
        return comparator_quantile(self, u)

    def __repr__(self) -> str:
        return f"<ComparatorModel family={self.family.value} p1={self.p1:.6g} p2={self.p2:.6g}>"


COVID19_COMPARATORS: Final = (
    ComparatorModel(ComparatorFamily.NH, 138.7024, 0.0003),
    ComparatorModel(ComparatorFamily.BurrIII, 2.0256, 85.8196),
    ComparatorModel(ComparatorFamily.IKum, 2.2073, 163.2839),
)
"""The comparator fits reported for the Covid-19 death rate data."""


def comparator_cdf(m: ComparatorModel, x: npt.ArrayLike) -> float | FloatArray:
    x = _positive_support(x)
    if m.family is ComparatorFamily.NH:
        value = -np.expm1(1 - (1 + m.p2 * x) ** m.p1)
    elif m.family is ComparatorFamily.BurrIII:
        value = np.exp(-m.p2 * np.log1p(x**-m.p1))
    else:
        value = np.exp(m.p2 * np.log1p(-((1 + x) ** -m.p1)))
    return _scalar_or_array(value)


def comparator_logpdf(m: ComparatorModel, x: npt.ArrayLike) -> float | FloatArray:
    x = _positive_support(x)
    a, b = m.p1, m.p2
    log_ab = math.log(a) + math.log(b)
    if m.family is ComparatorFamily.NH:
        log_base = np.log1p(b * x)
        value = log_ab + (a - 1) * log_base + 1 - np.exp(a * log_base)
    elif m.family is ComparatorFamily.BurrIII:
        log_x = np.log(x)
        value = log_ab - (a + 1) * log_x - (b + 1) * np.log1p(np.exp(-a * log_x))
    else:
        log_base = np.log1p(x)
        value = log_ab - (a + 1) * log_base + (b - 1) * np.log1p(-np.exp(-a * log_base))
    return _scalar_or_array(value)


def comparator_quantile(m: ComparatorModel, u: npt.ArrayLike) -> float | FloatArray:
    u = np.asarray(u, dtype=float)
    if not np.all((u > 0) & (u < 1)):
        raise DomainError("quantile levels must lie strictly between 0 and 1")
    a, b = m.p1, m.p2
    if m.family is ComparatorFamily.NH:
        value = np.expm1(np.log1p(-np.log1p(-u)) / a) / b
    elif m.family is ComparatorFamily.BurrIII:
        value = np.expm1(-np.log(u) / b) ** (-1 / a)
    else:
        value = (-np.expm1(np.log(u) / b)) ** (-1 / a) - 1
    return _scalar_or_array(value)


def comparator_loglik(m: ComparatorModel, data: npt.ArrayLike) -> float:
    """Sum of the comparator's log-densities over ``data``.

    Raises
    ------
    DomainError
        Nonpositive data.
    """
    return float(np.sum(comparator_logpdf(m, data)))
