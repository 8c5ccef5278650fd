"""Licensed under The MIT License (MIT) - Copyright (c) 2023-present the gumbel-phcs authors. See LICENSE"""

from __future__ import annotations

import logging
import math
import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
from typing_extensions import Self

from .enums import SchemeKind
from .errors import DomainError, InvalidPlan
from .models import Params, quantile, sample_iid
from .utils import FloatArray, SeedLike, make_rng

__all__ = (
    "CensoringPlan",
    "AdaptiveCensoredSample",
    "scheme",
    "parse_removals",
    "format_removals",
    "generate",
    "generate_progressive",
    "censor_real_data",
)

log = logging.getLogger(__name__)

_RUN = re.compile(r"^\s*(\d+)\s*(?:\*\s*(\d+))?\s*$")


@dataclass(frozen=True, slots=True)
class CensoringPlan:
    """An adaptive type-II progressive hybrid censoring experiment.

    Raises
    ------
    InvalidPlan
        ``m`` outside ``[1, n]``, ``removals`` of the wrong length, negative or not summing to ``n - m``,
        or a ``T`` that is not positive.
    """

    n: int
    """The number of units put on test."""
    m: int
    """The number of failures to observe."""
    T: float
    """The threshold time after which no more units are withdrawn before the last failure."""
    removals: tuple[int, ...]
    """The planned removals ``R_1, ..., R_m``."""

    def __post_init__(self) -> None:
        object.__setattr__(self, "removals", tuple(int(r) for r in self.removals))
        object.__setattr__(self, "T", float(self.T))
        if not 1 <= self.m <= self.n:
            raise InvalidPlan(f"need 1 <= m <= n, got n={self.n} m={self.m}")
        if len(self.removals) != self.m:
            raise InvalidPlan(f"expected {self.m} removals, got {len(self.removals)}")
        if any(r < 0 for r in self.removals):
            raise InvalidPlan("removals must be nonnegative")
        if sum(self.removals) != self.n - self.m:
            raise InvalidPlan(f"removals sum to {sum(self.removals)}, expected n - m = {self.n - self.m}")
        if not self.T > 0:
            raise InvalidPlan(f"T must be positive, got {self.T}")

    @classmethod
    def from_scheme(cls, kind: int | SchemeKind, n: int, m: int, T: float = math.inf) -> Self:
        return cls(n, m, T, scheme(kind, n, m))

    @property
    def label(self) -> str:
        return f"({self.n},{self.m}) T={self.T:g} R=({format_removals(self.removals)})"


def scheme(kind: int | SchemeKind, n: int, m: int) -> tuple[int, ...]:
    """The removal vector of one of the three standard schemes.

    Parameters
    ----------
    kind
        1 puts all ``n - m`` removals at the last failure, 2 uses ``(n - 2m + 1, 1, ..., 1)`` and
        3 uses ``(n - m - 5, 0, ..., 0, 1, 1, 1, 1, 1)``.

    Raises
    ------
    InvalidPlan
        The combination of ``kind``, ``n`` and ``m`` cannot produce a valid vector.
    """
    try:
        kind = SchemeKind(int(kind))
    except ValueError:
        raise InvalidPlan(f"unknown scheme kind {kind!r}") from None
    if not 1 <= m <= n:
        raise InvalidPlan(f"need 1 <= m <= n, got n={n} m={m}")

    if kind is SchemeKind.Terminal:
        return (0,) * (m - 1) + (n - m,)
    if kind is SchemeKind.FrontLoad:
        if n < 2 * m - 1:
            raise InvalidPlan(f"scheme 2 needs n >= 2m - 1, got n={n} m={m}")
        return (n - 2 * m + 1,) + (1,) * (m - 1)
    if m < 6 or n - m < 5:
        raise InvalidPlan(f"scheme 3 needs m >= 6 and n - m >= 5, got n={n} m={m}")
    return (n - m - 5,) + (0,) * (m - 6) + (1,) * 5


def parse_removals(text: str) -> tuple[int, ...]:
    """Parse run-length removal syntax such as ``"0*39,50"`` or ``"(0*35,10*5)"``.

    Raises
    ------
    InvalidPlan
        The text is not a comma separated list of ``value`` or ``value*count`` runs.
    """
    body = text.strip().removeprefix("(").removesuffix(")")
    if not body.strip():
        raise InvalidPlan("empty removal vector")
    removals: list[int] = []
    for run in body.split(","):
        match = _RUN.match(run)
        if match is None:
            raise InvalidPlan(f"cannot parse removal run {run.strip()!r} in {text!r}")
        value, count = int(match[1]), int(match[2] or 1)
        removals.extend([value] * count)
    return tuple(removals)


def format_removals(removals: Iterable[int]) -> str:
    """The inverse of :func:`parse_removals`, collapsing repeated values into ``value*count`` runs."""
    runs: list[list[int]] = []
    for value in removals:
        if runs and runs[-1][0] == value:
            runs[-1][1] += 1
        else:
            runs.append([value, 1])
    return ",".join(str(value) if count == 1 else f"{value}*{count}" for value, count in runs)


def _effective_removals(plan: CensoringPlan, j: int) -> tuple[int, ...]:
    if j >= plan.m - 1:
        return plan.removals
    kept = plan.removals[:j]
    return kept + (0,) * (plan.m - 1 - j) + (plan.n - plan.m - sum(kept),)


@dataclass(frozen=True, eq=False)
class AdaptiveCensoredSample:
    """The observed failure times of an adaptive type-II progressive hybrid censored test."""

    times: FloatArray
    """The ``m`` ordered failure times."""
    j: int
    """The number of failures observed at or before ``plan.T``."""
    effective_removals: tuple[int, ...]
    """The removals that were actually applied, after adaptation."""
    plan: CensoringPlan = field(repr=False)

    def __post_init__(self) -> None:
        times = np.array(self.times, dtype=float)
        times.setflags(write=False)
        object.__setattr__(self, "times", times)
        if times.ndim != 1 or len(times) != self.plan.m:
            raise InvalidPlan(f"expected {self.plan.m} failure times, got shape {times.shape}")
        if not np.all(times > 0):
            raise DomainError("failure times must be positive")
        if np.any(np.diff(times) < 0):
            raise InvalidPlan("failure times must be ordered")
        if self.j != int(np.count_nonzero(times <= self.plan.T)):
            raise InvalidPlan("j must count the failures at or before T")
        if sum(self.effective_removals) != self.plan.n - self.plan.m:
            raise InvalidPlan("effective removals must sum to n - m")

    @classmethod
    def from_times(cls, times: npt.ArrayLike, plan: CensoringPlan) -> Self:
        """Build a sample from observed failure times, deriving ``j`` and the effective removals from ``plan``."""
        times = np.asarray(times, dtype=float)
        j = int(np.count_nonzero(times <= plan.T))
        return cls(times, j, _effective_removals(plan, j), plan)

    @classmethod
    def complete(cls, data: npt.ArrayLike) -> Self:
        """A sample without any censoring, the sorted data itself."""
        times = np.sort(np.asarray(data, dtype=float))
        return cls.from_times(times, CensoringPlan(len(times), len(times), math.inf, (0,) * len(times)))

    @property
    def m(self) -> int:
        return self.plan.m

    @property
    def n(self) -> int:
        return self.plan.n

    @property
    def T(self) -> float:
        return self.plan.T

    @property
    def removal_weights(self) -> FloatArray:
        return np.asarray(self.effective_removals, dtype=float)

    @property
    def is_adapted(self) -> bool:
        """Whether the threshold was crossed early enough for the removals to be altered."""
        return self.j < self.m - 1

    def __repr__(self) -> str:
        return f"<AdaptiveCensoredSample plan={self.plan.label} j={self.j}>"


def _life_test(lifetimes: FloatArray, plan: CensoringPlan, rng: np.random.Generator) -> FloatArray:
    survivors = np.sort(lifetimes)
    failures = np.empty(plan.m)
    for i in range(plan.m):
        failures[i] = survivors[0]
        survivors = survivors[1:]
        if i == plan.m - 1:
            break  # every survivor is withdrawn at the last failure
        removals = plan.removals[i] if failures[i] <= plan.T else 0
        if removals:
            withdrawn = rng.choice(len(survivors), size=removals, replace=False)
            survivors = np.delete(survivors, withdrawn)
    return failures


def generate(p: Params, plan: CensoringPlan, seed: SeedLike | np.random.Generator) -> AdaptiveCensoredSample:
    """Simulate the life test directly.

    ``n`` lifetimes are drawn, the smallest surviving one fails next and, while failures happen at or
    before ``T``, ``R_i`` survivors are withdrawn uniformly at random after the ``i``-th failure. Past
    ``T`` nothing is withdrawn until the ``m``-th failure, which ends the test.
    """
    rng = make_rng(seed)
    times = _life_test(sample_iid(p, plan.n, rng), plan, rng)
    if np.any(np.diff(times) <= 0):
        raise DomainError("simulated failure times are not strictly increasing")
    return AdaptiveCensoredSample.from_times(times, plan)


def generate_progressive(
    p: Params, removals: Sequence[int], seed: SeedLike | np.random.Generator
) -> FloatArray:
    """Ordinary progressive type-II censored failure times through the uniform transformation.

    With ``W_i`` uniform, ``V_i = W_i ** (1 / (i + R_m + ... + R_{m-i+1}))`` and
    ``U_i = 1 - V_m * V_{m-1} * ... * V_{m-i+1}`` are progressively censored uniform order statistics,
    which :func:`~gumbel_phcs.models.quantile` maps onto the lifetime scale.
    """
    rng = make_rng(seed)
    removals = np.asarray(removals, dtype=float)
    m = len(removals)
    exponents = np.arange(1, m + 1) + np.cumsum(removals[::-1])
    v = rng.uniform(np.nextafter(0.0, 1.0), 1.0, size=m) ** (1 / exponents)
    u = -np.expm1(np.cumsum(np.log(v[::-1])))
    u = np.clip(u, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))
    return np.asarray(quantile(p, u), dtype=float)


def censor_real_data(
    data: npt.ArrayLike, plan: CensoringPlan, seed: SeedLike | np.random.Generator
) -> AdaptiveCensoredSample:
    """Run the censoring mechanism over a fixed dataset.

    The surviving values to withdraw are chosen uniformly at random with ``seed``, ties are kept.

    Raises
    ------
    InvalidPlan
        ``len(data) != plan.n``.
    """
    data = np.asarray(data, dtype=float)
    if len(data) != plan.n:
        raise InvalidPlan(f"the plan puts {plan.n} units on test but {len(data)} values were given")
    if not np.all(data > 0):
        raise DomainError("lifetimes must be positive")
    times = _life_test(data, plan, make_rng(seed))
    sample = AdaptiveCensoredSample.from_times(times, plan)
    log.debug("Censored %d values down to %r", plan.n, sample)
    return sample
