"""Licensed under The MIT License (MIT) - Copyright (c) 2023-present the gumbel-phcs authors. See LICENSE"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from typing import Any, Union

import numpy as np
import numpy.typing as npt
from typing_extensions import TypeAlias

__all__ = (
    "SeedLike",
    "make_rng",
    "child_seeds",
    "log1mexp",
    "inv_expm1",
    "round_sig",
    "rank_index",
)

SeedLike: TypeAlias = Union[int, np.random.SeedSequence]
FloatArray: TypeAlias = npt.NDArray[np.float64]

_LN2 = math.log(2.0)


def make_rng(seed: SeedLike | np.random.Generator) -> np.random.Generator:
    """Return a generator for ``seed``. Generators are passed through untouched so callers keep ownership."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def child_seeds(seed: SeedLike, *key: int, count: int = 1) -> list[np.random.SeedSequence]:
    """Derive ``count`` independent seed sequences from ``seed`` and an integer counter ``key``.

    The derivation only depends on ``(seed, key, index)`` so replicates can be computed in any order or
    in parallel and still be reproduced bit for bit.
    """
    if isinstance(seed, np.random.SeedSequence):
        entropy, base_key = seed.entropy, tuple(seed.spawn_key)
    else:
        entropy, base_key = int(seed), ()
    return [np.random.SeedSequence(entropy, spawn_key=(*base_key, *key, index)) for index in range(count)]


def log1mexp(z: npt.ArrayLike) -> FloatArray:
    """``log(1 - exp(-z))`` for ``z > 0`` without cancellation at either end."""
    z = np.asarray(z, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(z < _LN2, np.log(-np.expm1(-z)), np.log1p(-np.exp(-z)))


def inv_expm1(z: npt.ArrayLike) -> FloatArray:
    """``exp(-z) / (1 - exp(-z))``, the derivative of :func:`log1mexp`."""
    z = np.asarray(z, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        return 1.0 / np.expm1(z)


def round_sig(value: Any, digits: int = 10) -> Any:
    """Recursively round every float in ``value`` to ``digits`` significant digits for stable serialisation."""
    if isinstance(value, (bool, int, str)) or value is None:
        return value
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return str(value)
        return float(f"{value:.{digits}g}")
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.ndarray):
        return round_sig(value.tolist(), digits)
    if isinstance(value, Mapping):
        return {str(k): round_sig(v, digits) for k, v in value.items()}
    if isinstance(value, Sequence):
        return [round_sig(v, digits) for v in value]
    return value


def rank_index(count: int, probability: float) -> int:
    """0-based index of the order statistic of rank ``ceil(count * probability)``, clipped to ``[0, count)``."""
    rank = math.ceil(count * probability - 1e-9)
    return min(max(rank, 1), count) - 1
