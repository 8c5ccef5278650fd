"""Licensed under The MIT License (MIT) - Copyright (c) 2023-present the gumbel-phcs authors. See LICENSE"""

from __future__ import annotations

import hashlib
import logging
import math
from importlib import resources
from pathlib import Path

import numpy as np
from typing_extensions import Final

from .errors import DataError
from .utils import FloatArray

__all__ = (
    "COVID19_SHA256",
    "parse_values",
    "ingest",
    "load_covid",
)

log = logging.getLogger(__name__)

COVID19_SHA256: Final = "b02a840173449d91c3d8f0921e0c1ea5205050b9ab14f1964202031bde6478f2"
"""The checksum of the bundled death rates due to Covid-19 in India, one value per line."""


def parse_values(text: str) -> FloatArray:
    """Parse positive reals given one per line or comma separated, ignoring blank lines.

    Raises
    ------
    DataError
        A field is not a finite positive number, or there are no values at all.
    """
    values: list[float] = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        for field in line.split(","):
            try:
                value = float(field)
            except ValueError:
                raise DataError(f"cannot parse {field.strip()!r} as a number", number) from None
            if not math.isfinite(value):
                raise DataError(f"lifetimes must be finite, got {value}", number)
            if not value > 0:
                raise DataError(f"lifetimes must be positive, got {value}", number)
            values.append(value)
    if not values:
        raise DataError("no values found")
    return np.array(values)


def ingest(path: str | Path) -> FloatArray:
    """Read a data file with :func:`parse_values`."""
    path = Path(path)
    values = parse_values(path.read_text(encoding="utf-8"))
    log.info("Read %d values from %s", len(values), path)
    return values


def load_covid() -> FloatArray:
    """The 90 bundled death rates due to Covid-19 in India.

    Raises
    ------
    DataError
        The bundled file does not match :data:`COVID19_SHA256`.
    """
    raw = (resources.files("gumbel_phcs") / "data" / "covid19_india.txt").read_bytes()
    digest = hashlib.sha256(raw).hexdigest()
    if digest != COVID19_SHA256:
        raise DataError(f"bundled Covid-19 data is corrupt, sha256 {digest}")
    return parse_values(raw.decode("utf-8"))
