"""Licensed under The MIT License (MIT) - Copyright (c) 2023-present the gumbel-phcs authors. See LICENSE"""

from __future__ import annotations

from enum import Enum, IntEnum

__all__ = (
    "SchemeKind",
    "ComparatorFamily",
    "Estimator",
    "LossKind",
    "IntervalMethod",
    "ExitStatus",
)


# fmt: off
class SchemeKind(IntEnum):
    """The removal schemes used throughout the simulation study."""
    Terminal   = 1
    """``(0, ..., 0, n - m)``, every removal happens at the last failure."""
    FrontLoad  = 2
    """``(n - 2m + 1, 1, ..., 1)``."""
    FrontTail  = 3
    """``(n - m - 5, 0, ..., 0, 1, 1, 1, 1, 1)``."""


class ComparatorFamily(str, Enum):
    NH       = "NH"
    BurrIII  = "BurrIII"
    IKum     = "IKum"


class Estimator(str, Enum):
    MLE    = "MLE"
    MPS    = "MPS"
    SELF   = "SELF"
    LINEX  = "LINEX"
    GELF   = "GELF"


class LossKind(str, Enum):
    SELF   = "SELF"
    LINEX  = "LINEX"
    GELF   = "GELF"


class IntervalMethod(str, Enum):
    ACI    = "ACI"
    BootP  = "BootP"
    BootT  = "BootT"
    HPD    = "HPD"


class ExitStatus(IntEnum):
    Success     = 0
    Unexpected  = 1
    Config      = 2
    Estimation  = 3
    IO          = 4
# fmt: on
