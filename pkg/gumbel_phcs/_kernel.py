"""Licensed under The MIT License (MIT) - Copyright (c) 2023-present the gumbel-phcs authors. See LICENSE"""

# shared derivative bookkeeping for objectives built from z_i = beta * x_i ** -alpha

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import Params
from .utils import FloatArray


@dataclass(frozen=True, slots=True)
class Kernel:
    log_x: FloatArray
    z: FloatArray
    dz: FloatArray
    """Shape ``(m, 2)``, gradient of each ``z_i`` in ``(alpha, beta)``."""
    d2z: FloatArray
    """Shape ``(m, 2, 2)``."""

    @classmethod
    def at(cls, p: Params, times: FloatArray) -> Kernel:
        log_x = np.log(times)
        x_pow = np.exp(-p.alpha * log_x)
        z = p.beta * x_pow
        dz = np.column_stack((-z * log_x, x_pow))
        d2z = np.zeros((len(times), 2, 2))
        d2z[:, 0, 0] = z * log_x**2
        d2z[:, 0, 1] = d2z[:, 1, 0] = -x_pow * log_x
        return cls(log_x, z, dz, d2z)


def chain(first: FloatArray, second: FloatArray, dz: FloatArray, d2z: FloatArray) -> tuple[FloatArray, FloatArray]:
    """Gradient and Hessian of ``sum_i g_i(z_i)`` given ``g_i'`` (``first``) and ``g_i''`` (``second``)."""
    gradient = first @ dz
    hessian = np.einsum("i,ij,ik->jk", second, dz, dz) + np.einsum("i,ijk->jk", first, d2z)
    return gradient, hessian
