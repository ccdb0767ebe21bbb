"""The bivector-valued two-state model.

Hidden states are lambda in {-1, +1} with mass 1/2 each. For a setting ``v``::

    A(v, lam) =  (lam / sqrt 2) eps_abc v^a
    B(v, lam) = -(lam / sqrt 2) eps_abc v^a

Single-side "expectations" of these observables are bivectors (the zero
bivector), not numbers; only the contraction of A with B is real-valued.
That contraction reproduces -a.b, but it is not the average of any +/-1
record; see :mod:`bellscope.projection` for what happens once outcomes are
recorded as integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

from bellscope.tensor import (
    RIGHT_HANDED,
    UNIT_TOL,
    Bivector3,
    LeviCivita,
    Vector3,
    bivector_inner,
    eps_contract_vector,
)

STATES = (1, -1)
_INV_SQRT2 = 1 / math.sqrt(2)


def _require_unit(v: Vector3) -> None:
    if abs(v.norm() - 1.0) > UNIT_TOL:
        raise ValueError(f"setting must be a unit vector, got norm {v.norm()!r}")


def _require_state(lam: int) -> None:
    if lam not in STATES:
        raise ValueError(f"hidden state must be +1 or -1, got {lam!r}")


@dataclass(frozen=True)
class WeatherallModel:
    orientation: LeviCivita = RIGHT_HANDED

    @property
    def density(self) -> dict[int, float]:
        return {1: 0.5, -1: 0.5}

    def observable_A(self, alpha: Vector3, lam: int) -> Bivector3:
        _require_unit(alpha)
        _require_state(lam)
        return eps_contract_vector(self.orientation, alpha) * (lam * _INV_SQRT2)

    def observable_B(self, beta: Vector3, lam: int) -> Bivector3:
        _require_unit(beta)
        _require_state(lam)
        return eps_contract_vector(self.orientation, beta) * (-lam * _INV_SQRT2)

    def tensor_single_expectation(self, side: Literal["A", "B"], v: Vector3) -> Bivector3:
        if side == "A":
            obs = self.observable_A
        elif side == "B":
            obs = self.observable_B
        else:
            raise ValueError(f"side must be 'A' or 'B', got {side!r}")
        return sum((obs(v, lam) * p for lam, p in self.density.items()), Bivector3.zero())

    def tensor_product_expectation(self, alpha: Vector3, beta: Vector3) -> float:
        """Density-weighted ``A_bc B^bc``; equals -alpha.beta."""
        return sum(p * bivector_inner(self.observable_A(alpha, lam), self.observable_B(beta, lam))
                   for lam, p in self.density.items())


DEFAULT_MODEL = WeatherallModel()


def observable_A(alpha: Vector3, lam: int) -> Bivector3:
    return DEFAULT_MODEL.observable_A(alpha, lam)


def observable_B(beta: Vector3, lam: int) -> Bivector3:
    return DEFAULT_MODEL.observable_B(beta, lam)


def tensor_single_expectation(side: Literal["A", "B"], v: Vector3) -> Bivector3:
    return DEFAULT_MODEL.tensor_single_expectation(side, v)


def tensor_product_expectation(alpha: Vector3, beta: Vector3) -> float:
    return DEFAULT_MODEL.tensor_product_expectation(alpha, beta)
