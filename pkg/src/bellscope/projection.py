"""Projection of generalized outcomes onto {-1, +1}, and reduction to ordinary models.

A generalized model lets the observables land in an arbitrary outcome space X
and pairs them with a family of maps ``P_v: X -> {-1, +1}``, one per setting.
What an experiment records is the projected value, so every expectation here
is taken after projection. Composing observables with projections gives an
ordinary +/-1 model (:func:`reduce_to_hvm`) with identical expectations, which
is why no choice of X or projection family can beat the CHSH bound.

For bivector outcomes the canonical projection relative to a unit vector
``xi`` reads off the orientation of rotation about ``xi``::

    P_xi(X) = X_ab eps^nab xi_n / sqrt 2

It is only defined on bivectors orthogonal to ``xi`` (``X_ab xi^a = 0``) with
``X_ab X^ab = 1``; elsewhere :func:`project` raises :class:`DomainError`.
That set holds exactly two bivectors, ``+/- eps.xi / sqrt 2``, and the map
sends them to +1 and -1. Any other sign-equivariant choice agrees with this
one up to an overall sign; that is a claim about the construction, not
something the code checks.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Callable, Literal

import numpy as np

from bellscope.hvm import FiniteStates, HiddenStateSpace, HiddenVariableModel, fibonacci_sphere, sign
from bellscope.tensor import RIGHT_HANDED, UNIT_TOL, Bivector3, LeviCivita, UnitVector3, Vector3, \
    bivector_inner, eps_contract_vector, hodge_dual
from bellscope.weatherall import WeatherallModel

DOMAIN_TOL = 1e-10


class DomainError(ValueError):
    """A bivector outside the set on which the projection is defined."""


class ReductionError(RuntimeError):
    """A generalized observable produced an outcome its projection cannot handle."""

    def __init__(self, side: str, setting: Vector3, state: Any, reason: str):
        self.side = side
        self.setting = setting
        self.state = state
        self.reason = reason
        super().__init__(f"side {side}, setting {_vec_list(setting)}, state {state!r}: {reason}")

    def to_dict(self) -> dict:
        state = self.state.tolist() if isinstance(self.state, np.ndarray) else self.state
        if isinstance(state, np.generic):
            state = state.item()
        return {"error": "reduction", "side": self.side, "setting": _vec_list(self.setting),
                "state": state, "reason": self.reason}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _vec_list(v: Vector3) -> list[float]:
    return [v.x, v.y, v.z]


def _require_unit(v: Vector3) -> None:
    if abs(v.norm() - 1.0) > UNIT_TOL:
        raise ValueError(f"setting must be a unit vector, got norm {v.norm()!r}")


def in_domain_set(xi: Vector3, x: Bivector3) -> bool:
    """Unit self-contraction and ``X_ab xi^a = 0``, each to within 1e-10."""
    _require_unit(xi)
    if abs(bivector_inner(x, x) - 1.0) > DOMAIN_TOL:
        return False
    return x.contract(xi).norm() <= DOMAIN_TOL


def projected_value(xi: Vector3, x: Bivector3, eps: LeviCivita = RIGHT_HANDED) -> float:
    """Unrounded ``X_ab eps^nab xi_n / sqrt 2``, defined for any bivector."""
    return hodge_dual(x, eps).dot(xi) / math.sqrt(2)


def project(xi: Vector3, x: Bivector3, eps: LeviCivita = RIGHT_HANDED) -> int:
    if not in_domain_set(xi, x):
        raise DomainError(f"bivector {x.components} is not a unit bivector orthogonal to {_vec_list(xi)}")
    value = projected_value(xi, x, eps)
    if abs(abs(value) - 1.0) > DOMAIN_TOL:
        raise DomainError(f"projected value {value!r} is not +/-1")
    return 1 if value > 0 else -1


@dataclass(frozen=True)
class ProjectionFamily:
    """``project(v, x)`` maps an outcome ``x`` to +/-1 relative to setting ``v``.

    It takes no hidden state: the experimenter applying it does not know one.
    """

    project: Callable[[UnitVector3, Any], int]
    name: str = "projection"


def bivector_projections(eps: LeviCivita = RIGHT_HANDED) -> ProjectionFamily:
    return ProjectionFamily(lambda v, x: project(v, x, eps), name=f"bivector-orientation({eps.orientation:+d})")


GeneralizedObservable = Callable[[UnitVector3, Any], Any]


@dataclass(frozen=True)
class GeneralizedHVM:
    states: HiddenStateSpace
    outcome_space: str
    observable_A: GeneralizedObservable
    observable_B: GeneralizedObservable
    projections: ProjectionFamily
    name: str = "ghvm"


def _projected(g: GeneralizedHVM, side: Literal["A", "B"], v: UnitVector3, lam: Any) -> int:
    obs = g.observable_A if side == "A" else g.observable_B
    return g.projections.project(v, obs(v, lam))


def _finite(g: GeneralizedHVM) -> FiniteStates:
    if not isinstance(g.states, FiniteStates):
        raise NotImplementedError(f"exact projected expectations need a finite state space ({g.name})")
    return g.states


def projected_single_expectation(g: GeneralizedHVM, side: Literal["A", "B"], v: UnitVector3) -> float:
    if side not in ("A", "B"):
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    _require_unit(v)
    fs = _finite(g)
    return float(sum(p * _projected(g, side, v, lam) for lam, p in zip(fs.states, fs.masses)))


def projected_product_expectation(g: GeneralizedHVM, a: UnitVector3, b: UnitVector3) -> float:
    _require_unit(a)
    _require_unit(b)
    fs = _finite(g)
    return float(sum(p * _projected(g, "A", a, lam) * _projected(g, "B", b, lam)
                     for lam, p in zip(fs.states, fs.masses)))


def reduce_to_hvm(g: GeneralizedHVM) -> HiddenVariableModel:
    """The ordinary model with ``A'(a, lam) = P_a(A(a, lam))`` and ``B'(b, lam) = P_b(B(b, lam))``."""

    def lift(side: Literal["A", "B"]):
        def observable(v: UnitVector3, states: np.ndarray) -> np.ndarray:
            out = np.empty(len(states), dtype=np.int8)
            for i, lam in enumerate(states):
                try:
                    out[i] = _projected(g, side, v, lam)
                except DomainError as exc:
                    raise ReductionError(side, v, lam, str(exc)) from exc
            return out
        return observable

    return HiddenVariableModel(g.states, lift("A"), lift("B"), name=f"reduced({g.name})")


# -- gallery -----------------------------------------------------------------

def weatherall_ghvm(model: WeatherallModel | None = None) -> GeneralizedHVM:
    model = model or WeatherallModel()
    return GeneralizedHVM(
        states=FiniteStates.uniform([1, -1]),
        outcome_space="bivector",
        observable_A=lambda v, lam: model.observable_A(v, int(lam)),
        observable_B=lambda v, lam: model.observable_B(v, int(lam)),
        projections=bivector_projections(model.orientation),
        name="weatherall" if model.orientation.orientation == 1 else "weatherall-left-handed",
    )


def frozen_alice_ghvm() -> GeneralizedHVM:
    """Degenerate variant: Alice's observable ignores the hidden state and always returns ``A(a, +1)``."""
    model = WeatherallModel()
    return GeneralizedHVM(
        states=FiniteStates.uniform([1, -1]),
        outcome_space="bivector",
        observable_A=lambda v, lam: model.observable_A(v, 1),
        observable_B=lambda v, lam: model.observable_B(v, int(lam)),
        projections=bivector_projections(),
        name="frozen-alice",
    )


def hidden_axis_ghvm(k: int = 8) -> GeneralizedHVM:
    """Bivector outcomes whose rotation sense about the setting is fixed by a hidden axis.

    ``A(a, lam) = sign(a.lam) eps.a / sqrt 2`` and ``B(b, lam) = -sign(b.lam) eps.b / sqrt 2``
    over ``k`` equally likely axes.
    """
    r = 1 / math.sqrt(2)

    def obs_a(v: UnitVector3, lam: np.ndarray) -> Bivector3:
        return eps_contract_vector(RIGHT_HANDED, v) * (int(sign(lam @ v.array)) * r)

    def obs_b(v: UnitVector3, lam: np.ndarray) -> Bivector3:
        return eps_contract_vector(RIGHT_HANDED, v) * (-int(sign(lam @ v.array)) * r)

    return GeneralizedHVM(FiniteStates.uniform(fibonacci_sphere(k)), "bivector", obs_a, obs_b,
                          bivector_projections(), name=f"hidden-axis-{k}")


def cosine_ghvm(k: int = 12) -> GeneralizedHVM:
    """Real-valued outcomes ``cos`` of the angle between setting and a hidden in-plane
    direction, projected by their sign. Shows the reduction does not care what X is."""
    angles = 2 * math.pi * (np.arange(k) + 0.25) / k
    dirs = np.stack([np.cos(angles), np.sin(angles), np.zeros(k)], axis=1)

    def obs_a(v: UnitVector3, lam: np.ndarray) -> float:
        return float(lam @ v.array)

    def obs_b(v: UnitVector3, lam: np.ndarray) -> float:
        return -float(lam @ v.array)

    return GeneralizedHVM(FiniteStates.uniform(dirs), "real", obs_a, obs_b,
                          ProjectionFamily(lambda v, x: 1 if x >= 0 else -1, name="sign"),
                          name=f"cosine-{k}")


def ghvm_gallery() -> list[GeneralizedHVM]:
    return [
        weatherall_ghvm(),
        weatherall_ghvm(WeatherallModel(RIGHT_HANDED.flipped())),
        frozen_alice_ghvm(),
        hidden_axis_ghvm(),
        cosine_ghvm(),
    ]
