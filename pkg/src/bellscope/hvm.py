"""Local deterministic hidden-variable models and their expectation values.

A model is the quadruple (states, A, B, rho). Observables are evaluated on a
whole array of hidden states at once::

    observable_A(a: UnitVector3, states: np.ndarray) -> np.ndarray of +/-1

Locality is structural: A only ever sees Alice's setting and B only Bob's.

``rho`` is treated as a probability distribution over the states rather than
literally as a density bounded by 1; for continuous state spaces a density
can exceed 1.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from bellscope.rng import trial_uniforms
from bellscope.tensor import UNIT_TOL, UnitVector3, Vector3

SCHEMA_VERSION = 1

Observable = Callable[[UnitVector3, np.ndarray], np.ndarray]
# (a, b) -> (mean_A, mean_B, mean_AB)
ExactHook = Callable[[UnitVector3, UnitVector3], tuple[float, float, float]]


class UnsupportedExactError(RuntimeError):
    """Exact expectations requested for a model that has no way to compute them."""


class ObservableContractError(ValueError):
    """An observable returned something other than +1/-1."""


@dataclass(frozen=True)
class FiniteStates:
    states: np.ndarray
    masses: np.ndarray

    def __post_init__(self) -> None:
        states = np.asarray(self.states)
        masses = np.asarray(self.masses, dtype=float)
        if len(states) != len(masses) or len(masses) == 0:
            raise ValueError("states and masses must be non-empty and of equal length")
        if np.any(masses < 0) or abs(masses.sum() - 1.0) > 1e-12:
            raise ValueError("masses must be non-negative and sum to 1")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "masses", masses)

    @classmethod
    def uniform(cls, states) -> "FiniteStates":
        states = np.asarray(states)
        return cls(states, np.full(len(states), 1.0 / len(states)))

    def sample_indices(self, u: np.ndarray) -> np.ndarray:
        cdf = np.cumsum(self.masses)
        cdf[-1] = 1.0
        return np.searchsorted(cdf, u, side="right")

    def sample(self, uniforms: np.ndarray) -> np.ndarray:
        return self.states[self.sample_indices(uniforms[:, 0])]


@dataclass(frozen=True)
class ContinuousStates:
    """A state space known only through a sampler.

    ``sampler`` maps an ``(n, 4)`` array of uniforms (one row per trial) to
    ``n`` hidden states.
    """

    sampler: Callable[[np.ndarray], np.ndarray]

    def sample(self, uniforms: np.ndarray) -> np.ndarray:
        return self.sampler(uniforms)


HiddenStateSpace = Union[FiniteStates, ContinuousStates]


@dataclass(frozen=True)
class HiddenVariableModel:
    states: HiddenStateSpace
    observable_A: Observable
    observable_B: Observable
    name: str = "hvm"
    exact_hook: Optional[ExactHook] = field(default=None, compare=False)

    def outcomes_A(self, a: UnitVector3, states: np.ndarray) -> np.ndarray:
        return _checked(self.observable_A(a, states), len(states), f"{self.name}.A")

    def outcomes_B(self, b: UnitVector3, states: np.ndarray) -> np.ndarray:
        return _checked(self.observable_B(b, states), len(states), f"{self.name}.B")

    @property
    def has_exact(self) -> bool:
        return isinstance(self.states, FiniteStates) or self.exact_hook is not None


def _checked(values, n: int, who: str) -> np.ndarray:
    out = np.asarray(values)
    if out.shape != (n,):
        raise ObservableContractError(f"{who} returned shape {out.shape}, expected ({n},)")
    if not np.all((out == 1) | (out == -1)):
        raise ObservableContractError(f"{who} returned values outside {{-1, +1}}")
    return out.astype(np.int8)


def _require_unit(*vs: Vector3) -> None:
    for v in vs:
        if abs(v.norm() - 1.0) > UNIT_TOL:
            raise ValueError(f"setting must be a unit vector, got norm {v.norm()!r}")


@dataclass(frozen=True)
class CorrelationEstimate:
    mean_A: float
    mean_B: float
    mean_AB: float
    n_trials: int
    std_error_AB: float

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "mean_A": self.mean_A,
            "mean_B": self.mean_B,
            "mean_AB": self.mean_AB,
            "n_trials": self.n_trials,
            "std_error_AB": self.std_error_AB,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_outcomes(cls, outcomes: np.ndarray) -> "CorrelationEstimate":
        a = outcomes[:, 0].astype(np.float64)
        b = outcomes[:, 1].astype(np.float64)
        ab = a * b
        n = len(ab)
        sd = float(ab.std(ddof=1)) if n > 1 else 0.0
        return cls(float(a.mean()), float(b.mean()), float(ab.mean()), n, sd / math.sqrt(n))


@dataclass(frozen=True)
class TrialRecord:
    a: UnitVector3
    b: UnitVector3
    outcomes: np.ndarray  # int8, shape (n, 2)
    seed: int

    def __post_init__(self) -> None:
        out = np.asarray(self.outcomes)
        if out.ndim != 2 or out.shape[1] != 2 or not np.all((out == 1) | (out == -1)):
            raise ValueError("outcomes must be an (n, 2) array of +/-1")

    def __len__(self) -> int:
        return len(self.outcomes)

    def summary(self) -> CorrelationEstimate:
        return CorrelationEstimate.from_outcomes(self.outcomes)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial_index", "a_outcome", "b_outcome"])
        for i, (s, t) in enumerate(self.outcomes.tolist()):
            w.writerow([i, s, t])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "a": [self.a.x, self.a.y, self.a.z],
            "b": [self.b.x, self.b.y, self.b.z],
            "seed": self.seed,
            "n_trials": len(self),
            "a_outcomes": self.outcomes[:, 0].tolist(),
            "b_outcomes": self.outcomes[:, 1].tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def exact_expectations(m: HiddenVariableModel, a: UnitVector3, b: UnitVector3) -> CorrelationEstimate:
    """Exact sums over a finite state space, or the model's exact hook."""
    _require_unit(a, b)
    if isinstance(m.states, FiniteStates):
        st, w = m.states.states, m.states.masses
        A = m.outcomes_A(a, st).astype(float)
        B = m.outcomes_B(b, st).astype(float)
        return CorrelationEstimate(float(w @ A), float(w @ B), float(w @ (A * B)), 0, 0.0)
    if m.exact_hook is not None:
        ma, mb, mab = m.exact_hook(a, b)
        return CorrelationEstimate(float(ma), float(mb), float(mab), 0, 0.0)
    raise UnsupportedExactError(f"model {m.name!r} has a continuous state space and no exact hook; "
                                "use monte_carlo_expectations")


def sample_outcomes(m: HiddenVariableModel, a: UnitVector3, b: UnitVector3,
                    n: int, seed: int, start: int = 0) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    _require_unit(a, b)
    u = trial_uniforms(seed, start, start + n)
    if isinstance(m.states, FiniteStates):
        # evaluate once per distinct state, then gather
        idx = m.states.sample_indices(u[:, 0])
        st = m.states.states
        A = m.outcomes_A(a, st)[idx]
        B = m.outcomes_B(b, st)[idx]
    else:
        lam = m.states.sample(u)
        A = m.outcomes_A(a, lam)
        B = m.outcomes_B(b, lam)
    return np.stack([A, B], axis=1)


def simulate_trials(m: HiddenVariableModel, a: UnitVector3, b: UnitVector3,
                    n: int, seed: int) -> TrialRecord:
    return TrialRecord(a, b, sample_outcomes(m, a, b, n, seed), seed)


def monte_carlo_expectations(m: HiddenVariableModel, a: UnitVector3, b: UnitVector3,
                             n: int, seed: int) -> CorrelationEstimate:
    return CorrelationEstimate.from_outcomes(sample_outcomes(m, a, b, n, seed))


def sign(x: np.ndarray) -> np.ndarray:
    """Sign with ``sign(0) = +1``."""
    return np.where(np.asarray(x) >= 0, 1, -1).astype(np.int8)


def uniform_sphere(uniforms: np.ndarray) -> np.ndarray:
    """Map two uniforms per row to a uniformly distributed unit vector (Archimedes)."""
    z = 2.0 * uniforms[:, 0] - 1.0
    phi = 2.0 * math.pi * uniforms[:, 1]
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def sign_model_correlation(a: Vector3, b: Vector3) -> float:
    """Closed-form correlation of the sign model: ``-1 + 2 theta / pi``."""
    # atan2 keeps full precision near theta = 0 and pi, where acos does not
    u, v = a.array, b.array
    theta = math.atan2(float(np.linalg.norm(np.cross(u, v))), float(u @ v))
    return -1.0 + 2.0 * theta / math.pi


def make_sign_model() -> HiddenVariableModel:
    """Uniform hidden axis on the sphere; ``A = sign(a.lam)``, ``B = -sign(b.lam)``."""

    def obs_a(a: UnitVector3, lam: np.ndarray) -> np.ndarray:
        return sign(lam @ a.array)

    def obs_b(b: UnitVector3, lam: np.ndarray) -> np.ndarray:
        return -sign(lam @ b.array)

    return HiddenVariableModel(
        ContinuousStates(uniform_sphere), obs_a, obs_b, name="sign-model",
        exact_hook=lambda a, b: (0.0, 0.0, sign_model_correlation(a, b)),
    )


def fibonacci_sphere(k: int) -> np.ndarray:
    """``k`` nearly evenly spread unit vectors."""
    i = np.arange(k) + 0.5
    z = 1.0 - 2.0 * i / k
    phi = math.pi * (1.0 + math.sqrt(5.0)) * i
    r = np.sqrt(1.0 - z * z)
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def make_finite_sign_model(k: int = 64) -> HiddenVariableModel:
    """The sign model with its hidden axis restricted to ``k`` equally weighted directions."""

    def obs_a(a: UnitVector3, lam: np.ndarray) -> np.ndarray:
        return sign(lam @ a.array)

    def obs_b(b: UnitVector3, lam: np.ndarray) -> np.ndarray:
        return -sign(lam @ b.array)

    return HiddenVariableModel(FiniteStates.uniform(fibonacci_sphere(k)), obs_a, obs_b,
                               name=f"finite-sign-model-{k}")


def make_two_state_model(b_sign: int = 1) -> HiddenVariableModel:
    """Lambda = {-1, +1} with equal mass; ``A = lam``, ``B = b_sign * lam`` for every setting."""
    if b_sign not in (1, -1):
        raise ValueError("b_sign must be +1 or -1")

    def obs_a(a: UnitVector3, lam: np.ndarray) -> np.ndarray:
        return lam

    def obs_b(b: UnitVector3, lam: np.ndarray) -> np.ndarray:
        return b_sign * lam

    label = "same" if b_sign == 1 else "opposite"
    return HiddenVariableModel(FiniteStates.uniform([1, -1]), obs_a, obs_b, name=f"two-state-{label}")


def make_setting_split_model() -> HiddenVariableModel:
    """Four equally likely states; each side reads one of two bits depending on a
    half-space test of its own setting. A small model whose correlation genuinely
    depends on both settings."""
    states = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]])

    def obs_a(a: UnitVector3, lam: np.ndarray) -> np.ndarray:
        return lam[:, 0] if a.x >= 0 else lam[:, 0] * lam[:, 1]

    def obs_b(b: UnitVector3, lam: np.ndarray) -> np.ndarray:
        return -lam[:, 0] if b.y >= 0 else lam[:, 1]

    return HiddenVariableModel(FiniteStates.uniform(states), obs_a, obs_b, name="setting-split")
