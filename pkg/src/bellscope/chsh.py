"""CHSH statistic, settings search, and bound verification.

The combination is always::

    S = |E(a, b) - E(a, b') + E(a', b) + E(a', b')|

with the single minus on the (a, b') term. Local deterministic models obey
S <= 2; the singlet correlation -a.b reaches 2 sqrt 2.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Literal, Optional, Sequence

import numpy as np

from bellscope.hvm import (
    SCHEMA_VERSION,
    CorrelationEstimate,
    FiniteStates,
    HiddenVariableModel,
    exact_expectations,
    fibonacci_sphere,
    monte_carlo_expectations,
    sample_outcomes,
    sign_model_correlation,
)
from bellscope.quantum import qm_correlation_matrix, qm_joint_distribution, qm_product_expectation, sample_joint
from bellscope.tensor import UnitVector3

CHSH_BOUND = 2.0
ALGEBRAIC_BOUND = 4.0
TSIRELSON = 2.0 * math.sqrt(2.0)
CORRELATOR_TOL = 1e-9
EXACT_TOL = 1e-12
# improvements below this relative size are rounding noise and would only make the search drift
_NOISE = 4 * np.finfo(float).eps


class CorrelatorContractError(ValueError):
    """A correlator returned a value outside [-1, 1]."""


class BoundViolation(AssertionError):
    """A local model exceeded the CHSH bound; for a conforming model this is a bug."""


class Correlator:
    """A pure function ``(a, b) -> E(a, b)`` with an optional batched form.

    ``batch(a_list, b_list)`` must return the matrix ``E[i, j] = E(a_list[i], b_list[j])``.
    """

    def __init__(self, fn: Callable[[UnitVector3, UnitVector3], float], name: str,
                 batch: Optional[Callable[[Sequence[UnitVector3], Sequence[UnitVector3]], np.ndarray]] = None):
        self.fn = fn
        self.name = name
        self._batch = batch

    def __call__(self, a: UnitVector3, b: UnitVector3) -> float:
        return float(self.fn(a, b))

    def matrix(self, a_list: Sequence[UnitVector3], b_list: Sequence[UnitVector3]) -> np.ndarray:
        if self._batch is not None:
            return np.asarray(self._batch(a_list, b_list), dtype=float)
        return np.array([[self.fn(a, b) for b in b_list] for a in a_list], dtype=float)

    def __repr__(self) -> str:
        return f"Correlator({self.name!r})"


def quantum_correlator() -> Correlator:
    return Correlator(qm_product_expectation, "qm", batch=qm_correlation_matrix)


def _sign_model_matrix(a_list: Sequence[UnitVector3], b_list: Sequence[UnitVector3]) -> np.ndarray:
    a = np.array([v.array for v in a_list])
    b = np.array([v.array for v in b_list])
    cross = np.linalg.norm(np.cross(a[:, None, :], b[None, :, :]), axis=2)
    return -1.0 + 2.0 * np.arctan2(cross, a @ b.T) / math.pi


def sign_model_correlator() -> Correlator:
    return Correlator(sign_model_correlation, "sign-model", batch=_sign_model_matrix)


def constant_correlator(value: float, name: str = "constant") -> Correlator:
    return Correlator(lambda a, b: value, name,
                      batch=lambda al, bl: np.full((len(al), len(bl)), float(value)))


def hvm_correlator(m: HiddenVariableModel, n: Optional[int] = None, seed: int = 0) -> Correlator:
    """Exact correlator if ``n`` is None, otherwise a seeded Monte Carlo estimate with ``n`` trials."""
    if n is None:
        return Correlator(lambda a, b: exact_expectations(m, a, b).mean_AB, m.name)
    return Correlator(lambda a, b: monte_carlo_expectations(m, a, b, n, seed).mean_AB, f"{m.name}[mc]")


@dataclass(frozen=True)
class ChshSettings:
    a: UnitVector3
    a_prime: UnitVector3
    b: UnitVector3
    b_prime: UnitVector3

    def __post_init__(self) -> None:
        for v in self.vectors():
            if not isinstance(v, UnitVector3):
                raise TypeError("CHSH settings must be UnitVector3 instances")

    @classmethod
    def coplanar(cls, a: float, a_prime: float, b: float, b_prime: float,
                 plane: str = "xy") -> "ChshSettings":
        """Settings from angles in degrees within ``plane``."""
        f = UnitVector3.from_angle
        return cls(f(a, plane), f(a_prime, plane), f(b, plane), f(b_prime, plane))

    def vectors(self) -> tuple[UnitVector3, UnitVector3, UnitVector3, UnitVector3]:
        return self.a, self.a_prime, self.b, self.b_prime

    def pairs(self) -> tuple[tuple[UnitVector3, UnitVector3], ...]:
        """(a, b), (a, b'), (a', b), (a', b') in CHSH order."""
        return ((self.a, self.b), (self.a, self.b_prime), (self.a_prime, self.b), (self.a_prime, self.b_prime))

    def spherical_degrees(self) -> list[float]:
        """``[polar, azimuth]`` in degrees for a, a', b, b' (flattened)."""
        out: list[float] = []
        for v in self.vectors():
            out.append(math.degrees(math.acos(max(-1.0, min(1.0, v.z)))))
            out.append(math.degrees(math.atan2(v.y, v.x)))
        return out

    def to_dict(self) -> dict:
        names = ("a", "a_prime", "b", "b_prime")
        return {k: [v.x, v.y, v.z] for k, v in zip(names, self.vectors())}


STANDARD_SETTINGS = ChshSettings.coplanar(0.0, 90.0, 45.0, 135.0)


def chsh_combination(e_ab: float, e_abp: float, e_apb: float, e_apbp: float) -> float:
    return abs(e_ab - e_abp + e_apb + e_apbp)


@dataclass(frozen=True)
class ChshReport:
    settings: ChshSettings
    correlations: tuple[float, float, float, float]
    statistic: float
    source: str
    n_trials: int = 0

    @property
    def bound_satisfied(self) -> bool:
        return self.statistic <= CHSH_BOUND

    def to_dict(self) -> dict:
        e = self.correlations
        return {
            "schema_version": SCHEMA_VERSION,
            "source": self.source,
            "settings": self.settings.to_dict(),
            "E_ab": e[0], "E_ab_prime": e[1], "E_a_prime_b": e[2], "E_a_prime_b_prime": e[3],
            "S": self.statistic,
            "bound": CHSH_BOUND,
            "bound_satisfied": self.bound_satisfied,
            "n_trials": self.n_trials,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _check_correlation(value: float, who: str) -> float:
    if not math.isfinite(value) or abs(value) > 1.0 + CORRELATOR_TOL:
        raise CorrelatorContractError(f"{who} returned {value!r}, outside [-1, 1]")
    return value


def chsh_statistic(correlator: Callable[[UnitVector3, UnitVector3], float], s: ChshSettings,
                   source: Optional[str] = None) -> ChshReport:
    label = source or getattr(correlator, "name", getattr(correlator, "__name__", "correlator"))
    e = tuple(_check_correlation(float(correlator(x, y)), label) for x, y in s.pairs())
    return ChshReport(s, e, chsh_combination(*e), label)


# -- search ------------------------------------------------------------------

@dataclass(frozen=True)
class SearchConfig:
    """``coplanar`` searches four angles in ``plane``; ``sphere`` searches eight spherical coordinates.

    ``grid_step_deg`` is the coarse grid spacing (angles for coplanar, approximate
    point spacing on the sphere otherwise); ``refine_passes`` bounds the number of
    coordinate-descent sweeps, which stop once the step falls below ``min_step_deg``.
    """

    mode: Literal["coplanar", "sphere"] = "coplanar"
    grid_step_deg: float = 1.0
    refine_passes: int = 2000
    min_step_deg: float = 1e-9
    plane: str = "xy"

    def __post_init__(self) -> None:
        if self.mode not in ("coplanar", "sphere"):
            raise ValueError(f"unknown search mode {self.mode!r}")
        if not 0 < self.grid_step_deg <= 90:
            raise ValueError("grid_step_deg must be in (0, 90]")
        if self.refine_passes < 0:
            raise ValueError("refine_passes must be >= 0")
        if not self.min_step_deg > 0:
            raise ValueError("min_step_deg must be positive")


@dataclass(frozen=True)
class SearchResult:
    settings: ChshSettings
    s_max: float
    grid_s_max: float
    evaluations: int


def _grid_max(c: np.ndarray) -> tuple[float, tuple[int, int, int, int]]:
    """Exact max of |C[i,j] - C[i,j'] + C[i',j] + C[i',j']| over all index quadruples.

    For fixed (j, j') the terms split into u_i = C[i,j] - C[i,j'] and
    v_i' = C[i',j] + C[i',j'], so the max over (i, i') is
    max(max u + max v, -(min u + min v)).
    """
    best = -1.0
    arg = (0, 0, 0, 0)
    for j in range(c.shape[1]):
        col = c[:, j:j + 1]
        u = col - c
        v = col + c
        hi = u.max(axis=0) + v.max(axis=0)
        lo = -(u.min(axis=0) + v.min(axis=0))
        for vals, pick in ((hi, np.argmax), (lo, np.argmin)):
            jp = int(np.argmax(vals))
            if vals[jp] > best:
                best = float(vals[jp])
                i = int(pick(u[:, jp]))
                ip = int(pick(v[:, jp]))
                arg = (i, ip, j, jp)
    return best, arg


def _settings_from_params(params: np.ndarray, cfg: SearchConfig) -> ChshSettings:
    if cfg.mode == "coplanar":
        return ChshSettings(*(UnitVector3.from_angle(math.degrees(t), cfg.plane) for t in params))
    return ChshSettings(*(UnitVector3.from_spherical(params[2 * k], params[2 * k + 1]) for k in range(4)))


def maximize_chsh(correlator: Callable[[UnitVector3, UnitVector3], float],
                  config: SearchConfig = SearchConfig()) -> SearchResult:
    """Coarse grid search followed by coordinate descent; deterministic for a fixed config."""
    if not isinstance(config, SearchConfig):
        raise TypeError("config must be a SearchConfig")
    if isinstance(correlator, Correlator):
        corr = correlator
    else:
        corr = Correlator(correlator, getattr(correlator, "__name__", "correlator"))

    if config.mode == "coplanar":
        count = int(round(360.0 / config.grid_step_deg))
        angles = np.radians(np.arange(count) * config.grid_step_deg)
        directions = [UnitVector3.from_angle(math.degrees(t), config.plane) for t in angles]
        coords = [[t] for t in angles]
    else:
        count = max(4, int(math.ceil(4 * math.pi / math.radians(config.grid_step_deg) ** 2)))
        pts = fibonacci_sphere(count)
        directions = [UnitVector3.normalized(p) for p in pts]
        coords = [[math.acos(max(-1.0, min(1.0, p[2]))), math.atan2(p[1], p[0])] for p in pts]

    c = corr.matrix(directions, directions)
    if np.any(~np.isfinite(c)) or np.any(np.abs(c) > 1.0 + CORRELATOR_TOL):
        raise CorrelatorContractError(f"{corr.name} returned a value outside [-1, 1] on the grid")
    grid_best, (i, ip, j, jp) = _grid_max(c)
    evaluations = c.size

    params = np.array(coords[i] + coords[ip] + coords[j] + coords[jp], dtype=float)

    def objective(p: np.ndarray) -> float:
        return chsh_statistic(corr, _settings_from_params(p, config)).statistic

    best = objective(params)
    evaluations += 4
    step = math.radians(config.grid_step_deg) / 2
    min_step = math.radians(config.min_step_deg)
    passes = 0
    while step >= min_step and passes < config.refine_passes:
        passes += 1
        improved = False
        for k in range(len(params)):
            for delta in (step, -step):
                trial = params.copy()
                trial[k] += delta
                val = objective(trial)
                evaluations += 4
                if val - best > _NOISE * max(1.0, best):
                    best, params, improved = val, trial, True
                    break
        if not improved:
            step /= 2
    settings = _settings_from_params(params, config)
    return SearchResult(settings, best, grid_best, evaluations)


# -- bound verification ------------------------------------------------------

@dataclass(frozen=True)
class BoundReport:
    model: str
    n_settings: int
    max_statistic: float
    worst: ChshReport
    tolerance: float
    mode: Literal["exact", "monte-carlo"]
    n_trials: int = 0

    @property
    def satisfied(self) -> bool:
        return self.max_statistic <= CHSH_BOUND + self.tolerance

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "model": self.model,
            "mode": self.mode,
            "n_settings": self.n_settings,
            "n_trials": self.n_trials,
            "max_S": self.max_statistic,
            "tolerance": self.tolerance,
            "satisfied": self.satisfied,
            "worst": self.worst.to_dict(),
        }


class _FiniteChsh:
    """Exact CHSH for a finite-state model, evaluating each of the four settings once."""

    def __init__(self, m: HiddenVariableModel):
        self.m = m
        self.states = m.states.states
        self.w = m.states.masses

    def report(self, s: ChshSettings) -> ChshReport:
        A = self.m.outcomes_A(s.a, self.states).astype(float)
        Ap = self.m.outcomes_A(s.a_prime, self.states).astype(float)
        B = self.m.outcomes_B(s.b, self.states).astype(float)
        Bp = self.m.outcomes_B(s.b_prime, self.states).astype(float)
        e = tuple(float(self.w @ (x * y)) for x, y in ((A, B), (A, Bp), (Ap, B), (Ap, Bp)))
        return ChshReport(s, e, chsh_combination(*e), self.m.name)


def verify_bound(m: HiddenVariableModel, sweep: Iterable[ChshSettings],
                 n: Optional[int] = None, seed: int = 0) -> BoundReport:
    """Evaluate CHSH over ``sweep`` and raise :class:`BoundViolation` if any S exceeds 2 + tolerance.

    Exact when ``n`` is None (tolerance 1e-12), Monte Carlo with ``n`` trials per
    correlation otherwise (tolerance 5 / sqrt n).
    """
    if n is None:
        if not m.has_exact:
            raise ValueError(f"model {m.name!r} has no exact expectations; pass n for Monte Carlo")
        corr = _FiniteChsh(m) if isinstance(m.states, FiniteStates) else hvm_correlator(m)
        tol, mode = EXACT_TOL, "exact"
    else:
        if n < 1:
            raise ValueError("n must be >= 1")
        corr = hvm_correlator(m, n, seed)
        tol, mode = 5.0 / math.sqrt(n), "monte-carlo"

    worst: Optional[ChshReport] = None
    count = 0
    for s in sweep:
        r = corr.report(s) if isinstance(corr, _FiniteChsh) else chsh_statistic(corr, s, source=m.name)
        count += 1
        if worst is None or r.statistic > worst.statistic:
            worst = r
    if worst is None:
        raise ValueError("empty settings sweep")
    report = BoundReport(m.name, count, worst.statistic, worst, tol, mode, n or 0)
    if not report.satisfied:
        raise BoundViolation(f"{m.name}: S = {worst.statistic!r} exceeds 2 + {tol:g}; "
                             "a conforming local model cannot do this")
    return report


def random_unit_vectors(rng: np.random.Generator, count: int) -> list[UnitVector3]:
    g = rng.standard_normal((count, 3))
    return [UnitVector3.normalized(row) for row in g]


def random_settings(seed: int, count: int) -> list[ChshSettings]:
    vs = random_unit_vectors(np.random.default_rng(seed), 4 * count)
    return [ChshSettings(*vs[4 * k:4 * k + 4]) for k in range(count)]


def coplanar_grid(step_deg: float, plane: str = "xy") -> list[ChshSettings]:
    """Every quadruple of angles on a ``step_deg`` grid with a = 0 (rotation-invariant correlators only need that)."""
    angles = np.arange(0.0, 360.0, step_deg)
    return [ChshSettings.coplanar(0.0, ap, b, bp, plane) for ap in angles for b in angles for bp in angles]


# -- trial-level CHSH --------------------------------------------------------

def sampled_chsh_qm(s: ChshSettings, n: int, seed: int) -> ChshReport:
    """CHSH from +/-1 records drawn from the singlet joint distribution; pair k uses trials k*n..(k+1)*n-1."""
    e = []
    for k, (x, y) in enumerate(s.pairs()):
        out = sample_joint(qm_joint_distribution(x, y), n, seed, start=k * n)
        e.append(CorrelationEstimate.from_outcomes(out).mean_AB)
    return ChshReport(s, tuple(e), chsh_combination(*e), "qm-sampled", n)


def sampled_chsh_hvm(m: HiddenVariableModel, s: ChshSettings, n: int, seed: int) -> ChshReport:
    """CHSH from simulated +/-1 records of a local model; pair k uses trials k*n..(k+1)*n-1."""
    e = []
    for k, (x, y) in enumerate(s.pairs()):
        out = sample_outcomes(m, x, y, n, seed, start=k * n)
        e.append(CorrelationEstimate.from_outcomes(out).mean_AB)
    return ChshReport(s, tuple(e), chsh_combination(*e), f"{m.name}[sampled]", n)


# -- serialization -----------------------------------------------------------

SWEEP_COLUMNS = (
    ["index"]
    + [f"{v}_{c}_deg" for v in ("a", "a_prime", "b", "b_prime") for c in ("polar", "azimuth")]
    + ["E_ab", "E_ab_prime", "E_a_prime_b", "E_a_prime_b_prime", "S"]
)


def sweep_to_csv(reports: Sequence[ChshReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for i, r in enumerate(reports):
        w.writerow([i, *(f"{x:.10g}" for x in r.settings.spherical_degrees()),
                    *(repr(e) for e in r.correlations), repr(r.statistic)])
    return buf.getvalue()


def sweep_to_json(reports: Sequence[ChshReport]) -> str:
    return json.dumps({"schema_version": SCHEMA_VERSION, "reports": [r.to_dict() for r in reports]}, indent=2)
