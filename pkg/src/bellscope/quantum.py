"""Quantum predictions for the EPR-Bohm experiment on the two-qubit singlet.

Everything is computed by explicit complex linear algebra in the basis
``|+z+z>, |+z-z>, |-z+z>, |-z-z>`` (first factor is particle A). Spin
operators have eigenvalues +1/-1, i.e. units with hbar = 2.

The trial-level table returned by :func:`qm_joint_distribution` is not a
prediction that comes with the expectation values; it is the unique
distribution over {-1, +1}^2 with uniform marginals and correlation -a.b,
used only to generate +/-1 records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from bellscope.rng import trial_uniforms
from bellscope.tensor import UNIT_TOL, UnitVector3, Vector3

Side = Literal["A", "B"]

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)
IDENTITY2 = np.eye(2, dtype=complex)

OUTCOMES = ((1, 1), (1, -1), (-1, 1), (-1, -1))


def _require_unit(n: Vector3) -> None:
    if abs(n.norm() - 1.0) > UNIT_TOL:
        raise ValueError(f"setting must be a unit vector, got norm {n.norm()!r}")


@dataclass(frozen=True)
class QuantumState:
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (4,) or not np.all(np.isfinite(amps)):
            raise ValueError("expected 4 finite amplitudes")
        if abs(np.vdot(amps, amps).real - 1.0) > 1e-12:
            raise ValueError("state is not normalized")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def expectation(self, op: np.ndarray) -> float:
        value = np.vdot(self.amplitudes, op @ self.amplitudes)
        return float(value.real)


@dataclass(frozen=True)
class SpinObservable:
    n: UnitVector3
    matrix: np.ndarray


def make_spin_observable(n: Vector3) -> SpinObservable:
    _require_unit(n)
    m = n.x * SIGMA_X + n.y * SIGMA_Y + n.z * SIGMA_Z
    m.setflags(write=False)
    return SpinObservable(UnitVector3(n.x, n.y, n.z), m)


def spin_eigenvectors(n: Vector3) -> tuple[np.ndarray, np.ndarray]:
    """Normalized ``|n,+>`` and ``|n,->`` from diagonalizing sigma.n."""
    vals, vecs = np.linalg.eigh(make_spin_observable(n).matrix)
    # eigh sorts ascending: -1 first
    return vecs[:, 1], vecs[:, 0]


def singlet_state() -> QuantumState:
    r = 1 / math.sqrt(2)
    return QuantumState(np.array([0, r, -r, 0], dtype=complex))


def qm_single_expectation(side: Side, n: Vector3) -> float:
    sigma_n = make_spin_observable(n).matrix
    if side == "A":
        op = np.kron(sigma_n, IDENTITY2)
    elif side == "B":
        op = np.kron(IDENTITY2, sigma_n)
    else:
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    return singlet_state().expectation(op)


def qm_product_expectation(a: Vector3, b: Vector3) -> float:
    """<Psi| (sigma.a) x (sigma.b) |Psi> by explicit 4x4 matrix algebra."""
    op = np.kron(make_spin_observable(a).matrix, make_spin_observable(b).matrix)
    return singlet_state().expectation(op)


def qm_correlation_matrix(a_list: Sequence[Vector3], b_list: Sequence[Vector3]) -> np.ndarray:
    """Batched :func:`qm_product_expectation`; entry ``[i, j]`` pairs ``a_list[i]`` with ``b_list[j]``."""
    for v in (*a_list, *b_list):
        _require_unit(v)
    sig = np.stack(PAULI)
    sa = np.einsum("nk,kij->nij", np.array([v.array for v in a_list]), sig)
    sb = np.einsum("mk,kij->mij", np.array([v.array for v in b_list]), sig)
    psi = singlet_state().amplitudes.reshape(2, 2)
    # <psi| sa (x) sb |psi> with psi indexed (A, B)
    val = np.einsum("ik,nij,mkl,jl->nm", psi.conj(), sa, sb, psi)
    return val.real


def qm_joint_distribution(a: Vector3, b: Vector3) -> dict[tuple[int, int], float]:
    """``P(s, t) = (1 - s t a.b) / 4`` over ``(s, t)`` in {-1, +1}^2."""
    _require_unit(a)
    _require_unit(b)
    c = a.dot(b)
    return {(s, t): (1 - s * t * c) / 4 for s, t in OUTCOMES}


def sample_joint(table: dict[tuple[int, int], float], n: int, seed: int,
                 start: int = 0) -> np.ndarray:
    """Draw trials ``start..start+n-1`` from a joint table; returns int8 array of shape ``(n, 2)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    probs = np.array([table[o] for o in OUTCOMES])
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    u = trial_uniforms(seed, start, start + n)[:, 0]
    idx = np.searchsorted(cdf, u, side="right")
    return np.array(OUTCOMES, dtype=np.int8)[idx]
