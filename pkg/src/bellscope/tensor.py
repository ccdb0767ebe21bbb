"""Constant vectors, antisymmetric rank-2 tensors and the Levi-Civita symbol on R^3.

The metric is the Euclidean identity, so raised and lowered indices coincide
and every contraction is a plain sum over the repeated index.

Antisymmetrization carries the factor 1/2::

    wedge(xi, eta)[a, b] = (xi[a] * eta[b] - xi[b] * eta[a]) / 2

Some texts omit the 1/2; here it is kept, so ``wedge(e_x, e_y)[0, 1] == 0.5``.

Two bivectors describe the same oriented rotation state only when they are
equal as tensors. The overall scale is pinned by requiring ``X_ab X^ab = 1``
where that matters (see :mod:`bellscope.projection`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

ATOL = 1e-12
UNIT_TOL = 1e-12


@dataclass(frozen=True)
class Vector3:
    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        for c in (self.x, self.y, self.z):
            if not math.isfinite(c):
                raise ValueError(f"non-finite vector component: {c!r}")
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "z", float(self.z))

    @classmethod
    def from_array(cls, arr: Iterable[float]) -> "Vector3":
        x, y, z = (float(c) for c in arr)
        return cls(x, y, z)

    @property
    def array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def dot(self, other: "Vector3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def __neg__(self) -> "Vector3":
        return Vector3(-self.x, -self.y, -self.z)

    def __add__(self, other: "Vector3") -> "Vector3":
        return Vector3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vector3") -> "Vector3":
        return Vector3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __mul__(self, k: float) -> "Vector3":
        return Vector3(k * self.x, k * self.y, k * self.z)

    __rmul__ = __mul__


class UnitVector3(Vector3):
    """A point of the 2-sphere, i.e. a detector setting."""

    def __post_init__(self) -> None:
        super().__post_init__()
        if abs(self.norm() - 1.0) > UNIT_TOL:
            raise ValueError(f"not a unit vector (norm {self.norm()!r})")

    @classmethod
    def normalized(cls, v: Vector3 | Iterable[float]) -> "UnitVector3":
        arr = v.array if isinstance(v, Vector3) else np.asarray(list(v), dtype=float)
        n = float(np.linalg.norm(arr))
        if not math.isfinite(n) or n == 0.0:
            raise ValueError("cannot normalize a zero or non-finite vector")
        arr = arr / n
        return cls(*arr)

    @classmethod
    def from_angle(cls, degrees: float, plane: str = "xy") -> "UnitVector3":
        """Unit vector at ``degrees`` from the first axis of ``plane`` toward the second."""
        axes = {"x": 0, "y": 1, "z": 2}
        if len(plane) != 2 or plane[0] not in axes or plane[1] not in axes or plane[0] == plane[1]:
            raise ValueError(f"bad plane {plane!r}; expected two distinct letters from xyz")
        t = math.radians(degrees)
        arr = [0.0, 0.0, 0.0]
        arr[axes[plane[0]]] = math.cos(t)
        arr[axes[plane[1]]] = math.sin(t)
        return cls.normalized(arr)

    @classmethod
    def from_spherical(cls, polar: float, azimuth: float) -> "UnitVector3":
        """Angles in radians."""
        s = math.sin(polar)
        return cls.normalized([s * math.cos(azimuth), s * math.sin(azimuth), math.cos(polar)])

    def __neg__(self) -> "UnitVector3":
        return UnitVector3(-self.x, -self.y, -self.z)


E_X = UnitVector3(1.0, 0.0, 0.0)
E_Y = UnitVector3(0.0, 1.0, 0.0)
E_Z = UnitVector3(0.0, 0.0, 1.0)
BASIS = (E_X, E_Y, E_Z)


@dataclass(frozen=True)
class Bivector3:
    """Antisymmetric rank-2 tensor, stored as its three independent components.

    ``components = (w[1][2], w[2][0], w[0][1])``; the remaining entries follow
    from antisymmetry, so an asymmetric tensor cannot be represented at all.
    Use ``b[a, c]`` for indexed access.
    """

    components: tuple[float, float, float]

    def __post_init__(self) -> None:
        comps = tuple(float(c) for c in self.components)
        if len(comps) != 3 or not all(math.isfinite(c) for c in comps):
            raise ValueError(f"bad bivector components: {self.components!r}")
        object.__setattr__(self, "components", comps)

    @classmethod
    def zero(cls) -> "Bivector3":
        return cls((0.0, 0.0, 0.0))

    @classmethod
    def from_matrix(cls, m: np.ndarray, atol: float = ATOL) -> "Bivector3":
        m = np.asarray(m, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"expected a 3x3 array, got shape {m.shape}")
        if np.abs(m + m.T).max() > atol:
            raise ValueError("matrix is not antisymmetric")
        return cls((0.5 * (m[1, 2] - m[2, 1]), 0.5 * (m[2, 0] - m[0, 2]), 0.5 * (m[0, 1] - m[1, 0])))

    @property
    def matrix(self) -> np.ndarray:
        p, q, r = self.components
        return np.array([[0.0, r, -q], [-r, 0.0, p], [q, -p, 0.0]])

    def __getitem__(self, idx: tuple[int, int]) -> float:
        a, b = idx
        return float(self.matrix[a, b])

    def __neg__(self) -> "Bivector3":
        return Bivector3(tuple(-c for c in self.components))

    def __add__(self, other: "Bivector3") -> "Bivector3":
        return Bivector3(tuple(p + q for p, q in zip(self.components, other.components)))

    def __sub__(self, other: "Bivector3") -> "Bivector3":
        return self + (-other)

    def __mul__(self, k: float) -> "Bivector3":
        return Bivector3(tuple(k * c for c in self.components))

    __rmul__ = __mul__

    def __truediv__(self, k: float) -> "Bivector3":
        return Bivector3(tuple(c / k for c in self.components))

    def is_zero(self) -> bool:
        return all(c == 0.0 for c in self.components)

    def contract(self, v: Vector3) -> Vector3:
        """First-slot contraction ``X_ab v^a``."""
        p, q, r = self.components
        return Vector3(q * v.z - r * v.y, r * v.x - p * v.z, p * v.y - q * v.x)


@dataclass(frozen=True)
class LeviCivita:
    """Volume element; ``orientation=+1`` is the right-handed one."""

    orientation: int = 1

    def __post_init__(self) -> None:
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")

    @property
    def tensor(self) -> np.ndarray:
        return _EPS[self.orientation]

    def __getitem__(self, idx: tuple[int, int, int]) -> float:
        return float(self.tensor[idx])

    def flipped(self) -> "LeviCivita":
        return LeviCivita(-self.orientation)


def _levi_civita(orientation: int) -> np.ndarray:
    eps = np.zeros((3, 3, 3))
    for (a, b, c), s in (((0, 1, 2), 1), ((1, 2, 0), 1), ((2, 0, 1), 1),
                         ((0, 2, 1), -1), ((2, 1, 0), -1), ((1, 0, 2), -1)):
        eps[a, b, c] = s * orientation
    eps.setflags(write=False)
    return eps


_EPS = {1: _levi_civita(1), -1: _levi_civita(-1)}

RIGHT_HANDED = LeviCivita(1)


# The operations below are written out in components. With storage
# w = (w[1][2], w[2][0], w[0][1]) and orientation o:
#   eps_abc v^a      -> o * v
#   X_bc eps^abc     -> 2 o w
#   X_ab Y^ab        -> 2 (w . w')
#   [X, Y]           -> w' x w


def wedge(xi: Vector3, eta: Vector3) -> Bivector3:
    """``(xi_a eta_b - xi_b eta_a) / 2``."""
    return Bivector3((
        0.5 * (xi.y * eta.z - xi.z * eta.y),
        0.5 * (xi.z * eta.x - xi.x * eta.z),
        0.5 * (xi.x * eta.y - xi.y * eta.x),
    ))


def eps_contract_vector(eps: LeviCivita, v: Vector3) -> Bivector3:
    """``T_bc = eps_abc v^a``."""
    o = eps.orientation
    return Bivector3((o * v.x, o * v.y, o * v.z))


def bivector_inner(x: Bivector3, y: Bivector3) -> float:
    """Full contraction ``X_ab Y^ab`` (twice the sum over independent components)."""
    p, q, r = x.components
    p2, q2, r2 = y.components
    return 2.0 * (p * p2 + q * q2 + r * r2)


def hodge_dual(x: Bivector3, eps: LeviCivita = RIGHT_HANDED) -> Vector3:
    """``d^a = X_bc eps^abc``; no 1/2, so ``hodge_dual(eps_contract_vector(eps, v)) == 2 v``."""
    k = 2.0 * eps.orientation
    p, q, r = x.components
    return Vector3(k * p, k * q, k * r)


def lie_bracket(x: Bivector3, y: Bivector3) -> Bivector3:
    """``[x, y]_ab = x_an y^n_b - y_an x^n_b``."""
    p, q, r = x.components
    p2, q2, r2 = y.components
    return Bivector3((q2 * r - r2 * q, r2 * p - p2 * r, p2 * q - q2 * p))
