import itertools

import numpy as np
import pytest
from hypothesis import strategies as st

from bellscope.tensor import Bivector3, UnitVector3, Vector3


def perm_parity(p) -> int:
    inversions = sum(1 for i, j in itertools.combinations(range(len(p)), 2) if p[i] > p[j])
    return -1 if inversions % 2 else 1


def brute_eps(orientation: int = 1) -> np.ndarray:
    """Levi-Civita symbol from permutation parity, independent of the package."""
    eps = np.zeros((3, 3, 3))
    for p in itertools.permutations(range(3)):
        eps[p] = orientation * perm_parity(p)
    return eps


def random_units(rng: np.random.Generator, count: int) -> list[UnitVector3]:
    g = rng.standard_normal((count, 3))
    return [UnitVector3.normalized(row) for row in g]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


finite = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)
vectors = st.tuples(finite, finite, finite).map(lambda t: Vector3(*t))
bivectors = st.tuples(finite, finite, finite).map(Bivector3)
units = (st.tuples(finite, finite, finite)
         .filter(lambda t: sum(c * c for c in t) > 1e-6)
         .map(UnitVector3.normalized))
