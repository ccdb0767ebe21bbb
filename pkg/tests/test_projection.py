import json
import math

import numpy as np
import pytest

from bellscope.chsh import random_settings, verify_bound
from bellscope.hvm import FiniteStates, exact_expectations
from bellscope.projection import (
    DomainError,
    GeneralizedHVM,
    ProjectionFamily,
    ReductionError,
    bivector_projections,
    frozen_alice_ghvm,
    ghvm_gallery,
    in_domain_set,
    project,
    projected_product_expectation,
    projected_single_expectation,
    projected_value,
    reduce_to_hvm,
    weatherall_ghvm,
)
from bellscope.quantum import qm_product_expectation
from bellscope.tensor import E_X, E_Y, E_Z, RIGHT_HANDED, Bivector3, UnitVector3, eps_contract_vector, wedge
from bellscope.weatherall import observable_A, observable_B, tensor_product_expectation

from conftest import brute_eps, random_units


def random_domain_member(rng, xi):
    """A unit bivector orthogonal to xi: (+/-) eps.xi / sqrt 2."""
    s = 1 if rng.random() < 0.5 else -1
    return eps_contract_vector(RIGHT_HANDED, xi) * (s / math.sqrt(2))


# -- domain set --------------------------------------------------------------

def test_observable_is_in_domain(rng):
    for xi in random_units(rng, 20):
        assert in_domain_set(xi, observable_A(xi, 1))
        assert in_domain_set(xi, observable_B(xi, -1))


def test_wedge_fails_normalization():
    assert not in_domain_set(E_Z, wedge(E_X, E_Y))


def test_scaled_wedge_fails_orthogonality():
    x = wedge(E_X, E_Y) * math.sqrt(2)
    assert in_domain_set(E_Z, x)
    assert not in_domain_set(E_X, x)


# -- projection --------------------------------------------------------------

def test_projected_value_matches_index_oracle(rng):
    eps = brute_eps()
    for xi in random_units(rng, 20):
        x = Bivector3(tuple(rng.standard_normal(3)))
        brute = sum(x.matrix[a, b] * eps[n, a, b] * xi.array[n]
                    for a in range(3) for b in range(3) for n in range(3)) / math.sqrt(2)
        assert projected_value(xi, x) == pytest.approx(brute, abs=1e-12)


def test_round_trip_on_observables(rng):
    for v in random_units(rng, 100):
        for lam in (1, -1):
            assert project(v, observable_A(v, lam)) == lam
            assert project(v, observable_B(v, lam)) == -lam


def test_sign_equivariance(rng):
    for xi in random_units(rng, 100):
        x = random_domain_member(rng, xi)
        assert project(xi, -x) == -project(xi, x)


def test_project_outside_domain_raises():
    with pytest.raises(DomainError):
        project(E_Z, wedge(E_X, E_Y))
    with pytest.raises(DomainError):
        project(E_X, wedge(E_X, E_Y) * math.sqrt(2))


def test_project_returns_exact_int(rng):
    for xi in random_units(rng, 10):
        v = project(xi, observable_A(xi, 1))
        assert type(v) is int and v == 1


def test_only_two_values_on_each_domain_set(rng):
    # Any unit bivector orthogonal to xi is one of +/- eps.xi / sqrt 2, so the projection
    # takes exactly the two canonical values there.
    for xi in random_units(rng, 20):
        for _ in range(5):
            x = random_domain_member(rng, xi)
            assert project(xi, x) in (1, -1)
            assert {project(xi, x), project(xi, -x)} == {1, -1}


# -- projected expectations --------------------------------------------------

def test_weatherall_projected_singles_vanish(rng):
    g = weatherall_ghvm()
    for v in random_units(rng, 50):
        assert projected_single_expectation(g, "A", v) == 0.0
        assert projected_single_expectation(g, "B", v) == 0.0


def test_frozen_alice_single_is_one(rng):
    g = frozen_alice_ghvm()
    for v in random_units(rng, 10):
        assert projected_single_expectation(g, "A", v) == 1.0


def test_weatherall_projected_product_is_minus_one(rng):
    g = weatherall_ghvm()
    for a, b in zip(random_units(rng, 200), random_units(rng, 200)):
        assert projected_product_expectation(g, a, b) == -1.0


def test_central_mismatch_at_orthogonal_settings():
    g = weatherall_ghvm()
    assert projected_product_expectation(g, E_X, E_Y) == -1.0
    assert tensor_product_expectation(E_X, E_Y) == pytest.approx(0.0, abs=1e-12)
    assert qm_product_expectation(E_X, E_Y) == pytest.approx(0.0, abs=1e-12)


def test_mismatch_sweep_follows_one_minus_cosine():
    g = weatherall_ghvm()
    for deg in np.arange(0, 181, 1.0):
        b = UnitVector3.from_angle(deg)
        gap = abs(projected_product_expectation(g, E_X, b) - qm_product_expectation(E_X, b))
        assert gap == pytest.approx(1 - math.cos(math.radians(deg)), abs=1e-12)
    b = UnitVector3.from_angle(90)
    assert abs(projected_product_expectation(g, E_X, b) - qm_product_expectation(E_X, b)) == pytest.approx(1, abs=1e-12)


def test_equal_settings_anticorrelated_gallery(rng):
    for g in ghvm_gallery():
        if g.name == "frozen-alice":
            continue
        for v in random_units(rng, 5):
            assert projected_product_expectation(g, v, v) == -1.0


# -- reduction ---------------------------------------------------------------

def test_reduced_weatherall_values(rng):
    m = reduce_to_hvm(weatherall_ghvm())
    lam = np.array([1, -1])
    for v in random_units(rng, 20):
        assert m.outcomes_A(v, lam).tolist() == [1, -1]
        assert m.outcomes_B(v, lam).tolist() == [-1, 1]


def test_reduced_weatherall_correlation(rng):
    m = reduce_to_hvm(weatherall_ghvm())
    for a, b in zip(random_units(rng, 100), random_units(rng, 100)):
        assert exact_expectations(m, a, b).mean_AB == -1.0


@pytest.mark.parametrize("g", ghvm_gallery(), ids=lambda g: g.name)
def test_reduction_faithful(g, rng):
    m = reduce_to_hvm(g)
    for a, b in zip(random_units(rng, 50), random_units(rng, 50)):
        ex = exact_expectations(m, a, b)
        assert abs(ex.mean_AB - projected_product_expectation(g, a, b)) <= 1e-12
        assert abs(ex.mean_A - projected_single_expectation(g, "A", a)) <= 1e-12
        assert abs(ex.mean_B - projected_single_expectation(g, "B", b)) <= 1e-12


@pytest.mark.parametrize("g", ghvm_gallery(), ids=lambda g: g.name)
def test_reduced_gallery_obeys_chsh(g):
    report = verify_bound(reduce_to_hvm(g), random_settings(5, 300))
    assert report.max_statistic <= 2 + 1e-12


def test_reduced_weatherall_chsh_is_two():
    report = verify_bound(reduce_to_hvm(weatherall_ghvm()), random_settings(9, 200))
    assert report.max_statistic == 2.0
    assert report.worst.correlations == (-1.0, -1.0, -1.0, -1.0)


def test_reduction_error_carries_diagnostics():
    bad = GeneralizedHVM(FiniteStates.uniform([1, -1]), "bivector",
                         lambda v, lam: wedge(E_X, E_Y), lambda v, lam: observable_B(v, int(lam)),
                         bivector_projections(), name="bad")
    m = reduce_to_hvm(bad)
    with pytest.raises(ReductionError) as info:
        exact_expectations(m, E_Z, E_Z)
    d = json.loads(info.value.to_json())
    assert d["side"] == "A" and d["setting"] == [0.0, 0.0, 1.0] and d["state"] == 1
    assert "orthogonal" in d["reason"]


def test_projection_domain_errors_propagate():
    bad = GeneralizedHVM(FiniteStates.uniform([1, -1]), "bivector",
                         lambda v, lam: wedge(E_X, E_Y), lambda v, lam: wedge(E_X, E_Y),
                         bivector_projections(), name="bad")
    with pytest.raises(DomainError):
        projected_product_expectation(bad, E_Z, E_Z)


def test_opaque_outcome_space():
    # X is a string label; the framework never looks inside it
    g = GeneralizedHVM(FiniteStates.uniform([0, 1]), "labels",
                       lambda v, lam: "up" if lam else "down",
                       lambda v, lam: "down" if lam else "up",
                       ProjectionFamily(lambda v, x: 1 if x == "up" else -1), name="labels")
    assert projected_product_expectation(g, E_X, E_Y) == -1.0
    assert exact_expectations(reduce_to_hvm(g), E_X, E_Y).mean_AB == -1.0
