import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import thermal_double_loop
from thzorient.thermal import (
    IncompleteEnsembleError,
    Member,
    boltzmann_weights,
    build_ensemble,
    decompose,
    partition_function,
    thermal_expectation,
)
from thzorient.units import DomainError


def test_zero_temperature_is_ground_state():
    ens = build_ensemble(0.0)
    assert ens.members == (Member(0, 0, 1),)
    assert ens.J0max == 0 and ens.tail_mass == 0.0
    np.testing.assert_array_equal(ens.member_weights(), [1.0])


def test_weight_ratio():
    c = boltzmann_weights(50.0, 3)
    assert c[1] / c[0] == pytest.approx(math.exp(-2 / 50), rel=1e-14)


def test_partition_function_high_temperature_limit():
    # Z ~ T + 1/3 for a linear rotor at high temperature
    assert partition_function(1e4) == pytest.approx(1e4 + 1 / 3, rel=1e-6)


@settings(max_examples=60, deadline=None)
@given(T=st.floats(1e-3, 500.0), cutoff=st.sampled_from([1e-4, 1e-6, 1e-8]))
def test_populations_sum_to_one(T, cutoff):
    ens = build_ensemble(T, cutoff)
    kept = ens.member_weights().sum()
    assert kept + ens.tail_mass == pytest.approx(1.0, abs=1e-12)
    assert ens.tail_mass <= cutoff
    # J0max is minimal
    if ens.J0max > 0:
        J = np.arange(ens.J0max + 1)
        assert np.sum((2 * J[:-1] + 1) * ens.weights[:-1]) / ens.Z < 1 - cutoff


def test_members_sorted_and_folded():
    ens = build_ensemble(20.0)
    keys = [(m.J0, m.M0) for m in ens.members]
    assert keys == sorted(keys)
    assert all(m.multiplicity == (1 if m.M0 == 0 else 2) for m in ens.members)
    assert len(ens.members) == sum(J + 1 for J in range(ens.J0max + 1))


def test_unfolded_enumeration():
    ens = build_ensemble(20.0, fold_m=False)
    assert len(ens.members) == (ens.J0max + 1) ** 2
    assert ens.member_weights().sum() == pytest.approx(build_ensemble(20.0).member_weights().sum())


@pytest.mark.parametrize("T", [0.5, 5.0, 50.0])
def test_expectation_matches_double_loop(T):
    ens = build_ensemble(T)
    rng = np.random.default_rng(1)
    values = {(m.J0, m.M0): rng.uniform(-1, 1) for m in ens.members}
    assert thermal_expectation(values, ens) == pytest.approx(
        thermal_double_loop(values, T, ens.J0max, ens.Z), abs=1e-14
    )


def test_traces_and_decomposition():
    ens = build_ensemble(10.0)
    rng = np.random.default_rng(2)
    arr = rng.uniform(-1, 1, size=(len(ens.members), 7))
    dec = decompose(arr, ens)
    np.testing.assert_allclose(dec.total, thermal_expectation(arr, ens), atol=1e-15)
    np.testing.assert_allclose(dec.zero_T, arr[0] / ens.Z, atol=1e-15)
    np.testing.assert_array_equal(dec.total, dec.zero_T + dec.thermal)


def test_decomposition_at_zero_temperature():
    dec = decompose({(0, 0): 0.3}, build_ensemble(0.0))
    assert (dec.total, dec.zero_T, dec.thermal) == (0.3, 0.3, 0.0)


def test_missing_member_raises():
    ens = build_ensemble(10.0)
    with pytest.raises(IncompleteEnsembleError):
        thermal_expectation({(0, 0): 1.0}, ens)
    with pytest.raises(IncompleteEnsembleError):
        thermal_expectation(np.zeros(2), ens)


def test_domain_errors():
    with pytest.raises(DomainError):
        build_ensemble(-1.0)
    with pytest.raises(DomainError):
        build_ensemble(1.0, cutoff=0.0)
