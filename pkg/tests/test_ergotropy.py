import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from centralspin.ergotropy import (
    charging_trajectory,
    ergotropy_bloch,
    ergotropy_general,
    ergotropy_split,
    passive_state,
)
from centralspin.model import ModelParams
from centralspin.states import QubitState

bloch = st.tuples(*[st.floats(-1, 1)] * 3).filter(lambda v: sum(c * c for c in v) <= 1.0)


@given(bloch, st.floats(0.1, 10))
@settings(max_examples=300, deadline=None)
def test_bloch_formula_matches_spectral_ordering(v, omega0):
    rho = QubitState.from_bloch(*v)
    h = np.diag([0.5 * omega0, -0.5 * omega0])
    assert ergotropy_general(rho.matrix, h) == pytest.approx(ergotropy_bloch(*v, omega0), abs=1e-12)


@given(bloch)
@settings(max_examples=100, deadline=None)
def test_split_adds_up_and_is_non_negative(v):
    wi, wc = ergotropy_split(QubitState.from_bloch(*v), 2.0)
    assert wi >= 0 and wc >= -1e-15
    assert wi + wc == pytest.approx(ergotropy_bloch(*v, 2.0), abs=1e-14)


def test_passive_state_has_no_ergotropy():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = a @ a.conj().T
    rho /= np.trace(rho)
    h = np.diag([3.0, -1.0, 0.5, 2.0])
    p = passive_state(rho, h)
    assert ergotropy_general(p, h) == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(np.sort(np.linalg.eigvalsh(p)), np.sort(np.linalg.eigvalsh(rho)))


def test_known_states():
    assert ergotropy_bloch(0, 0, 1, 2.5) == pytest.approx(2.5)
    assert ergotropy_bloch(0, 0, -1, 2.5) == 0
    assert ergotropy_bloch(1, 0, 0, 2.0) == pytest.approx(1.0)
    assert ergotropy_split(QubitState.pure(2**-0.5, 2**-0.5), 2.0) == pytest.approx((0.0, 1.0))


def test_charging_criterion():
    p = ModelParams.from_temperature(2.5, 2.0, 2.0, 200, 10.0)
    tr = charging_trajectory(p, np.linspace(0, 50, 2001))
    assert np.array_equal(tr.W_total > 0, tr.eta > 0.5)
    assert tr.n_charging >= 1
    assert tr.zero_crossings >= 2
    assert np.allclose(tr.W_coherent, 0.0)


def test_weak_coupling_cold_bath_never_charges():
    p = ModelParams.from_temperature(2.5, 2.0, 0.5, 50, 1.0)
    assert charging_trajectory(p, np.linspace(0, 50, 2001)).n_charging == 0


def test_charging_does_not_decrease_with_bath_size():
    t = np.linspace(0, 50, 2001)
    small = charging_trajectory(ModelParams.from_temperature(2.5, 2.0, 2.0, 50, 10.0), t).n_charging
    large = charging_trajectory(ModelParams.from_temperature(2.5, 2.0, 2.0, 200, 10.0), t).n_charging
    assert large >= small
