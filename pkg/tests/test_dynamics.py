import numpy as np
import pytest

from centralspin.dynamics import (
    Propagator,
    choi_to_superop,
    dynamical_map,
    generator_rates,
    lindbladian,
    oracle_propagate,
    propagate_joint,
    propagate_system,
    reduced_triplet,
    superop_to_choi,
    system_trajectory,
    system_trajectory_rate,
)
from centralspin.errors import DimensionTooLarge, MapSingular
from centralspin.model import ModelParams, bath_thermal_state, build_spectrum
from centralspin.states import QubitState, reduce_system

from conftest import random_qubit

# reduced states at t = 1.3 for N=4, w0=2.5, w=2, eps=0.7, T=1.5 from the dense oracle
ORACLE_RHO00_EXCITED = 0.6643641344588297
ORACLE_RHO00_GROUND = 0.24049360661178276
ORACLE_DELTA = -0.5440038703178746 + 0.4091482344185798j


def test_frozen_oracle_values(small_params):
    tr = reduced_triplet(small_params, 1.3)
    assert tr.alpha == pytest.approx(ORACLE_RHO00_EXCITED, abs=1e-13)
    assert tr.eta == pytest.approx(ORACLE_RHO00_GROUND, abs=1e-13)
    assert abs(tr.delta - ORACLE_DELTA) < 1e-13


@pytest.mark.parametrize("n", [1, 2, 3, 6, 8])
def test_joint_propagation_matches_oracle(n, rng):
    p = ModelParams.from_temperature(*rng.uniform(0.5, 5, size=2), rng.uniform(0.05, 2), n, rng.uniform(0.1, 10))
    spectrum, bath = build_spectrum(p), bath_thermal_state(p)
    for t in rng.uniform(0, 20, size=5):
        rho = random_qubit(rng)
        a = propagate_joint(rho, p, spectrum, bath, t).matrix
        b = oracle_propagate(rho, p, t).matrix
        assert np.abs(a - b).max() < 1e-11


@pytest.mark.parametrize("n", [1, 5, 10])
def test_reduced_map_matches_joint_trace(n, rng):
    p = ModelParams.from_temperature(3.25, 3.0, 0.5, n, 0.25)
    times = np.linspace(0, 7, 9)
    rho = random_qubit(rng)
    tr = reduced_triplet(p, times)
    for k, t in enumerate(times):
        ref = reduce_system(oracle_propagate(rho, p, t)).matrix
        assert np.abs(propagate_system(rho, tr.at(k)).matrix - ref).max() < 1e-12


def test_propagator_is_unitary(small_params):
    u = Propagator(small_params, 2.7).dense()
    assert np.abs(u @ u.conj().T - np.eye(small_params.dim)).max() < 1e-13


def test_first_and_second_derivatives_by_finite_difference(small_params):
    h = 1e-5
    t = np.array([0.4, 1.9, 5.5])
    c = reduced_triplet(small_params, t)
    lo = reduced_triplet(small_params, t - h)
    hi = reduced_triplet(small_params, t + h)
    for f in ("alpha", "eta", "delta"):
        fd1 = (getattr(hi, f) - getattr(lo, f)) / (2 * h)
        fd2 = (getattr(hi, f) - 2 * getattr(c, f) + getattr(lo, f)) / h**2
        assert np.abs(fd1 - getattr(c, f + "_dot")).max() < 1e-8
        assert np.abs(fd2 - getattr(c, f + "_ddot")).max() < 1e-4


def test_identity_at_zero_and_trace_preservation(small_params):
    tr = reduced_triplet(small_params, np.linspace(0, 10, 21))
    phi = dynamical_map(tr).phi
    assert np.abs(phi[0] - np.eye(4)).max() < 1e-12
    tp = phi[:, 0, :] + phi[:, 3, :]
    assert np.abs(tp - [1, 0, 0, 1]).max() < 1e-12


def test_choi_positive(small_params):
    tr = reduced_triplet(small_params, np.linspace(0, 30, 61))
    m = dynamical_map(tr)
    for k in range(61):
        assert np.linalg.eigvalsh(superop_to_choi(m.phi[k])).min() > -1e-12


def test_choi_round_trip(rng):
    s = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert np.array_equal(choi_to_superop(superop_to_choi(s)), s)


def test_generator_reproduces_rate(small_params, rng):
    """L(t) vec(rho(t)) = d/dt vec(rho(t))."""
    rho = random_qubit(rng)
    t = np.array([0.3, 2.2, 4.1])
    tr = reduced_triplet(small_params, t)
    x, y, z = system_trajectory_rate(rho, tr)
    for k in range(t.size):
        trk = tr.at(k)
        lhs = lindbladian(trk) @ propagate_system(rho, trk).vec()
        rate = 0.5 * np.array([[z[k], x[k] - 1j * y[k]], [x[k] + 1j * y[k], -z[k]]])
        assert np.abs(lhs - rate.reshape(4)).max() < 1e-10


def test_singular_map_raises():
    p = ModelParams(1.0, 1.0, 0.5, 3, 1.0)
    tr = reduced_triplet(p, 0.0)
    # alpha - eta = 1 at t = 0; force a singular map by hand
    bad = tr.__class__(**{**tr.__dict__, "eta": tr.alpha})
    with pytest.raises(MapSingular):
        generator_rates(bad)


def test_decoupled_path_matches_dense():
    p = ModelParams.from_temperature(2.0, 1.5, 0.0, 3, 1.0)
    rho = QubitState.from_bloch(0.3, 0.4, 0.1)
    tr = reduced_triplet(p, 1.7)
    assert tr.alpha == 1.0 and tr.eta == 0.0
    ref = reduce_system(oracle_propagate(rho, p, 1.7)).matrix
    assert np.abs(propagate_system(rho, tr).matrix - ref).max() < 1e-13
    joint = propagate_joint(rho, p, None, bath_thermal_state(p), 1.7).matrix
    assert np.abs(joint - oracle_propagate(rho, p, 1.7).matrix).max() < 1e-13


def test_weak_coupling_limit_is_continuous():
    t = np.linspace(0, 5, 11)
    a = reduced_triplet(ModelParams(2.0, 1.5, 1e-7, 4, 1.0), t)
    b = reduced_triplet(ModelParams(2.0, 1.5, 0.0, 4, 1.0), t)
    assert np.abs(a.delta - b.delta).max() < 1e-6
    assert np.abs(a.alpha - b.alpha).max() < 1e-6


def test_large_n_coefficients_stay_physical():
    tr = reduced_triplet(ModelParams.from_temperature(2.5, 2.0, 0.5, 100_000, 1.0), np.linspace(0, 50, 50))
    assert np.all((tr.alpha >= -1e-12) & (tr.alpha <= 1 + 1e-12))
    assert np.all((tr.eta >= -1e-12) & (tr.eta <= 1 + 1e-12))
    assert np.all(np.abs(tr.delta) <= 1 + 1e-12)


def test_population_only_mode_skips_delta(small_params):
    tr = reduced_triplet(small_params, [0.5, 1.0], coherence=False)
    assert np.all(np.isnan(tr.delta))
    full = reduced_triplet(small_params, [0.5, 1.0])
    assert np.array_equal(tr.alpha, full.alpha)


def test_dimension_guards():
    p = ModelParams(1.0, 1.0, 0.1, 100, 1.0)
    with pytest.raises(DimensionTooLarge):
        oracle_propagate(QubitState.excited(), p, 1.0)
    with pytest.raises(DimensionTooLarge):
        propagate_joint(QubitState.excited(), p, None, bath_thermal_state(p), 1.0, max_spins=50)


def test_heisenberg_and_conjugate_are_adjoint(small_params, rng):
    u = Propagator(small_params, 0.9)
    a = rng.normal(size=(10, 10))
    a = a + a.T
    b = rng.normal(size=(10, 10))
    b = b + b.T
    lhs = np.trace(u.heisenberg(a) @ b)
    rhs = np.trace(a @ u.conjugate(b))
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_system_trajectory_bloch_length(small_params, rng):
    rho = random_qubit(rng)
    x, y, z = system_trajectory(rho, reduced_triplet(small_params, np.linspace(0, 20, 41)))
    assert np.all(x * x + y * y + z * z <= 1 + 1e-12)
