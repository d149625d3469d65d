import numpy as np
import pytest

from centralspin.canonical import (
    canonical_hamiltonian,
    canonical_hamiltonian_closed,
    canonical_hamiltonian_general,
    canonical_rates,
    commutator_superop,
    gauge_shift,
    gksl_superop,
    heisenberg_system_hamiltonian,
    minimal_dissipator,
    omega_linear,
    pseudo_kraus,
    tilde_quantities,
)
from centralspin.dynamics import lindbladian, reduced_triplet, system_trajectory
from centralspin.errors import GridTooCoarse, NotHPTA, ThetaSingular
from centralspin.model import SIGMA_Z, ModelParams
from centralspin.states import QubitState

FIG5 = ModelParams.from_temperature(3.5, 4.0, 0.5, 50, 0.1)
FIG6_LEDGER = ModelParams.from_temperature(3.5, 3.0, 0.5, 50, 0.1)
FIG6_PICTURES = ModelParams.from_temperature(3.0, 3.5, 1.0, 50, 0.1)


@pytest.fixture(scope="module")
def fig5_triplet():
    return reduced_triplet(FIG5, np.linspace(0, 30, 50))


def test_omega_starts_at_bare_frequency(fig5_triplet):
    omega, _ = omega_linear(fig5_triplet)
    assert omega[0] == pytest.approx(1.75, abs=1e-12)


def test_closed_form_matches_general(fig5_triplet):
    rates = canonical_rates(fig5_triplet)
    lin, _ = omega_linear(fig5_triplet)
    for k in range(len(fig5_triplet)):
        h = canonical_hamiltonian_general(pseudo_kraus(lindbladian(fig5_triplet.at(k))))
        assert np.abs(h - rates.omega_t[k] * SIGMA_Z).max() < 1e-10
        assert rates.omega_t[k] == pytest.approx(lin[k], abs=1e-10)


def test_omega_derivative_by_finite_difference():
    t = np.array([1.0, 7.3, 21.0])
    h = 1e-5
    _, dot = omega_linear(reduced_triplet(FIG5, t))
    up, _ = omega_linear(reduced_triplet(FIG5, t + h))
    dn, _ = omega_linear(reduced_triplet(FIG5, t - h))
    assert np.allclose(dot, (up - dn) / (2 * h), atol=1e-6)


def test_omega_fig5_range(fig5_triplet):
    omega, _ = omega_linear(fig5_triplet)
    assert omega.min() > 1.5 and omega.max() < 2.0


def test_pseudo_kraus_reconstructs_generator(fig5_triplet):
    l_super = lindbladian(fig5_triplet.at(17))
    pk = pseudo_kraus(l_super)
    assert np.abs(pk.superop() - l_super).max() < 1e-12
    rho = QubitState.from_bloch(0.2, 0.3, -0.4).matrix
    assert np.abs(pk.apply(rho).reshape(4) - l_super @ rho.reshape(4)).max() < 1e-12


def test_minimal_dissipator(fig5_triplet):
    l_super = lindbladian(fig5_triplet.at(23))
    pk = pseudo_kraus(l_super)
    h = canonical_hamiltonian_general(pk)
    md = minimal_dissipator(pk, h)
    assert np.abs(np.trace(md.jumps, axis1=1, axis2=2)).max() < 1e-12
    rho = QubitState.from_bloch(-0.1, 0.5, 0.2).matrix
    assert np.abs(md.apply(rho) - md.apply_direct(rho)).max() < 1e-12
    assert np.abs(gksl_superop(h, md.gammas, md.jumps) - l_super).max() < 1e-12


def test_gauge_shift_leaves_generator_unchanged(fig5_triplet, rng):
    l_super = lindbladian(fig5_triplet.at(5))
    pk = pseudo_kraus(l_super)
    md = minimal_dissipator(pk, canonical_hamiltonian_general(pk))
    shifts = rng.normal(size=4) + 1j * rng.normal(size=4)
    h2, jumps2 = gauge_shift(md.h_can, md.gammas, md.jumps, shifts)
    assert np.abs(gksl_superop(h2, md.gammas, jumps2) - l_super).max() < 1e-12
    assert np.abs(h2 - md.h_can).max() > 1e-3


def test_commutator_superop():
    h = np.array([[1.0, 0.3j], [-0.3j, -0.5]])
    rho = QubitState.from_bloch(0.1, 0.2, 0.3).matrix
    assert np.allclose(commutator_superop(h) @ rho.reshape(4), (-1j * (h @ rho - rho @ h)).reshape(4))


def test_not_hpta_rejected():
    with pytest.raises(NotHPTA):
        pseudo_kraus(np.eye(4))


def test_theta_singular_falls_back():
    tr = reduced_triplet(FIG5, 0.0)
    rates = canonical_rates(tr)
    bad = rates.__class__(**{**rates.__dict__, "theta": np.array(0.0)})
    with pytest.raises(ThetaSingular):
        canonical_hamiltonian_closed(bad)
    assert np.abs(canonical_hamiltonian(tr) - 1.75 * SIGMA_Z).max() < 1e-12


@pytest.mark.parametrize("rho0", [QubitState.excited(), QubitState.ground()], ids=["excited", "ground"])
def test_schrodinger_heisenberg_equivalence(rho0):
    times = np.linspace(0, 20, 9)
    _, _, z = system_trajectory(rho0, reduced_triplet(FIG6_PICTURES, times))
    schr = 0.5 * FIG6_PICTURES.omega0 * z
    heis = [np.trace(heisenberg_system_hamiltonian(FIG6_PICTURES, t) @ rho0.matrix).real for t in times]
    assert np.abs(schr - heis).max() < 1e-10
    omega, _ = omega_linear(reduced_triplet(FIG6_PICTURES, times))
    assert np.abs(omega * z - schr).max() > 1e-9


@pytest.fixture(scope="module")
def ledger():
    rho0 = QubitState.thermal(FIG6_LEDGER.omega0, FIG6_LEDGER.beta)
    return tilde_quantities(FIG6_LEDGER, rho0, 30.0, 301)


def test_tilde_quadrature_matches_direct_energy(ledger):
    assert ledger.quadrature_error < 1e-6
    assert np.abs(ledger.dU_S_tilde - ledger.dU_S_tilde_direct).max() < 1e-8


def test_tilde_entropy_goes_negative(ledger):
    assert ledger.Sigma_tilde.min() < 0
    assert ledger.Sigma_prime.min() < 0


def test_tilde_first_law_closes_on_interaction_work(ledger):
    assert np.abs(ledger.dU_S_tilde + ledger.dU_B_tilde - ledger.W_interaction).max() < 1e-12


def test_coarse_quadrature_is_flagged():
    rho0 = QubitState.thermal(FIG6_LEDGER.omega0, FIG6_LEDGER.beta)
    with pytest.raises(GridTooCoarse):
        tilde_quantities(FIG6_LEDGER, rho0, 30.0, 11, nodes_per_unit=1.0, tol=1e-12)
