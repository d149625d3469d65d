import math

import numpy as np
import pytest

from centralspin.errors import ConfigError, DecoupledModel
from centralspin.model import (
    ModelParams,
    bath_thermal_state,
    build_dense_hamiltonians,
    build_spectrum,
    collective_operators,
    log_xi,
)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 13])
def test_spectrum_matches_dense_eigvalsh(n):
    p = ModelParams(1.7, 3.1, 0.9, n, 1.0)
    analytic = np.sort(build_spectrum(p).eigenvalues())
    dense = np.linalg.eigvalsh(build_dense_hamiltonians(p)[0])
    assert np.allclose(analytic, dense, atol=1e-12)


@pytest.mark.parametrize("n", [1, 4, 9])
def test_eigenvectors_diagonalise_h(n):
    p = ModelParams(2.5, 2.0, 1.3, n, 1.0)
    sp = build_spectrum(p)
    vecs, vals = sp.eigenvectors()
    h = build_dense_hamiltonians(p)[0]
    assert np.abs(h @ vecs - vecs * vals).max() < 1e-12
    assert np.abs(vecs.conj().T @ vecs - np.eye(p.dim)).max() < 1e-12


def test_roots_multiply_to_minus_one():
    sp = build_spectrum(ModelParams(2.5, 2.0, 0.2, 100_000, 1.0))
    assert np.all(np.isfinite(sp.chi_plus)) and np.all(np.isfinite(sp.chi_minus))
    assert np.abs(sp.chi_plus * sp.chi_minus + 1).max() < 1e-12


def test_block_weights_are_normalised():
    sp = build_spectrum(ModelParams(2.5, 2.0, 0.5, 50, 1.0))
    cc, _, ss = sp.block_weights()
    assert np.allclose(cc.sum(axis=0), 1.0)
    assert np.allclose(ss.sum(axis=0), 1.0)


def test_corner_states():
    p = ModelParams(3.0, 1.0, 0.4, 6, 1.0)
    sp = build_spectrum(p)
    assert sp.edge_plus == pytest.approx(2.0)
    assert sp.edge_minus == pytest.approx(-2.0)


def test_collective_operators_commutation():
    jx, jy, jz = collective_operators(5)
    assert np.allclose(jx @ jy - jy @ jx, 1j * jz)
    assert np.allclose(jx @ jx + jy @ jy + jz @ jz, 2.5 * 3.5 * np.eye(6))


def test_interaction_matches_definition():
    p = ModelParams(1.0, 1.0, 0.8, 3, 1.0)
    h, hs, hb, v = build_dense_hamiltonians(p)
    jx, jy, _ = collective_operators(3)
    sx = np.array([[0, 1], [1, 0]])
    sy = np.array([[0, -1j], [1j, 0]])
    ref = 0.8 / math.sqrt(3) * (np.kron(sx, jx) + np.kron(sy, jy))
    assert np.allclose(v, ref)
    assert np.allclose(h, hs + hb + v)


@pytest.mark.parametrize("beta", [1e-3, 0.3, 4.0, 80.0])
def test_log_xi_closed_form(beta):
    p = ModelParams(1.0, 2.3, 0.1, 40, beta)
    st = bath_thermal_state(p)
    assert log_xi(beta, p.omega, p.n_spins) == pytest.approx(st.log_partition, rel=1e-12)
    assert st.weights.sum() == pytest.approx(1.0)


def test_decoupled_spectrum_raises():
    with pytest.raises(DecoupledModel):
        build_spectrum(ModelParams(1.0, 1.0, 0.0, 3, 1.0))


@pytest.mark.parametrize(
    "kwargs",
    [dict(n_spins=0), dict(n_spins=2.5), dict(beta=0.0), dict(beta=math.inf), dict(epsilon=-0.1)],
)
def test_params_validation(kwargs):
    base = dict(omega0=1.0, omega=1.0, epsilon=0.1, n_spins=3, beta=1.0)
    base.update(kwargs)
    with pytest.raises(ConfigError):
        ModelParams(**base)


def test_temperature_round_trip():
    p = ModelParams.from_temperature(1.0, 1.0, 0.1, 3, 0.25)
    assert p.beta == 4.0 and p.temperature == 0.25
