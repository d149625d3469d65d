"""Exact reduced and joint dynamics of the central spin.

The reduced map is fixed by three coefficients: rho_00(t) = alpha rho_00 + eta rho_11
and rho_01(t) = delta rho_01.  They are evaluated in O(N) per time from the
analytic eigensystem, together with their first and second time derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionTooLarge, MapSingular
from .model import (
    BathThermalState,
    ModelParams,
    Spectrum,
    bath_thermal_state,
    build_dense_hamiltonians,
    build_spectrum,
)
from .states import JointState, QubitState, product_state

DEFAULT_MAX_JOINT_SPINS = 4096
DEFAULT_MAX_ORACLE_SPINS = 64
# elements per chunk of the (time x block) work arrays
_CHUNK = 2_000_000


@dataclass(frozen=True)
class PropagatorTriplet:
    """alpha, eta, delta and derivatives; scalars or equal-shape arrays over ``t``."""

    t: np.ndarray
    alpha: np.ndarray
    eta: np.ndarray
    delta: np.ndarray
    alpha_dot: np.ndarray
    eta_dot: np.ndarray
    delta_dot: np.ndarray
    alpha_ddot: np.ndarray
    eta_ddot: np.ndarray
    delta_ddot: np.ndarray

    def __len__(self):
        return np.size(self.t)

    def at(self, i) -> "PropagatorTriplet":
        return PropagatorTriplet(*(np.asarray(getattr(self, f))[i] for f in _TRIPLET_FIELDS))


_TRIPLET_FIELDS = tuple(PropagatorTriplet.__dataclass_fields__)


def _scalar_or_array(x, scalar):
    return x[0] if scalar else x


def propagator_triplet(
    spectrum: Spectrum, bath: BathThermalState, t, coherence: bool = True
) -> PropagatorTriplet:
    """Evaluate the map coefficients at time(s) ``t``.

    ``coherence=False`` skips delta (left as NaN), which is all the population
    sweeps need and roughly triples throughput at large N.
    """
    scalar = np.ndim(t) == 0
    times = np.atleast_1d(np.asarray(t, dtype=float))
    N = spectrum.params.n_spins
    p = bath.weights
    cc, cs, ss = spectrum.block_weights()
    freq = spectrum.root / N
    # population weights: alpha uses p_n (n = 1..N), eta uses p_{n-1}
    pa = p[1:]
    pe = p[:-1]
    amp_a_const = pa @ (cc[0] ** 2 + cc[1] ** 2)
    amp_e_const = pe @ (cs[0] ** 2 + cs[1] ** 2)
    amp_a_osc = 2.0 * pa * cc[0] * cc[1]
    amp_e_osc = 2.0 * pe * cs[0] * cs[1]

    out = {f: np.empty(times.shape) for f in ("alpha", "eta", "alpha_dot", "eta_dot", "alpha_ddot", "eta_ddot")}
    for f in ("delta", "delta_dot", "delta_ddot"):
        out[f] = np.full(times.shape, np.nan + 0j)

    step = max(1, _CHUNK // max(N, 1))
    for start in range(0, times.size, step):
        sl = slice(start, start + step)
        tt = times[sl, None]
        phase = freq[None, :] * tt
        c = np.cos(phase)
        s = np.sin(phase)
        out["alpha"][sl] = p[0] + amp_a_const + c @ amp_a_osc
        out["eta"][sl] = amp_e_const + c @ amp_e_osc
        out["alpha_dot"][sl] = -(s @ (amp_a_osc * freq))
        out["eta_dot"][sl] = -(s @ (amp_e_osc * freq))
        out["alpha_ddot"][sl] = -(c @ (amp_a_osc * freq**2))
        out["eta_ddot"][sl] = -(c @ (amp_e_osc * freq**2))
        if coherence:
            d0, d1, d2 = _coherence(spectrum, p, cc, ss, times[sl])
            out["delta"][sl] = d0
            out["delta_dot"][sl] = d1
            out["delta_ddot"][sl] = d2

    return PropagatorTriplet(
        t=_scalar_or_array(times, scalar),
        **{k: _scalar_or_array(v, scalar) for k, v in out.items()},
    )


def _coherence(spectrum, p, cc, ss, times):
    """delta(t) = sum_m p_m <0,m|U|0,m> conj(<1,m|U|1,m>) and two derivatives."""
    lam = np.stack([spectrum.lambda_plus, spectrum.lambda_minus])  # (2, N)
    edge = spectrum.edge_plus
    tt = times[:, None, None]
    e = np.exp(-1j * lam[None] * tt)  # (T, 2, N)
    # a_n = <0,n|U|0,n>, b_n = <1,n-1|U|1,n-1> for blocks n = 1..N
    a0 = np.einsum("kn,tkn->tn", cc, e)
    b0 = np.einsum("kn,tkn->tn", ss, e)
    a1 = np.einsum("kn,tkn->tn", cc * (-1j * lam), e)
    b1 = np.einsum("kn,tkn->tn", ss * (-1j * lam), e)
    a2 = np.einsum("kn,tkn->tn", cc * (-lam * lam), e)
    b2 = np.einsum("kn,tkn->tn", ss * (-lam * lam), e)

    corner = np.exp(-1j * edge * times)  # <0,0|U|0,0> = conj(<1,N|U|1,N>)
    cb0, cb1, cb2 = b0.conj(), b1.conj(), b2.conj()
    pm = p[1:-1]

    def bulk(x, y):
        # sum over m = 1..N-1 of p_m x_m conj(b_{m+1})
        return (x[:, :-1] * y[:, 1:]) @ pm

    w = -1j * edge
    # boundary part g(t) = corner(t) * h(t) with h = p_0 conj(b_1) + p_N a_N
    h0 = p[0] * cb0[:, 0] + p[-1] * a0[:, -1]
    h1 = p[0] * cb1[:, 0] + p[-1] * a1[:, -1]
    h2 = p[0] * cb2[:, 0] + p[-1] * a2[:, -1]
    d0 = corner * h0 + bulk(a0, cb0)
    d1 = corner * (w * h0 + h1) + bulk(a1, cb0) + bulk(a0, cb1)
    d2 = corner * (w * w * h0 + 2 * w * h1 + h2) + bulk(a2, cb0) + 2 * bulk(a1, cb1) + bulk(a0, cb2)
    return d0, d1, d2


def decoupled_triplet(params: ModelParams, t) -> PropagatorTriplet:
    """Map coefficients at epsilon = 0: populations frozen, coherence rotates at omega0."""
    t = np.asarray(t, dtype=float)
    w = params.omega0
    one, zero = np.ones_like(t), np.zeros_like(t)
    d = np.exp(-1j * w * t)
    return PropagatorTriplet(t, one, zero, d, zero, zero, -1j * w * d, zero, zero, -w * w * d)


def reduced_triplet(params: ModelParams, t, coherence: bool = True) -> PropagatorTriplet:
    """Dispatch between the analytic eigensystem and the decoupled path."""
    if params.decoupled:
        return decoupled_triplet(params, t)
    return propagator_triplet(build_spectrum(params), bath_thermal_state(params), t, coherence)


def propagate_system(rho0: QubitState, triplet: PropagatorTriplet) -> QubitState:
    r = rho0.matrix
    r00 = triplet.alpha * r[0, 0].real + triplet.eta * r[1, 1].real
    r01 = triplet.delta * r[0, 1]
    return QubitState(np.array([[r00, r01], [np.conj(r01), 1.0 - r00]], dtype=complex))


def system_trajectory(rho0: QubitState, triplet: PropagatorTriplet):
    """Vectorised version of :func:`propagate_system`: returns (x, y, z) arrays."""
    r = rho0.matrix
    z = 2.0 * (triplet.alpha * r[0, 0].real + triplet.eta * r[1, 1].real) - 1.0
    c = triplet.delta * r[0, 1]
    return 2.0 * np.real(c), -2.0 * np.imag(c), z


def system_trajectory_rate(rho0: QubitState, triplet: PropagatorTriplet):
    """Time derivatives of the Bloch components."""
    r = rho0.matrix
    zd = 2.0 * (triplet.alpha_dot * r[0, 0].real + triplet.eta_dot * r[1, 1].real)
    c = triplet.delta_dot * r[0, 1]
    return 2.0 * np.real(c), -2.0 * np.imag(c), zd


@dataclass(frozen=True)
class DynamicalMap:
    phi: np.ndarray
    t: float

    def apply(self, rho: QubitState) -> QubitState:
        return QubitState((self.phi @ rho.vec()).reshape(2, 2))

    def choi(self) -> np.ndarray:
        return superop_to_choi(self.phi)


def superop_to_choi(s: np.ndarray) -> np.ndarray:
    """Reshuffle a row-major 4x4 superoperator into its Choi matrix.

    With ``S = sum_j g_j E_j (x) conj(E_j)`` the result is ``sum_j g_j vec(E_j) vec(E_j)^dagger``.
    """
    return s.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)


def choi_to_superop(c: np.ndarray) -> np.ndarray:
    return c.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)


def dynamical_map(triplet: PropagatorTriplet) -> DynamicalMap:
    a, e, d = triplet.alpha, triplet.eta, triplet.delta
    phi = np.zeros(np.shape(a) + (4, 4), dtype=complex)
    phi[..., 0, 0] = a
    phi[..., 0, 3] = e
    phi[..., 1, 1] = d
    phi[..., 2, 2] = np.conj(d)
    phi[..., 3, 0] = 1.0 - a
    phi[..., 3, 3] = 1.0 - e
    return DynamicalMap(phi, triplet.t)


def singular_mask(triplet: PropagatorTriplet, tol: float = 1e-12) -> np.ndarray:
    return (np.abs(triplet.alpha - triplet.eta) <= tol) | (np.abs(triplet.delta) <= tol)


def generator_rates(triplet: PropagatorTriplet, tol: float = 1e-12):
    """Return (zeta, Gamma, Theta): the independent entries of L = dPhi/dt Phi^-1."""
    bad = singular_mask(triplet, tol)
    if np.any(bad):
        t_bad = np.atleast_1d(triplet.t)[np.atleast_1d(bad)][0]
        raise MapSingular(float(t_bad))
    a, e = triplet.alpha, triplet.eta
    ad, ed = triplet.alpha_dot, triplet.eta_dot
    gap = a - e
    zeta = (ad * (1.0 - e) + ed * (a - 1.0)) / gap
    gamma = (-ad * e + ed * a) / gap
    theta = triplet.delta_dot / triplet.delta
    return zeta, gamma, theta


def lindbladian(triplet: PropagatorTriplet, tol: float = 1e-12) -> np.ndarray:
    zeta, gamma, theta = generator_rates(triplet, tol)
    lv = np.zeros(np.shape(zeta) + (4, 4), dtype=complex)
    lv[..., 0, 0] = zeta
    lv[..., 0, 3] = gamma
    lv[..., 3, 0] = -zeta
    lv[..., 3, 3] = -gamma
    lv[..., 1, 1] = theta
    lv[..., 2, 2] = np.conj(theta)
    return lv


# --- joint state -------------------------------------------------------------


class Propagator:
    """U = exp(-iHt) stored as its 2x2 blocks on (|0,n>, |1,n-1>) plus two corner phases.

    Applying it to a dense operator costs O(N^2).
    """

    def __init__(self, params: ModelParams, t: float, spectrum: Spectrum | None = None):
        self.params = params
        self.t = float(t)
        N = params.n_spins
        blocks = np.arange(1, N + 1)
        self.ia = blocks
        self.ib = (N + 1) + blocks - 1
        self.corner_hi = 0
        self.corner_lo = 2 * N + 1
        edge = 0.5 * (params.omega + params.omega0)
        self.phase_hi = np.exp(-1j * edge * t)
        self.phase_lo = np.exp(1j * edge * t)
        if params.decoupled:
            eb = params.bath_energies()
            self.uaa = np.exp(-1j * (0.5 * params.omega0 + eb[1:]) * t)
            self.ubb = np.exp(-1j * (-0.5 * params.omega0 + eb[:-1]) * t)
            self.uab = np.zeros(N, dtype=complex)
        else:
            spectrum = spectrum if spectrum is not None else build_spectrum(params)
            cc, cs, ss = spectrum.block_weights()
            e = np.exp(-1j * np.stack([spectrum.lambda_plus, spectrum.lambda_minus]) * t)
            self.uaa = (cc * e).sum(axis=0)
            self.uab = (cs * e).sum(axis=0)
            self.ubb = (ss * e).sum(axis=0)

    def _left(self, x, uaa, uab, ubb, hi, lo):
        y = np.array(x, dtype=complex, copy=True)
        xa, xb = x[self.ia], x[self.ib]
        y[self.ia] = uaa[:, None] * xa + uab[:, None] * xb
        y[self.ib] = uab[:, None] * xa + ubb[:, None] * xb
        y[self.corner_hi] = hi * x[self.corner_hi]
        y[self.corner_lo] = lo * x[self.corner_lo]
        return y

    def left(self, x):
        """U @ x."""
        return self._left(x, self.uaa, self.uab, self.ubb, self.phase_hi, self.phase_lo)

    def left_adjoint(self, x):
        """U^dagger @ x (U is complex symmetric, so U^dagger = conj(U))."""
        return self._left(
            x, self.uaa.conj(), self.uab.conj(), self.ubb.conj(), np.conj(self.phase_hi), np.conj(self.phase_lo)
        )

    def conjugate(self, op):
        """U op U^dagger for Hermitian ``op``."""
        return self.left(self.left(op).conj().T)

    def heisenberg(self, op):
        """U^dagger op U for Hermitian ``op``."""
        return self.left_adjoint(self.left_adjoint(op).conj().T)

    def dense(self):
        return self.left(np.eye(self.params.dim, dtype=complex))


def _check_joint_dim(params: ModelParams, max_spins: int):
    if params.n_spins > max_spins:
        raise DimensionTooLarge(
            f"joint dimension {params.dim} exceeds the budget (N <= {max_spins})"
        )


def initial_joint(rho_s0: QubitState, bath: BathThermalState) -> JointState:
    return product_state(rho_s0.matrix, bath.matrix())


def propagate_joint(
    rho_s0: QubitState,
    params: ModelParams,
    spectrum: Spectrum | None,
    bath: BathThermalState,
    t: float,
    max_spins: int = DEFAULT_MAX_JOINT_SPINS,
) -> JointState:
    _check_joint_dim(params, max_spins)
    u = Propagator(params, t, spectrum)
    return JointState(u.conjugate(initial_joint(rho_s0, bath).matrix))


@lru_cache(maxsize=16)
def _dense_eigensystem(params: ModelParams):
    h = build_dense_hamiltonians(params)[0]
    return np.linalg.eigh(h)


def oracle_propagate(
    rho_s0: QubitState, params: ModelParams, t: float, max_spins: int = DEFAULT_MAX_ORACLE_SPINS
) -> JointState:
    """Brute-force propagation by numerical diagonalisation of the dense H."""
    _check_joint_dim(params, max_spins)
    evals, evecs = _dense_eigensystem(params)
    u = (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T
    hb = build_dense_hamiltonians(params)[2]
    n1 = params.n_spins + 1
    eb = np.diag(hb).real[:n1]
    w = np.exp(-params.beta * (eb - eb.min()))
    rho0 = np.kron(rho_s0.matrix, np.diag(w / w.sum()))
    return JointState(u @ rho0 @ u.conj().T)
