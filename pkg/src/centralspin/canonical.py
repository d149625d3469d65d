"""Pseudo-Kraus decomposition, canonical Hamiltonian and the minimal dissipator.

For this model L(t) is fixed by three rates (zeta, Gamma, Theta).  Because
H_can is linear in the Choi matrix of L, it reduces to Omega(t) sigma_z with
Omega = -Im(Theta)/2; that identity gives the analytic dOmega/dt used by the
work integral below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import (
    DEFAULT_MAX_JOINT_SPINS,
    Propagator,
    PropagatorTriplet,
    _check_joint_dim,
    choi_to_superop,
    generator_rates,
    initial_joint,
    lindbladian,
    reduced_triplet,
    singular_mask,
    superop_to_choi,
    system_trajectory,
    system_trajectory_rate,
)
from .errors import GridTooCoarse, NotHPTA, ThetaSingular
from .model import IDENTITY_2, SIGMA_Z, ModelParams, bath_thermal_state, build_spectrum
from .states import JointState, QubitState, von_neumann_entropy
from .thermo import interaction_energy

THETA_TOL = 1e-12


@dataclass(frozen=True)
class CanonicalRates:
    zeta: np.ndarray
    gamma_cap: np.ndarray
    theta: np.ndarray
    lambda3: np.ndarray
    lambda4: np.ndarray
    y3: np.ndarray
    y4: np.ndarray
    omega_t: np.ndarray


def canonical_rates(triplet: PropagatorTriplet, tol: float = 1e-12) -> CanonicalRates:
    zeta, gamma, theta = generator_rates(triplet, tol)
    root = np.sqrt((gamma + zeta) ** 2 + 4.0 * np.abs(theta) ** 2)
    lam3 = 0.5 * (zeta - gamma - root)
    lam4 = 0.5 * (zeta - gamma + root)
    with np.errstate(divide="ignore", invalid="ignore"):
        y3 = (zeta + gamma - root) / (2.0 * np.conj(theta))
        y4 = (zeta + gamma + root) / (2.0 * np.conj(theta))
    partial = CanonicalRates(zeta, gamma, theta, lam3, lam4, y3, y4, np.nan)
    ok = np.abs(theta) > THETA_TOL
    omega = np.where(ok, _omega_closed(partial), np.nan)
    return CanonicalRates(zeta, gamma, theta, lam3, lam4, y3, y4, omega if np.ndim(omega) else float(omega))


def _omega_closed(r: CanonicalRates, d: int = 2):
    return -(
        r.lambda3 * np.imag(r.y3) / (1.0 + np.abs(r.y3) ** 2)
        + r.lambda4 * np.imag(r.y4) / (1.0 + np.abs(r.y4) ** 2)
    ) / d


def canonical_hamiltonian_closed(rates: CanonicalRates, tol: float = THETA_TOL):
    """Omega(t) from the eigen-decomposition of the {|00>, |11>} Choi block."""
    if np.any(np.abs(rates.theta) <= tol):
        raise ThetaSingular("Theta(t) vanishes; use canonical_hamiltonian_general")
    return _omega_closed(rates)


@dataclass(frozen=True)
class PseudoKraus:
    gammas: np.ndarray
    ops: np.ndarray  # (4, 2, 2)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return np.einsum("j,jab,bc,jdc->ad", self.gammas, self.ops, rho, self.ops.conj())

    def superop(self) -> np.ndarray:
        return np.einsum("j,jab,jcd->acbd", self.gammas, self.ops, self.ops.conj()).reshape(4, 4)


def pseudo_kraus(l_super: np.ndarray, tol: float = 1e-8) -> PseudoKraus:
    """Eigendecomposition of the Choi matrix of an HPTA generator."""
    choi = superop_to_choi(np.asarray(l_super))
    if np.abs(choi - choi.conj().T).max() > tol:
        raise NotHPTA("generator is not Hermiticity preserving")
    if np.abs(l_super[0] + l_super[3]).max() > tol:
        raise NotHPTA("generator is not trace annihilating")
    gammas, vecs = np.linalg.eigh(0.5 * (choi + choi.conj().T))
    ops = vecs.T.reshape(4, 2, 2)
    return PseudoKraus(gammas, ops)


def canonical_hamiltonian_general(pk: PseudoKraus, d: int = 2) -> np.ndarray:
    tr = np.trace(pk.ops, axis1=1, axis2=2)
    adj = pk.ops.conj().transpose(0, 2, 1)
    terms = tr[:, None, None] * adj - tr.conj()[:, None, None] * pk.ops
    h = np.einsum("j,jab->ab", pk.gammas, terms) / (2j * d)
    return 0.5 * (h + h.conj().T)


def canonical_hamiltonian(triplet: PropagatorTriplet) -> np.ndarray:
    """H_can(t) via the closed form, falling back to the pseudo-Kraus route."""
    rates = canonical_rates(triplet)
    try:
        return canonical_hamiltonian_closed(rates) * SIGMA_Z
    except ThetaSingular:
        return canonical_hamiltonian_general(pseudo_kraus(lindbladian(triplet)))


def omega_linear(triplet: PropagatorTriplet):
    """Omega(t) = -Im(Theta)/2 and its analytic time derivative."""
    d, dd, ddd = triplet.delta, triplet.delta_dot, triplet.delta_ddot
    theta = dd / d
    theta_dot = ddd / d - theta * theta
    return -0.5 * np.imag(theta), -0.5 * np.imag(theta_dot)


def commutator_superop(h: np.ndarray) -> np.ndarray:
    """Row-major superoperator of rho -> -i[h, rho]."""
    return -1j * (np.kron(h, IDENTITY_2) - np.kron(IDENTITY_2, h.T))


def gksl_superop(h: np.ndarray, gammas, jumps) -> np.ndarray:
    """Superoperator of -i[h, .] + sum_j g_j (L . L^dag - {L^dag L, .}/2)."""
    s = commutator_superop(h)
    for g, lj in zip(gammas, jumps):
        ldl = lj.conj().T @ lj
        s = s + g * (
            np.kron(lj, lj.conj())
            - 0.5 * np.kron(ldl, IDENTITY_2)
            - 0.5 * np.kron(IDENTITY_2, ldl.T)
        )
    return s


@dataclass(frozen=True)
class MinimalDissipator:
    gammas: np.ndarray
    jumps: np.ndarray  # traceless L_j
    h_can: np.ndarray
    pk: PseudoKraus

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """GKSL form with the traceless jump operators."""
        out = np.zeros((2, 2), dtype=complex)
        for g, lj in zip(self.gammas, self.jumps):
            ldl = lj.conj().T @ lj
            out += g * (lj @ rho @ lj.conj().T - 0.5 * (ldl @ rho + rho @ ldl))
        return out

    def apply_direct(self, rho: np.ndarray) -> np.ndarray:
        """L(rho) + i[H_can, rho]."""
        return self.pk.apply(rho) + 1j * (self.h_can @ rho - rho @ self.h_can)

    def superop(self) -> np.ndarray:
        return gksl_superop(np.zeros((2, 2)), self.gammas, self.jumps)


def minimal_dissipator(pk: PseudoKraus, h_can: np.ndarray, d: int = 2) -> MinimalDissipator:
    tr = np.trace(pk.ops, axis1=1, axis2=2)
    jumps = pk.ops - (tr / d)[:, None, None] * np.eye(d)
    return MinimalDissipator(pk.gammas, jumps, h_can, pk)


def gauge_shift(h: np.ndarray, gammas, jumps, shifts):
    """L_j -> L_j + a_j I with the compensating Hamiltonian that leaves the generator intact.

    H -> H + sum_j g_j (conj(a_j) L_j - a_j L_j^dag) / 2i.
    """
    shifts = np.asarray(shifts, dtype=complex)
    new_jumps = np.array([lj + a * IDENTITY_2 for lj, a in zip(jumps, shifts)])
    dh = sum(
        g * (np.conj(a) * lj - a * lj.conj().T) / 2j for g, lj, a in zip(gammas, jumps, shifts)
    )
    return h + dh, new_jumps


# --- Heisenberg picture -------------------------------------------------------


def heisenberg_system_hamiltonian(params: ModelParams, t: float, max_spins: int = DEFAULT_MAX_JOINT_SPINS):
    """Tr_B[rho_B(0) U^dag (H_S (x) I) U]."""
    _check_joint_dim(params, max_spins)
    bath = bath_thermal_state(params)
    spectrum = None if params.decoupled else build_spectrum(params)
    u = Propagator(params, t, spectrum)
    hs = np.kron(params.system_hamiltonian(), np.eye(params.bath_dim))
    m = u.heisenberg(hs).reshape(2, params.bath_dim, 2, params.bath_dim)
    return np.einsum("n,injn->ij", bath.weights, m)


# --- tilde ledger ----------------------------------------------------------------


@dataclass
class TildeLedger:
    t: np.ndarray
    dU_S_tilde: np.ndarray
    dW_S_tilde: np.ndarray
    dQ_S_tilde: np.ndarray
    Sigma_tilde: np.ndarray
    dU_B_tilde: np.ndarray
    Sigma_prime: np.ndarray
    dU_S_tilde_direct: np.ndarray
    W_interaction: np.ndarray
    dS_S: np.ndarray
    Omega: np.ndarray
    quadrature_error: float
    flagged: np.ndarray


def _cumulative_trapezoid(y, h):
    return np.concatenate([[0.0], np.cumsum(0.5 * h * (y[1:] + y[:-1]))])


def _richardson(y, h, stride):
    """Cumulative integral at every ``stride``-th node, Richardson-corrected, and its error estimate."""
    fine = _cumulative_trapezoid(y, h)[::stride]
    coarse = _cumulative_trapezoid(y[::2], 2 * h)[:: stride // 2]
    return fine + (fine - coarse) / 3.0, np.abs(fine - coarse) / 3.0


def tilde_quantities(
    params: ModelParams,
    rho_s0: QubitState,
    t_max: float,
    n_samples: int,
    nodes_per_unit: float = 2000.0,
    tol: float = 1e-6,
    max_spins: int = DEFAULT_MAX_JOINT_SPINS,
) -> TildeLedger:
    """Canonical-Hamiltonian energy ledger on ``n_samples`` uniform times in [0, t_max].

    The integrals run on a refined grid with ``nodes_per_unit`` nodes per unit of
    omega0 * t (rounded up to an even count per output interval).
    """
    _check_joint_dim(params, max_spins)
    t_out = np.linspace(0.0, t_max, n_samples)
    dt_out = t_out[1] - t_out[0]
    stride = max(2, int(math.ceil(nodes_per_unit * abs(params.omega0) * dt_out)))
    stride += stride % 2
    fine_t = np.linspace(0.0, t_max, (n_samples - 1) * stride + 1)
    h = fine_t[1] - fine_t[0]

    triplet = reduced_triplet(params, fine_t)
    flagged_fine = singular_mask(triplet) | (np.abs(triplet.delta) <= THETA_TOL)
    if np.any(flagged_fine):
        raise GridTooCoarse(
            f"{int(flagged_fine.sum())} quadrature nodes hit a singular map; integrals are undefined there"
        )
    omega, omega_dot = omega_linear(triplet)
    _, _, z = system_trajectory(rho_s0, triplet)
    _, _, z_dot = system_trajectory_rate(rho_s0, triplet)
    # H_can = Omega sigma_z: Tr[H_can rho] = Omega z
    work, err_w = _richardson(omega_dot * z, h, stride)
    heat, err_q = _richardson(omega * z_dot, h, stride)
    quad_err = float(max(err_w.max(), err_q.max()))
    if quad_err > tol:
        raise GridTooCoarse(f"quadrature error estimate {quad_err:.3e} exceeds {tol}")

    out_trip = triplet.at(slice(None, None, stride))
    omega_out = omega[::stride]
    z_out = z[::stride]
    direct = omega_out * z_out - omega_out[0] * z_out[0]

    bath = bath_thermal_state(params)
    spectrum = None if params.decoupled else build_spectrum(params)
    joint_0 = initial_joint(rho_s0, bath)
    v_0 = interaction_energy(joint_0, params)
    w_int = np.array(
        [v_0 - interaction_energy(JointState(Propagator(params, t, spectrum).conjugate(joint_0.matrix)), params) for t in t_out]
    )
    x, y, zz = system_trajectory(rho_s0, out_trip)
    s0 = von_neumann_entropy(rho_s0.matrix)
    ds = np.array([von_neumann_entropy(QubitState.from_bloch(a, b, c).matrix) for a, b, c in zip(x, y, zz)]) - s0

    du = work + heat
    du_b = w_int - du
    return TildeLedger(
        t=t_out,
        dU_S_tilde=du,
        dW_S_tilde=work,
        dQ_S_tilde=heat,
        Sigma_tilde=ds - params.beta * heat,
        dU_B_tilde=du_b,
        Sigma_prime=ds + params.beta * du_b,
        dU_S_tilde_direct=direct,
        W_interaction=w_int,
        dS_S=ds,
        Omega=omega_out,
        quadrature_error=quad_err,
        flagged=np.zeros(n_samples, dtype=bool),
    )
