"""Energy bookkeeping and entropy production along the exact joint evolution."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from .dynamics import (
    DEFAULT_MAX_JOINT_SPINS,
    Propagator,
    _check_joint_dim,
    initial_joint,
    reduced_triplet,
    system_trajectory,
    system_trajectory_rate,
)
from .errors import EigenvalueUnderflow, EnergyOutOfRange
from .model import BathThermalState, ModelParams, _coupling_elements, bath_thermal_state, build_spectrum
from .states import (
    JointState,
    QubitState,
    reduce_bath,
    reduce_system,
    trace_product,
    von_neumann_entropy,
    xlogx,
)

# smallest Boltzmann weight whose logarithm is still trusted in the joint log
_MIN_LOG_ARGUMENT = 1e-300


def delta_u_system(z_t, z_0, omega0):
    return 0.5 * omega0 * (np.asarray(z_t) - z_0)


def _diag_energies(h_b) -> np.ndarray:
    h_b = np.asarray(h_b)
    return np.real(np.diag(h_b)) if h_b.ndim == 2 else h_b.astype(float)


def q_bath(bath_t: np.ndarray, bath_0: BathThermalState, h_b) -> float:
    """Tr{H_B [rho_B(t) - rho_B(0)]}; ``h_b`` may be the matrix or its diagonal."""
    e = _diag_energies(h_b)
    return float(np.real(np.diag(bath_t)) @ e - bath_0.weights @ e)


def work_interaction(joint_0: JointState, joint_t: JointState, v: np.ndarray) -> float:
    """Tr[V (rho_SB(0) - rho_SB(t))] with a dense V."""
    return float(np.real(trace_product(v, joint_0.matrix - joint_t.matrix)))


def interaction_energy(joint: JointState, params: ModelParams) -> float:
    """<V> using only the N nonzero couplings <0,n|V|1,n-1> = a_n / N."""
    N = params.n_spins
    if params.decoupled:
        return 0.0
    v = _coupling_elements(params) / N
    blocks = np.arange(1, N + 1)
    r = joint.matrix
    return float(2.0 * np.real(r[(N + 1) + blocks - 1, blocks]) @ v)


def system_heat_current(joint: JointState, params: ModelParams) -> float:
    """i <[V, H_S]>, the rate of change of <H_S> for time-independent H_S."""
    N = params.n_spins
    if params.decoupled:
        return 0.0
    v = _coupling_elements(params) / N
    blocks = np.arange(1, N + 1)
    r = joint.matrix
    return float(-2.0 * params.omega0 * np.imag(r[blocks, (N + 1) + blocks - 1]) @ v)


@dataclass(frozen=True)
class EntropyProduction:
    total: float
    mutual_information: float
    bath_relative_entropy: float


def joint_log_initial(rho_s0: QubitState, bath: BathThermalState) -> np.ndarray:
    """ln rho_SB(0) restricted to its support (zero eigenvalues contribute nothing)."""
    if bath.weights.min() < _MIN_LOG_ARGUMENT:
        raise EigenvalueUnderflow(
            f"bath weight {bath.weights.min():.3e} below {_MIN_LOG_ARGUMENT}; lower beta or use the thermal form"
        )
    r, vecs = np.linalg.eigh(rho_s0.matrix)
    keep = r > 1e-14
    log_s = (vecs[:, keep] * np.log(r[keep])) @ vecs[:, keep].conj().T
    proj_s = vecs[:, keep] @ vecs[:, keep].conj().T
    log_b = bath.log_weights()
    d = log_b.size
    return np.kron(log_s, np.eye(d)) + np.kron(proj_s, np.diag(log_b))


def entropy_production_relative(
    joint_t: JointState,
    rho_s_t: QubitState,
    bath_0: BathThermalState,
    log_joint_t: np.ndarray | None = None,
) -> EntropyProduction:
    """S[rho_SB(t) || rho_S(t) (x) rho_B(0)] and its information-theoretic split.

    ``log_joint_t`` is ln rho_SB(t) transported from t = 0 by the propagator; if
    omitted the joint state is diagonalised directly.
    """
    rho = joint_t.matrix
    if log_joint_t is None:
        s_joint = von_neumann_entropy(rho)
        tr_rho_log_rho = -s_joint
    else:
        tr_rho_log_rho = float(np.real(trace_product(rho, log_joint_t)))
        s_joint = -tr_rho_log_rho
    rho_b_t = reduce_bath(joint_t)
    log_p = bath_0.log_weights()
    s_sys = von_neumann_entropy(rho_s_t.matrix)
    # Tr[rho ln(rho_S (x) I + I (x) ln rho_B0)] via the two marginals
    tr_rho_log_sigma = -s_sys + float(np.real(np.diag(rho_b_t)) @ log_p)
    total = tr_rho_log_rho - tr_rho_log_sigma
    s_bath = von_neumann_entropy(rho_b_t)
    mutual = s_sys + s_bath - s_joint
    bath_rel = -s_bath - float(np.real(np.diag(rho_b_t)) @ log_p)
    return EntropyProduction(total, mutual, bath_rel)


# --- finite-bath temperature --------------------------------------------------


def _gibbs_energy(u: float, e: np.ndarray) -> float:
    w = -u * e
    w = np.exp(w - w.max())
    return float(w @ e / w.sum())


def fit_inverse_temperature(bath_t, h_b, guess: float | None = None, tol: float = 1e-12) -> float:
    """u = 1/T with Tr[H_B zeta_B(T)] = Tr[H_B rho_B(t)]; u < 0 is population inversion."""
    e = _diag_energies(h_b)
    target = float(np.real(np.diag(bath_t)) @ e) if np.ndim(bath_t) == 2 else float(bath_t)
    lo_e, hi_e = e.min(), e.max()
    if not (lo_e < target < hi_e):
        raise EnergyOutOfRange(f"bath energy {target} outside ({lo_e}, {hi_e})")
    if guess is not None and abs(_gibbs_energy(guess, e) - target) <= 1e-15 * max(1.0, abs(target)):
        return float(guess)
    mid = _gibbs_energy(0.0, e)
    if abs(target - mid) <= 1e-15 * max(1.0, abs(hi_e - lo_e)):
        return 0.0
    scale = 1.0 / max(hi_e - lo_e, 1e-300)
    sign = 1.0 if target < mid else -1.0
    f = lambda u: _gibbs_energy(u, e) - target  # noqa: E731
    lo, hi = 0.0, sign * scale
    while sign * f(hi) > 0:
        lo, hi = hi, 2.0 * hi
        if abs(hi) > 1e300:
            raise EnergyOutOfRange(f"bath energy {target} too close to the spectrum edge")
    a, b = (lo, hi) if lo < hi else (hi, lo)
    u = brentq(f, a, b, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    if abs(f(u)) > tol:
        raise EnergyOutOfRange(f"temperature fit residual {f(u):.3e} exceeds {tol}")
    return float(u)


def fit_bath_temperature(bath_t, h_b, guess_temperature: float | None = None) -> float:
    """Temperature T(t); ``math.inf`` when the fitted 1/T is exactly zero."""
    guess = None if guess_temperature is None else 1.0 / guess_temperature
    u = fit_inverse_temperature(bath_t, h_b, guess)
    return math.inf if u == 0 else 1.0 / u


def gibbs_relative_entropy(u_t: float, u_0: float, h_b) -> float:
    """S(zeta_B[1/u_t] || zeta_B[1/u_0]) for diagonal Gibbs states."""
    e = _diag_energies(h_b)
    lp = -u_t * e - logsumexp(-u_t * e)
    lq = -u_0 * e - logsumexp(-u_0 * e)
    return float(np.exp(lp) @ (lp - lq))


def entropy_production_finite(sigma: float, t_fit: float, t_0: float, h_b) -> float:
    u_t = 0.0 if math.isinf(t_fit) else 1.0 / t_fit
    return sigma - gibbs_relative_entropy(u_t, 1.0 / t_0, h_b)


# --- trajectory ----------------------------------------------------------------


@dataclass
class ThermoTrajectory:
    t: np.ndarray
    dU_S: np.ndarray
    Q_B: np.ndarray
    W: np.ndarray
    W_interaction: np.ndarray
    Q_B_current: np.ndarray
    Sigma: np.ndarray
    Sigma_relative: np.ndarray
    mutual_information: np.ndarray
    bath_relative_entropy: np.ndarray
    Sigma_finite: np.ndarray
    Sigma_finite_integral: np.ndarray
    T_fit: np.ndarray
    inverse_T_fit: np.ndarray
    dS_S: np.ndarray

    def columns(self):
        return [f.name for f in fields(self)]

    def row(self, i) -> dict:
        return {name: float(getattr(self, name)[i]) for name in self.columns()}


def thermo_trajectory(
    params: ModelParams,
    rho_s0: QubitState,
    times,
    max_spins: int = DEFAULT_MAX_JOINT_SPINS,
    fit_temperature: bool = True,
    workers: int = 1,
) -> ThermoTrajectory:
    """Every first/second-law quantity on a time grid, from the exact joint state."""
    _check_joint_dim(params, max_spins)
    times = np.asarray(times, dtype=float)
    spectrum = None if params.decoupled else build_spectrum(params)
    bath = bath_thermal_state(params)
    e_b = bath.energies
    joint_0 = initial_joint(rho_s0, bath)
    log_0 = joint_log_initial(rho_s0, bath)
    v_0 = interaction_energy(joint_0, params)
    s_0 = von_neumann_entropy(rho_s0.matrix)
    z_0 = rho_s0.bloch[2]

    triplet = reduced_triplet(params, times)
    _, _, z = system_trajectory(rho_s0, triplet)

    def node(k):
        t = times[k]
        u = Propagator(params, t, spectrum)
        joint_t = JointState(u.conjugate(joint_0.matrix))
        log_t = u.conjugate(log_0)
        rho_s_t = reduce_system(joint_t)
        rho_b_t = reduce_bath(joint_t)
        du = 0.5 * params.omega0 * (z[k] - z_0)
        qb = q_bath(rho_b_t, bath, e_b)
        v_t = interaction_energy(joint_t, params)
        ds = von_neumann_entropy(rho_s_t.matrix) - s_0
        ep = entropy_production_relative(joint_t, rho_s_t, bath, log_t)
        row = {
            "dU_S": du,
            "Q_B": qb,
            "W": du + qb,
            "W_interaction": v_0 - v_t,
            "Q_B_current": -du + v_0 - v_t,
            "dS_S": ds,
            "Sigma": ds + params.beta * qb,
            "Sigma_relative": ep.total,
            "mutual_information": ep.mutual_information,
            "bath_relative_entropy": ep.bath_relative_entropy,
            "inverse_T_fit": math.nan,
            "T_fit": math.nan,
            "Sigma_finite": math.nan,
        }
        if fit_temperature:
            # every node starts from the same guess, so results do not depend on evaluation order
            try:
                u_fit = fit_inverse_temperature(rho_b_t, e_b, guess=params.beta)
            except EnergyOutOfRange:
                u_fit = math.nan
            row["inverse_T_fit"] = u_fit
            row["T_fit"] = math.inf if u_fit == 0 else 1.0 / u_fit
            row["Sigma_finite"] = row["Sigma"] - gibbs_relative_entropy(u_fit, params.beta, e_b)
        return row

    n = times.size
    if workers > 1 and n > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(node, range(n)))
    else:
        rows = [node(k) for k in range(n)]
    cols = {name: np.array([r[name] for r in rows], dtype=float) for name in rows[0]} if n else {
        name: np.empty(0) for name in ThermoTrajectory.__dataclass_fields__ if name not in ("t", "Sigma_finite_integral")
    }

    # Sigma_finite as Delta S_S + int dQ_B / T(t), trapezoid over the sample grid (assumes times[0] = 0)
    u_fit = cols["inverse_T_fit"]
    dq = np.diff(cols["Q_B"])
    integral = np.concatenate([[0.0], np.cumsum(0.5 * (u_fit[1:] + u_fit[:-1]) * dq)]) if n else np.empty(0)
    cols["Sigma_finite_integral"] = cols["dS_S"] + integral
    return ThermoTrajectory(t=times, **cols)


def system_energy_rate(params: ModelParams, rho_s0: QubitState, times) -> np.ndarray:
    """(omega0/2) dz/dt from the analytic map derivatives."""
    triplet = reduced_triplet(params, times)
    return 0.5 * params.omega0 * system_trajectory_rate(rho_s0, triplet)[2]


__all__ = [
    "EntropyProduction",
    "ThermoTrajectory",
    "delta_u_system",
    "entropy_production_finite",
    "entropy_production_relative",
    "fit_bath_temperature",
    "fit_inverse_temperature",
    "gibbs_relative_entropy",
    "interaction_energy",
    "joint_log_initial",
    "q_bath",
    "system_energy_rate",
    "system_heat_current",
    "thermo_trajectory",
    "von_neumann_entropy",
    "work_interaction",
    "xlogx",
]
