"""Hamiltonian of mean force, mean-force Gibbs state and thermodynamic entropy."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .model import ModelParams, Spectrum, build_dense_hamiltonians, build_spectrum
from .states import partial_trace_bath


@dataclass(frozen=True)
class LogPi:
    """log pi_xx(beta) and d/dbeta log pi_xx(beta) for x = 0, 1."""

    log_pi00: float
    log_pi11: float
    dlog_pi00: float
    dlog_pi11: float


def _log_sum_and_mean(log_terms, energies, weights):
    """log sum_k w_k exp(l_k) and the weighted mean of ``energies``."""
    log_total = logsumexp(log_terms, b=weights)
    probs = weights * np.exp(log_terms - log_total)
    return float(log_total), float(probs @ energies)


def log_pi_elements(spectrum: Spectrum | None, params: ModelParams, beta: float) -> LogPi:
    """Both eigenbranches enter each sum; pi = (numerator) / xi(beta)."""
    e_b = params.bath_energies()
    log_xi = float(logsumexp(-beta * e_b))
    mean_b = float(np.exp(-beta * e_b - log_xi) @ e_b)
    if params.decoupled:
        # Gibbs state factorises: pi_00 = exp(-beta w0/2), pi_11 = exp(+beta w0/2)
        h = 0.5 * params.omega0
        return LogPi(-beta * h, beta * h, -h, h)
    cc, _, ss = spectrum.block_weights()
    lam = np.concatenate([spectrum.lambda_plus, spectrum.lambda_minus])
    edge = spectrum.edge_plus
    energies0 = np.concatenate([lam, [edge]])
    energies1 = np.concatenate([lam, [-edge]])
    w0 = np.concatenate([cc[0], cc[1], [1.0]])
    w1 = np.concatenate([ss[0], ss[1], [1.0]])
    l0, m0 = _log_sum_and_mean(-beta * energies0, energies0, w0)
    l1, m1 = _log_sum_and_mean(-beta * energies1, energies1, w1)
    # d/dbeta log(sum w e^{-beta E}) = -<E>, and likewise for xi
    return LogPi(l0 - log_xi, l1 - log_xi, -m0 + mean_b, -m1 + mean_b)


def pi_elements(spectrum: Spectrum | None, params: ModelParams, beta: float):
    lp = log_pi_elements(spectrum, params, beta)
    return math.exp(lp.log_pi00), math.exp(lp.log_pi11)


def pi_derivatives(spectrum: Spectrum | None, params: ModelParams, beta: float):
    """d pi_00/d beta and d pi_11/d beta."""
    lp = log_pi_elements(spectrum, params, beta)
    return math.exp(lp.log_pi00) * lp.dlog_pi00, math.exp(lp.log_pi11) * lp.dlog_pi11


def hamiltonian_mean_force(pi00, pi11, beta) -> np.ndarray:
    return np.diag([-math.log(pi00) / beta, -math.log(pi11) / beta]).astype(complex)


def _hmf_from_logs(lp: LogPi, beta: float) -> np.ndarray:
    return np.diag([-lp.log_pi00 / beta, -lp.log_pi11 / beta]).astype(complex)


def mean_force_state(lp: LogPi) -> np.ndarray:
    """zeta*_S = diag(pi00, pi11) / (pi00 + pi11)."""
    logs = np.array([lp.log_pi00, lp.log_pi11])
    p = np.exp(logs - logsumexp(logs))
    return np.diag(p).astype(complex)


def _entropy_from_logs(lp: LogPi, beta: float) -> float:
    logs = np.array([lp.log_pi00, lp.log_pi11])
    dlogs = np.array([lp.dlog_pi00, lp.dlog_pi11])
    log_norm = logsumexp(logs)
    p = np.exp(logs - log_norm)
    shannon = -float(p @ (logs - log_norm))
    # beta^2 mu_xx = log pi_xx - beta d(log pi_xx)/d beta
    correction = float(p @ (logs - beta * dlogs))
    return shannon + correction


def thermodynamic_entropy(spectrum: Spectrum | None, params: ModelParams, beta: float) -> float:
    return _entropy_from_logs(log_pi_elements(spectrum, params, beta), beta)


@dataclass(frozen=True)
class MeanForceResult:
    beta: float
    pi00: float
    pi11: float
    log_pi00: float
    log_pi11: float
    H_star: np.ndarray
    zeta_star: np.ndarray
    S_thermo: float
    hs_norm_diff: float


def mean_force(params: ModelParams, beta: float | None = None, spectrum: Spectrum | None = None) -> MeanForceResult:
    beta = params.beta if beta is None else beta
    if spectrum is None and not params.decoupled:
        spectrum = build_spectrum(params)
    lp = log_pi_elements(spectrum, params, beta)
    h_star = _hmf_from_logs(lp, beta)
    diff = h_star - params.system_hamiltonian()
    return MeanForceResult(
        beta=beta,
        pi00=math.exp(lp.log_pi00),
        pi11=math.exp(lp.log_pi11),
        log_pi00=lp.log_pi00,
        log_pi11=lp.log_pi11,
        H_star=h_star,
        zeta_star=mean_force_state(lp),
        S_thermo=_entropy_from_logs(lp, beta),
        hs_norm_diff=float(np.linalg.norm(diff)),
    )


def oracle_mean_force(params: ModelParams, beta: float):
    """Dense route: (Tr_B e^{-beta H} / Z_B, Z_SB / Z_B) by numerical diagonalisation."""
    h, _, hb, _ = build_dense_hamiltonians(params)
    evals, evecs = np.linalg.eigh(h)
    shift = evals.min()
    w = np.exp(-beta * (evals - shift))
    gibbs = (evecs * w) @ evecs.conj().T
    eb = np.linalg.eigvalsh(hb[: params.bath_dim, : params.bath_dim])
    log_zb = float(logsumexp(-beta * eb))
    reduced = partial_trace_bath(gibbs, params.bath_dim)
    scale = math.exp(-beta * shift - log_zb)
    return reduced * scale, float(w.sum()) * scale
