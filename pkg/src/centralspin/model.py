"""Central spin Hamiltonian, its analytic eigensystem and the thermal bath state.

Basis convention used throughout the package: the joint index of
``|s>_S |n>_B`` is ``s * (N + 1) + n`` with ``s = 0`` the excited and ``s = 1``
the ground state of the central spin, and ``n = 0..N`` labelling the collective
bath state with ``J_z = N/2 - n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import ConfigError, DecoupledModel

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class ModelParams:
    omega0: float
    omega: float
    epsilon: float
    n_spins: int
    beta: float

    def __post_init__(self):
        if int(self.n_spins) != self.n_spins or self.n_spins < 1:
            raise ConfigError(f"n_spins must be a positive integer, got {self.n_spins!r}")
        if not self.beta > 0 or not math.isfinite(self.beta):
            raise ConfigError(f"beta must be positive and finite, got {self.beta!r}")
        if not self.epsilon >= 0 or not math.isfinite(self.epsilon):
            raise ConfigError(f"epsilon must be >= 0, got {self.epsilon!r}")
        if not (math.isfinite(self.omega0) and math.isfinite(self.omega)):
            raise ConfigError("omega0 and omega must be finite")
        object.__setattr__(self, "n_spins", int(self.n_spins))

    @classmethod
    def from_temperature(cls, omega0, omega, epsilon, n_spins, temperature):
        return cls(omega0, omega, epsilon, n_spins, 1.0 / temperature)

    @property
    def temperature(self) -> float:
        return 1.0 / self.beta

    @property
    def bath_dim(self) -> int:
        return self.n_spins + 1

    @property
    def dim(self) -> int:
        return 2 * (self.n_spins + 1)

    @property
    def decoupled(self) -> bool:
        return self.epsilon == 0

    def system_hamiltonian(self) -> np.ndarray:
        return 0.5 * self.omega0 * SIGMA_Z

    def bath_energies(self) -> np.ndarray:
        """Diagonal of H_B in the |n> basis, n = 0..N."""
        n = np.arange(self.n_spins + 1)
        return 0.5 * self.omega * (1.0 - 2.0 * n / self.n_spins)


@dataclass(frozen=True)
class Spectrum:
    """Analytic eigensystem of H. Arrays are indexed by block ``n = 1..N``
    (stored at position ``n - 1``); block ``n`` mixes ``|0,n>`` and ``|1,n-1>``."""

    params: ModelParams
    b: float
    a: np.ndarray
    chi_plus: np.ndarray
    chi_minus: np.ndarray
    lambda_plus: np.ndarray
    lambda_minus: np.ndarray
    edge_plus: float
    edge_minus: float

    @property
    def root(self) -> np.ndarray:
        """sqrt(b^2 + 4 a_n^2), the splitting of each block times N."""
        return np.hypot(self.b, 2.0 * self.a)

    def eigenvalues(self) -> np.ndarray:
        return np.concatenate(
            [self.lambda_plus, self.lambda_minus, [self.edge_plus, self.edge_minus]]
        )

    def block_weights(self):
        """Overlaps of the eigenvectors with the two basis states of each block.

        Returns ``(cc, cs, ss)`` each of shape ``(2, N)`` (row 0 = + branch):
        ``chi^2/(1+chi^2)``, ``chi/(1+chi^2)`` and ``1/(1+chi^2)``.
        """
        chi = np.stack([self.chi_plus, self.chi_minus])
        ss = 1.0 / (1.0 + chi * chi)
        return chi * chi * ss, chi * ss, ss

    def eigenvectors(self) -> tuple[np.ndarray, np.ndarray]:
        """Dense eigenvector matrix (columns) and matching eigenvalues.

        Column order follows :meth:`eigenvalues`.
        """
        N = self.params.n_spins
        d = self.params.dim
        vecs = np.zeros((d, d))
        blocks = np.arange(1, N + 1)
        ia = blocks
        ib = (N + 1) + blocks - 1
        for k, chi in enumerate((self.chi_plus, self.chi_minus)):
            norm = np.sqrt(1.0 + chi * chi)
            cols = k * N + blocks - 1
            vecs[ia, cols] = chi / norm
            vecs[ib, cols] = 1.0 / norm
        vecs[0, 2 * N] = 1.0
        vecs[d - 1, 2 * N + 1] = 1.0
        return vecs, self.eigenvalues()


def _coupling_elements(params: ModelParams) -> np.ndarray:
    N = params.n_spins
    n = np.arange(1, N + 1, dtype=float)
    j = N / 2.0
    ladder = j * (j + 1.0) - (-j + n - 1.0) * (-j + n)
    return params.epsilon * math.sqrt(N) * np.sqrt(ladder)


def build_spectrum(params: ModelParams) -> Spectrum:
    if params.decoupled:
        raise DecoupledModel("epsilon = 0: use the decoupled (product) treatment")
    N = params.n_spins
    b = params.omega - N * params.omega0
    a = _coupling_elements(params)
    root = np.hypot(b, 2.0 * a)
    # pick the non-cancelling root first, the other from chi_+ chi_- = -1
    if b <= 0:
        chi_plus = (-b + root) / (2.0 * a)
        chi_minus = -1.0 / chi_plus
    else:
        chi_minus = (-b - root) / (2.0 * a)
        chi_plus = -1.0 / chi_minus
    n = np.arange(1, N + 1, dtype=float)
    centre = (N - (2.0 * n - 1.0)) * params.omega / (2.0 * N)
    edge = 0.5 * (params.omega + params.omega0)
    return Spectrum(
        params=params,
        b=b,
        a=a,
        chi_plus=chi_plus,
        chi_minus=chi_minus,
        lambda_plus=centre + root / (2.0 * N),
        lambda_minus=centre - root / (2.0 * N),
        edge_plus=edge,
        edge_minus=-edge,
    )


def collective_operators(n_spins: int):
    """J_x, J_y, J_z for total spin j = N/2 in the |n> basis (J_z = N/2 - n)."""
    j = n_spins / 2.0
    m = j - np.arange(n_spins + 1)
    jz = np.diag(m).astype(complex)
    # J_- |m> = sqrt(j(j+1) - m(m-1)) |m-1>, i.e. |n> -> |n+1>
    lower = np.sqrt(j * (j + 1.0) - m[:-1] * (m[:-1] - 1.0))
    jm = np.diag(lower, k=-1).astype(complex)
    jp = jm.conj().T
    jx = 0.5 * (jp + jm)
    jy = -0.5j * (jp - jm)
    return jx, jy, jz


def build_dense_hamiltonians(params: ModelParams):
    """Return ``(H, H_S (x) I, I (x) H_B, V)`` as dense matrices."""
    N = params.n_spins
    jx, jy, jz = collective_operators(N)
    eye_b = np.eye(N + 1, dtype=complex)
    hs = np.kron(0.5 * params.omega0 * SIGMA_Z, eye_b)
    hb = np.kron(IDENTITY_2, (params.omega / N) * jz)
    v = (params.epsilon / math.sqrt(N)) * (np.kron(SIGMA_X, jx) + np.kron(SIGMA_Y, jy))
    return hs + hb + v, hs, hb, v


@dataclass(frozen=True)
class BathThermalState:
    weights: np.ndarray
    log_partition: float
    energies: np.ndarray
    beta: float

    @property
    def partition(self) -> float:
        return math.exp(self.log_partition)

    def matrix(self) -> np.ndarray:
        return np.diag(self.weights).astype(complex)

    def log_weights(self) -> np.ndarray:
        return -self.beta * self.energies - self.log_partition


def gibbs_weights(energies: np.ndarray, beta: float):
    """Normalised Boltzmann weights and log-partition, shifted by the max exponent."""
    expo = -beta * np.asarray(energies, dtype=float)
    log_z = float(logsumexp(expo))
    return np.exp(expo - log_z), log_z


def bath_thermal_state(params: ModelParams) -> BathThermalState:
    energies = params.bath_energies()
    weights, log_z = gibbs_weights(energies, params.beta)
    return BathThermalState(weights=weights, log_partition=log_z, energies=energies, beta=params.beta)


def log_xi(beta: float, omega: float, n_spins: int) -> float:
    """log of sinh[beta omega (N+1)/2N] / sinh(beta omega / 2N), the bath partition sum."""
    x = abs(beta * omega) / (2.0 * n_spins)
    if x == 0:
        return math.log(n_spins + 1)
    big = (n_spins + 1) * x
    # log sinh(y) = y + log(1 - exp(-2y)) - log 2
    return big - x + math.log(-math.expm1(-2.0 * big)) - math.log(-math.expm1(-2.0 * x))
