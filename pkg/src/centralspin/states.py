"""Qubit and joint density matrices, partial traces and entropies."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import IDENTITY_2, SIGMA_X, SIGMA_Y, SIGMA_Z


@dataclass(frozen=True)
class QubitState:
    """Central spin density matrix; index 0 is the excited state."""

    matrix: np.ndarray

    @classmethod
    def from_bloch(cls, x, y, z):
        return cls(0.5 * (IDENTITY_2 + x * SIGMA_X + y * SIGMA_Y + z * SIGMA_Z))

    @classmethod
    def excited(cls):
        return cls(np.array([[1, 0], [0, 0]], dtype=complex))

    @classmethod
    def ground(cls):
        return cls(np.array([[0, 0], [0, 1]], dtype=complex))

    @classmethod
    def pure(cls, c0, c1):
        psi = np.array([c0, c1], dtype=complex)
        norm = np.vdot(psi, psi).real
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"|c0|^2 + |c1|^2 = {norm}, expected 1")
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def thermal(cls, omega0, beta):
        """Gibbs state of (omega0/2) sigma_z."""
        z = -math.tanh(0.5 * beta * omega0)
        return cls.from_bloch(0.0, 0.0, z)

    @property
    def bloch(self) -> tuple[float, float, float]:
        r = self.matrix
        return (2.0 * r[0, 1].real, -2.0 * r[0, 1].imag, (r[0, 0] - r[1, 1]).real)

    @property
    def rho00(self) -> float:
        return float(self.matrix[0, 0].real)

    @property
    def rho01(self) -> complex:
        return complex(self.matrix[0, 1])

    def vec(self) -> np.ndarray:
        """Row-major vectorisation (rho00, rho01, rho10, rho11)."""
        return self.matrix.reshape(4).copy()

    def is_valid(self, tol=1e-12) -> bool:
        r = self.matrix
        x, y, z = self.bloch
        return (
            abs(np.trace(r) - 1.0) <= tol
            and np.allclose(r, r.conj().T, atol=tol)
            and x * x + y * y + z * z <= 1.0 + tol
        )


@dataclass(frozen=True)
class JointState:
    """Dense system+bath density matrix in the (system-major, bath-minor) basis."""

    matrix: np.ndarray

    @property
    def bath_dim(self) -> int:
        return self.matrix.shape[0] // 2

    def reshaped(self) -> np.ndarray:
        d = self.bath_dim
        return self.matrix.reshape(2, d, 2, d)


def product_state(rho_s: np.ndarray, rho_b: np.ndarray) -> JointState:
    return JointState(np.kron(rho_s, rho_b))


def reduce_system(joint: JointState) -> QubitState:
    return QubitState(np.einsum("injn->ij", joint.reshaped()))


def reduce_bath(joint: JointState) -> np.ndarray:
    return np.einsum("inim->nm", joint.reshaped())


def partial_trace_bath(op: np.ndarray, bath_dim: int) -> np.ndarray:
    return np.einsum("injn->ij", op.reshape(2, bath_dim, 2, bath_dim))


def trace_product(a: np.ndarray, b: np.ndarray) -> complex:
    """Tr[a b] without forming the product."""
    return np.einsum("ij,ji->", a, b)


def xlogx(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    pos = p > 0
    out[pos] = p[pos] * np.log(p[pos])
    return out


def von_neumann_entropy(rho: np.ndarray) -> float:
    rho = np.asarray(rho)
    if rho.shape == (2, 2):
        # closed form via the Bloch radius keeps pure states at exactly 0
        x, y, z = QubitState(rho).bloch
        r = min(math.sqrt(x * x + y * y + z * z), 1.0)
        p = np.array([0.5 * (1 + r), 0.5 * (1 - r)])
    else:
        p = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    p = np.clip(p, 0.0, None)
    return float(-xlogx(p).sum())
