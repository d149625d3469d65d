"""Ergotropy of the central spin and the bath-as-charger criterion."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import reduced_triplet
from .model import ModelParams
from .states import QubitState


def passive_state(rho: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Largest populations on the lowest energies."""
    r = np.linalg.eigvalsh(rho)
    e, vecs = np.linalg.eigh(h)
    r_desc = np.sort(r, kind="stable")[::-1]
    order = np.argsort(e, kind="stable")
    v = vecs[:, order]
    return (v * r_desc) @ v.conj().T


def ergotropy_general(rho: np.ndarray, h: np.ndarray) -> float:
    rho = np.asarray(rho)
    h = np.asarray(h)
    r = np.sort(np.linalg.eigvalsh(rho), kind="stable")[::-1]
    e = np.sort(np.linalg.eigvalsh(h), kind="stable")
    return float(np.real(np.trace(rho @ h)) - r @ e)


def ergotropy_bloch(x, y, z, omega0):
    return 0.5 * omega0 * (z + np.sqrt(x * x + y * y + z * z))


def ergotropy_split(rho: QubitState, omega0: float) -> tuple[float, float]:
    """(incoherent, coherent) ergotropy for H_S = (omega0/2) sigma_z."""
    x, y, z = rho.bloch
    total = ergotropy_bloch(x, y, z, omega0)
    # dephased state diag((1+z)/2, (1-z)/2) is active only when the excited level is more populated
    incoherent = omega0 * z if z > 0 else 0.0
    return incoherent, total - incoherent


@dataclass
class ChargingTrajectory:
    t: np.ndarray
    eta: np.ndarray
    z: np.ndarray
    W_total: np.ndarray
    W_incoherent: np.ndarray
    W_coherent: np.ndarray
    charging: np.ndarray

    @property
    def n_charging(self) -> int:
        return int(self.charging.sum())

    @property
    def zero_crossings(self) -> int:
        """Number of times eta(t) - 1/2 changes sign."""
        s = np.sign(self.eta - 0.5)
        s = s[s != 0]
        return int(np.count_nonzero(np.diff(s)))


def charging_trajectory(params: ModelParams, times, omega0: float | None = None) -> ChargingTrajectory:
    """Ergotropy of the central spin started in its ground state |1><1|."""
    omega0 = params.omega0 if omega0 is None else omega0
    times = np.asarray(times, dtype=float)
    trip = reduced_triplet(params, times, coherence=False)
    eta = np.asarray(trip.eta)
    z = 2.0 * eta - 1.0
    w = 0.5 * omega0 * (z + np.abs(z))
    incoherent = np.where(z > 0, omega0 * z, 0.0)
    return ChargingTrajectory(
        t=times,
        eta=eta,
        z=z,
        W_total=w,
        W_incoherent=incoherent,
        W_coherent=w - incoherent,
        charging=eta > 0.5,
    )


__all__ = [
    "ChargingTrajectory",
    "charging_trajectory",
    "ergotropy_bloch",
    "ergotropy_general",
    "ergotropy_split",
    "passive_state",
]
