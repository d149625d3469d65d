"""Exact dynamics and thermodynamics of a central spin coupled to a finite spin bath."""

from importlib.metadata import PackageNotFoundError, version

from .dynamics import (
    DynamicalMap,
    Propagator,
    PropagatorTriplet,
    dynamical_map,
    lindbladian,
    oracle_propagate,
    propagate_joint,
    reduced_triplet,
)
from .errors import CentralSpinError, ConfigError
from .model import BathThermalState, ModelParams, Spectrum, bath_thermal_state, build_spectrum
from .states import JointState, QubitState

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # pragma: no cover - running from a source tree
    __version__ = "0.0.0"

__all__ = [
    "BathThermalState",
    "CentralSpinError",
    "ConfigError",
    "DynamicalMap",
    "JointState",
    "ModelParams",
    "Propagator",
    "PropagatorTriplet",
    "QubitState",
    "Spectrum",
    "__version__",
    "bath_thermal_state",
    "build_spectrum",
    "dynamical_map",
    "lindbladian",
    "oracle_propagate",
    "propagate_joint",
    "reduced_triplet",
]
