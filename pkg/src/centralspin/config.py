"""Experiment configuration: preset defaults, TOML config files and validation.

A config file is TOML with these fields, all optional unless the preset lacks a
default for them::

    preset = "fig2"            # fig1..fig7 or custom
    output = "results/fig2"    # directory for CSV + JSON metadata
    workers = 1
    reduced_only = false
    include_large = false      # fig1: also run N = 100000
    max_spins = 4096           # guard for joint-state work
    epsilons = [0.1, 0.5]      # multi-curve sweeps
    n_spins_list = [100, 1000] # fig1 curves

    [params]
    omega0 = 3.25
    omega = 3.0
    epsilon = 0.5
    n_spins = 50
    temperature = 0.25         # or beta = 4.0, not both

    [initial_state]
    kind = "superposition"     # excited | ground | superposition | thermal_system
    c0 = 0.5                   # number, "a+bj" string or [re, im]
    c1 = 0.8660254037844386

    [grid]
    t_max = 20.0
    n_samples = 401
    beta_min = 0.01            # beta-grid presets (fig4, hmf)
    beta_max = 50.0
"""

from __future__ import annotations

import math
import re
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .model import ModelParams
from .states import QubitState

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10 only
    import tomli as tomllib

PRESETS = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "custom")
STATE_KINDS = ("excited", "ground", "superposition", "thermal_system")

_PARAM_KEYS = ("omega0", "omega", "epsilon", "n_spins", "temperature", "beta")
_STATE_KEYS = ("kind", "c0", "c1")
_GRID_KEYS = ("t_max", "n_samples", "beta_min", "beta_max")
_TOP_KEYS = (
    "preset",
    "output",
    "workers",
    "reduced_only",
    "include_large",
    "max_spins",
    "epsilons",
    "n_spins_list",
    "params",
    "initial_state",
    "grid",
)


@dataclass(frozen=True)
class InitialState:
    kind: str = "excited"
    c0: complex = 1.0
    c1: complex = 0.0

    def __post_init__(self):
        if self.kind not in STATE_KINDS:
            raise ConfigError(f"initial_state.kind: expected one of {STATE_KINDS}, got {self.kind!r}")
        if self.kind == "superposition":
            norm = abs(self.c0) ** 2 + abs(self.c1) ** 2
            if abs(norm - 1.0) > 1e-12:
                raise ConfigError(f"initial_state: |c0|^2 + |c1|^2 = {norm!r}, must be 1 within 1e-12")

    def build(self, omega0: float, beta: float) -> QubitState:
        if self.kind == "excited":
            return QubitState.excited()
        if self.kind == "ground":
            return QubitState.ground()
        if self.kind == "thermal_system":
            return QubitState.thermal(omega0, beta)
        return QubitState.pure(self.c0, self.c1)

    def describe(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "superposition":
            d["c0"] = [complex(self.c0).real, complex(self.c0).imag]
            d["c1"] = [complex(self.c1).real, complex(self.c1).imag]
        return d


@dataclass(frozen=True)
class ExperimentConfig:
    preset: str
    params: ModelParams | None
    initial_state: InitialState = InitialState()
    t_max: float = 20.0
    n_samples: int = 401
    beta_min: float = 0.01
    beta_max: float = 50.0
    epsilons: tuple = ()
    n_spins_list: tuple = ()
    output: Path = Path("results")
    workers: int = 1
    reduced_only: bool = False
    include_large: bool = False
    max_spins: int = 4096
    overrides: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.preset not in PRESETS:
            raise ConfigError(f"preset: expected one of {PRESETS}, got {self.preset!r}")
        if not (self.t_max > 0 and math.isfinite(self.t_max)):
            raise ConfigError(f"grid.t_max: must be positive, got {self.t_max!r}")
        if int(self.n_samples) != self.n_samples or self.n_samples < 2:
            raise ConfigError(f"grid.n_samples: need an integer >= 2 for a strictly increasing grid, got {self.n_samples!r}")
        if not (0 < self.beta_min < self.beta_max):
            raise ConfigError(f"grid: need 0 < beta_min < beta_max, got {self.beta_min!r}, {self.beta_max!r}")
        if self.workers < 1:
            raise ConfigError(f"workers: must be >= 1, got {self.workers!r}")
        for e in self.epsilons:
            if not e >= 0:
                raise ConfigError(f"epsilons: every entry must be >= 0, got {e!r}")
        for n in self.n_spins_list:
            if int(n) != n or n < 1:
                raise ConfigError(f"n_spins_list: entries must be positive integers, got {n!r}")

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, int(self.n_samples))

    def betas(self) -> np.ndarray:
        return np.geomspace(self.beta_min, self.beta_max, int(self.n_samples))

    def require_params(self) -> ModelParams:
        if self.params is None:
            raise ConfigError("params: omega0, omega, epsilon, n_spins and temperature (or beta) are required")
        return self.params

    def rho0(self, params: ModelParams | None = None) -> QubitState:
        p = params or self.require_params()
        return self.initial_state.build(p.omega0, p.beta)

    def describe(self) -> dict:
        p = self.params
        return {
            "preset": self.preset,
            "params": None
            if p is None
            else {"omega0": p.omega0, "omega": p.omega, "epsilon": p.epsilon, "n_spins": p.n_spins, "beta": p.beta},
            "initial_state": self.initial_state.describe(),
            "grid": {"t_max": self.t_max, "n_samples": int(self.n_samples), "beta_min": self.beta_min, "beta_max": self.beta_max},
            "epsilons": list(self.epsilons),
            "n_spins_list": list(self.n_spins_list),
            "reduced_only": self.reduced_only,
            "include_large": self.include_large,
            "max_spins": self.max_spins,
            "workers": self.workers,
        }


_SQRT3_2 = math.sqrt(3.0) / 2.0

# flat defaults per preset; keys match the flattened override names
PRESET_DEFAULTS: dict[str, dict] = {
    "fig1": dict(omega0=2.5, omega=2.0, epsilon=0.1, n_spins=100, temperature=1.0, kind="excited",
                 t_max=50.0, n_samples=2001, n_spins_list=(100, 1000, 10000)),
    "fig2": dict(omega0=3.25, omega=3.0, epsilon=0.5, n_spins=50, temperature=0.25, kind="superposition",
                 c0=0.5, c1=_SQRT3_2, t_max=20.0, n_samples=401, epsilons=(0.03 * 3.25, 0.1, 0.5, 1.0)),
    "fig3": dict(omega0=2.5, omega=2.0, epsilon=1.0, n_spins=10, temperature=1.0, kind="superposition",
                 c0=0.5, c1=_SQRT3_2, t_max=20.0, n_samples=401),
    "fig4": dict(omega0=5.0, omega=5.0, epsilon=0.1, n_spins=80, temperature=1.0,
                 beta_min=0.01, beta_max=50.0, n_samples=200, epsilons=(0.1, 0.5, 1.0)),
    "fig5": dict(omega0=3.5, omega=4.0, epsilon=0.5, n_spins=50, temperature=0.1, kind="excited",
                 t_max=30.0, n_samples=601, epsilons=(0.1, 0.5, 1.0)),
    "fig6": dict(omega0=3.5, omega=3.0, epsilon=0.5, n_spins=50, temperature=0.1, kind="thermal_system",
                 t_max=30.0, n_samples=301),
    "fig7": dict(omega0=2.5, omega=2.0, epsilon=2.0, n_spins=200, temperature=10.0, kind="ground",
                 t_max=50.0, n_samples=2001),
    "custom": dict(),
}


def _as_complex(value, where: str) -> complex:
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if isinstance(value, (int, float, complex)):
        return complex(value)
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError as exc:
            raise ConfigError(f"{where}: cannot parse {value!r} as a complex number") from exc
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(_as_float(value[0], where), _as_float(value[1], where))
    raise ConfigError(f"{where}: expected a number, 'a+bj' string or [re, im], got {value!r}")


def _as_float(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    return int(value)


def _as_bool(value, where: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{where}: expected true or false, got {value!r}")
    return value


_COERCE = {
    "omega0": _as_float, "omega": _as_float, "epsilon": _as_float, "temperature": _as_float, "beta": _as_float,
    "n_spins": _as_int, "t_max": _as_float, "n_samples": _as_int, "beta_min": _as_float, "beta_max": _as_float,
    "workers": _as_int, "max_spins": _as_int, "reduced_only": _as_bool, "include_large": _as_bool,
    "c0": _as_complex, "c1": _as_complex,
}


def _line_of(text: str, key: str) -> int | None:
    m = re.search(rf"^[ \t]*{re.escape(key)}[ \t]*=", text, flags=re.M)
    return text.count("\n", 0, m.start()) + 1 if m else None


def load_config_file(path) -> dict:
    """Parse a TOML config into flat overrides, with line/field diagnostics."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from exc
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    def fail(key, msg):
        line = _line_of(text, key)
        loc = f"{path}:{line}" if line else str(path)
        raise ConfigError(f"{loc}: field '{key}': {msg}")

    flat: dict = {}
    for key, value in data.items():
        if key not in _TOP_KEYS:
            fail(key, f"unknown field (expected one of {', '.join(_TOP_KEYS)})")
        if key in ("params", "initial_state", "grid"):
            allowed = {"params": _PARAM_KEYS, "initial_state": _STATE_KEYS, "grid": _GRID_KEYS}[key]
            if not isinstance(value, dict):
                fail(key, "expected a table")
            for sub, v in value.items():
                if sub not in allowed:
                    fail(sub, f"unknown field in [{key}] (expected one of {', '.join(allowed)})")
                flat[sub] = v
        else:
            flat[key] = value
    try:
        return normalize_overrides(flat)
    except ConfigError as exc:
        # re-attach a line number to the first offending key mentioned
        msg = str(exc)
        key = msg.split(":", 1)[0].split(".")[-1]
        line = _line_of(text, key)
        raise ConfigError(f"{path}:{line}: {msg}" if line else f"{path}: {msg}") from exc


def normalize_overrides(raw: dict) -> dict:
    """Type-check flat override values; None entries are dropped."""
    out = {}
    for key, value in raw.items():
        if value is None:
            continue
        if key in _COERCE:
            out[key] = _COERCE[key](value, key)
        elif key in ("epsilons", "n_spins_list"):
            if not isinstance(value, (list, tuple)) or not value:
                raise ConfigError(f"{key}: expected a non-empty list, got {value!r}")
            conv = _as_float if key == "epsilons" else _as_int
            out[key] = tuple(conv(v, key) for v in value)
        elif key in ("preset", "kind"):
            if not isinstance(value, str):
                raise ConfigError(f"{key}: expected a string, got {value!r}")
            out[key] = value
        elif key == "output":
            out[key] = Path(value)
        else:
            raise ConfigError(f"{key}: unknown field")
    if "temperature" in out and "beta" in out:
        raise ConfigError("temperature: give either temperature or beta, not both")
    return out


def build_config(preset: str, overrides: dict | None = None) -> ExperimentConfig:
    """Merge preset defaults with overrides (overrides win)."""
    if preset not in PRESETS:
        raise ConfigError(f"preset: expected one of {PRESETS}, got {preset!r}")
    overrides = normalize_overrides(overrides or {})
    merged = dict(PRESET_DEFAULTS[preset])
    if "beta" in overrides:
        merged.pop("temperature", None)
    if "temperature" in overrides:
        merged.pop("beta", None)
    merged.update(overrides)

    params = None
    needed = ("omega0", "omega", "epsilon", "n_spins")
    missing = [k for k in needed if k not in merged]
    if "temperature" not in merged and "beta" not in merged:
        missing.append("temperature")
    if not missing:
        if "beta" in merged:
            beta = merged["beta"]
        else:
            t = merged["temperature"]
            if not t > 0:
                raise ConfigError(f"temperature: must be positive, got {t!r}")
            beta = 1.0 / t
        params = ModelParams(merged["omega0"], merged["omega"], merged["epsilon"], merged["n_spins"], beta)
    elif len(missing) < len(needed) + 1:
        raise ConfigError(f"{missing[0]}: missing model parameter (also missing: {', '.join(missing[1:]) or 'none'})")

    state = InitialState(
        merged.get("kind", "excited"),
        complex(merged.get("c0", 1.0)),
        complex(merged.get("c1", 0.0)),
    )
    kw = {k: merged[k] for k in ("t_max", "n_samples", "beta_min", "beta_max", "epsilons", "n_spins_list",
                                 "output", "workers", "reduced_only", "include_large", "max_spins") if k in merged}
    return ExperimentConfig(preset=preset, params=params, initial_state=state, overrides=overrides, **kw)


def with_params(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    """Copy of ``cfg`` with ModelParams fields replaced."""
    return replace(cfg, params=replace(cfg.require_params(), **changes))


__all__ = [
    "ExperimentConfig",
    "InitialState",
    "PRESETS",
    "PRESET_DEFAULTS",
    "STATE_KINDS",
    "build_config",
    "load_config_file",
    "normalize_overrides",
    "with_params",
]
