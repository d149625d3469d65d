"""Figure presets and per-module runs that write CSV tables plus JSON run metadata.

Every table is a CSV with a header row and values printed with 17 significant
digits, so a rerun on the same build is bit-identical.  Column names and order
are fixed by :data:`SCHEMAS`; bump :data:`SCHEMA_VERSION` when they change.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .canonical import (
    THETA_TOL,
    canonical_hamiltonian_general,
    canonical_rates,
    heisenberg_system_hamiltonian,
    lindbladian,
    omega_linear,
    pseudo_kraus,
    tilde_quantities,
)
from .config import ExperimentConfig, with_params
from .dynamics import reduced_triplet, singular_mask, system_trajectory
from .ergotropy import charging_trajectory, ergotropy_bloch
from .hmf import mean_force
from .model import ModelParams, build_spectrum
from .states import QubitState
from .thermo import ThermoTrajectory, thermo_trajectory

SCHEMA_VERSION = 1

THERMO_COLUMNS = ["t"] + [c for c in ThermoTrajectory.__dataclass_fields__ if c != "t"]
DYNAMICS_COLUMNS = ["t", "alpha", "eta", "delta_re", "delta_im", "rho00", "rho01_re", "rho01_im", "x", "y", "z"]
HMF_COLUMNS = ["beta", "pi00", "pi11", "H_star_00", "H_star_11", "zeta_star_00", "zeta_star_11", "S_thermo", "hs_norm_diff"]
CANONICAL_COLUMNS = ["t", "zeta", "Gamma", "Theta_re", "Theta_im", "Omega", "Omega_general", "Omega_dot"]
LEDGER_COLUMNS = [
    "t", "dU_S", "Q_B", "W", "Sigma", "dU_S_tilde", "dU_S_tilde_direct", "dW_S_tilde", "dQ_S_tilde",
    "dU_B_tilde", "Sigma_tilde", "Sigma_prime", "Omega",
]
HEISENBERG_COLUMNS = ["t", "H_S_schrodinger", "H_S_heisenberg", "H_can_expectation"]
ERGOTROPY_COLUMNS = ["t", "eta", "x", "y", "z", "W_total", "W_incoherent", "W_coherent", "charging"]

# fixed-schema tables; multi-curve tables have a leading t/beta column and one column per curve
SCHEMAS = {
    "dynamics": DYNAMICS_COLUMNS,
    "thermo": THERMO_COLUMNS,
    "hmf": HMF_COLUMNS,
    "canonical": CANONICAL_COLUMNS,
    "canonical_ledger": LEDGER_COLUMNS,
    "ergotropy": ERGOTROPY_COLUMNS,
    "fig3": ["t", "Sigma", "Sigma_finite", "T_fit", "Sigma_finite_integral"],
    "fig6_ledger": LEDGER_COLUMNS,
    "fig6_heisenberg_excited": HEISENBERG_COLUMNS,
    "fig6_heisenberg_ground": HEISENBERG_COLUMNS,
    "fig7_ergotropy": ["t", "eta", "W_total", "W_incoherent", "W_coherent"],
}

FIG1_PANELS = (("a", 0.1, 1.0), ("b", 0.5, 1.0), ("c", 0.2, 10.0), ("d", 0.2, 0.1))
FIG1_LARGE_N = 100_000
FIG2_QUANTITIES = ("dU_S", "Q_B", "W", "Sigma")
# second parameter set of the fig6 preset: Schroedinger/Heisenberg/canonical energy comparison
FIG6_HEISENBERG = dict(omega0=3.0, omega=3.5, epsilon=1.0, n_spins=50, beta=10.0)
# (epsilon, temperature, n_spins) for the eta curves of fig7
FIG7_CURVES = ((0.5, 1.0, 50), (2.0, 1.0, 50), (2.0, 10.0, 50), (2.0, 10.0, 200))


@dataclass
class RunResult:
    tables: dict = field(default_factory=dict)  # file stem -> {column: array}
    skipped: dict = field(default_factory=dict)  # file stem -> list of skipped node times
    notes: dict = field(default_factory=dict)


def _pmap(fn, items, workers: int):
    items = list(items)
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def curve_label(prefix: str, value: float) -> str:
    return f"{prefix}_{value:.6g}"


def write_csv(path, columns: dict) -> list[str]:
    names = list(columns)
    data = np.column_stack([np.asarray(columns[n], dtype=float) for n in names])
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header=",".join(names), comments="")
    return names


def read_csv(path) -> dict:
    with open(path) as fh:
        names = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {n: data[:, i] for i, n in enumerate(names)}


def save(result: RunResult, cfg: ExperimentConfig, command: str, wall_time: float) -> Path:
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    files = {}
    for stem, cols in result.tables.items():
        files[f"{stem}.csv"] = write_csv(out / f"{stem}.csv", cols)
    meta = {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "command": command,
        "config": cfg.describe(),
        "files": files,
        "skipped_nodes": {k: [float(t) for t in v] for k, v in result.skipped.items()},
        "notes": result.notes,
        "wall_time_s": wall_time,
    }
    path = out / f"{command.replace(' ', '_')}.json"
    path.write_text(json.dumps(meta, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, Path):
        return str(x)
    raise TypeError(f"not JSON serialisable: {type(x).__name__}")


# --- per-module runs ----------------------------------------------------------


def _needs_coherence(rho0: QubitState) -> bool:
    return rho0.rho01 != 0


def dynamics_table(params: ModelParams, rho0: QubitState, times, coherence: bool = True) -> dict:
    trip = reduced_triplet(params, times, coherence=coherence)
    x, y, z = system_trajectory(rho0, trip)
    rho01 = trip.delta * rho0.rho01
    return {
        "t": times,
        "alpha": trip.alpha,
        "eta": trip.eta,
        "delta_re": np.real(trip.delta),
        "delta_im": np.imag(trip.delta),
        "rho00": 0.5 * (1.0 + z),
        "rho01_re": np.real(rho01),
        "rho01_im": np.imag(rho01),
        "x": x,
        "y": y,
        "z": z,
    }


def run_dynamics(cfg: ExperimentConfig) -> RunResult:
    p = cfg.require_params()
    rho0 = cfg.rho0()
    coherence = not cfg.reduced_only or _needs_coherence(rho0)
    table = dynamics_table(p, rho0, cfg.times(), coherence)
    if not coherence:
        # delta was not evaluated; mark it rather than print placeholder values
        table["delta_re"] = np.full(cfg.n_samples, np.nan)
        table["delta_im"] = np.full(cfg.n_samples, np.nan)
    return RunResult(tables={"dynamics": table}, notes={"coherence_evaluated": coherence})


def thermo_table(traj: ThermoTrajectory) -> dict:
    return {c: getattr(traj, c) for c in THERMO_COLUMNS}


def run_thermo(cfg: ExperimentConfig) -> RunResult:
    p = cfg.require_params()
    traj = thermo_trajectory(p, cfg.rho0(), cfg.times(), max_spins=cfg.max_spins, workers=cfg.workers)
    notes = {
        "max_first_law_residual": float(np.abs(traj.W - traj.W_interaction).max()),
        "max_sigma_form_gap": float(np.abs(traj.Sigma - traj.Sigma_relative).max()),
        "min_Sigma": float(traj.Sigma.min()),
    }
    bad = ~np.isfinite(traj.inverse_T_fit)
    skipped = {"thermo": traj.t[bad].tolist()} if bad.any() else {}
    return RunResult(tables={"thermo": thermo_table(traj)}, skipped=skipped, notes=notes)


def hmf_table(params: ModelParams, betas) -> dict:
    spectrum = None if params.decoupled else build_spectrum(params)
    rows = [mean_force(params, float(b), spectrum) for b in betas]
    return {
        "beta": np.asarray(betas, dtype=float),
        "pi00": [r.pi00 for r in rows],
        "pi11": [r.pi11 for r in rows],
        "H_star_00": [r.H_star[0, 0].real for r in rows],
        "H_star_11": [r.H_star[1, 1].real for r in rows],
        "zeta_star_00": [r.zeta_star[0, 0].real for r in rows],
        "zeta_star_11": [r.zeta_star[1, 1].real for r in rows],
        "S_thermo": [r.S_thermo for r in rows],
        "hs_norm_diff": [r.hs_norm_diff for r in rows],
    }


def run_hmf(cfg: ExperimentConfig) -> RunResult:
    table = hmf_table(cfg.require_params(), cfg.betas())
    s = np.asarray(table["S_thermo"])
    neg = s < 0
    notes = {"negative_S_thermo_betas": np.asarray(table["beta"])[neg].tolist()}
    return RunResult(tables={"hmf": table}, notes=notes)


def canonical_table(params: ModelParams, times):
    """Omega(t) by both routes; singular nodes are written as NaN and returned separately."""
    times = np.asarray(times, dtype=float)
    trip = reduced_triplet(params, times)
    bad = singular_mask(trip) | (np.abs(trip.delta) <= THETA_TOL)
    n = times.size
    cols = {c: np.full(n, np.nan) for c in CANONICAL_COLUMNS}
    cols["t"] = times
    ok = np.flatnonzero(~bad)
    if ok.size:
        sub = trip.at(ok)
        rates = canonical_rates(sub)
        omega, omega_dot = omega_linear(sub)
        cols["zeta"][ok] = np.real(rates.zeta)
        cols["Gamma"][ok] = np.real(rates.gamma_cap)
        cols["Theta_re"][ok] = np.real(rates.theta)
        cols["Theta_im"][ok] = np.imag(rates.theta)
        cols["Omega"][ok] = omega
        cols["Omega_dot"][ok] = omega_dot
        general = [canonical_hamiltonian_general(pseudo_kraus(lindbladian(trip.at(i))))[0, 0].real for i in ok]
        cols["Omega_general"][ok] = general
    return cols, times[bad].tolist()


def ledger_table(params: ModelParams, rho0: QubitState, t_max: float, n_samples: int, max_spins: int, workers: int = 1):
    led = tilde_quantities(params, rho0, t_max, n_samples, max_spins=max_spins)
    traj = thermo_trajectory(params, rho0, led.t, max_spins=max_spins, fit_temperature=False, workers=workers)
    table = {
        "t": led.t,
        "dU_S": traj.dU_S,
        "Q_B": traj.Q_B,
        "W": traj.W,
        "Sigma": traj.Sigma,
        "dU_S_tilde": led.dU_S_tilde,
        "dU_S_tilde_direct": led.dU_S_tilde_direct,
        "dW_S_tilde": led.dW_S_tilde,
        "dQ_S_tilde": led.dQ_S_tilde,
        "dU_B_tilde": led.dU_B_tilde,
        "Sigma_tilde": led.Sigma_tilde,
        "Sigma_prime": led.Sigma_prime,
        "Omega": led.Omega,
    }
    notes = {
        "quadrature_error": led.quadrature_error,
        "min_Sigma": float(traj.Sigma.min()),
        "min_Sigma_tilde": float(led.Sigma_tilde.min()),
        "min_Sigma_prime": float(led.Sigma_prime.min()),
    }
    return table, notes


def run_canonical(cfg: ExperimentConfig, ledger: bool = False) -> RunResult:
    p = cfg.require_params()
    cols, skipped = canonical_table(p, cfg.times())
    res = RunResult(tables={"canonical": cols}, skipped={"canonical": skipped} if skipped else {})
    if ledger:
        table, notes = ledger_table(p, cfg.rho0(), cfg.t_max, cfg.n_samples, cfg.max_spins, cfg.workers)
        res.tables["canonical_ledger"] = table
        res.notes.update(notes)
    return res


def ergotropy_table(params: ModelParams, rho0: QubitState, times) -> dict:
    trip = reduced_triplet(params, times, coherence=_needs_coherence(rho0))
    x, y, z = system_trajectory(rho0, trip)
    if not _needs_coherence(rho0):
        x = np.zeros_like(z)
        y = np.zeros_like(z)
    w = ergotropy_bloch(x, y, z, params.omega0)
    inc = np.where(z > 0, params.omega0 * z, 0.0)
    return {
        "t": np.asarray(times, dtype=float),
        "eta": trip.eta,
        "x": x,
        "y": y,
        "z": z,
        "W_total": w,
        "W_incoherent": inc,
        "W_coherent": w - inc,
        "charging": (trip.eta > 0.5).astype(float),
    }


def run_ergotropy(cfg: ExperimentConfig) -> RunResult:
    table = ergotropy_table(cfg.require_params(), cfg.rho0(), cfg.times())
    return RunResult(tables={"ergotropy": table}, notes={"n_charging": int(np.sum(table["charging"]))})


# --- figure presets -------------------------------------------------------------


def run_fig1(cfg: ExperimentConfig) -> RunResult:
    p = cfg.require_params()
    rho0 = cfg.rho0()
    times = cfg.times()
    sizes = list(cfg.n_spins_list)
    if cfg.include_large and FIG1_LARGE_N not in sizes:
        sizes.append(FIG1_LARGE_N)
    coherence = _needs_coherence(rho0)
    res = RunResult()
    for panel, eps, temp in FIG1_PANELS:
        def curve(n, eps=eps, temp=temp):
            q = replace(p, epsilon=eps, n_spins=n, beta=1.0 / temp)
            return system_trajectory(rho0, reduced_triplet(q, times, coherence=coherence))[2]

        zs = _pmap(curve, sizes, cfg.workers)
        table = {"t": times}
        for n, z in zip(sizes, zs):
            table[f"rho00_N{n}"] = 0.5 * (1.0 + z)
        res.tables[f"fig1_{panel}"] = table
        res.notes[f"panel_{panel}"] = {"epsilon": eps, "temperature": temp}
    return res


def run_fig2(cfg: ExperimentConfig) -> RunResult:
    eps_list = sorted(cfg.epsilons)
    trajs = _pmap(
        lambda e: thermo_trajectory(
            with_params(cfg, epsilon=e).params, cfg.rho0(), cfg.times(), max_spins=cfg.max_spins, fit_temperature=False
        ),
        eps_list,
        cfg.workers,
    )
    res = RunResult()
    for q in FIG2_QUANTITIES:
        table = {"t": cfg.times()}
        for e, tr in zip(eps_list, trajs):
            table[curve_label("eps", e)] = getattr(tr, q)
        res.tables[f"fig2_{q}"] = table
    res.notes["max_first_law_residual"] = max(float(np.abs(tr.W - tr.W_interaction).max()) for tr in trajs)
    res.notes["min_Sigma"] = min(float(tr.Sigma.min()) for tr in trajs)
    return res


def run_fig3(cfg: ExperimentConfig) -> RunResult:
    traj = thermo_trajectory(cfg.require_params(), cfg.rho0(), cfg.times(), max_spins=cfg.max_spins, workers=cfg.workers)
    table = {c: getattr(traj, c) for c in SCHEMAS["fig3"]}
    bad = ~np.isfinite(traj.inverse_T_fit)
    return RunResult(
        tables={"fig3": table},
        skipped={"fig3": traj.t[bad].tolist()} if bad.any() else {},
        notes={"max_Sigma_finite_minus_Sigma": float(np.nanmax(traj.Sigma_finite - traj.Sigma))},
    )


def run_fig4(cfg: ExperimentConfig) -> RunResult:
    betas = cfg.betas()
    tables = _pmap(lambda e: hmf_table(with_params(cfg, epsilon=e).params, betas), sorted(cfg.epsilons), cfg.workers)
    norm = {"beta": betas}
    ent = {"beta": betas}
    for e, tb in zip(sorted(cfg.epsilons), tables):
        norm[curve_label("eps", e)] = tb["hs_norm_diff"]
        ent[curve_label("eps", e)] = tb["S_thermo"]
    return RunResult(tables={"fig4_hs_norm": norm, "fig4_entropy": ent})


def run_fig5(cfg: ExperimentConfig) -> RunResult:
    times = cfg.times()
    table = {"t": times}
    skipped = {}
    for e in sorted(cfg.epsilons):
        cols, bad = canonical_table(with_params(cfg, epsilon=e).params, times)
        label = curve_label("eps", e)
        table[label] = cols["Omega"]
        if bad:
            skipped[label] = bad
    return RunResult(tables={"fig5_omega": table}, skipped=skipped)


def heisenberg_table(params: ModelParams, rho0: QubitState, times, max_spins: int, workers: int = 1):
    times = np.asarray(times, dtype=float)
    trip = reduced_triplet(params, times)
    _, _, z = system_trajectory(rho0, trip)
    h_s = params.system_hamiltonian()
    heis = _pmap(
        lambda t: float(np.real(np.trace(heisenberg_system_hamiltonian(params, t, max_spins) @ rho0.matrix))),
        times,
        workers,
    )
    bad = singular_mask(trip) | (np.abs(trip.delta) <= THETA_TOL)
    with np.errstate(divide="ignore", invalid="ignore"):
        omega, _ = omega_linear(trip)
    omega = np.where(bad, np.nan, omega)
    return {
        "t": times,
        "H_S_schrodinger": 0.5 * params.omega0 * z,
        "H_S_heisenberg": np.array(heis),
        "H_can_expectation": omega * z,
    }, times[bad].tolist()


def run_fig6(cfg: ExperimentConfig) -> RunResult:
    p = cfg.require_params()
    res = RunResult()
    table, notes = ledger_table(p, cfg.rho0(), cfg.t_max, cfg.n_samples, cfg.max_spins, cfg.workers)
    res.tables["fig6_ledger"] = table
    res.notes.update(notes)
    hp = ModelParams(**FIG6_HEISENBERG)
    res.notes["heisenberg_params"] = dict(FIG6_HEISENBERG)
    for name, rho0 in (("excited", QubitState.excited()), ("ground", QubitState.ground())):
        tb, bad = heisenberg_table(hp, rho0, cfg.times(), cfg.max_spins, cfg.workers)
        stem = f"fig6_heisenberg_{name}"
        res.tables[stem] = tb
        if bad:
            res.skipped[stem] = bad
        res.notes[f"{stem}_picture_gap"] = float(np.abs(tb["H_S_schrodinger"] - tb["H_S_heisenberg"]).max())
        res.notes[f"{stem}_canonical_gap"] = float(np.nanmax(np.abs(tb["H_can_expectation"] - tb["H_S_schrodinger"])))
    return res


def fig7_curve_label(eps, temp, n) -> str:
    return f"eta_eps{eps:g}_T{temp:g}_N{n}"


def run_fig7(cfg: ExperimentConfig) -> RunResult:
    p = cfg.require_params()
    times = cfg.times()
    curves = _pmap(
        lambda c: charging_trajectory(replace(p, epsilon=c[0], beta=1.0 / c[1], n_spins=c[2]), times),
        FIG7_CURVES,
        cfg.workers,
    )
    eta = {"t": times}
    notes = {}
    for c, tr in zip(FIG7_CURVES, curves):
        label = fig7_curve_label(*c)
        eta[label] = tr.eta
        notes[f"{label}_n_charging"] = tr.n_charging
    main = charging_trajectory(p, times)
    notes["ergotropy_n_charging"] = main.n_charging
    erg = {"t": times, "eta": main.eta, "W_total": main.W_total, "W_incoherent": main.W_incoherent, "W_coherent": main.W_coherent}
    return RunResult(tables={"fig7_eta": eta, "fig7_ergotropy": erg}, notes=notes)


def run_custom(cfg: ExperimentConfig) -> RunResult:
    res = run_dynamics(cfg)
    if not cfg.reduced_only:
        th = run_thermo(cfg)
        res.tables.update(th.tables)
        res.skipped.update(th.skipped)
        res.notes.update(th.notes)
    return res


PRESET_RUNNERS = {
    "fig1": run_fig1,
    "fig2": run_fig2,
    "fig3": run_fig3,
    "fig4": run_fig4,
    "fig5": run_fig5,
    "fig6": run_fig6,
    "fig7": run_fig7,
    "custom": run_custom,
}


def run(cfg: ExperimentConfig, command: str | None = None, runner=None) -> tuple[RunResult, Path]:
    """Execute a preset (or ``runner``) and write its tables and metadata under ``cfg.output``."""
    runner = runner or PRESET_RUNNERS[cfg.preset]
    start = time.perf_counter()
    result = runner(cfg)
    wall = time.perf_counter() - start
    meta = save(result, cfg, command or f"run {cfg.preset}", wall)
    return result, meta


__all__ = [
    "FIG1_PANELS",
    "FIG6_HEISENBERG",
    "FIG7_CURVES",
    "PRESET_RUNNERS",
    "RunResult",
    "SCHEMAS",
    "SCHEMA_VERSION",
    "canonical_table",
    "dynamics_table",
    "ergotropy_table",
    "heisenberg_table",
    "hmf_table",
    "ledger_table",
    "read_csv",
    "run",
    "write_csv",
]
