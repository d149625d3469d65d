"""The ten acceptance checks, runnable from pytest or ``centralspin verify``.

Each check returns a :class:`CriterionResult`; ``detail`` carries the worst
observed residuals so a failure is diagnosable from the one-line summary.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .canonical import (
    canonical_hamiltonian_general,
    canonical_rates,
    gauge_shift,
    gksl_superop,
    lindbladian,
    minimal_dissipator,
    omega_linear,
    pseudo_kraus,
    tilde_quantities,
)
from .config import build_config
from .dynamics import (
    dynamical_map,
    oracle_propagate,
    propagate_joint,
    reduced_triplet,
    singular_mask,
)
from .ergotropy import charging_trajectory, ergotropy_bloch, ergotropy_general
from .experiments import FIG6_HEISENBERG, heisenberg_table
from .hmf import mean_force, oracle_mean_force
from .model import ModelParams, bath_thermal_state, build_spectrum
from .states import QubitState
from .thermo import thermo_trajectory

SEED = 20240917


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    elapsed: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d} {self.name}: {self.detail} ({self.elapsed:.2f} s)"


def _random_state(rng) -> QubitState:
    # uniform in the Bloch ball
    v = rng.normal(size=3)
    v *= rng.uniform() ** (1 / 3) / np.linalg.norm(v)
    return QubitState.from_bloch(*v)


def _fig2_params(n_spins=None) -> tuple[ModelParams, QubitState, np.ndarray, tuple]:
    cfg = build_config("fig2")
    p = cfg.params
    if n_spins is not None:
        p = replace(p, n_spins=n_spins)
    return p, cfg.rho0(), cfg.times(), cfg.epsilons


def oracle_equivalence():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for n in (1, 2, 4, 6, 8):
        for _ in range(5):
            p = ModelParams.from_temperature(
                rng.uniform(0.5, 5), rng.uniform(0.5, 5), rng.uniform(0.05, 2), n, rng.uniform(0.1, 10)
            )
            spectrum, bath = build_spectrum(p), bath_thermal_state(p)
            times = rng.uniform(0, 20, size=16)
            for _ in range(10):
                rho = _random_state(rng)
                for t in times:
                    a = propagate_joint(rho, p, spectrum, bath, t).matrix
                    b = oracle_propagate(rho, p, t).matrix
                    worst = max(worst, float(np.abs(a - b).max()))
    return worst <= 1e-9, f"max |analytic - oracle| = {worst:.2e} (tol 1e-9)", 30.0


def map_sanity():
    p, _, times, eps_list = _fig2_params()
    id_err = tp_err = 0.0
    min_choi = math.inf
    for e in eps_list:
        q = replace(p, epsilon=e)
        trip = reduced_triplet(q, np.concatenate([[0.0], times]))
        phi = dynamical_map(trip).phi
        id_err = max(id_err, float(np.abs(phi[0] - np.eye(4)).max()))
        tp = phi[:, 0, :] + phi[:, 3, :]
        tp_err = max(tp_err, float(np.abs(tp - np.array([1, 0, 0, 1])).max()))
        choi = phi.reshape(-1, 2, 2, 2, 2).transpose(0, 1, 3, 2, 4).reshape(-1, 4, 4)
        min_choi = min(min_choi, float(np.linalg.eigvalsh(choi).min()))
    ok = id_err <= 1e-12 and tp_err <= 1e-12 and min_choi >= -1e-10
    return ok, f"|Phi(0)-I| = {id_err:.1e}, trace err = {tp_err:.1e}, min Choi eig = {min_choi:.2e}", None


def first_law():
    p, rho0, times, eps_list = _fig2_params(n_spins=20)
    law = route = 0.0
    for e in eps_list:
        tr = thermo_trajectory(replace(p, epsilon=e), rho0, times, fit_temperature=False)
        law = max(law, float(np.abs(tr.dU_S + tr.Q_B - tr.W_interaction).max()))
        route = max(route, float(np.abs(tr.Q_B - tr.Q_B_current).max()))
    ok = law <= 1e-9 and route <= 1e-9
    return ok, f"first-law residual = {law:.1e}, bath-current route gap = {route:.1e} (tol 1e-9)", None


def second_law():
    p, rho0, times, eps_list = _fig2_params()
    min_sigma = math.inf
    form_gap = 0.0
    for e in eps_list:
        tr = thermo_trajectory(replace(p, epsilon=e), rho0, times, fit_temperature=False)
        min_sigma = min(min_sigma, float(tr.Sigma.min()))
        form_gap = max(form_gap, float(np.abs(tr.Sigma_relative - tr.Sigma).max()))
    cfg3 = build_config("fig3")
    tr3 = thermo_trajectory(cfg3.params, cfg3.rho0(), cfg3.times())
    min_sigma = min(min_sigma, float(tr3.Sigma.min()))
    form_gap = max(form_gap, float(np.abs(tr3.Sigma_relative - tr3.Sigma).max()))
    finite = float(np.max(tr3.Sigma_finite - tr3.Sigma))
    ok = min_sigma >= -1e-9 and form_gap <= 1e-8 and finite <= 1e-8 and np.all(np.isfinite(tr3.Sigma_finite))
    return ok, (
        f"min Sigma = {min_sigma:.1e}, relative vs Clausius gap = {form_gap:.1e}, "
        f"max(Sigma_finite - Sigma) = {finite:.1e}"
    ), 120.0


def hmf_correctness():
    rng = np.random.default_rng(SEED + 5)
    state_err = sum_err = 0.0
    for n in range(1, 11):
        p0 = ModelParams(rng.uniform(0.5, 5), rng.uniform(0.5, 5), rng.uniform(0.05, 2), n, 1.0)
        for beta in (0.01, 0.1, 1.0, 10.0):
            res = mean_force(p0, beta)
            reduced, ratio = oracle_mean_force(p0, beta)
            zeta = reduced / np.trace(reduced).real
            state_err = max(state_err, float(np.abs(res.zeta_star - zeta).max()))
            sum_err = max(sum_err, abs(res.pi00 + res.pi11 - ratio) / ratio)
    ok = state_err <= 1e-10 and sum_err <= 1e-10
    return ok, f"max |zeta* - Tr_B Gibbs| = {state_err:.1e}, rel pi-sum err = {sum_err:.1e} (tol 1e-10)", None


def third_law():
    base = build_config("fig4").params
    cold = mean_force(replace(base, epsilon=0.1), 50.0).S_thermo
    hot_gap = max(abs(mean_force(replace(base, epsilon=e), 1e-4).S_thermo - math.log(2)) for e in (0.1, 0.5, 1.0))
    ok = cold <= 0.05 and hot_gap <= 1e-3
    return ok, f"S(beta=50) = {cold:.4f} (<= 0.05), max |S(beta=1e-4) - ln 2| = {hot_gap:.1e} (<= 1e-3)", None


def canonical_checks():
    cfg = build_config("fig5")
    times = np.linspace(0.0, cfg.t_max, 50)
    omega0_err = form_gap = trace_err = gauge_err = 0.0
    rng = np.random.default_rng(SEED + 7)
    for e in cfg.epsilons:
        p = replace(cfg.params, epsilon=e)
        trip = reduced_triplet(p, times)
        omega, _ = omega_linear(trip.at(0))
        omega0_err = max(omega0_err, abs(float(omega) - 0.5 * p.omega0))
        ok = np.flatnonzero(~singular_mask(trip))
        closed = canonical_rates(trip.at(ok)).omega_t
        for k, i in enumerate(ok):
            l_super = lindbladian(trip.at(i))
            pk = pseudo_kraus(l_super)
            h = canonical_hamiltonian_general(pk)
            form_gap = max(form_gap, abs(h[0, 0].real - closed[k]), abs(h[1, 1].real + closed[k]))
            md = minimal_dissipator(pk, h)
            trace_err = max(trace_err, float(np.abs(np.trace(md.jumps, axis1=1, axis2=2)).max()))
            shifts = rng.normal(size=4) + 1j * rng.normal(size=4)
            h2, jumps2 = gauge_shift(h, md.gammas, md.jumps, shifts)
            shifted = gksl_superop(h2, md.gammas, jumps2)
            gauge_err = max(gauge_err, float(np.abs(shifted - l_super).max()))
    ok = omega0_err <= 1e-8 and form_gap <= 1e-8 and trace_err <= 1e-10 and gauge_err <= 1e-9
    return ok, (
        f"|Omega(0) - w0/2| = {omega0_err:.1e}, closed vs general = {form_gap:.1e}, "
        f"jump trace = {trace_err:.1e}, gauge residual = {gauge_err:.1e}"
    ), None


def ledger_diagnostics():
    cfg = build_config("fig6")
    hp = ModelParams(**FIG6_HEISENBERG)
    times = cfg.times()
    picture_gap = 0.0
    can_gaps = []
    for rho0 in (QubitState.excited(), QubitState.ground()):
        tb, _ = heisenberg_table(hp, rho0, times, cfg.max_spins)
        picture_gap = max(picture_gap, float(np.abs(tb["H_S_schrodinger"] - tb["H_S_heisenberg"]).max()))
        can_gaps.append(float(np.nanmax(np.abs(tb["H_can_expectation"] - tb["H_S_schrodinger"]))))
    led = tilde_quantities(cfg.params, cfg.rho0(), cfg.t_max, cfg.n_samples)
    tr = thermo_trajectory(cfg.params, cfg.rho0(), led.t, fit_temperature=False)
    min_tilde = float(led.Sigma_tilde.min())
    min_sigma = float(tr.Sigma.min())
    ok = picture_gap <= 1e-10 and min(can_gaps) > 0 and min_tilde < 0 and min_sigma >= -1e-9
    return ok, (
        f"Schroedinger vs Heisenberg = {picture_gap:.1e}, H_can gap (excited, ground) = "
        f"({can_gaps[0]:.3f}, {can_gaps[1]:.3f}), min Sigma_tilde = {min_tilde:.3f}, min Sigma = {min_sigma:.1e}"
    ), None


def ergotropy_checks():
    rng = np.random.default_rng(SEED + 9)
    omega0 = 2.5
    h = np.diag([0.5 * omega0, -0.5 * omega0]).astype(complex)
    route_err = 0.0
    for _ in range(1000):
        rho = _random_state(rng)
        route_err = max(route_err, abs(ergotropy_general(rho.matrix, h) - ergotropy_bloch(*rho.bloch, omega0)))
    cfg = build_config("fig7")
    tr = charging_trajectory(cfg.params, cfg.times())
    # W > 0 exactly where eta > 1/2
    consistent = bool(np.array_equal(tr.W_total > 0, tr.eta > 0.5))
    ok = route_err <= 1e-12 and consistent and tr.n_charging >= 1
    return ok, (
        f"spectral vs Bloch = {route_err:.1e}, W>0 <=> eta>1/2: {consistent}, "
        f"samples with eta > 1/2 at eps=2, T=10, N=200: {tr.n_charging}"
    ), None


def performance():
    t = np.linspace(0.0, 50.0, 1000)
    p = ModelParams.from_temperature(2.5, 2.0, 0.2, 100_000, 1.0)
    start = time.perf_counter()
    reduced_triplet(p, t, coherence=True)
    reduced = time.perf_counter() - start
    p2, rho0, _, _ = _fig2_params()
    start = time.perf_counter()
    thermo_trajectory(p2, rho0, np.linspace(0.0, 20.0, 400))
    joint = time.perf_counter() - start
    ok = reduced <= 60.0 and joint <= 120.0
    return ok, f"reduced N=1e5 x 1000 samples: {reduced:.1f} s (<= 60), joint N=50 x 400: {joint:.1f} s (<= 120)", None


CRITERIA = (
    (1, "oracle equivalence", oracle_equivalence),
    (2, "map sanity", map_sanity),
    (3, "first law", first_law),
    (4, "second law", second_law),
    (5, "mean-force state", hmf_correctness),
    (6, "third-law behaviour", third_law),
    (7, "canonical Hamiltonian", canonical_checks),
    (8, "ledger diagnostics", ledger_diagnostics),
    (9, "ergotropy", ergotropy_checks),
    (10, "performance", performance),
)


def run_criterion(number: int) -> CriterionResult:
    _, name, fn = CRITERIA[number - 1]
    start = time.perf_counter()
    ok, detail, budget = fn()
    elapsed = time.perf_counter() - start
    if budget is not None and elapsed > budget:
        ok = False
        detail += f"; runtime {elapsed:.1f} s exceeds {budget:.0f} s"
    return CriterionResult(number, name, bool(ok), detail, elapsed)


def run_all(numbers=None, echo=print) -> list[CriterionResult]:
    out = []
    for number, _, _ in CRITERIA:
        if numbers and number not in numbers:
            continue
        res = run_criterion(number)
        if echo is not None:
            echo(res.line())
        out.append(res)
    return out


__all__ = ["CRITERIA", "CriterionResult", "run_all", "run_criterion"]
