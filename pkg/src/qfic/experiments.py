"""Experiment pipelines behind the ``qfic`` command."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import qmath
from .collision import (CollisionParams, NonConvergenceError, plus_state, run_collisions)
from .config import ExperimentConfig, format_value
from .devicesim import (GHZ, NoiseChannels, PulseSpec, bloch_trajectory, calibrate,
                        qfi_device_sweep)
from .fisher import centered_diff, qfi_qubit_matrix
from .microme import RateBundle, qfi_closed_form, steady_state_analytic
from .reservoir import ReservoirUnitSpec


@dataclass
class SweepResult:
    columns: dict[str, np.ndarray]
    metadata: dict[str, str] = field(default_factory=dict)  # resolved config echo
    info: dict[str, str] = field(default_factory=dict)  # derived quantities

    def __post_init__(self):
        self.columns = {k: np.asarray(v, dtype=float) for k, v in self.columns.items()}
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"unequal column lengths {sorted(lengths)}")

    def __len__(self) -> int:
        return len(next(iter(self.columns.values()))) if self.columns else 0


def _map(fn, items, workers):
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def unit_spec(cfg: ExperimentConfig, phi: float) -> ReservoirUnitSpec:
    return ReservoirUnitSpec(phi, cfg.t_exposure_ns * 1e-9, cfg.t1_us * 1e-6, cfg.t2_us * 1e-6)


def collision_params(cfg: ExperimentConfig) -> CollisionParams:
    rate = cfg.rate
    if rate is None:
        rate = 1.0 if cfg.zeta is None or cfg.g == 0 else cfg.zeta / (cfg.tau * cfg.g)
    return CollisionParams(g=cfg.g, tau=cfg.tau, rate=rate)


def rate_bundle(cfg: ExperimentConfig) -> RateBundle:
    return RateBundle(1e6 / cfg.t1_us, 1e6 / cfg.t2_us, cfg.resolved_zeta,
                      cfg.t_exposure_ns * 1e-9)


def pulse_spec(cfg: ExperimentConfig) -> PulseSpec:
    dt = None if cfg.dt_ps is None else cfg.dt_ps * 1e-3
    return PulseSpec(omega0=cfg.omega0_ghz * GHZ, sigma_p=cfg.sigma_p_ns, alpha=cfg.alpha,
                     window_k=cfg.window_k, dt=dt)


def noise_channels(cfg: ExperimentConfig) -> NoiseChannels:
    return NoiseChannels.from_times(cfg.t1_us * 1e3, cfg.t2_us * 1e3)


def _mutual_info(cfg):
    phases = cfg.phases() if cfg.phi_list else [math.pi / 4, math.pi / 2, math.pi]
    params = collision_params(cfg)

    def one(phi):
        return run_collisions(plus_state(), unit_spec(cfg, phi), params,
                              max_steps=cfg.collisions, conv_tol=cfg.conv_tol,
                              stop_at_convergence=False)

    traces = _map(one, phases, cfg.workers)
    every = cfg.sample_every or max(1, cfg.collisions // 1000)
    steps = np.arange(1, cfg.collisions + 1)
    keep = (steps == 1) | (steps % every == 0)
    cols = {"step": steps[keep]}
    for k, tr in enumerate(traces):
        cols[f"mi_{k}"] = tr.mutual_info[keep]
    info = {
        "phi-columns": ",".join(repr(p) for p in phases),
        "converged": ",".join(format_value(t.converged) for t in traces),
        "steps-to-converge": ",".join(str(t.steps_to_converge) for t in traces),
        "final-mi": ",".join(repr(float(t.mutual_info[-1])) for t in traces),
    }
    return cols, info


def _qfi_analytic(cfg):
    rates = rate_bundle(cfg)
    phases = cfg.phases()

    def state(phi):
        rho = steady_state_analytic(phi, rates)
        return rho / np.trace(rho).real if cfg.normalize_ancilla else rho

    rows = []
    for phi in phases:
        rho = state(phi)
        f_mat = qfi_qubit_matrix(rho, centered_diff(state, phi, cfg.dphi)).value
        r = qmath.bloch_from_rho(rho)
        rows.append((phi, qfi_closed_form(phi, rates).value, f_mat, r[0], r[2]))
    names = ("phi", "qfi", "qfi_matrix", "rx", "rz")
    return dict(zip(names, np.array(rows, dtype=float).reshape(-1, 5).T)), {}


def _steady_state(cfg):
    params = collision_params(cfg)
    rates = rate_bundle(cfg)
    phases = cfg.phases()

    def one(phi):
        tr = run_collisions(plus_state(), unit_spec(cfg, phi), params,
                            max_steps=cfg.collisions, conv_tol=cfg.conv_tol)
        if not tr.converged:
            raise NonConvergenceError(
                f"steady-state: no convergence within {cfg.collisions} collisions "
                f"at phi={phi:.6g}")
        return tr.probe_states[-1], tr.steps_to_converge

    results = _map(one, phases, cfg.workers)
    rows = []
    for phi, (rho, steps) in zip(phases, results):
        ref = steady_state_analytic(phi, rates)
        ref = ref / np.trace(ref).real
        r, r_ref = qmath.bloch_from_rho(rho), qmath.bloch_from_rho(ref)
        rows.append((phi, rho[0, 0].real, rho[1, 1].real, r[0], r[1],
                     ref[0, 0].real, ref[1, 1].real, r_ref[0], steps))
    names = ("phi", "p0", "p1", "rx", "ry", "ref_p0", "ref_p1", "ref_rx", "steps")
    return dict(zip(names, np.array(rows, dtype=float).reshape(-1, 9).T)), {}


def _calibrated(cfg):
    spec = pulse_spec(cfg)
    cal = calibrate(spec)
    info = {"amp-scale": repr(cal.amp_scale), "fidelity": repr(cal.fidelity)}
    return replace(spec, amp_scale=cal.amp_scale), cal, info


def _calibrate(cfg):
    _, cal, info = _calibrated(cfg)
    return {"amp_scale": [cal.amp_scale], "fidelity": [cal.fidelity]}, info


def _qfi_device(cfg):
    spec, _, info = _calibrated(cfg)
    phi, qfi, states = qfi_device_sweep(cfg.phases(), cfg.dphi, spec=spec,
                                        noise=noise_channels(cfg), workers=cfg.workers)
    purity = np.array([qmath.purity(s) for s in states])
    return {"phi": phi, "qfi": qfi, "purity": purity}, info


def _bloch_traj(cfg):
    spec, _, info = _calibrated(cfg)
    traj = bloch_trajectory(qmath.projector([1, 0]), spec, noise_channels(cfg),
                            sample_every=cfg.sample_every or 64)
    cols = {"t_ns": traj.times, "rx": traj.bloch[:, 0], "ry": traj.bloch[:, 1],
            "rz": traj.bloch[:, 2], "purity": traj.purities}
    return cols, info


PIPELINES = {
    "mutual-info": _mutual_info,
    "qfi-analytic": _qfi_analytic,
    "steady-state": _steady_state,
    "calibrate": _calibrate,
    "qfi-device": _qfi_device,
    "bloch-traj": _bloch_traj,
}


def run_experiment(cfg: ExperimentConfig) -> SweepResult:
    columns, info = PIPELINES[cfg.experiment](cfg)
    info = {"zeta-resolved": repr(cfg.resolved_zeta), **info}
    if cfg.experiment in ("mutual-info", "steady-state"):
        params = collision_params(cfg)
        info.update({"omega-s": repr(params.omega_s), "omega-r": repr(params.omega_r),
                     "rate-resolved": repr(params.rate)})
    return SweepResult(columns, cfg.echo(), info)
