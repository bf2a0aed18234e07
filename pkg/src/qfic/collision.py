"""Repeated-interaction (collision) engine for a probe qubit and fresh ancillas.

Each collision applies ``U = exp(-i H tau)`` with the full free + exchange
Hamiltonian to ``rho_S (x) rho'`` and traces out the ancilla. The ancilla
enters the joint state normalized to unit trace; with the raw damped
preparation (trace ``exp(-t/T1)``) the reduced probe trace would shrink
geometrically and there would be no steady state to speak of.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qmath
from .reservoir import ReservoirUnitSpec, prepare_unit


MI_FLOOR = 1e-12  # bits; entropy round-off below this is reported as zero


class NonConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class CollisionParams:
    g: float = 0.1
    tau: float = 0.12
    omega_s: float = 1.0
    omega_r: float = 1.0
    rate: float = 1.0

    def __post_init__(self):
        if self.g < 0:
            raise ValueError("g must be non-negative")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.rate <= 0:
            raise ValueError("rate must be positive")

    def zeta(self) -> float:
        return self.rate * self.tau * self.g


@dataclass
class CollisionTrace:
    probe_states: np.ndarray  # (n, 2, 2)
    mutual_info: np.ndarray  # (n,) bits
    converged: bool
    steps_to_converge: int  # -1 when not converged

    def __len__(self) -> int:
        return len(self.mutual_info)


def interaction_hamiltonian(params: CollisionParams) -> np.ndarray:
    """Free splitting of both qubits plus the exchange coupling ``g (s+ s- + s- s+)``."""
    h = 0.5 * params.omega_s * qmath.kron(qmath.SZ, qmath.I2)
    h = h + 0.5 * params.omega_r * qmath.kron(qmath.I2, qmath.SZ)
    h = h + params.g * (qmath.kron(qmath.SPLUS, qmath.SMINUS)
                        + qmath.kron(qmath.SMINUS, qmath.SPLUS))
    return h


def collision_unitary(params: CollisionParams) -> np.ndarray:
    return qmath.expm_hermitian(interaction_hamiltonian(params), -1j * params.tau)


def _unit_trace(rho_unit) -> np.ndarray:
    rho_unit = np.asarray(rho_unit, dtype=complex)
    return rho_unit / np.trace(rho_unit).real


def collide(rho_s, rho_unit, params: CollisionParams, unitary=None):
    """One collision. Returns the new probe state and the probe-ancilla
    mutual information (bits) of the post-collision joint state."""
    u = collision_unitary(params) if unitary is None else unitary
    joint = u @ qmath.kron(rho_s, _unit_trace(rho_unit)) @ u.conj().T
    joint = qmath.hermitize(joint)
    rho_s_new = qmath.partial_trace(joint, "probe")
    rho_r_new = qmath.partial_trace(joint, "ancilla")
    mi = (qmath.von_neumann_entropy(rho_s_new) + qmath.von_neumann_entropy(rho_r_new)
          - qmath.von_neumann_entropy(joint))
    return rho_s_new, (mi if mi > MI_FLOOR else 0.0)


def transfer_maps(rho_unit, params: CollisionParams, unitary=None):
    """Linear maps ``vec(rho_S) -> vec(rho_S')`` and ``vec(rho_S) -> vec(rho_R')``.

    Row-major vectorization; both are 4x4 complex matrices.
    """
    u = collision_unitary(params) if unitary is None else unitary
    unit = _unit_trace(rho_unit)
    to_probe = np.empty((4, 4), dtype=complex)
    to_anc = np.empty((4, 4), dtype=complex)
    for k in range(4):
        e = np.zeros(4, dtype=complex)
        e[k] = 1.0
        joint = u @ np.kron(e.reshape(2, 2), unit) @ u.conj().T
        to_probe[:, k] = qmath.partial_trace(joint, "probe").ravel()
        to_anc[:, k] = qmath.partial_trace(joint, "ancilla").ravel()
    return to_probe, to_anc


def _entropy2(v: np.ndarray) -> np.ndarray:
    """Entropies (bits) of a stack of row-major vectorized 2x2 Hermitian matrices."""
    a = v[:, 0].real
    d = v[:, 3].real
    b = np.abs(v[:, 1])
    mean = 0.5 * (a + d)
    rad = np.hypot(0.5 * (a - d), b)
    out = np.zeros(len(v))
    for lam in (mean + rad, mean - rad):
        lam = np.clip(lam, 0.0, None)
        nz = lam > 0
        out[nz] -= lam[nz] * np.log2(lam[nz])
    return out


def _tracenorm2(v: np.ndarray) -> np.ndarray:
    a = v[:, 0].real
    d = v[:, 3].real
    mean = 0.5 * (a + d)
    rad = np.hypot(0.5 * (a - d), np.abs(v[:, 1]))
    return np.abs(mean + rad) + np.abs(mean - rad)


def _converged_at(dist, dmi, conv_tol, mi_tol) -> int:
    hit = np.nonzero((dist < conv_tol) & (np.abs(dmi) < mi_tol))[0]
    return int(hit[0]) if len(hit) else -1


def run_collisions(rho_s0, unit: ReservoirUnitSpec, params: CollisionParams,
                   max_steps: int = 1_000_000, conv_tol: float = 1e-8,
                   mi_tol: float = 1e-9, stop_at_convergence: bool = True,
                   method: str = "transfer", block: int = 512) -> CollisionTrace:
    """Collide the probe with ``max_steps`` identical fresh ancillas.

    Convergence: trace distance between successive probe states below
    ``conv_tol`` and the step change of the mutual information below
    ``mi_tol``. ``method="direct"`` calls :func:`collide` every step;
    ``"transfer"`` applies the equivalent precomputed linear maps in blocks.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    if conv_tol <= 0:
        raise ValueError("conv_tol must be positive")
    rho_unit = prepare_unit(unit)
    rho_s0 = np.asarray(rho_s0, dtype=complex)
    if method == "direct":
        return _run_direct(rho_s0, rho_unit, params, max_steps, conv_tol, mi_tol,
                           stop_at_convergence)
    if method != "transfer":
        raise ValueError(f"unknown method {method!r}")

    to_probe, to_anc = transfer_maps(rho_unit, params)
    s_unit = qmath.von_neumann_entropy(_unit_trace(rho_unit))
    powers = np.empty((block, 4, 4), dtype=complex)
    powers[0] = to_probe
    for k in range(1, block):
        powers[k] = to_probe @ powers[k - 1]

    states, mis = [], []
    x = rho_s0.ravel()
    prev_mi = np.nan
    done = 0
    converged_step = -1
    while done < max_steps:
        n = min(block, max_steps - done)
        new = powers[:n] @ x
        new[:, (0, 3)] = new[:, (0, 3)].real  # keep populations real
        new[:, 2] = new[:, 1].conj()
        before = np.vstack([x[None, :], new[:-1]])
        anc = before @ to_anc.T
        mi = _entropy2(new) + _entropy2(anc) - _entropy2(before) - s_unit
        mi = np.where(mi > MI_FLOOR, mi, 0.0)
        dist = _tracenorm2(new - before)
        dmi = np.diff(np.concatenate([[prev_mi], mi]))
        states.append(new)
        mis.append(mi)
        hit = _converged_at(dist, dmi, conv_tol, mi_tol)
        if hit >= 0 and converged_step < 0:
            converged_step = done + hit + 1
        done += n
        x = new[-1]
        prev_mi = mi[-1]
        if stop_at_convergence and converged_step >= 0:
            break

    states = np.concatenate(states).reshape(-1, 2, 2)
    mis = np.concatenate(mis)
    if stop_at_convergence and converged_step >= 0:
        states = states[:converged_step]
        mis = mis[:converged_step]
    return CollisionTrace(states, mis, converged_step >= 0, converged_step)


def _run_direct(rho_s0, rho_unit, params, max_steps, conv_tol, mi_tol, stop):
    u = collision_unitary(params)
    states, mis = [], []
    rho = rho_s0
    prev_mi = np.nan
    converged_step = -1
    for step in range(1, max_steps + 1):
        new, mi = collide(rho, rho_unit, params, unitary=u)
        dist = qmath.trace_distance(new, rho)
        if converged_step < 0 and dist < conv_tol and abs(mi - prev_mi) < mi_tol:
            converged_step = step
        states.append(new)
        mis.append(mi)
        rho, prev_mi = new, mi
        if stop and converged_step >= 0:
            break
    return CollisionTrace(np.array(states), np.array(mis), converged_step >= 0, converged_step)


def plus_state() -> np.ndarray:
    return qmath.projector(qmath.ket(1, 1))


def steady_state_numeric(unit: ReservoirUnitSpec, params: CollisionParams,
                         max_steps: int = 1_000_000, conv_tol: float = 1e-8,
                         rho_s0=None) -> np.ndarray:
    """Final probe state of a converged collision run, starting from ``|+>`` by default."""
    if rho_s0 is None:
        rho_s0 = plus_state()
    trace = run_collisions(rho_s0, unit, params, max_steps, conv_tol)
    if not trace.converged:
        raise NonConvergenceError(
            f"probe did not converge within {max_steps} collisions (phi={unit.phi:.6g})")
    return trace.probe_states[-1]


def steady_state_exact(unit: ReservoirUnitSpec, params: CollisionParams) -> np.ndarray:
    """Fixed point of the one-collision map, from its unit-trace null vector."""
    to_probe, _ = transfer_maps(prepare_unit(unit), params)
    a = np.vstack([to_probe - np.eye(4), [[1, 0, 0, 1]]])
    b = np.array([0, 0, 0, 0, 1], dtype=complex)
    x = np.linalg.lstsq(a, b, rcond=None)[0]
    return qmath.hermitize(x.reshape(2, 2))
