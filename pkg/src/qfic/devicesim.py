"""Pulse-level simulation of the noisy H-phi-H sequence on a driven qubit.

Internal units: nanoseconds and rad/ns. The Hadamards are compiled as
``Rz(pi/2) Rx(pi/2) Rz(pi/2)``; z rotations are exact frame updates and each
``Rx(pi/2)`` is a Gaussian-enveloped cosine drive integrated in the lab frame
under a Lindblad equation with ``sigma_minus`` decay and ``sigma_z`` dephasing.
After a pulse the state is taken back to the drive's rotating frame, which is
the frame the virtual z updates refer to.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize_scalar

from . import _kernels, qmath
from .fisher import qfi_qubit_matrix

GHZ = 2 * math.pi  # rad/ns per GHz
POSITIVITY_ABORT = 1e-6


class CalibrationError(RuntimeError):
    pass


class PositivityError(RuntimeError):
    pass


@dataclass(frozen=True)
class PulseSpec:
    """Gaussian x-pulse. Times in ns, angular frequencies in rad/ns.

    ``dt`` defaults to one 64th of the drive period; the integrator shrinks
    it slightly so that a whole number of steps spans the window.
    ``drive`` selects the lab-frame cosine carrier (``"lab"``) or the
    rotating-wave propagator (``"rwa"``, drive ``Omega(t)/2`` on sigma_x).
    """

    omega0: float = 4.5 * GHZ
    omega_d: float | None = None
    sigma_p: float = 22.4
    alpha: float = math.pi / 2
    window_k: float = 4.0
    dt: float | None = None
    amp_scale: float = 1.0
    drive: str = "lab"

    def __post_init__(self):
        if self.sigma_p <= 0:
            raise ValueError("sigma_p must be positive")
        if self.window_k < 3:
            raise ValueError("window_k must be >= 3")
        if self.drive not in ("lab", "rwa"):
            raise ValueError("drive must be 'lab' or 'rwa'")
        if self.dt is not None and (self.dt <= 0 or self.dt > self.period / 40):
            raise ValueError(f"dt={self.dt:g} ns exceeds the drive period / 40")

    @property
    def drive_freq(self) -> float:
        return self.omega0 if self.omega_d is None else self.omega_d

    @property
    def period(self) -> float:
        return 2 * math.pi / self.drive_freq

    @property
    def window(self) -> float:
        return 2 * self.window_k * self.sigma_p

    @property
    def center(self) -> float:
        return self.window_k * self.sigma_p

    @property
    def step(self) -> float:
        return self.period / 64 if self.dt is None else self.dt

    @property
    def peak(self) -> float:
        return self.amp_scale * peak_amplitude(self.alpha, self.sigma_p)


@dataclass(frozen=True)
class NoiseChannels:
    """Decay rate of ``sigma_minus`` and dephasing rate of ``sigma_z``, in 1/ns."""

    gamma1: float = 0.0
    gamma_phi: float = 0.0

    def __post_init__(self):
        if self.gamma1 < 0:
            raise ValueError("gamma1 must be non-negative")
        if self.gamma_phi < 0:
            raise ValueError("gamma_phi must be non-negative (requires T2 <= 2 T1)")

    @classmethod
    def from_times(cls, t1: float, t2: float) -> "NoiseChannels":
        """``gamma1 = 1/T1``, ``gamma_phi = 1/T2 - 1/(2 T1)``; times in ns."""
        return cls(1.0 / t1, 1.0 / t2 - 0.5 / t1)


NOISELESS = NoiseChannels()


@dataclass
class Trajectory:
    times: np.ndarray  # ns
    bloch: np.ndarray  # (n, 3)
    purities: np.ndarray


@dataclass(frozen=True)
class Calibration:
    amp_scale: float
    fidelity: float


def peak_amplitude(alpha: float, sigma_p: float) -> float:
    if sigma_p <= 0:
        raise ValueError("sigma_p must be positive")
    return alpha / (math.sqrt(math.pi) * sigma_p)


def gaussian_envelope(t, spec: PulseSpec):
    t = np.asarray(t, dtype=float)
    return spec.peak * np.exp(-((t - spec.center) / spec.sigma_p) ** 2)


def lab_frame_hamiltonian(t: float, spec: PulseSpec) -> np.ndarray:
    drive = float(gaussian_envelope(t, spec)) * math.cos(spec.drive_freq * t)
    return 0.5 * spec.omega0 * qmath.SZ + drive * qmath.SX


def _lindblad_dissipator(op, rho):
    od = op.conj().T
    return op @ rho @ od - 0.5 * (od @ op @ rho + rho @ od @ op)


def lindblad_rhs(rho, t: float, spec: PulseSpec, noise: NoiseChannels) -> np.ndarray:
    """Reference (numpy) right-hand side in the lab frame."""
    rho = np.asarray(rho, dtype=complex)
    h = lab_frame_hamiltonian(t, spec)
    return (-1j * (h @ rho - rho @ h)
            + noise.gamma1 * _lindblad_dissipator(qmath.SMINUS, rho)
            + noise.gamma_phi * _lindblad_dissipator(qmath.SZ, rho))


def _grid(spec: PulseSpec, t_start: float, t_end: float) -> tuple[int, float]:
    span = t_end - t_start
    if span < 0:
        raise ValueError("t_end must not precede t_start")
    n = max(1, math.ceil(span / spec.step - 1e-9)) if span > 0 else 0
    return n, (span / n if n else 0.0)


def _integrate(rho0, spec, noise, t_start, t_end, sample_every=0):
    n, dt = _grid(spec, t_start, t_end)
    if spec.drive == "lab":
        hz, mode = 0.5 * spec.omega0, _kernels.LAB
    else:
        hz, mode = 0.5 * (spec.omega0 - spec.drive_freq), _kernels.RWA
    rho0 = np.ascontiguousarray(rho0, dtype=np.complex128)
    out, samples, times = _kernels.rk4_qubit(
        rho0, float(t_start), dt, n, hz, spec.drive_freq, spec.peak, spec.center,
        spec.sigma_p, noise.gamma1, noise.gamma_phi, mode, sample_every)
    w_min = qmath.eigh(out)[0][-1]
    if w_min < -POSITIVITY_ABORT:
        raise PositivityError(f"propagated state has eigenvalue {w_min:.3e}")
    return out, samples, times


def propagate(rho0, spec: PulseSpec, noise: NoiseChannels = NOISELESS,
              t_start: float = 0.0, t_end: float | None = None) -> np.ndarray:
    """RK4 solution of the Lindblad equation from ``t_start`` to ``t_end``
    (default: end of the pulse window), in the frame selected by ``spec.drive``."""
    if t_end is None:
        t_end = spec.window
    return _integrate(rho0, spec, noise, t_start, t_end)[0]


def virtual_z(rho, beta: float) -> np.ndarray:
    """Exact frame rotation ``Rz(beta) rho Rz(beta)^dagger``."""
    rho = np.asarray(rho, dtype=complex)
    ph = np.exp(-1j * beta)
    return np.array([[rho[0, 0], rho[0, 1] * ph], [rho[1, 0] * np.conj(ph), rho[1, 1]]])


def x_pulse(rho, spec: PulseSpec, noise: NoiseChannels = NOISELESS) -> np.ndarray:
    """Noisy ``Rx(pi/2)`` channel: one pulse window, reported in the drive frame."""
    out = propagate(rho, spec, noise)
    if spec.drive == "lab":
        out = virtual_z(out, -spec.drive_freq * spec.window)
    return out


_PTM_INPUTS = (
    0.5 * qmath.I2,
    0.5 * (qmath.I2 + qmath.SX),
    0.5 * (qmath.I2 + qmath.SY),
    0.5 * (qmath.I2 + qmath.SZ),
)


def pauli_transfer_matrix(channel) -> np.ndarray:
    """4x4 real matrix ``R_ij = Tr(P_i E(P_j)) / 2`` over (I, X, Y, Z).

    Built from four valid input states so ``channel`` only ever sees
    density matrices.
    """
    paulis = (qmath.I2, qmath.SX, qmath.SY, qmath.SZ)
    outs = [channel(s) for s in _PTM_INPUTS]
    # E(P_0/2) from the maximally mixed input; E(P_k/2) = E((I+P_k)/2) - E(I/2)
    images = [outs[0]] + [outs[k] - outs[0] for k in range(1, 4)]
    r = np.empty((4, 4))
    for j, img in enumerate(images):
        for i, p in enumerate(paulis):
            r[i, j] = np.trace(p @ img).real  # (1/2) Tr(P_i E(P_j)) with E(P_j) = 2*img
    return r


def unitary_ptm(u) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    return pauli_transfer_matrix(lambda rho: u @ rho @ u.conj().T)


def average_gate_fidelity(ptm, target_unitary) -> float:
    d = 2
    f_pro = np.trace(unitary_ptm(target_unitary).T @ ptm) / d ** 2
    return float((d * f_pro + 1) / (d + 1))


def rx(theta: float) -> np.ndarray:
    return qmath.expm_hermitian(qmath.SX, -0.5j * theta)


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def pulse_fidelity(spec: PulseSpec, target=None, noise: NoiseChannels = NOISELESS) -> float:
    target = rx(math.pi / 2) if target is None else target
    ptm = pauli_transfer_matrix(lambda rho: x_pulse(rho, spec, noise))
    return average_gate_fidelity(ptm, target)


def calibrate(spec: PulseSpec, target=None, bounds=(0.5, 4.0), n_scan: int = 41,
              min_fidelity: float = 0.999) -> Calibration:
    """Amplitude multiplier that makes the noiseless pulse closest to ``target``.

    Log-spaced scan over ``bounds`` followed by golden-section refinement of
    the best bracket.
    """
    target = rx(math.pi / 2) if target is None else target

    def infidelity(s):
        return 1.0 - pulse_fidelity(replace(spec, amp_scale=float(s)), target)

    scan = np.geomspace(bounds[0], bounds[1], n_scan)
    values = np.array([infidelity(s) for s in scan])
    i = int(np.argmin(values))
    if 0 < i < n_scan - 1:
        res = minimize_scalar(infidelity, bracket=(scan[i - 1], scan[i], scan[i + 1]),
                              method="golden", tol=1e-10)
    else:
        # optimum at the edge of the scan: refine inside the outermost cell
        lo, hi = (scan[0], scan[1]) if i == 0 else (scan[-2], scan[-1])
        res = minimize_scalar(infidelity, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-10})
    s_best = float(np.clip(res.x, *bounds))
    fid = 1.0 - infidelity(s_best)
    if fid < min_fidelity:
        raise CalibrationError(
            f"best fidelity {fid:.6f} at amp_scale={s_best:.6g} is below {min_fidelity} "
            f"(scan minimum infidelity {values[i]:.3e} at {scan[i]:.4g})")
    return Calibration(s_best, fid)


def device_channel(phi: float, rho0, spec: PulseSpec,
                   noise: NoiseChannels = NOISELESS) -> np.ndarray:
    """``Uz(pi/2) o Ex o Uz(phi + pi) o Ex o Uz(pi/2)`` applied to ``rho0``."""
    rho = virtual_z(rho0, math.pi / 2)
    rho = x_pulse(rho, spec, noise)
    rho = virtual_z(rho, phi + math.pi)
    rho = x_pulse(rho, spec, noise)
    return virtual_z(rho, math.pi / 2)


def _qfi_point(phi, delta, rho0, spec, noise):
    lo = device_channel(phi - delta, rho0, spec, noise)
    mid = device_channel(phi, rho0, spec, noise)
    hi = device_channel(phi + delta, rho0, spec, noise)
    drho = qmath.hermitize((hi - lo) / (2 * delta))
    return qfi_qubit_matrix(mid, drho).value, mid


def qfi_device_sweep(grid, delta: float = 1e-4, rho0=None, spec: PulseSpec | None = None,
                     noise: NoiseChannels = NOISELESS, workers: int = 1):
    """QFI of the device output for each phase in ``grid``.

    Returns ``(phi, qfi, states)`` with ``states`` of shape (n, 2, 2).
    Phase points are independent and may be evaluated on a thread pool.
    """
    spec = PulseSpec() if spec is None else spec
    rho0 = qmath.projector([1, 0]) if rho0 is None else np.asarray(rho0, dtype=complex)
    grid = np.asarray(grid, dtype=float)

    def point(phi):
        return _qfi_point(float(phi), delta, rho0, spec, noise)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(point, grid))
    else:
        results = [point(p) for p in grid]
    qfi = np.array([r[0] for r in results])
    states = np.array([r[1] for r in results])
    return grid, qfi, states


def bloch_trajectory(rho0, spec: PulseSpec, noise: NoiseChannels = NOISELESS,
                     sample_every: int = 64) -> Trajectory:
    """Lab-frame Bloch vector across one x-pulse window, every ``sample_every`` steps."""
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")
    _, samples, times = _integrate(np.asarray(rho0, dtype=complex), spec, noise,
                                   0.0, spec.window, sample_every)
    bloch = np.array([qmath.bloch_from_rho(s) for s in samples])
    pur = np.array([qmath.purity(s) for s in samples])
    return Trajectory(times, bloch, pur)
