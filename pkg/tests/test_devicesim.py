import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.integrate import quad

from qfic import qmath
from qfic.devicesim import (NOISELESS, CalibrationError, NoiseChannels, PulseSpec,
                            average_gate_fidelity, bloch_trajectory, calibrate,
                            device_channel, gaussian_envelope, lab_frame_hamiltonian,
                            lindblad_rhs, pauli_transfer_matrix, peak_amplitude, propagate,
                            pulse_fidelity, qfi_device_sweep, rx, unitary_ptm, virtual_z)

SPEC = PulseSpec()
NOISY = NoiseChannels.from_times(150e3, 100e3)
GROUND = qmath.projector([1, 0])


@pytest.fixture(scope="module")
def calibrated():
    cal = calibrate(SPEC)
    return replace(SPEC, amp_scale=cal.amp_scale), cal


def test_peak_amplitude(golden):
    assert peak_amplitude(math.pi / 2, 22.4) * 1e9 == pytest.approx(golden["omega_peak_rad_per_s"],
                                                                   rel=1e-14)
    assert peak_amplitude(math.pi / 2, 22.4) * 1e9 == pytest.approx(3.9566e7, rel=1e-4)
    with pytest.raises(ValueError):
        peak_amplitude(1.0, 0.0)


def test_envelope_area_quadrature(golden):
    area, _ = quad(lambda t: float(gaussian_envelope(t, SPEC)), 0, SPEC.window, epsabs=1e-14)
    assert area == pytest.approx(golden["window_area"], rel=1e-10)
    assert area == pytest.approx(SPEC.alpha * SPEC.amp_scale, rel=1e-4)


def test_lab_hamiltonian_at_center():
    h = lab_frame_hamiltonian(SPEC.center, SPEC)
    c = math.cos(SPEC.drive_freq * SPEC.center)
    assert h[0, 1].real == pytest.approx(SPEC.peak * c, rel=1e-12)
    assert h[0, 0].real == pytest.approx(0.5 * SPEC.omega0)


def test_kernel_matches_numpy_reference():
    # 400 RK4 steps with the numpy right-hand side
    noise = NoiseChannels(1e-3, 2e-3)
    rho = qmath.projector(qmath.ket(1, 0.3j))
    t0, n = SPEC.center - 2.0, 400
    dt = SPEC.step
    ref = rho.copy()
    for i in range(n):
        t = t0 + i * dt
        k1 = lindblad_rhs(ref, t, SPEC, noise)
        k2 = lindblad_rhs(ref + 0.5 * dt * k1, t + 0.5 * dt, SPEC, noise)
        k3 = lindblad_rhs(ref + 0.5 * dt * k2, t + 0.5 * dt, SPEC, noise)
        k4 = lindblad_rhs(ref + dt * k3, t + dt, SPEC, noise)
        ref = ref + dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6
    got = propagate(rho, SPEC, noise, t0, t0 + n * dt)
    assert np.abs(got - ref).max() < 1e-12


def test_t1_decay():
    off = replace(SPEC, amp_scale=0.0)
    g1 = 1e-3
    rho = propagate(GROUND, off, NoiseChannels(g1, 0.0))
    assert rho[0, 0].real == pytest.approx(math.exp(-g1 * off.window), rel=1e-9)


def test_dephasing_rate():
    # with the sigma_z channel the coherence decays at 2 gamma_phi + gamma1 / 2
    off = replace(SPEC, amp_scale=0.0)
    g1, gphi = 1e-3, 2e-3
    rho = propagate(qmath.projector(qmath.ket(1, 1)), off, NoiseChannels(g1, gphi))
    rate = 2 * gphi + 0.5 * g1
    exact = 0.5 * math.exp(-rate * off.window)
    # RK4 multiplies rho_01 by the stability polynomial R(z) each step,
    # z = (-i w0 - rate) dt; |R| < 1 even without damping (~ (w0 dt)^6 / 144)
    n = round(off.window / off.step)
    z = (-1j * off.omega0 - rate) * (off.window / n)
    discrete = 0.5 * abs(1 + z + z ** 2 / 2 + z ** 3 / 6 + z ** 4 / 24) ** n
    assert abs(rho[0, 1]) == pytest.approx(discrete, rel=1e-9)
    assert abs(rho[0, 1]) == pytest.approx(exact, rel=5e-4)


def test_default_noise_wiring():
    n = NoiseChannels.from_times(150e3, 100e3)
    assert n.gamma1 == pytest.approx(1 / 150e3)
    assert n.gamma_phi == pytest.approx(1 / 100e3 - 0.5 / 150e3)
    # realized coherence decay time
    assert 1 / (2 * n.gamma_phi + 0.5 * n.gamma1) == pytest.approx(60e3)
    with pytest.raises(ValueError):
        NoiseChannels.from_times(150e3, 400e3)


def test_free_evolution_period():
    off = replace(SPEC, amp_scale=0.0)
    rho0 = qmath.projector(qmath.ket(1, 1))
    rho = propagate(rho0, off, NOISELESS, 0.0, off.period)
    assert np.allclose(rho, rho0, atol=1e-9)
    quarter = propagate(rho0, off, NOISELESS, 0.0, off.period / 4)
    # exp(-i w0 t sz / 2) moves the phase of rho_01 by -w0 t
    assert np.allclose(quarter[0, 1], 0.5 * np.exp(-0.5j * math.pi), atol=1e-9)


def test_spec_validation():
    with pytest.raises(ValueError):
        PulseSpec(dt=SPEC.period / 20)
    with pytest.raises(ValueError):
        PulseSpec(window_k=2)
    with pytest.raises(ValueError):
        PulseSpec(sigma_p=0)
    with pytest.raises(ValueError):
        PulseSpec(drive="square")


def test_ptm_identities():
    assert np.allclose(pauli_transfer_matrix(lambda r: r), np.eye(4))
    u = rx(0.7)
    assert average_gate_fidelity(unitary_ptm(u), u) == pytest.approx(1.0)
    assert average_gate_fidelity(unitary_ptm(np.eye(2)), qmath.SX) == pytest.approx(1 / 3)
    rho = qmath.projector(qmath.ket(1, 1))
    assert np.allclose(virtual_z(rho, math.pi / 2)[0, 1], -0.5j)


def test_calibration_lab(calibrated):
    spec, cal = calibrated
    assert cal.fidelity >= 0.999
    assert cal.amp_scale == pytest.approx(1.0, rel=1e-3)
    out = device_channel(0.0, GROUND, spec)
    assert qmath.purity(out) >= 0.999


def test_calibrated_pulse_reaches_equator(calibrated):
    spec, _ = calibrated
    from qfic.devicesim import x_pulse
    out = x_pulse(GROUND, spec)
    assert abs(qmath.bloch_from_rho(out)[2]) < 1e-2
    assert qmath.purity(out) >= 0.999


def test_calibration_rwa_area_theorem(golden):
    cal = calibrate(replace(SPEC, drive="rwa"))
    assert cal.amp_scale == pytest.approx(golden["s_rwa"], rel=1e-4)
    assert cal.fidelity > 0.99999


def test_calibration_scaling(golden):
    cal = calibrate(replace(SPEC, drive="rwa", alpha=math.pi))
    assert cal.amp_scale == pytest.approx(golden["s_rwa_alpha_doubled"], rel=1e-4)


def test_calibration_failure():
    with pytest.raises(CalibrationError):
        calibrate(SPEC, bounds=(3.0, 4.0), n_scan=5)


def test_device_golden_and_step_order(golden):
    o = golden["device_half_pi_rho"]
    ref = np.array([[o[0], o[1] + 1j * o[2]], [o[1] - 1j * o[2], o[3]]])
    errs = []
    for div in (64, 128, 256):
        spec = replace(SPEC, dt=SPEC.period / div)
        errs.append(np.abs(device_channel(math.pi / 2, GROUND, spec, NOISY) - ref).max())
    assert errs[2] < 2e-5
    assert 12 < errs[0] / errs[1] < 20 and 12 < errs[1] / errs[2] < 20


def test_noisy_purity_half_pi(golden, calibrated):
    spec, _ = calibrated
    p = qmath.purity(device_channel(math.pi / 2, GROUND, spec, NOISY))
    assert 0.99 < p < 1.0
    assert 0.99 < golden["device_half_pi_purity"] < 1.0


def test_noiseless_sweep_flat(calibrated):
    spec, _ = calibrated
    phi = np.linspace(0, 2 * math.pi, 12, endpoint=False)
    _, qfi, states = qfi_device_sweep(phi, spec=spec)
    assert np.all(np.abs(qfi - 1) <= 0.01)
    assert states.shape == (12, 2, 2)


def test_richardson_delta(calibrated):
    spec, _ = calibrated
    a = qfi_device_sweep([1.3], 1e-4, spec=spec, noise=NOISY)[1][0]
    b = qfi_device_sweep([1.3], 5e-5, spec=spec, noise=NOISY)[1][0]
    assert abs(a - b) / a <= 1e-4


def test_sweep_workers_deterministic(calibrated):
    spec, _ = calibrated
    phi = [0.4, 2.0, 3.5]
    serial = qfi_device_sweep(phi, spec=spec, noise=NOISY)[1]
    pooled = qfi_device_sweep(phi, spec=spec, noise=NOISY, workers=3)[1]
    assert np.array_equal(serial, pooled)


def test_noisy_sweep_symmetry(calibrated):
    spec, _ = calibrated
    phi = np.array([0.5, 1.2, 2.6])
    _, f, _ = qfi_device_sweep(np.concatenate([phi, 2 * math.pi - phi]), spec=spec,
                               noise=NOISY)
    assert np.allclose(f[:3], f[3:], rtol=1e-2)


def test_bloch_trajectory(calibrated):
    spec, _ = calibrated
    traj = bloch_trajectory(GROUND, spec, NOISY)
    assert np.allclose(traj.bloch[0], [0, 0, 1])
    assert abs(traj.bloch[-1, 2]) < 0.05
    assert np.linalg.norm(traj.bloch[-1]) < 1
    assert traj.purities[-1] < traj.purities[0]
    assert traj.times[-1] == pytest.approx(spec.window)
    with pytest.raises(ValueError):
        bloch_trajectory(GROUND, spec, NOISY, sample_every=0)


def test_pulse_fidelity_uncalibrated_drops():
    assert pulse_fidelity(replace(SPEC, amp_scale=0.7)) < 0.99
