"""Compiled fixed-step RK4 integrator for the driven, damped qubit.

Everything runs on complex scalars (the four entries of rho) so the inner
loop allocates nothing. Units are whatever the caller uses consistently
(ns and rad/ns in :mod:`qfic.devicesim`).
"""

import math

import numba
import numpy as np

LAB = 0
RWA = 1


@numba.njit(cache=True, nogil=True)
def _drive(t, omega_d, om_peak, tc, sigma, mode):
    env = om_peak * math.exp(-((t - tc) / sigma) ** 2)
    if mode == LAB:
        return env * math.cos(omega_d * t)
    return 0.5 * env


@numba.njit(cache=True, nogil=True)
def _rhs(a, b, c, d, hz, hx, g1, gphi):
    # rho = [[a, b], [c, d]], H = [[hz, hx], [hx, -hz]] with real hx.
    # -i [H, rho]
    ra = -1j * (hx * (c - b))
    rb = -1j * (2.0 * hz * b + hx * (d - a))
    rc = -1j * (hx * (a - d) - 2.0 * hz * c)
    rd = -1j * (hx * (b - c))
    # gamma1 D[sigma_minus], sigma_minus = |1><0|
    ra -= g1 * a
    rd += g1 * a
    rb -= 0.5 * g1 * b
    rc -= 0.5 * g1 * c
    # gamma_phi D[sigma_z]
    rb -= 2.0 * gphi * b
    rc -= 2.0 * gphi * c
    return ra, rb, rc, rd


@numba.njit(cache=True, nogil=True)
def rk4_qubit(rho, t0, dt, n, hz, omega_d, om_peak, tc, sigma, g1, gphi, mode,
              sample_every):
    """Integrate ``n`` steps from ``t0``; returns final rho and samples.

    ``hz`` is the static sigma_z coefficient (omega0/2 in the lab frame,
    detuning/2 in the rotating frame). Samples are taken at step 0 and every
    ``sample_every`` steps (0 disables sampling); the final state is always
    the last sample when sampling is on.
    """
    a = rho[0, 0]
    b = rho[0, 1]
    c = rho[1, 0]
    d = rho[1, 1]
    if sample_every > 0:
        n_samples = n // sample_every + 1
        if n % sample_every != 0:
            n_samples += 1
    else:
        n_samples = 0
    samples = np.empty((n_samples, 2, 2), dtype=np.complex128)
    times = np.empty(n_samples)
    k = 0
    if sample_every > 0:
        samples[0, 0, 0] = a
        samples[0, 0, 1] = b
        samples[0, 1, 0] = c
        samples[0, 1, 1] = d
        times[0] = t0
        k = 1
    h = 0.5 * dt
    for i in range(n):
        t = t0 + i * dt
        x1 = _drive(t, omega_d, om_peak, tc, sigma, mode)
        x2 = _drive(t + h, omega_d, om_peak, tc, sigma, mode)
        x3 = _drive(t + dt, omega_d, om_peak, tc, sigma, mode)
        k1a, k1b, k1c, k1d = _rhs(a, b, c, d, hz, x1, g1, gphi)
        k2a, k2b, k2c, k2d = _rhs(a + h * k1a, b + h * k1b, c + h * k1c, d + h * k1d,
                                  hz, x2, g1, gphi)
        k3a, k3b, k3c, k3d = _rhs(a + h * k2a, b + h * k2b, c + h * k2c, d + h * k2d,
                                  hz, x2, g1, gphi)
        k4a, k4b, k4c, k4d = _rhs(a + dt * k3a, b + dt * k3b, c + dt * k3c, d + dt * k3d,
                                  hz, x3, g1, gphi)
        a = a + dt * (k1a + 2.0 * k2a + 2.0 * k3a + k4a) / 6.0
        b = b + dt * (k1b + 2.0 * k2b + 2.0 * k3b + k4b) / 6.0
        c = c + dt * (k1c + 2.0 * k2c + 2.0 * k3c + k4c) / 6.0
        d = d + dt * (k1d + 2.0 * k2d + 2.0 * k3d + k4d) / 6.0
        # Hermitian symmetrization
        a = a.real + 0j
        d = d.real + 0j
        off = 0.5 * (b + c.conjugate())
        b = off
        c = off.conjugate()
        if sample_every > 0 and ((i + 1) % sample_every == 0 or i + 1 == n):
            samples[k, 0, 0] = a
            samples[k, 0, 1] = b
            samples[k, 1, 0] = c
            samples[k, 1, 1] = d
            times[k] = t0 + (i + 1) * dt
            k += 1
    out = np.empty((2, 2), dtype=np.complex128)
    out[0, 0] = a
    out[0, 1] = b
    out[1, 0] = c
    out[1, 1] = d
    return out, samples[:k], times[:k]
