"""Coarse-grained (micromaser) description of the collision dynamics.

Convention: ``sigma_plus sigma_minus = |0><0|`` so the populations of the
prepared ancilla feed the pump rates directly. ``<sigma_minus>`` is the
``(1, 0)`` element of the ancilla, which reproduces the real, positive
steady coherence ``(zeta/2) sin(phi) cos(phi) exp(-(g1+g2) t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qmath
from .collision import CollisionParams
from .fisher import FisherResult, SingularFisherError
from .reservoir import ReservoirUnitSpec


@dataclass(frozen=True)
class AncillaMoments:
    p_plus_minus: float  # <s+ s->
    p_minus_plus: float  # <s- s+>
    s_minus: complex  # <s->


@dataclass(frozen=True)
class MasterEqCoeffs:
    drive_amp: complex
    gamma_plus: float
    gamma_minus: float


@dataclass(frozen=True)
class RateBundle:
    """Rates in 1/s, exposure in s, and the dimensionless scale zeta = r tau g."""

    gamma1: float = 1 / 150e-6
    gamma2: float = 1 / 100e-6
    zeta: float = 0.012
    exposure: float = 480e-9

    def __post_init__(self):
        if min(self.gamma1, self.gamma2, self.zeta, self.exposure) < 0:
            raise ValueError("rates, zeta and exposure must be non-negative")

    @classmethod
    def from_unit(cls, unit: ReservoirUnitSpec, zeta: float = 0.012) -> "RateBundle":
        return cls(1.0 / unit.t1, 1.0 / unit.t2, zeta, unit.exposure_time)

    @property
    def pop_damping(self) -> float:
        return math.exp(-self.gamma1 * self.exposure)

    @property
    def coh_damping(self) -> float:
        return math.exp(-(self.gamma1 + self.gamma2) * self.exposure)


def ancilla_moments(rho_unit) -> AncillaMoments:
    r = np.asarray(rho_unit, dtype=complex)
    return AncillaMoments(float(r[0, 0].real), float(r[1, 1].real), complex(r[1, 0]))


def me_coefficients(m: AncillaMoments, params: CollisionParams) -> MasterEqCoeffs:
    pref = 0.5 * params.rate * params.tau ** 2 * params.g ** 2
    return MasterEqCoeffs(
        drive_amp=params.zeta() * m.s_minus,
        gamma_plus=pref * m.p_plus_minus,
        gamma_minus=pref * m.p_minus_plus,
    )


def effective_hamiltonian(c: MasterEqCoeffs) -> np.ndarray:
    return c.drive_amp * qmath.SPLUS + np.conj(c.drive_amp) * qmath.SMINUS


def _dissipator(o, rho):
    # 2 o rho o^+ - o^+ o rho - rho o^+ o
    od = o.conj().T
    return 2.0 * o @ rho @ od - od @ o @ rho - rho @ od @ o


def me_rhs(rho, c: MasterEqCoeffs) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    h = effective_hamiltonian(c)
    return (-1j * (h @ rho - rho @ h)
            + c.gamma_plus * _dissipator(qmath.SPLUS, rho)
            + c.gamma_minus * _dissipator(qmath.SMINUS, rho))


def liouvillian(c: MasterEqCoeffs) -> np.ndarray:
    """4x4 matrix of :func:`me_rhs` acting on row-major ``vec(rho)``."""
    out = np.empty((4, 4), dtype=complex)
    for k in range(4):
        e = np.zeros(4, dtype=complex)
        e[k] = 1.0
        out[:, k] = me_rhs(e.reshape(2, 2), c).ravel()
    return out


def max_step(c: MasterEqCoeffs) -> float:
    scale = max(abs(c.drive_amp), c.gamma_plus + c.gamma_minus)
    return math.inf if scale == 0 else 1e-2 / scale


def evolve_me(rho0, c: MasterEqCoeffs, t_max: float, dt: float) -> np.ndarray:
    """Fixed-step RK4 integration of the master equation up to ``t_max``.

    The last step is shortened to land on ``t_max``. Raises ``ValueError``
    if ``dt`` exceeds ``1e-2 / max(|drive|, gamma_plus + gamma_minus)``.
    """
    if dt <= 0 or dt > max_step(c):
        raise ValueError(f"dt={dt:g} violates the step bound {max_step(c):g}")
    lv = liouvillian(c)
    x = np.asarray(rho0, dtype=complex).ravel().copy()

    def step_matrix(h):
        k1 = lv * h
        # RK4 for a linear ODE is the degree-4 Taylor polynomial of exp(h L).
        return np.eye(4) + k1 + k1 @ k1 / 2 + k1 @ k1 @ k1 / 6 + k1 @ k1 @ k1 @ k1 / 24

    n_full = int(math.floor(t_max / dt + 1e-12))
    rest = t_max - n_full * dt
    full = step_matrix(dt)
    for _ in range(n_full):
        x = full @ x
        x = _hermitize_vec(x)
    if rest > 1e-15 * max(t_max, 1.0):
        x = _hermitize_vec(step_matrix(rest) @ x)
    return x.reshape(2, 2)


def _hermitize_vec(x):
    off = 0.5 * (x[1] + np.conj(x[2]))
    return np.array([x[0].real, off, np.conj(off), x[3].real], dtype=complex)


def me_fixed_point(c: MasterEqCoeffs, trace: float = 1.0) -> np.ndarray:
    """Exact stationary state of the master equation (null vector of the generator)."""
    a = np.vstack([liouvillian(c), [[1, 0, 0, 1]]])
    b = np.array([0, 0, 0, 0, trace], dtype=complex)
    x = np.linalg.lstsq(a, b, rcond=None)[0]
    return qmath.hermitize(x.reshape(2, 2))


def steady_state_analytic(phi: float, rates: RateBundle) -> np.ndarray:
    """Closed-form steady state (subnormalized, trace ``exp(-gamma1 t)``)."""
    c, s = math.cos(phi), math.sin(phi)
    pop = rates.pop_damping
    off = 0.5 * rates.zeta * s * c * rates.coh_damping
    return np.array([[0.5 * (1 + c) * pop, off], [off, 0.5 * (1 - c) * pop]], dtype=complex)


def bloch_components(phi: float, rates: RateBundle) -> tuple[np.ndarray, np.ndarray]:
    """Steady-state Bloch vector and its phi-derivative, analytically."""
    a = rates.coh_damping
    b = rates.pop_damping
    z = rates.zeta
    r = np.array([0.5 * z * a * math.sin(2 * phi), 0.0, b * math.cos(phi)])
    dr = np.array([z * a * math.cos(2 * phi), 0.0, -b * math.sin(phi)])
    return r, dr


def qfi_closed_form(phi: float, rates: RateBundle) -> FisherResult:
    a2 = rates.coh_damping ** 2  # exp(-2 (g1 + g2) t)
    b2 = rates.pop_damping ** 2  # exp(-2 g1 t)
    z2 = rates.zeta ** 2
    s2 = math.sin(2 * phi)
    c2 = math.cos(2 * phi)
    denom = 1.0 - b2 * math.cos(phi) ** 2 - 0.25 * z2 * a2 * s2 ** 2
    if denom <= 1e-12:
        raise SingularFisherError(f"closed-form denominator {denom:.3e} vanishes at phi={phi:g}")
    value = (z2 * a2 * c2 ** 2 + b2 * math.sin(phi) ** 2
             + 0.25 * s2 ** 2 * (z2 * a2 * c2 - b2) ** 2 / denom)
    return FisherResult(value, "closed-form")
