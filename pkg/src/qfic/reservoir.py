"""Reservoir ancilla preparation: the ideal H-phi-H sequence and its damped output."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import qmath

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)
HADAMARD.flags.writeable = False


@dataclass(frozen=True)
class ReservoirUnitSpec:
    """Phase and noise exposure of one ancilla; times in seconds."""

    phi: float
    exposure_time: float = 480e-9
    t1: float = 150e-6
    t2: float = 100e-6

    def __post_init__(self):
        if self.t1 <= 0 or self.t2 <= 0:
            raise ValueError("t1 and t2 must be positive")
        if self.exposure_time < 0:
            raise ValueError("exposure_time must be non-negative")
        if self.t2 > 2 * self.t1:
            warnings.warn("t2 > 2*t1 is unphysical for a qubit", stacklevel=3)


def hadamard() -> np.ndarray:
    return HADAMARD.copy()


def phase_gate(phi: float) -> np.ndarray:
    return np.diag([1.0, np.exp(1j * phi)]).astype(complex)


def hphih(phi: float) -> np.ndarray:
    return HADAMARD @ phase_gate(phi) @ HADAMARD


def ideal_hphih(phi: float, rho0=None) -> np.ndarray:
    """Noiseless ``(H phi H) rho0 (H phi H)^dagger``; ``rho0`` defaults to ``|0><0|``."""
    if rho0 is None:
        rho0 = qmath.projector([1, 0])
    u = hphih(phi)
    return u @ np.asarray(rho0, dtype=complex) @ u.conj().T


def prepare_unit(spec: ReservoirUnitSpec, normalize: bool = False) -> np.ndarray:
    """Damped ancilla state.

    Populations carry ``exp(-t/T1)`` and the coherence ``exp(-t/T2)``, so the
    trace is ``exp(-t/T1)``. With ``normalize=True`` the result is divided by
    its trace.
    """
    c, s = math.cos(spec.phi), math.sin(spec.phi)
    pop = math.exp(-spec.exposure_time / spec.t1)
    coh = math.exp(-spec.exposure_time / spec.t2)
    rho = np.array([
        [0.5 * (1 + c) * pop, 0.5j * s * coh],
        [-0.5j * s * coh, 0.5 * (1 - c) * pop],
    ])
    if normalize:
        rho = rho / pop
    return rho
