"""Classical and quantum Fisher information for single-qubit families.

Subnormalized inputs (trace below one, as produced by the damped reservoir
preparation) are read in Bloch form: a matrix ``rho`` stands for
``(I + r . sigma) / 2`` with ``r_k = Tr(rho sigma_k)``. The missing weight is
completed with the identity before any formula is applied, so the matrix,
Bloch and spectral routes all describe the same state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import qmath

PURE_TOL = 1e-9
DET_TOL = 1e-12
DEGENERACY_TOL = 1e-8
_ZERO_P = 1e-14


class SingularFisherError(ArithmeticError):
    """Fisher information undefined (pure-state limit with r . dr != 0)."""


@dataclass(frozen=True)
class FisherResult:
    value: float
    method: str
    flags: tuple[str, ...] = ()

    def __float__(self) -> float:
        return self.value


def _clamp(value: float) -> float:
    # Round-off can leave tiny negatives; anything larger is a real bug.
    if value < 0.0 and value >= -1e-12:
        return 0.0
    return value


def classical_fisher(p, dp) -> FisherResult:
    p = np.asarray(p, dtype=float)
    dp = np.asarray(dp, dtype=float)
    if p.shape != dp.shape:
        raise ValueError("p and dp must have equal length")
    if np.any(p < 0):
        raise ValueError("probabilities must be non-negative")
    total = 0.0
    for pi, dpi in zip(p, dp):
        if pi < _ZERO_P:
            if abs(dpi) < _ZERO_P:
                continue
            return FisherResult(math.inf, "classical", ("divergent",))
        total += dpi * dpi / pi
    return FisherResult(_clamp(total), "classical")


def complete_trace(rho, drho=None):
    """Pad a subnormalized qubit operator with identity weight to unit trace."""
    rho = np.asarray(rho, dtype=complex)
    tr = np.trace(rho).real
    out = rho + 0.5 * (1.0 - tr) * qmath.I2
    if drho is None:
        return out
    drho = np.asarray(drho, dtype=complex)
    return out, drho - 0.5 * np.trace(drho).real * qmath.I2


def qfi_bloch(r, dr) -> FisherResult:
    r = np.asarray(r, dtype=float)
    dr = np.asarray(dr, dtype=float)
    norm2 = float(r @ r)
    dot = float(r @ dr)
    dr2 = float(dr @ dr)
    if math.sqrt(norm2) >= 1.0 - PURE_TOL:
        if abs(dot) <= PURE_TOL:
            return FisherResult(_clamp(dr2), "bloch", ("pure-limit",))
        raise SingularFisherError(
            f"pure state with r.dr = {dot:.3e}; Fisher information is singular")
    return FisherResult(_clamp(dr2 + dot * dot / (1.0 - norm2)), "bloch")


def qfi_qubit_matrix(rho, drho) -> FisherResult:
    """``Tr[(d rho)^2] + Tr[(rho d rho)^2] / det rho`` for one qubit.

    Near-pure states (``det rho <= 1e-12``) are evaluated through the Bloch
    form's pure-state limit and flagged.
    """
    rho = np.asarray(rho, dtype=complex)
    drho = np.asarray(drho, dtype=complex)
    if rho.shape != (2, 2) or drho.shape != (2, 2):
        raise ValueError("qfi_qubit_matrix works on 2x2 matrices")
    flags: list[str] = []
    if abs(np.trace(rho).real - 1.0) > 1e-12:
        rho, drho = complete_trace(rho, drho)
        flags.append("trace-completed")
    det = (rho[0, 0] * rho[1, 1] - rho[0, 1] * rho[1, 0]).real
    if det <= DET_TOL:
        res = qfi_bloch(qmath.bloch_from_rho(rho), qmath.bloch_from_rho(drho))
        return FisherResult(res.value, "matrix", tuple(flags) + res.flags)
    d2 = np.einsum("ij,ji->", drho, drho).real
    rd = rho @ drho
    rd2 = np.einsum("ij,ji->", rd, rd).real
    return FisherResult(_clamp(d2 + rd2 / det), "matrix", tuple(flags))


def _align_phase(v, ref):
    """Multiply ``v`` by a phase so that ``<ref|v>`` is real and non-negative."""
    ov = np.vdot(ref, v)
    if abs(ov) == 0.0:
        return v
    return v * (abs(ov) / ov)


def _split_degenerate(p, v, drho):
    """Rotate each degenerate eigenspace of ``rho`` onto the eigenbasis of ``drho``."""
    v = v.copy()
    i, n = 0, len(p)
    while i < n:
        j = i + 1
        while j < n and abs(p[i] - p[j]) < DEGENERACY_TOL:
            j += 1
        if j - i > 1:
            block = v[:, i:j]
            _, u = np.linalg.eigh(block.conj().T @ drho @ block)
            v[:, i:j] = block @ u
        i = j
    return v


def _match(v, ref):
    """Reorder the columns of ``v`` to follow ``ref`` by largest overlap."""
    out = np.empty_like(ref)
    free = list(range(v.shape[1]))
    for j in range(ref.shape[1]):
        k = max(free, key=lambda c: abs(np.vdot(ref[:, j], v[:, c])))
        free.remove(k)
        out[:, j] = v[:, k]
    return out


def qfi_spectral(rho_minus, rho0, rho_plus, delta: float) -> FisherResult:
    """Spectral-form QFI from states at ``phi - delta``, ``phi``, ``phi + delta``.

    Eigenvalue derivatives are ``<v_i| d rho |v_i>`` with the centered
    difference ``d rho``; inside a degenerate eigenspace of ``rho`` the basis
    is chosen to diagonalize ``d rho``, so level crossings are handled.
    Eigenvector derivatives are centered differences of the neighbouring
    eigenvectors, matched to ``v_i`` by overlap and phase-aligned.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    states = []
    for r in (rho_minus, rho0, rho_plus):
        r = np.asarray(r, dtype=complex)
        if r.shape == (2, 2) and abs(np.trace(r).real - 1.0) > 1e-12:
            r = complete_trace(r)
        states.append(r)
    drho = qmath.hermitize((states[2] - states[0]) / (2.0 * delta))
    p0, v0 = qmath.eigh(states[1])
    v0 = _split_degenerate(p0, v0, drho)
    vm = _match(qmath.eigh(states[0])[1], v0)
    vp = _match(qmath.eigh(states[2])[1], v0)
    n = len(p0)
    dv = np.empty_like(v0)
    for j in range(n):
        a = _align_phase(vp[:, j], v0[:, j])
        b = _align_phase(vm[:, j], v0[:, j])
        dv[:, j] = (a - b) / (2.0 * delta)
    dp = np.einsum("ij,ik,kj->j", v0.conj(), drho, v0).real

    flags: list[str] = []
    classical = 0.0
    for i in range(n):
        if p0[i] < _ZERO_P:
            if abs(dp[i]) < _ZERO_P:
                continue
            return FisherResult(math.inf, "spectral", ("divergent",))
        classical += dp[i] ** 2 / p0[i]
    quantum = 0.0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            gap = p0[i] - p0[j]
            if abs(gap) < DEGENERACY_TOL:
                if "degenerate" not in flags:
                    flags.append("degenerate")
                continue
            overlap = np.vdot(v0[:, i], dv[:, j])
            quantum += 2.0 * gap * gap / (p0[i] + p0[j]) * abs(overlap) ** 2
    return FisherResult(_clamp(classical + quantum), "spectral", tuple(flags))


def cramer_rao_bound(f: FisherResult | float, repetitions: int = 1) -> float:
    """Lower bound ``1 / (M F)`` on the estimator variance; ``inf`` when F = 0."""
    if repetitions < 1:
        raise ValueError("repetitions must be a positive integer")
    value = float(f)
    if value <= 0.0:
        return math.inf
    return 1.0 / (repetitions * value)


def centered_diff(f: Callable[[float], np.ndarray], phi: float, delta: float = 1e-4,
                  hermitian: bool = True) -> np.ndarray:
    """``(f(phi + delta) - f(phi - delta)) / (2 delta)``.

    Square outputs are Hermitian-symmetrized unless ``hermitian=False``.
    """
    if not 0.0 < delta < 1e-2:
        raise ValueError("delta must lie in (0, 1e-2)")
    d = (np.asarray(f(phi + delta)) - np.asarray(f(phi - delta))) / (2.0 * delta)
    if hermitian and d.ndim == 2 and d.shape[0] == d.shape[1]:
        d = qmath.hermitize(d)
    return d
