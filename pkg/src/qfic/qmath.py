"""Small dense linear algebra for one and two qubits.

Matrices are plain ``numpy`` complex arrays of shape (2, 2) or (4, 4).
Two-qubit operators use the subsystem order (probe, ancilla).
Basis convention: ``sigma_z = diag(1, -1)``, ``|0>`` is the north pole of the
Bloch sphere, ``sigma_plus = |0><1|`` and ``sigma_minus = |1><0|``.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

HERMITIAN_TOL = 1e-12
EIG_NEG_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
SPLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SMINUS = np.array([[0, 0], [1, 0]], dtype=complex)
PAULIS = (SX, SY, SZ)

for _m in (I2, I4, SX, SY, SZ, SPLUS, SMINUS):
    _m.flags.writeable = False


class InvalidStateError(ValueError):
    """Raised when a matrix violates the density-matrix invariants."""


class SpectralDecomp(NamedTuple):
    eigenvalues: np.ndarray  # real, descending
    eigenvectors: np.ndarray  # columns, orthonormal


def _as_square(a, dims=(2, 4)) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in dims:
        raise ValueError(f"expected a square matrix of dimension {dims}, got shape {m.shape}")
    return m


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(a)
    return bool(np.max(np.abs(m - m.conj().T)) <= tol)


def hermitize(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    return 0.5 * (m + m.conj().T)


def density_matrix(a, trace_tol: float = 1e-2) -> np.ndarray:
    """Validate ``a`` as a (possibly subnormalized) density matrix.

    Checks Hermiticity to 1e-12, eigenvalues >= -1e-10 and
    ``|Tr a - 1| <= trace_tol``. Returns a fresh complex array.
    """
    m = _as_square(a).copy()
    if not is_hermitian(m):
        raise InvalidStateError("matrix is not Hermitian")
    w = np.linalg.eigvalsh(hermitize(m))
    if w.min() < -EIG_NEG_TOL:
        raise InvalidStateError(f"negative eigenvalue {w.min():.3e}")
    tr = np.trace(m).real
    if abs(tr - 1.0) > trace_tol:
        raise InvalidStateError(f"trace {tr:.6g} outside tolerance {trace_tol}")
    return m


def ket(*amps) -> np.ndarray:
    v = np.asarray(amps, dtype=complex)
    return v / np.linalg.norm(v)


def projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).ravel()
    return np.outer(v, v.conj())


def kron(a, b) -> np.ndarray:
    """Kronecker product of two single-qubit operators, order (probe, ancilla)."""
    a = _as_square(a, (2,))
    b = _as_square(b, (2,))
    return np.kron(a, b)


def partial_trace(rho, keep: str = "probe") -> np.ndarray:
    """Reduce a two-qubit operator to one subsystem.

    ``keep`` is ``"probe"`` (first factor) or ``"ancilla"`` (second factor).
    """
    r = _as_square(rho, (4,)).reshape(2, 2, 2, 2)
    if keep == "probe":
        return np.einsum("ajbj->ab", r)
    if keep == "ancilla":
        return np.einsum("iaib->ab", r)
    raise ValueError(f"keep must be 'probe' or 'ancilla', not {keep!r}")


def _eigh2(h: np.ndarray):
    """Closed-form eigensystem of a 2x2 Hermitian matrix, eigenvalues descending."""
    a = h[0, 0].real
    d = h[1, 1].real
    b = h[0, 1]
    mean = 0.5 * (a + d)
    half = 0.5 * (a - d)
    rad = np.hypot(half, abs(b))
    w = np.array([mean + rad, mean - rad])
    if rad == 0.0:
        return w, np.eye(2, dtype=complex)
    # Pick the numerically larger of the two candidate eigenvector forms.
    if half >= 0:
        v1 = np.array([half + rad, np.conj(b)], dtype=complex)
    else:
        v1 = np.array([b, rad - half], dtype=complex)
    v1 /= np.linalg.norm(v1)
    v2 = np.array([-np.conj(v1[1]), np.conj(v1[0])], dtype=complex)
    return w, np.column_stack([v1, v2])


def eigh(h) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian eigensystem with eigenvalues in descending order."""
    m = _as_square(h)
    if m.shape[0] == 2:
        return _eigh2(hermitize(m))
    w, v = np.linalg.eigh(hermitize(m))
    return w[::-1].copy(), v[:, ::-1].copy()


def spectral_decompose(rho) -> SpectralDecomp:
    m = _as_square(rho)
    if not is_hermitian(m):
        raise ValueError("spectral decomposition needs a Hermitian matrix")
    w, v = eigh(m)
    return SpectralDecomp(w, v)


def expm_hermitian(h, scale: complex) -> np.ndarray:
    """``exp(scale * h)`` for Hermitian ``h`` via its eigendecomposition."""
    m = _as_square(h)
    if not is_hermitian(m):
        raise ValueError("generator must be Hermitian")
    w, v = eigh(m)
    return (v * np.exp(scale * w)) @ v.conj().T


def bloch_from_rho(rho) -> np.ndarray:
    """Bloch vector ``r_k = Tr(rho sigma_k)`` of a single-qubit operator."""
    m = _as_square(rho, (2,))
    return np.array([
        2.0 * m[0, 1].real,
        -2.0 * m[0, 1].imag,
        (m[0, 0] - m[1, 1]).real,
    ])


def rho_from_bloch(r, trace: float = 1.0) -> np.ndarray:
    rx, ry, rz = np.asarray(r, dtype=float)
    return 0.5 * np.array([
        [trace + rz, rx - 1j * ry],
        [rx + 1j * ry, trace - rz],
    ])


def entropy_from_eigenvalues(w) -> float:
    p = np.clip(np.asarray(w, dtype=float), 0.0, None)
    p = p[p > 0.0]
    return float(-(p * np.log2(p)).sum())


def von_neumann_entropy(rho) -> float:
    """Entropy in bits; eigenvalues within -1e-10 of zero are clamped."""
    m = _as_square(rho)
    w = eigh(m)[0]
    if w.min() < -EIG_NEG_TOL:
        raise InvalidStateError(f"negative eigenvalue {w.min():.3e}")
    return entropy_from_eigenvalues(w)


def trace_distance(a, b) -> float:
    """Trace-norm distance ``||a - b||_1`` (no factor 1/2)."""
    w = eigh(np.asarray(a) - np.asarray(b))[0]
    return float(np.abs(w).sum())


def purity(rho) -> float:
    m = np.asarray(rho)
    return float(np.einsum("ij,ji->", m, m).real)
