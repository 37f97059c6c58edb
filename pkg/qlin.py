# -*- coding: utf-8 -*-
"""
qlin - small dense complex linear algebra for qubit Bell scenarios

Operators are numpy complex arrays of shape (d, d), kets are arrays of
shape (d,). Dimensions stay below ~16.

Canonical Pauli order: (𝟙, Z, X, Y). Every Bloch coefficient quadruple in
this repository is (c0, c1, c2, c3) for c0·𝟙 + c1·Z + c2·X + c3·Y.

Tolerances (explicit parameters everywhere):
- ALGEBRAIC_TOL = 1e-12  (Hermiticity, Jacobi off-diagonal norm)
- SPECTRAL_TOL  = 1e-10  (eigen residuals, POVM checks)
- END_TO_END_TOL = 1e-9  (pipeline results)
"""

import math
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

ALGEBRAIC_TOL = 1e-12
SPECTRAL_TOL = 1e-10
END_TO_END_TOL = 1e-9

JACOBI_MAX_SWEEPS = 100

SUBSYSTEM_A = 0
SUBSYSTEM_B = 1

I2 = np.eye(2, dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)

PAULI_BASIS = (I2, Z, X, Y)


class QlinError(Exception):
    """Base class for linear algebra failures"""


class NotHermitian(QlinError, ValueError):
    pass


class DimensionMismatch(QlinError, ValueError):
    pass


class BlochCoeffs(NamedTuple):
    """Coefficients of 𝟙, Z, X, Y (in that order)"""
    c0: float
    c1: float
    c2: float
    c3: float

    @property
    def vector(self) -> np.ndarray:
        """The (Z, X, Y) part as a real 3-vector"""
        return np.array([self.c1, self.c2, self.c3], dtype=float)


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex)


def ket(*amplitudes, normalize: bool = True) -> np.ndarray:
    """Build a ket from amplitudes, normalized by default"""
    v = np.array(amplitudes, dtype=complex).ravel()
    if normalize:
        norm = np.linalg.norm(v)
        if norm == 0.0:
            raise ValueError("Cannot normalize the zero vector")
        v = v / norm
    return v


def basis_ket(dim: int, index: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(v: np.ndarray) -> np.ndarray:
    """|v⟩⟨v|"""
    v = np.asarray(v, dtype=complex).ravel()
    return np.outer(v, v.conj())


def density(state: np.ndarray) -> np.ndarray:
    """Density operator of a ket, or the operator itself if already square"""
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return projector(state)
    _require_square(state)
    return state


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def is_hermitian(m: np.ndarray, tol: float = ALGEBRAIC_TOL) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
    return float(np.max(np.abs(m - m.conj().T))) <= tol * scale


def check_hermitian(m: np.ndarray, tol: float = ALGEBRAIC_TOL, name: str = "operator") -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    _require_square(m)
    if not is_hermitian(m, tol):
        raise NotHermitian(f"{name} is not Hermitian within {tol:g}")
    return m


def _require_square(m: np.ndarray):
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"Expected a square matrix, got shape {m.shape}")


def tensor(a: np.ndarray, b: np.ndarray, *more: np.ndarray) -> np.ndarray:
    """Kronecker product a ⊗ b (⊗ more...)"""
    out = np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))
    for m in more:
        out = np.kron(out, np.asarray(m, dtype=complex))
    return out


def expectation(state: np.ndarray, op: np.ndarray) -> float:
    """Real part of ⟨ψ|op|ψ⟩ for a ket, or tr(ρ·op) for a density operator"""
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return float(np.real(np.vdot(state, op @ state)))
    return float(np.real(np.trace(state @ op)))


def eig_hermitian(m: np.ndarray, tol: float = ALGEBRAIC_TOL,
                  max_sweeps: int = JACOBI_MAX_SWEEPS) -> Tuple[np.ndarray, List[np.ndarray]]:
    """
    Eigendecomposition of a Hermitian operator.

    Returns (eigenvalues descending, eigenvectors as a list of kets).
    dim 2 uses the Bloch closed form; larger dimensions use cyclic complex
    Jacobi rotations until the off-diagonal norm drops below `tol`.
    """
    m = check_hermitian(m, tol)
    dim = m.shape[0]
    if dim == 1:
        return np.array([float(np.real(m[0, 0]))]), [np.ones(1, dtype=complex)]
    if dim == 2:
        return _eig_qubit(m)
    return _eig_jacobi(m, tol, max_sweeps)


def _eig_qubit(m: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:
    c = to_bloch(m, tol=math.inf)
    r = c.vector
    length = float(np.linalg.norm(r))
    if length < ALGEBRAIC_TOL:
        return np.array([c.c0, c.c0]), [basis_ket(2, 0), basis_ket(2, 1)]
    nz, nx, ny = r / length
    if nz >= 0.0:
        up = np.array([1.0 + nz, nx + 1j * ny], dtype=complex)
    else:
        up = np.array([nx - 1j * ny, 1.0 - nz], dtype=complex)
    up /= np.linalg.norm(up)
    down = np.array([-np.conj(up[1]), np.conj(up[0])], dtype=complex)
    return np.array([c.c0 + length, c.c0 - length]), [up, down]


def _eig_jacobi(m: np.ndarray, tol: float, max_sweeps: int) -> Tuple[np.ndarray, List[np.ndarray]]:
    a = hermitian_part(np.array(m, dtype=complex))
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    off_mask = ~np.eye(n, dtype=bool)

    for _ in range(max_sweeps):
        if math.sqrt(float(np.sum(np.abs(a[off_mask]) ** 2))) < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                phase = apq / r
                theta = 0.5 * math.atan2(2.0 * r, float(np.real(a[q, q] - a[p, p])))
                c, s = math.cos(theta), math.sin(theta)
                # D·R with D = diag(1, e^{-iφ}) makes the pivot real, R zeroes it
                g = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]], dtype=complex)
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                v[:, idx] = v[:, idx] @ g

    values = np.real(np.diag(a)).copy()
    order = np.argsort(-values, kind="stable")
    return values[order], [v[:, i].copy() for i in order]


def operator_function(m: np.ndarray, fn, tol: float = ALGEBRAIC_TOL) -> np.ndarray:
    """Apply a real scalar function to the spectrum of a Hermitian operator"""
    values, vectors = eig_hermitian(m, tol)
    out = np.zeros_like(np.asarray(m, dtype=complex))
    for lam, vec in zip(values, vectors):
        out += fn(lam) * projector(vec)
    return out


def min_eigenvalue(m: np.ndarray) -> float:
    values, _ = eig_hermitian(hermitian_part(np.asarray(m, dtype=complex)))
    return float(values[-1])


def trace_norm(m: np.ndarray) -> float:
    values, _ = eig_hermitian(hermitian_part(np.asarray(m, dtype=complex)))
    return float(np.sum(np.abs(values)))


def partial_trace(m: np.ndarray, keep: int, dims: Sequence[int]) -> np.ndarray:
    """Trace out one factor of a bipartite operator; `keep` is SUBSYSTEM_A or SUBSYSTEM_B"""
    m = np.asarray(m, dtype=complex)
    d_a, d_b = int(dims[0]), int(dims[1])
    if m.ndim != 2 or m.shape != (d_a * d_b, d_a * d_b):
        raise DimensionMismatch(f"Operator of shape {m.shape} does not match dims ({d_a}, {d_b})")
    blocks = m.reshape(d_a, d_b, d_a, d_b)
    if keep == SUBSYSTEM_A:
        return np.einsum("ijkj->ik", blocks)
    if keep == SUBSYSTEM_B:
        return np.einsum("ijil->jl", blocks)
    raise ValueError(f"keep must be SUBSYSTEM_A or SUBSYSTEM_B, got {keep!r}")


def from_bloch(c: Sequence[float]) -> np.ndarray:
    c0, c1, c2, c3 = (float(x) for x in c)
    return c0 * I2 + c1 * Z + c2 * X + c3 * Y


def to_bloch(m: np.ndarray, tol: float = ALGEBRAIC_TOL) -> BlochCoeffs:
    """c_k = tr(m·σ_k)/2 with σ = (𝟙, Z, X, Y)"""
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise DimensionMismatch(f"to_bloch needs a 2x2 operator, got shape {m.shape}")
    if not math.isinf(tol):
        check_hermitian(m, tol)
    return BlochCoeffs(*(float(np.real(np.trace(m @ s))) / 2.0 for s in PAULI_BASIS))


def unit_observable(direction: Sequence[float]) -> np.ndarray:
    """n·σ for a (Z, X, Y) direction, normalized to a unit vector"""
    n = np.asarray(direction, dtype=float)
    n = n / np.linalg.norm(n)
    return from_bloch((0.0, n[0], n[1], n[2]))
