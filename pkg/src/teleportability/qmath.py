"""Small dense complex-matrix helpers and the density-matrix type.

Everything here works on numpy arrays of dimension at most 8, so no attempt
is made at sparse storage or clever kernels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by every module."""

    validity: float = 1e-10
    algebra: float = 1e-12


TOL = Tolerances()

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(a)).T


def kron(*mats: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more matrices (left to right)."""
    if not mats:
        raise ValueError("kron needs at least one operand")
    out = np.asarray(mats[0], dtype=complex)
    for m in mats[1:]:
        out = np.kron(out, np.asarray(m, dtype=complex))
    return out


def ket_to_dm(ket: np.ndarray) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex).reshape(-1)
    return np.outer(ket, ket.conj())


def min_eigenvalue(m: np.ndarray) -> float:
    herm = 0.5 * (m + dagger(m))
    return float(np.linalg.eigvalsh(herm)[0])


@dataclass(frozen=True)
class QState:
    """A validated density matrix.

    The matrix is checked for hermiticity, unit trace and positive
    semidefiniteness at construction and stored read-only.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        tol = TOL.validity
        if np.max(np.abs(m - dagger(m))) > tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > tol:
            raise ValueError(f"density matrix trace is {np.trace(m).real:.3g}, expected 1")
        if min_eigenvalue(m) < -tol:
            raise ValueError("density matrix is not positive semidefinite")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_ket(cls, ket: np.ndarray) -> "QState":
        ket = np.asarray(ket, dtype=complex).reshape(-1)
        if abs(np.linalg.norm(ket) - 1.0) > TOL.validity:
            raise ValueError("ket is not normalized")
        return cls(ket_to_dm(ket))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "QState":
        return cls(np.eye(dim, dtype=complex) / dim)


def partial_trace_matrix(m: np.ndarray, keep: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Partial trace of an arbitrary (not necessarily physical) matrix.

    ``keep`` lists the subsystem indices (0-based, in ``dims`` order) that
    survive; the result is ordered the same way.
    """
    m = np.asarray(m, dtype=complex)
    dims = [int(d) for d in dims]
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep must name at least one subsystem")
    if any(k < 0 or k >= n for k in keep):
        raise ValueError(f"subsystem index out of range for dims {dims}")
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise ValueError(f"matrix shape {m.shape} does not match dims {dims} (product {total})")
    t = m.reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep]
    # trace out highest indices first so earlier axis numbers stay valid
    for i in sorted(traced, reverse=True):
        cur = t.ndim // 2
        t = np.trace(t, axis1=i, axis2=i + cur)
    d = int(np.prod([dims[k] for k in keep]))
    return t.reshape(d, d)


def partial_trace(s: QState, keep: Sequence[int], dims: Sequence[int]) -> QState:
    if int(np.prod(dims)) != s.dim:
        raise ValueError(f"dims {list(dims)} do not multiply to state dimension {s.dim}")
    return QState(partial_trace_matrix(s.matrix, keep, dims))


def kraus_map(m: np.ndarray, operators: Sequence[np.ndarray]) -> np.ndarray:
    """sum_i K_i m K_i^dagger, without any validation."""
    out = np.zeros_like(np.asarray(m, dtype=complex))
    for k in operators:
        out = out + k @ m @ dagger(k)
    return out


def apply_kraus(s: QState, ch) -> QState:
    """Apply a Kraus channel (anything with ``operators`` and ``dim``) to a state."""
    if ch.dim != s.dim:
        raise ValueError(f"channel acts on dimension {ch.dim}, state has dimension {s.dim}")
    dev = completeness_deviation(ch.operators)
    if dev > TOL.validity:
        raise ValueError(f"Kraus operators violate completeness by {dev:.3g}")
    out = kraus_map(s.matrix, ch.operators)
    return QState(0.5 * (out + dagger(out)))


def completeness_deviation(operators: Sequence[np.ndarray]) -> float:
    ops = [np.asarray(k, dtype=complex) for k in operators]
    if not ops:
        return float("inf")
    acc = sum(dagger(k) @ k for k in ops)
    return float(np.max(np.abs(acc - np.eye(acc.shape[0]))))


def pure_fidelity(ket: np.ndarray, s: QState) -> float:
    """Overlap <ket|rho|ket> for a normalized ket."""
    ket = np.asarray(ket, dtype=complex).reshape(-1)
    if abs(np.linalg.norm(ket) - 1.0) > TOL.validity:
        raise ValueError("ket is not normalized")
    if ket.shape[0] != s.dim:
        raise ValueError(f"ket dimension {ket.shape[0]} does not match state dimension {s.dim}")
    f = float(np.real(np.vdot(ket, s.matrix @ ket)))
    if -TOL.validity < f < 0.0:
        f = 0.0
    elif 1.0 < f < 1.0 + TOL.validity:
        f = 1.0
    return f
