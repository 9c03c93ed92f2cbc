"""Dense complex linear algebra for 2x2 and 4x4 operators.

Fixed basis order throughout the package: |uu>, |ud>, |du>, |dd> with
m = +1/2 <-> u, so Sz^(1) = diag(1,1,-1,-1)/2 under the Kronecker
convention of `tensor_product`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENT2 = np.eye(2, dtype=complex)

SX = PAULI_X / 2
SY = PAULI_Y / 2
SZ = PAULI_Z / 2

SPLUS = SX + 1j * SY   # [[0,1],[0,0]]
SMINUS = SX - 1j * SY  # [[0,0],[1,0]]

ALLOWED_DIMS = (2, 4)

UNITARITY_TOL = 1e-10


def as_operator(m) -> np.ndarray:
    """Validate and return a square complex matrix of dim 2 or 4."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ContractViolationError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] not in ALLOWED_DIMS:
        raise ContractViolationError(f"dim must be one of {ALLOWED_DIMS}, got {a.shape[0]}")
    return a


def unitarity_defect(m) -> float:
    """Frobenius norm of (U^dag U - I)."""
    a = as_operator(m)
    return float(np.linalg.norm(a.conj().T @ a - np.eye(a.shape[0])))


@dataclass(frozen=True)
class Unitary:
    """A dense unitary with its unitarity certificate."""

    matrix: np.ndarray
    defect: float

    @classmethod
    def certify(cls, m, tol: float = UNITARITY_TOL) -> "Unitary":
        a = as_operator(m)
        d = unitarity_defect(a)
        if d > tol:
            raise ContractViolationError(f"unitarity defect {d:.3e} exceeds {tol:.1e}")
        return cls(matrix=a, defect=d)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product of two 2x2 matrices, first factor outer."""
    am = as_operator(a)
    bm = as_operator(b)
    if am.shape[0] != 2 or bm.shape[0] != 2:
        raise ContractViolationError("tensor_product takes two 2x2 matrices")
    return np.kron(am, bm)


def su2_exp(axis, angle: float) -> Unitary:
    """exp(-i angle (axis . S)) with S = sigma/2, via the Pauli closed form.

    axis must be a unit 3-vector within 1e-12.
    """
    n = np.asarray(axis, dtype=float)
    if n.shape != (3,):
        raise ContractViolationError("axis must be a real 3-vector")
    norm = float(np.linalg.norm(n))
    if abs(norm - 1.0) > 1e-12:
        raise ContractViolationError(f"axis norm {norm!r} is not 1 within 1e-12")
    half = angle / 2
    sig = n[0] * PAULI_X + n[1] * PAULI_Y + n[2] * PAULI_Z
    return Unitary.certify(np.cos(half) * IDENT2 - 1j * np.sin(half) * sig, tol=1e-12)


def frobenius_distance(a, b) -> float:
    """sqrt(sum |a_ij - b_ij|^2); zero iff equal."""
    am = as_operator(a)
    bm = as_operator(b)
    if am.shape != bm.shape:
        raise ContractViolationError(f"dimension mismatch {am.shape} vs {bm.shape}")
    return float(np.linalg.norm(am - bm))


def global_phase_distance(a, b) -> float:
    """min over phi of || e^{i phi} a - b ||_F, closed form via trace(a^dag b).

    When trace(a^dag b) = 0 every phi gives the same value, which equals the
    raw Frobenius distance; that value is returned.
    """
    am = a.matrix if isinstance(a, Unitary) else as_operator(a)
    bm = b.matrix if isinstance(b, Unitary) else as_operator(b)
    if am.shape != bm.shape:
        raise ContractViolationError(f"dimension mismatch {am.shape} vs {bm.shape}")
    tr = complex(np.trace(am.conj().T @ bm))
    if abs(tr) == 0.0:
        return frobenius_distance(am, bm)
    phase = np.exp(1j * np.angle(tr))
    return float(np.linalg.norm(phase * am - bm))


def fold_angle(x: float) -> float:
    """Fold a phase into (-pi, pi]."""
    y = (-x + np.pi) % (2 * np.pi)
    return float(-(y - np.pi))


def angle_distance(a: float, b: float) -> float:
    """Circular distance |a - b| mod 2 pi, in [0, pi]."""
    return abs(fold_angle(a - b))
