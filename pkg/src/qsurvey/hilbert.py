"""Finite-dimensional complex Hilbert-space primitives.

Everything here is a thin, validated layer over dense numpy arrays. Values
are immutable after construction (arrays are copied and write-protected).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from qsurvey.errors import DimensionError, KindError, RepresentationError

ATOL_ALGEBRA = 1e-12
ATOL_UNITARY = 1e-10
ATOL_COMPOSED = 1e-9

OperatorKind = Literal["general", "hermitian", "unitary"]
Representation = Literal["ket_bra", "ket_ket"]


def _frozen(array, ndim: int) -> np.ndarray:
    out = np.array(array, dtype=np.complex128, copy=True)
    if out.ndim != ndim:
        raise DimensionError(f"expected a {ndim}-d array, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ValueError("non-finite amplitudes")
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        amps = _frozen(self.amplitudes, 1)
        if amps.size < 1:
            raise DimensionError("state vector must have dim >= 1")
        object.__setattr__(self, "amplitudes", amps)
        if self.normalized:
            norm2 = float(np.vdot(amps, amps).real)
            if abs(norm2 - 1.0) > ATOL_ALGEBRA:
                raise ValueError(f"vector flagged normalized but <v|v> = {norm2!r}")

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @classmethod
    def basis(cls, dim: int, index: int) -> StateVector:
        v = np.zeros(dim, dtype=np.complex128)
        v[index] = 1.0
        return cls(v, normalized=True)


@dataclass(frozen=True, eq=False)
class Operator:
    entries: np.ndarray
    kind: OperatorKind = "general"

    def __post_init__(self):
        a = _frozen(self.entries, 2)
        if a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise DimensionError(f"operator must be square, got shape {a.shape}")
        object.__setattr__(self, "entries", a)
        if self.kind == "hermitian":
            dev = np.max(np.abs(a - a.conj().T))
            if dev > ATOL_ALGEBRA:
                raise KindError(f"not hermitian: max|A - A^dag| = {dev:.3e}")
        elif self.kind == "unitary":
            dev = np.max(np.abs(a.conj().T @ a - np.eye(a.shape[0])))
            if dev > ATOL_UNITARY:
                raise KindError(f"not unitary: max|A^dag A - I| = {dev:.3e}")
        elif self.kind != "general":
            raise KindError(f"unknown operator kind {self.kind!r}")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def apply(self, v: StateVector) -> StateVector:
        if v.dim != self.dim:
            raise DimensionError(f"operator dim {self.dim} vs vector dim {v.dim}")
        out = self.entries @ v.amplitudes
        normalized = v.normalized and self.kind == "unitary"
        if normalized:
            out = out / np.linalg.norm(out)
        return StateVector(out, normalized=normalized)

    def __matmul__(self, other: Operator) -> Operator:
        if other.dim != self.dim:
            raise DimensionError(f"operator dims {self.dim} and {other.dim} differ")
        kind = "unitary" if self.kind == other.kind == "unitary" else "general"
        return Operator(self.entries @ other.entries, kind=kind)

    def dagger(self) -> Operator:
        return Operator(self.entries.conj().T, kind=self.kind)

    @classmethod
    def identity(cls, dim: int) -> Operator:
        return cls(np.eye(dim), kind="unitary")


@dataclass(frozen=True, eq=False)
class PairState:
    """A two-particle state stored as a coefficient matrix.

    In the ``ket_bra`` representation ``matrix[i, j]`` multiplies
    ``|i> (x) <j|``; in ``ket_ket`` it multiplies ``|i>|j>``.
    """

    matrix: np.ndarray
    representation: Representation = "ket_bra"

    def __post_init__(self):
        m = _frozen(self.matrix, 2)
        object.__setattr__(self, "matrix", m)
        if self.representation not in ("ket_bra", "ket_ket"):
            raise RepresentationError(f"unknown representation {self.representation!r}")

    @property
    def dim_left(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim_right(self) -> int:
        return self.matrix.shape[1]

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    @classmethod
    def product(cls, left: StateVector, right: StateVector) -> PairState:
        """``|left> (x) <right|`` in the ket_bra representation."""
        return cls(np.outer(left.amplitudes, right.amplitudes.conj()), "ket_bra")


@dataclass(frozen=True, eq=False)
class TauMap:
    """Anti-unitary map in canonical form: conjugate amplitudes, then apply ``unitary``."""

    unitary: Operator
    sign: int = field(init=False)

    def __post_init__(self):
        if self.unitary.kind != "unitary":
            raise KindError("TauMap needs a certified unitary part")
        u = self.unitary.entries
        square = u @ u.conj()  # tau^2 = U conj(U)
        eye = np.eye(u.shape[0])
        if np.max(np.abs(square - eye)) <= ATOL_ALGEBRA:
            sign = 1
        elif np.max(np.abs(square + eye)) <= ATOL_ALGEBRA:
            sign = -1
        else:
            raise KindError("tau^2 must be +I or -I")
        object.__setattr__(self, "sign", sign)

    @property
    def dim(self) -> int:
        return self.unitary.dim

    @classmethod
    def complex_conjugation(cls, dim: int) -> TauMap:
        return cls(Operator.identity(dim))

    @classmethod
    def spin_half_time_reversal(cls) -> TauMap:
        # |up> -> |down>, |down> -> -|up>
        return cls(Operator(np.array([[0.0, -1.0], [1.0, 0.0]]), kind="unitary"))


def inner(u: StateVector, v: StateVector) -> complex:
    """<u|v>, conjugate-linear in ``u``."""
    if u.dim != v.dim:
        raise DimensionError(f"inner product of dims {u.dim} and {v.dim}")
    return complex(np.vdot(u.amplitudes, v.amplitudes))


def matrix_exponential(h: Operator, t: float) -> Operator:
    """Return ``exp(-i t h)`` for a Hermitian ``h`` via eigendecomposition.

    The result is unitary by construction: ``V diag(exp(-i t w)) V^dag``
    with orthonormal eigenvectors ``V``.
    """
    if h.kind != "hermitian":
        raise KindError("matrix_exponential needs a hermitian generator")
    w, vecs = np.linalg.eigh(h.entries)
    phases = np.exp(-1j * t * w)
    return Operator((vecs * phases) @ vecs.conj().T, kind="unitary")


def tau_apply(tau: TauMap, v: StateVector) -> StateVector:
    if tau.dim != v.dim:
        raise DimensionError(f"tau map dim {tau.dim} vs vector dim {v.dim}")
    out = tau.unitary.entries @ v.amplitudes.conj()
    return StateVector(out, normalized=v.normalized)


def pair_inner(p: PairState, q: PairState) -> complex:
    """Frobenius pairing ``sum conj(p) * q``."""
    if p.representation != q.representation:
        raise RepresentationError(
            f"cannot pair {p.representation} with {q.representation}"
        )
    if p.matrix.shape != q.matrix.shape:
        raise DimensionError(f"pair shapes {p.matrix.shape} and {q.matrix.shape} differ")
    return complex(np.vdot(p.matrix, q.matrix))


def to_ket_ket(p: PairState, tau: TauMap) -> PairState:
    """Transport ``|x> (x) <y|`` to ``|x> (x) tau|y>``.

    The bra ``<j|`` is sent to ``tau|j> = U e_j``; since ``<y| = sum conj(y_j) <j|``
    and ``tau|y> = U conj(y)`` the map is linear: ``M = C U^T``.
    """
    if p.representation != "ket_bra":
        raise RepresentationError("to_ket_ket expects a ket_bra pair state")
    if tau.dim != p.dim_right:
        raise DimensionError(f"tau dim {tau.dim} vs right factor dim {p.dim_right}")
    return PairState(p.matrix @ tau.unitary.entries.T, "ket_ket")


def to_ket_bra(p: PairState, tau: TauMap) -> PairState:
    if p.representation != "ket_ket":
        raise RepresentationError("to_ket_bra expects a ket_ket pair state")
    if tau.dim != p.dim_right:
        raise DimensionError(f"tau dim {tau.dim} vs right factor dim {p.dim_right}")
    # (U^T)^{-1} = conj(U) for unitary U
    return PairState(p.matrix @ tau.unitary.entries.conj(), "ket_bra")


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def random_hermitian(dim: int, rng: np.random.Generator) -> Operator:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return Operator((z + z.conj().T) / 2, kind="hermitian")


def random_state(dim: int, rng: np.random.Generator) -> StateVector:
    z = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return StateVector(z / np.linalg.norm(z), normalized=True)
