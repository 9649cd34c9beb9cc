"""Spin-1/2 coherent states on the Poincare (Bloch) sphere.

Convention: ``|theta, phi> = (cos(theta/2), e^{i phi} sin(theta/2))`` with the
north pole as reference state. The invariant measure is the solid angle
scaled to ``dOmega / 2pi`` so that the resolution of identity is exactly the
2x2 unit operator and the manifold volume ``Tr(I)`` is 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from qsurvey.errors import QuadratureError, RepresentationError
from qsurvey.hilbert import (
    Operator,
    PairState,
    StateVector,
    TauMap,
    inner,
    to_ket_ket,
)

TWO_PI = 2.0 * math.pi
MANIFOLD_VOLUME = 2.0


@dataclass(frozen=True)
class SpherePoint:
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        theta = float(self.theta)
        if not (0.0 <= theta <= math.pi):
            raise ValueError(f"theta must lie in [0, pi], got {theta!r}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", float(self.phi) % TWO_PI)

    def bloch_vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array(
            [st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)]
        )

    @classmethod
    def from_state(cls, v: StateVector) -> SpherePoint:
        """Label of the coherent state proportional to ``v`` (global phase dropped)."""
        a, b = v.amplitudes / np.linalg.norm(v.amplitudes)
        theta = 2.0 * math.atan2(abs(b), abs(a))
        phi = float(np.angle(b) - np.angle(a)) if abs(b) > 0 and abs(a) > 0 else 0.0
        return cls(min(theta, math.pi), phi)


NORTH_POLE = SpherePoint(0.0, 0.0)


def coherent_point(p: SpherePoint) -> StateVector:
    half = 0.5 * p.theta
    amps = np.array([math.cos(half), np.exp(1j * p.phi) * math.sin(half)])
    return StateVector(amps / np.linalg.norm(amps), normalized=True)


def overlap_probability(a: SpherePoint, b: SpherePoint) -> float:
    """``|<a|b>|^2``; equals ``(1 + n_a . n_b) / 2`` for Bloch vectors ``n``."""
    return min(1.0, abs(inner(coherent_point(a), coherent_point(b))) ** 2)


def bloch_angle(a: SpherePoint, b: SpherePoint) -> float:
    """Angle between Bloch vectors; the su2 coherence-relation coordinate."""
    na, nb = a.bloch_vector(), b.bloch_vector()
    # atan2 form stays accurate near 0 and pi
    return math.atan2(np.linalg.norm(np.cross(na, nb)), float(np.dot(na, nb)))


@dataclass(frozen=True)
class SphereQuadrature:
    """Gauss-Legendre in ``cos(theta)`` times the trapezoid rule in ``phi``.

    Weights are for the scaled measure ``dOmega / 2pi`` and sum to 2.
    """

    n_theta: int
    n_phi: int

    def __post_init__(self):
        if self.n_theta < 2 or self.n_phi < 3:
            raise QuadratureError(
                f"need n_theta >= 2 and n_phi >= 3, got {self.n_theta}, {self.n_phi}"
            )

    @cached_property
    def nodes(self) -> list[tuple[SpherePoint, float]]:
        x, wx = np.polynomial.legendre.leggauss(self.n_theta)
        phis = TWO_PI * np.arange(self.n_phi) / self.n_phi
        out = []
        for xi, wi in zip(x, wx):
            theta = math.acos(float(np.clip(xi, -1.0, 1.0)))
            for ph in phis:
                # (2pi / n_phi) / 2pi
                out.append((SpherePoint(theta, ph), float(wi) / self.n_phi))
        return out

    def total_weight(self) -> float:
        return math.fsum(w for _, w in self.nodes)


def identity_resolution(q: SphereQuadrature) -> Operator:
    acc = np.zeros((2, 2), dtype=np.complex128)
    for point, w in q.nodes:
        v = coherent_point(point).amplitudes
        acc += w * np.outer(v, v.conj())
    return Operator(acc)


def bell_state(q: SphereQuadrature) -> PairState:
    """``C * sum_k w_k |g_k> (x) <g_k|`` with ``C = V_F^{-1/2}``."""
    volume = q.total_weight()
    resolution = identity_resolution(q).entries
    return PairState(resolution / math.sqrt(volume), "ket_bra")


def singlet_via_tau(b: PairState, tau: TauMap | None = None) -> PairState:
    if b.representation != "ket_bra":
        raise RepresentationError("singlet_via_tau expects the ket_bra Bell state")
    if tau is None:
        tau = TauMap.spin_half_time_reversal()
    return to_ket_ket(b, tau)


def rotation(axis, angle: float) -> Operator:
    """SU(2) rotation ``exp(-i angle n.sigma / 2)`` about unit ``axis``."""
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    m = np.array(
        [
            [c - 1j * s * n[2], -1j * s * (n[0] - 1j * n[1])],
            [-1j * s * (n[0] + 1j * n[1]), c + 1j * s * n[2]],
        ]
    )
    return Operator(m, kind="unitary")


def random_su2(rng: np.random.Generator) -> Operator:
    """Haar-random SU(2) element (uniform unit quaternion)."""
    q = rng.normal(size=4)
    a, b, c, d = q / np.linalg.norm(q)
    m = np.array([[a + 1j * b, c + 1j * d], [-c + 1j * d, a - 1j * b]])
    return Operator(m, kind="unitary")


def random_point(rng: np.random.Generator) -> SpherePoint:
    """Point uniform with respect to solid angle."""
    cos_t = rng.uniform(-1.0, 1.0)
    return SpherePoint(math.acos(cos_t), rng.uniform(0.0, TWO_PI))


def rotate_point(u: Operator, p: SpherePoint) -> SpherePoint:
    return SpherePoint.from_state(u.apply(coherent_point(p)))


def pauli() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    sx = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    sy = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
    sz = np.array([[1, 0], [0, -1]], dtype=np.complex128)
    return sx, sy, sz
