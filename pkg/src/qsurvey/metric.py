"""Coherence-relation metric ``d = sqrt(1 - |<u|v>|^2)`` and its checks."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Literal, Sequence

import numpy as np

from qsurvey import su2
from qsurvey import weyl_heisenberg as wh
from qsurvey.errors import DimensionError, ParameterError
from qsurvey.hilbert import (
    Operator,
    StateVector,
    matrix_exponential,
)

Manifold = Literal["su2", "wh"]

AXIOM_SLACK = 1e-12


def distance(u: StateVector, v: StateVector) -> float:
    """Fubini-Study chordal distance between the rays of ``u`` and ``v``.

    Evaluated as the norm of the component of ``v`` orthogonal to ``u``, which
    equals ``sqrt(1 - |<u|v>|^2)`` for unit vectors but keeps full relative
    precision for nearly parallel states. Inputs are rescaled to unit norm so
    truncated coherent vectors are accepted as-is. Both projections are
    averaged so the result is exactly symmetric in its arguments.
    """
    if u.dim != v.dim:
        raise DimensionError(f"distance between dims {u.dim} and {v.dim}")
    a = u.amplitudes / np.linalg.norm(u.amplitudes)
    b = v.amplitudes / np.linalg.norm(v.amplitudes)
    if np.array_equal(a, b):
        return 0.0
    ab = np.vdot(a, b)
    d = 0.5 * (float(np.linalg.norm(b - ab * a)) + float(np.linalg.norm(a - np.conj(ab) * b)))
    return min(1.0, d)


def wh_diameter(abs_delta_sq) -> float | np.ndarray:
    """``sqrt(1 - exp(-|delta lambda|^2))`` without cancellation at small arguments."""
    return np.sqrt(-np.expm1(-np.asarray(abs_delta_sq, dtype=float)))


@dataclass(frozen=True, eq=False)
class CoherenceRelation:
    """Double-coset representative of the relation between two states.

    ``coordinate`` is the Bloch angle for ``su2`` and the complex difference
    vector ``mu - lambda`` for ``wh``.
    """

    manifold: Manifold
    coordinate: float | np.ndarray

    @classmethod
    def su2(cls, bloch_angle: float) -> CoherenceRelation:
        return cls("su2", float(bloch_angle))

    @classmethod
    def wh(cls, delta) -> CoherenceRelation:
        return cls("wh", np.atleast_1d(np.asarray(delta, dtype=np.complex128)))

    @classmethod
    def between(cls, a, b) -> CoherenceRelation:
        if isinstance(a, su2.SpherePoint) and isinstance(b, su2.SpherePoint):
            return cls.su2(su2.bloch_angle(a, b))
        if isinstance(a, wh.WHPoint) and isinstance(b, wh.WHPoint):
            if a.n_modes != b.n_modes:
                raise DimensionError("mode counts differ")
            return cls.wh(b.lam - a.lam)
        raise DimensionError("points belong to different manifolds")


def relation_diameter(r: CoherenceRelation) -> float:
    if r.manifold == "su2":
        return abs(math.sin(0.5 * r.coordinate))
    if r.manifold == "wh":
        delta = np.asarray(r.coordinate)
        return float(wh_diameter(np.vdot(delta, delta).real))
    raise ParameterError(f"unknown manifold {r.manifold!r}")


def point_distance(a, b) -> float:
    """Closed-form diameter of the relation between two manifold points."""
    return relation_diameter(CoherenceRelation.between(a, b))


@dataclass
class AxiomReport:
    manifold: str
    n_triples: int
    seed: int
    bounds_violations: int = 0
    symmetry_violations: int = 0
    triangle_violations: int = 0
    min_triangle_margin: float = math.inf

    @property
    def violations(self) -> int:
        return self.bounds_violations + self.symmetry_violations + self.triangle_violations

    def to_dict(self) -> dict:
        out = asdict(self)
        out["violations"] = self.violations
        return out


def _su2_group_diameter(g: np.ndarray) -> float:
    # d(g) = sqrt(1 - |<0|g|0>|^2) = |g_10| for unitary g
    return float(min(1.0, math.sqrt(max(0.0, 1.0 - abs(g[0, 0]) ** 2))))


def verify_metric_axioms(manifold: Manifold, n_triples: int, seed: int = 0) -> AxiomReport:
    """Brute-force check of ``0 <= d <= 1``, ``d(g) = d(g^-1)``, ``d(g) + d(h) >= d(gh)``.

    su2 relations are Haar-random group elements composed by matrix product;
    wh relations are complex displacements composed by addition (the central
    phase cannot change ``d``).
    """
    if n_triples < 1:
        raise ParameterError("n_triples must be >= 1")
    rng = np.random.default_rng(seed)
    report = AxiomReport(manifold, n_triples, seed)

    if manifold == "su2":
        def draw():
            return su2.random_su2(rng).entries

        def diam(g):
            return _su2_group_diameter(g)

        def inv(g):
            return g.conj().T

        def compose(g, h):
            return g @ h
    elif manifold == "wh":
        def draw():
            return complex(*rng.normal(scale=1.5, size=2))

        def diam(g):
            return float(wh_diameter(abs(g) ** 2))

        def inv(g):
            return -g

        def compose(g, h):
            return g + h
    else:
        raise ParameterError(f"unknown manifold {manifold!r}")

    for _ in range(n_triples):
        g, h = draw(), draw()
        dg, dh, dgh = diam(g), diam(h), diam(compose(g, h))
        if not all(0.0 <= d <= 1.0 for d in (dg, dh, dgh)):
            report.bounds_violations += 1
        if abs(dg - diam(inv(g))) > AXIOM_SLACK:
            report.symmetry_violations += 1
        margin = dg + dh - dgh
        report.min_triangle_margin = min(report.min_triangle_margin, margin)
        if margin < -AXIOM_SLACK:
            report.triangle_violations += 1
    return report


@dataclass
class LocalDiameterReport:
    dt: list[float]
    diameters: list[float]
    dispersion: float
    ratios: list[float]
    deviations: list[float]
    halving_factors: list[float] = field(default_factory=list)

    def observed_orders(self) -> list[float]:
        return [math.log2(f) if f > 0 else math.nan for f in self.halving_factors]

    def to_dict(self) -> dict:
        out = asdict(self)
        out["observed_orders"] = self.observed_orders()
        return out


def _orbit_setup(point, hamiltonian, cutoff):
    if isinstance(point, su2.SpherePoint):
        if not isinstance(hamiltonian, Operator):
            raise DimensionError("su2 dynamics needs a 2x2 Hermitian Operator")
        gen = Operator(hamiltonian.entries, kind="hermitian")
        v = su2.coherent_point(point)
        hv = gen.entries @ v.amplitudes
        mean = float(np.vdot(v.amplitudes, hv).real)
        disp = math.sqrt(max(0.0, float(np.vdot(hv, hv).real) - mean ** 2))
        return v, gen, disp
    if isinstance(point, wh.WHPoint):
        cutoff = cutoff or wh.FockCutoff()
        omega = hamiltonian.omega
        v = wh.coherent_vector(point, cutoff)
        gen = Operator(omega * wh.number_operator(cutoff.n_max), kind="hermitian")
        return v, gen, wh.dispersion(point, hamiltonian, cutoff)
    raise DimensionError(f"unsupported manifold point {type(point).__name__}")


def local_diameter_check(
    point, hamiltonian, dt_list: Sequence[float], cutoff: wh.FockCutoff | None = None
) -> LocalDiameterReport:
    """Compare ``d(g(-dt/2), g(dt/2))`` on an orbit with ``dt * dispersion``.

    States are evolved explicitly by ``exp(-i H t)``; ``halving_factors`` holds
    successive ratios of ``|ratio - 1|`` between consecutive ``dt`` values.
    """
    dts = [float(x) for x in dt_list]
    if not dts or any(x <= 0 for x in dts):
        raise ParameterError("dt values must be positive")
    if any(b >= a for a, b in zip(dts, dts[1:])):
        raise ParameterError("dt values must be strictly decreasing")
    v, gen, disp = _orbit_setup(point, hamiltonian, cutoff)

    diameters, ratios, deviations = [], [], []
    for dt in dts:
        before = matrix_exponential(gen, -0.5 * dt).apply(v)
        after = matrix_exponential(gen, 0.5 * dt).apply(v)
        d = distance(before, after)
        diameters.append(d)
        if disp > 0:
            ratio = d / (dt * disp)
            ratios.append(ratio)
            deviations.append(abs(ratio - 1.0))
        else:
            ratios.append(math.nan)
            deviations.append(math.nan)
    factors = []
    for a, b in zip(deviations, deviations[1:]):
        factors.append(a / b if b > 0 else math.nan)
    return LocalDiameterReport(dts, diameters, disp, ratios, deviations, factors)


@dataclass
class InvarianceReport:
    manifold: str
    n_samples: int
    seed: int
    max_deviation: float

    def to_dict(self) -> dict:
        return asdict(self)


def stability_invariance_check(
    manifold: Manifold, n_samples: int, seed: int = 0, cutoff: wh.FockCutoff | None = None
) -> InvarianceReport:
    """Largest change of ``distance`` when both states get a stability transformation.

    Both manifolds: independent global phases on each vector. wh: additionally
    the common number-operator evolution ``V(t)``. su2: additionally a common
    rotation about the reference axis and a common general SU(2) rotation.
    """
    if n_samples < 1:
        raise ParameterError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    cutoff = cutoff or wh.FockCutoff()
    worst = 0.0
    for _ in range(n_samples):
        ph1, ph2 = np.exp(1j * rng.uniform(0, 2 * math.pi, size=2))
        if manifold == "su2":
            a = su2.coherent_point(su2.random_point(rng))
            b = su2.coherent_point(su2.random_point(rng))
            z_rot = su2.rotation([0, 0, 1], rng.uniform(0, 2 * math.pi))
            general = su2.random_su2(rng)
            transformed = [
                (StateVector(ph1 * a.amplitudes), StateVector(ph2 * b.amplitudes)),
                (z_rot.apply(a), z_rot.apply(b)),
                (general.apply(a), general.apply(b)),
            ]
        elif manifold == "wh":
            lam = wh.WHPoint(complex(*rng.uniform(-1.5, 1.5, size=2)))
            mu = wh.WHPoint(complex(*rng.uniform(-1.5, 1.5, size=2)))
            a = wh.coherent_vector(lam, cutoff)
            b = wh.coherent_vector(mu, cutoff)
            vt = wh.number_evolution(rng.uniform(0.1, 3.0), rng.uniform(-5, 5), cutoff.n_max)
            transformed = [
                (StateVector(ph1 * a.amplitudes), StateVector(ph2 * b.amplitudes)),
                (StateVector(vt @ a.amplitudes), StateVector(vt @ b.amplitudes)),
            ]
        else:
            raise ParameterError(f"unknown manifold {manifold!r}")
        base = distance(a, b)
        for x, y in transformed:
            worst = max(worst, abs(distance(x, y) - base))
    return InvarianceReport(manifold, n_samples, seed, worst)


def closed_form_agreement(a, b, cutoff: wh.FockCutoff | None = None) -> float:
    """``|relation_diameter - distance|`` for explicit representative states."""
    if isinstance(a, su2.SpherePoint):
        va, vb = su2.coherent_point(a), su2.coherent_point(b)
    else:
        va, vb = wh.coherent_vector(a, cutoff), wh.coherent_vector(b, cutoff)
    return abs(point_distance(a, b) - distance(va, vb))


__all__ = [
    "AxiomReport",
    "CoherenceRelation",
    "InvarianceReport",
    "LocalDiameterReport",
    "closed_form_agreement",
    "distance",
    "local_diameter_check",
    "point_distance",
    "relation_diameter",
    "stability_invariance_check",
    "verify_metric_axioms",
    "wh_diameter",
]
