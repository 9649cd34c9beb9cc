"""Glauber coherent states of the Weyl-Heisenberg group in a truncated Fock space.

Coherent vectors are never renormalized after truncation. The discarded
Poisson tail weight is computed exactly (regularized incomplete gamma) and
gated against ``FockCutoff.truncation_tol``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammainc

from qsurvey.errors import (
    CoverageError,
    CutoffError,
    DimensionError,
    KindError,
    ParameterError,
    QuadratureError,
)
from qsurvey.hilbert import (
    ATOL_ALGEBRA,
    Operator,
    StateVector,
    commutator,
    inner,
    matrix_exponential,
)

DEFAULT_N_MAX = 64
DEFAULT_TRUNCATION_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class WHPoint:
    """Complex amplitude vector ``lambda`` (one entry per mode)."""

    lam: np.ndarray

    def __post_init__(self):
        lam = np.atleast_1d(np.array(self.lam, dtype=np.complex128))
        if lam.ndim != 1 or lam.size < 1:
            raise DimensionError(f"lambda must be a non-empty vector, got shape {lam.shape}")
        if not np.all(np.isfinite(lam)):
            raise ValueError("lambda must be finite")
        lam.setflags(write=False)
        object.__setattr__(self, "lam", lam)

    @property
    def n_modes(self) -> int:
        return self.lam.size

    @property
    def scalar(self) -> complex:
        if self.n_modes != 1:
            raise DimensionError(f"single-mode point expected, got {self.n_modes} modes")
        return complex(self.lam[0])

    def mean_photon_number(self) -> float:
        return float(np.vdot(self.lam, self.lam).real)

    def __eq__(self, other):
        return isinstance(other, WHPoint) and np.array_equal(self.lam, other.lam)

    def __hash__(self):
        return hash(self.lam.tobytes())


def _check_modes(a: WHPoint, b: WHPoint) -> None:
    if a.n_modes != b.n_modes:
        raise DimensionError(f"mode counts {a.n_modes} and {b.n_modes} differ")


@dataclass(frozen=True)
class FockCutoff:
    n_max: int = DEFAULT_N_MAX
    truncation_tol: float = DEFAULT_TRUNCATION_TOL

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ParameterError(f"n_max must be a positive integer, got {self.n_max!r}")
        if not (0.0 < self.truncation_tol < 1.0):
            raise ParameterError("truncation_tol must lie in (0, 1)")

    @property
    def dim(self) -> int:
        return self.n_max + 1


@dataclass(frozen=True, eq=False)
class QuadraticHamiltonian:
    """``H = a^dag . omega_matrix . a`` for a Hermitian ``omega_matrix``."""

    omega_matrix: np.ndarray

    def __post_init__(self):
        m = np.atleast_2d(np.array(self.omega_matrix, dtype=np.complex128))
        if m.shape[0] != m.shape[1]:
            raise DimensionError(f"omega_matrix must be square, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > ATOL_ALGEBRA:
            raise KindError("omega_matrix is not Hermitian")
        m.setflags(write=False)
        object.__setattr__(self, "omega_matrix", m)

    @property
    def n_modes(self) -> int:
        return self.omega_matrix.shape[0]

    @property
    def omega(self) -> float:
        if self.n_modes != 1:
            raise DimensionError("single-mode Hamiltonian expected")
        return float(self.omega_matrix[0, 0].real)

    @classmethod
    def number(cls, omega: float = 1.0) -> QuadraticHamiltonian:
        return cls([[omega]])


def tail_weight(abs_lam_sq: float, n_max: int) -> float:
    """Poisson probability of photon number above ``n_max``: ``P(n_max + 1, |lambda|^2)``."""
    if abs_lam_sq == 0.0:
        return 0.0
    return float(gammainc(n_max + 1, abs_lam_sq))


@lru_cache(maxsize=4096)
def minimal_cutoff(abs_lam_sq: float, tol: float = DEFAULT_TRUNCATION_TOL) -> int:
    """Smallest ``n_max`` whose discarded tail weight is at most ``tol``."""
    n = max(1, int(abs_lam_sq))
    while tail_weight(abs_lam_sq, n) > tol:
        n += 1
    return n


def _raw_amplitudes(lam: complex, n_max: int) -> np.ndarray:
    c = np.empty(n_max + 1, dtype=np.complex128)
    c[0] = math.exp(-0.5 * abs(lam) ** 2)
    for n in range(1, n_max + 1):
        c[n] = c[n - 1] * lam / math.sqrt(n)
    return c


def truncation_weight(p: WHPoint, c: FockCutoff) -> float:
    return tail_weight(abs(p.scalar) ** 2, c.n_max)


def coherent_vector(p: WHPoint, c: FockCutoff | None = None) -> StateVector:
    """Truncated Glauber vector ``c_n = e^{-|lambda|^2/2} lambda^n / sqrt(n!)``."""
    c = c or FockCutoff()
    lam = p.scalar
    weight = tail_weight(abs(lam) ** 2, c.n_max)
    if weight > c.truncation_tol:
        need = minimal_cutoff(abs(lam) ** 2, c.truncation_tol)
        raise CutoffError(
            f"truncation weight {weight:.3e} exceeds tol {c.truncation_tol:.1e} "
            f"at n_max={c.n_max}; need n_max >= {need}",
            minimal_n_max=need,
        )
    return StateVector(_raw_amplitudes(lam, c.n_max))


def annihilation(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1).astype(np.complex128)


def number_operator(n_max: int) -> np.ndarray:
    return np.diag(np.arange(n_max + 1, dtype=float)).astype(np.complex128)


def displacement_operator(lam: complex, n_max: int) -> Operator:
    """Truncated ``u(lambda) = exp(lambda a^dag - lambda^* a)``.

    Written as ``exp(-i h)`` with the Hermitian generator ``h = i(lambda a^dag - lambda^* a)``.
    """
    a = annihilation(n_max)
    h = 1j * (lam * a.conj().T - np.conj(lam) * a)
    h = 0.5 * (h + h.conj().T)
    return matrix_exponential(Operator(h, kind="hermitian"), 1.0)


def displacement_compose(lam: WHPoint, mu: WHPoint) -> tuple[WHPoint, float]:
    """Group composition of displacements: ``(lambda + mu, Im(lambda^* . mu))``.

    As operators, ``u(mu) u(lambda) = e^{i theta} u(lambda + mu)`` with this
    ``theta``; the opposite factor order carries ``e^{-i theta}``.
    """
    _check_modes(lam, mu)
    phase = float(np.vdot(lam.lam, mu.lam).imag)
    return WHPoint(lam.lam + mu.lam), phase


def overlap_probability(lam: WHPoint, mu: WHPoint) -> float:
    """``|<lambda|mu>|^2 = exp(-|lambda - mu|^2)``."""
    _check_modes(lam, mu)
    diff = lam.lam - mu.lam
    return math.exp(-float(np.vdot(diff, diff).real))


def overlap_probability_numeric(lam: WHPoint, mu: WHPoint, c: FockCutoff | None = None) -> float:
    """Same quantity from truncated vectors, multiplied mode by mode."""
    _check_modes(lam, mu)
    prob = 1.0
    for a, b in zip(lam.lam, mu.lam):
        ov = inner(coherent_vector(WHPoint(a), c), coherent_vector(WHPoint(b), c))
        prob *= abs(ov) ** 2
    return prob


def identity_resolution(
    c: FockCutoff, disk_radius: float, n_radial: int, n_angular: int
) -> Operator:
    """``pi^{-1} sum_k w_k |lambda_k><lambda_k|`` over the disk ``|lambda| <= R``.

    Radial nodes are Gauss-Legendre in ``s = r^2`` on ``[0, R^2]``
    (``d^2 lambda = ds dphi / 2``); angular nodes are the trapezoid rule.
    Diagonal entry ``n`` approximates ``P(n + 1, R^2)``.
    """
    if disk_radius ** 2 < c.n_max:
        raise CoverageError(
            f"disk radius {disk_radius} too small: need R^2 >= n_max = {c.n_max}"
        )
    if n_radial < 1 or n_angular <= c.n_max:
        raise QuadratureError(
            f"need n_radial >= 1 and n_angular > n_max ({c.n_max}), "
            f"got {n_radial}, {n_angular}"
        )
    s_max = disk_radius ** 2
    x, wx = np.polynomial.legendre.leggauss(n_radial)
    s = 0.5 * s_max * (x + 1.0)
    ws = 0.5 * s_max * wx
    phis = 2.0 * math.pi * np.arange(n_angular) / n_angular
    w_phi = 2.0 * math.pi / n_angular

    n = np.arange(c.n_max + 1)
    log_fact = np.array([math.lgamma(k + 1) for k in n])
    # angular sum of e^{i(n-m)phi} factors out of every radial node
    phase = np.exp(1j * np.outer(n, phis))
    angular = phase @ phase.conj().T
    radial = np.zeros((c.dim, c.dim))
    for sk, wk in zip(s, ws):
        # |c_n| = exp(-s/2) s^{n/2} / sqrt(n!) evaluated in log space
        mags = np.exp(-0.5 * sk + 0.5 * n * math.log(sk) - 0.5 * log_fact)
        radial += wk * np.outer(mags, mags)
    return Operator((0.5 * w_phi / math.pi) * radial * angular)


def evolve_point(p: WHPoint, h: QuadraticHamiltonian, t: float) -> WHPoint:
    """``lambda(t) = exp(-i H t) lambda``."""
    if h.n_modes != p.n_modes:
        raise DimensionError(f"Hamiltonian has {h.n_modes} modes, point has {p.n_modes}")
    u = matrix_exponential(Operator(h.omega_matrix, kind="hermitian"), t)
    return WHPoint(u.entries @ p.lam)


def number_evolution(omega: float, t: float, n_max: int) -> np.ndarray:
    """Truncated ``V(t) = exp(-i omega t a^dag a)``; exact since it is diagonal."""
    return np.diag(np.exp(-1j * omega * t * np.arange(n_max + 1)))


def evolve_state_fidelity(
    p: WHPoint, h: QuadraticHamiltonian, t: float, c: FockCutoff | None = None
) -> float:
    """``|<lambda(t)| V(t) |lambda>|^2`` with ``V(t)`` built at the cutoff."""
    c = c or FockCutoff()
    omega = h.omega
    v = coherent_vector(p, c).amplitudes
    target = coherent_vector(evolve_point(p, h, t), c).amplitudes
    evolved = number_evolution(omega, t, c.n_max) @ v
    return abs(np.vdot(target, evolved)) ** 2


def dispersion(p: WHPoint, h: QuadraticHamiltonian, c: FockCutoff | None = None) -> float:
    """Standard deviation of ``omega a^dag a`` in the truncated coherent state."""
    c = c or FockCutoff()
    if h.n_modes != 1 or p.n_modes != 1:
        raise DimensionError("numeric dispersion is single-mode; use dispersion_closed_form")
    v = coherent_vector(p, c).amplitudes
    probs = np.abs(v) ** 2
    probs = probs / probs.sum()
    energies = h.omega * np.arange(c.dim)
    mean = float(np.dot(probs, energies))
    var = float(np.dot(probs, (energies - mean) ** 2))
    return math.sqrt(max(var, 0.0))


def dispersion_closed_form(p: WHPoint, h: QuadraticHamiltonian) -> float:
    """Coherent-state variance of ``a^dag H a`` is ``lambda^dag H^2 lambda``."""
    if h.n_modes != p.n_modes:
        raise DimensionError(f"Hamiltonian has {h.n_modes} modes, point has {p.n_modes}")
    hl = h.omega_matrix @ p.lam
    return math.sqrt(max(float(np.vdot(hl, hl).real), 0.0))


def heisenberg_residual(
    p: WHPoint, omega: float, t: float, dt: float, c: FockCutoff | None = None
) -> float:
    """Frobenius norm of ``(g(t+dt) - g(t-dt)) / 2dt + i[H, g(t)]``.

    ``g(t) = V(t) u(lambda) V(-t)``, all truncated at ``c.n_max``. The central
    difference leaves an ``O(dt^2)`` residual.
    """
    c = c or FockCutoff()
    if not dt > 0:
        raise ParameterError(f"dt must be positive, got {dt!r}")
    u = displacement_operator(p.scalar, c.n_max).entries
    hmat = omega * number_operator(c.n_max)

    def g(tau):
        v = number_evolution(omega, tau, c.n_max)
        return v @ u @ v.conj().T

    deriv = (g(t + dt) - g(t - dt)) / (2.0 * dt)
    return float(np.linalg.norm(deriv + 1j * commutator(hmat, g(t))))
