"""Generalized Bell pair states and their correlations.

The compact (su2) Bell state is built exactly from the sphere quadrature.
The Weyl-Heisenberg Bell state has infinite norm, so only the twisted-vacuum
family ``|B, r> = sqrt(1 - r^2) sum_n r^n |n> (x) <n|`` with ``r < 1`` is
constructed; the ``r -> 1`` behaviour is handled through closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from qsurvey import su2
from qsurvey import weyl_heisenberg as wh
from qsurvey.errors import CutoffError, DimensionError, ParameterError
from qsurvey.hilbert import PairState, StateVector, pair_inner

SCHMIDT_TAIL_LIMIT = 1e-8

# su2 quadrature used for marginals; exact for the degree-1 integrands involved
_MARGINAL_QUADRATURE = su2.SphereQuadrature(4, 6)


def _check_r(r: float) -> None:
    if not (0.0 <= r < 1.0):
        raise ParameterError(f"r must be in [0,1), got {r!r}")


def check_cutoff_for_r(r: float, c: wh.FockCutoff) -> None:
    _check_r(r)
    if r ** (c.n_max + 1) > SCHMIDT_TAIL_LIMIT:
        need = math.ceil(math.log(SCHMIDT_TAIL_LIMIT) / math.log(r)) - 1
        raise CutoffError(
            f"r^(n_max+1) = {r ** (c.n_max + 1):.2e} exceeds {SCHMIDT_TAIL_LIMIT:.0e}; "
            f"need n_max >= {need}",
            minimal_n_max=need,
        )


def schmidt_coefficients(r: float, n_max: int) -> np.ndarray:
    _check_r(r)
    return math.sqrt(1.0 - r * r) * r ** np.arange(n_max + 1, dtype=float)


def build_bell_wh(r: float, c: wh.FockCutoff | None = None) -> PairState:
    """Twisted vacuum ``|B, r>`` in the ket_bra representation."""
    c = c or wh.FockCutoff()
    check_cutoff_for_r(r, c)
    return PairState(np.diag(schmidt_coefficients(r, c.n_max)), "ket_bra")


def build_bell_su2(q: su2.SphereQuadrature | None = None) -> PairState:
    return su2.bell_state(q or su2.SphereQuadrature(2, 3))


def _state_for(point, dim: int) -> StateVector:
    if isinstance(point, su2.SpherePoint):
        if dim != 2:
            raise DimensionError(f"sphere point against a pair state of dim {dim}")
        return su2.coherent_point(point)
    if isinstance(point, wh.WHPoint):
        return wh.coherent_vector(point, wh.FockCutoff(dim - 1))
    raise DimensionError(f"unsupported manifold point {type(point).__name__}")


def _same_manifold(b: PairState, g1, g2) -> None:
    if type(g1) is not type(g2):
        raise DimensionError("g1 and g2 belong to different manifolds")
    if b.dim_left != b.dim_right:
        raise DimensionError("pair state factors have different dimensions")
    if isinstance(g1, wh.WHPoint) and b.dim_left == 2:
        raise DimensionError("Weyl-Heisenberg points against a spin-1/2 pair state")


def pair_amplitude(b: PairState, g1, g2) -> complex:
    """``<<g1, g2 | B>>``: overlap of ``|g1> (x) <g2|`` with the pair state."""
    _same_manifold(b, g1, g2)
    probe = PairState.product(_state_for(g1, b.dim_left), _state_for(g2, b.dim_right))
    return pair_inner(probe, b)


def wh_amplitude_closed_form(r: float, lam: complex, mu: complex) -> complex:
    """``sqrt(1 - r^2) exp(-(|lam|^2 + |mu|^2) / 2) exp(r lam^* mu)``."""
    _check_r(r)
    expo = -0.5 * (abs(lam) ** 2 + abs(mu) ** 2) + r * np.conj(lam) * mu
    return complex(math.sqrt(1.0 - r * r) * np.exp(expo))


def scaled_pair_probability(r: float, lam: complex, mu: complex) -> float:
    """``|amplitude|^2 / (1 - r^2) = exp(-|lam|^2 - |mu|^2 + 2 r Re(lam^* mu))``.

    Tends to ``exp(-|lam - mu|^2)`` as ``r -> 1``; valid for any ``r`` in ``[0, 1)``.
    """
    _check_r(r)
    return math.exp(-abs(lam) ** 2 - abs(mu) ** 2 + 2.0 * r * (np.conj(lam) * mu).real)


def richardson_limit(values: list[float], ratio: float = 2.0) -> float:
    """Extrapolate a sequence with error ``O(h)``, ``h`` shrinking by ``ratio`` each step."""
    table = list(values)
    order = 1
    while len(table) > 1:
        f = ratio ** order
        table = [(f * b - a) / (f - 1.0) for a, b in zip(table, table[1:])]
        order += 1
    return table[0]


def marginal_probability(b: PairState, g2) -> float:
    """Probability of finding the partner in ``<g2|``, integrated over the first member.

    su2 uses the sphere quadrature explicitly. wh uses the resolution of
    identity in closed form: the integral collapses to ``||M g2||^2``.
    """
    if isinstance(g2, su2.SpherePoint):
        total = 0.0
        for node, w in _MARGINAL_QUADRATURE.nodes:
            total += w * abs(pair_amplitude(b, node, g2)) ** 2
        return total
    v = _state_for(g2, b.dim_right).amplitudes
    return float(np.linalg.norm(b.matrix @ v) ** 2)


def conditional_probability(b: PairState, g1, g2) -> float:
    """``p(g1 | g2) = |<<g1, g2|B>>|^2 / marginal(g2)``."""
    amp = pair_amplitude(b, g1, g2)
    return abs(amp) ** 2 / marginal_probability(b, g2)


@dataclass(frozen=True)
class NormalizationRecord:
    manifold: str
    volume: float
    constant: float
    improper: bool

    def to_dict(self) -> dict:
        return {
            "manifold": self.manifold,
            "volume": None if math.isinf(self.volume) else self.volume,
            "constant": self.constant,
            "improper": self.improper,
        }


def normalization_volume(manifold: str) -> NormalizationRecord:
    if manifold == "su2":
        resolution = su2.identity_resolution(su2.SphereQuadrature(2, 3)).entries
        volume = float(np.trace(resolution).real)
        return NormalizationRecord("su2", volume, volume ** -0.5, False)
    if manifold == "wh":
        # non-compact group: the Bell state exists only as the r -> 1 limit
        return NormalizationRecord("wh", math.inf, 0.0, True)
    raise ParameterError(f"unknown manifold {manifold!r}")


def twisted_vacuum_ket_ket(r: float, c: wh.FockCutoff | None = None) -> PairState:
    c = c or wh.FockCutoff()
    check_cutoff_for_r(r, c)
    return PairState(np.diag(schmidt_coefficients(r, c.n_max)), "ket_ket")


def twisted_vacuum_residuals(r: float, c: wh.FockCutoff | None = None) -> tuple[float, float]:
    """Norms of ``A1 |B,r>>`` and ``A2 |B,r>>`` in the two-mode representation.

    ``A1 = (a (x) I - r I (x) a^dag) / sqrt(1 - r^2)`` and
    ``A2 = (I (x) a - r a^dag (x) I) / sqrt(1 - r^2)``. With the state stored as
    a coefficient matrix ``Psi``, ``(X (x) Y) psi`` is ``X Psi Y^T``.
    """
    c = c or wh.FockCutoff()
    psi = twisted_vacuum_ket_ket(r, c).matrix
    a = wh.annihilation(c.n_max)
    ad = a.conj().T
    scale = 1.0 / math.sqrt(1.0 - r * r)
    res1 = scale * (a @ psi - r * psi @ ad.T)
    res2 = scale * (psi @ a.T - r * ad @ psi)
    return float(np.linalg.norm(res1)), float(np.linalg.norm(res2))


def twisted_annihilators(r: float, n_max: int) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Sparse two-mode ``A1`` and ``A2`` on the truncated product space."""
    _check_r(r)
    a = sp.csr_matrix(wh.annihilation(n_max))
    ad = a.conj().T.tocsr()
    eye = sp.identity(n_max + 1, dtype=np.complex128, format="csr")
    scale = 1.0 / math.sqrt(1.0 - r * r)
    a1 = scale * (sp.kron(a, eye) - r * sp.kron(eye, ad))
    a2 = scale * (sp.kron(eye, a) - r * sp.kron(ad, eye))
    return a1.tocsr(), a2.tocsr()


def annihilator_commutator_deviation(r: float, n_max: int, margin: int = 2) -> float:
    """Max entry of ``[A1, A1^dag] - I`` over product levels ``<= n_max - margin``.

    Truncation spoils the commutator only on the top levels of each mode.
    """
    a1, _ = twisted_annihilators(r, n_max)
    a1d = a1.conj().T.tocsr()
    comm = (a1 @ a1d - a1d @ a1).tocsr()
    levels = np.arange(n_max + 1)
    keep = (levels[:, None] <= n_max - margin) & (levels[None, :] <= n_max - margin)
    idx = np.flatnonzero(keep.ravel())
    block = comm[idx][:, idx] - sp.identity(idx.size, format="csr")
    return float(np.max(np.abs(block.data))) if block.nnz else 0.0
