"""Quantum surveying on coherent-state manifolds.

Spin-1/2 (SU(2)) and truncated Glauber (Weyl-Heisenberg) coherent states,
their canonical Bell pair states, the coherence-relation metric, and a
non-local hidden-variable Monte Carlo that reproduces the EPR correlations.
"""

from qsurvey.errors import (
    CoverageError,
    CutoffError,
    DimensionError,
    KindError,
    ParameterError,
    QuadratureError,
    QSurveyError,
    RepresentationError,
)

__version__ = "0.1.0"

__all__ = [
    "CoverageError",
    "CutoffError",
    "DimensionError",
    "KindError",
    "ParameterError",
    "QuadratureError",
    "QSurveyError",
    "RepresentationError",
    "__version__",
]
