"""Non-local hidden-variable Monte Carlo for the EPR correlations.

Each trial draws a hidden relation ``h`` whose diameter obeys
``P(d(h) < r) = r^2`` and records a coincidence when the diameter of the
detector relation ``g = g1^-1 g2`` is strictly smaller than ``d(h)``. The
coincidence rate then converges to ``1 - d(g)^2``, the quantum prediction.

Random numbers come in fixed-size blocks, each from its own stream keyed by
``(seed, block_index)``. Any partition of blocks over workers therefore
produces the same trial stream as a serial run.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterator, Literal, Sequence

import numpy as np
from scipy import stats

from qsurvey import su2
from qsurvey import weyl_heisenberg as wh
from qsurvey.errors import DimensionError, KindError, ParameterError
from qsurvey.hilbert import Operator
from qsurvey.metric import point_distance, wh_diameter

BLOCK_SIZE = 1 << 16
MIN_TRIALS = 1000
MIN_CDF_SAMPLES = 10_000
Z_THRESHOLD = 3.89
KS_BAND = 1.95

Manifold = Literal["su2", "wh"]


@dataclass(frozen=True)
class HiddenVariableLaw:
    manifold: Manifold

    def __post_init__(self):
        if self.manifold not in ("su2", "wh"):
            raise ParameterError(f"unknown manifold {self.manifold!r}")

    @property
    def density(self) -> str:
        return "uniform_sphere" if self.manifold == "su2" else "maxwellian"

    def point_type(self) -> type:
        return su2.SpherePoint if self.manifold == "su2" else wh.WHPoint


def worker_count() -> int:
    raw = os.environ.get("QSURVEY_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ParameterError(f"QSURVEY_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ParameterError("QSURVEY_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def block_rng(seed: int, block_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block_index,)))


def _draw_raw(law: HiddenVariableLaw, rng: np.random.Generator, n: int) -> np.ndarray:
    if law.manifold == "wh":
        # real and imaginary parts N(0, 1/2): density exp(-|lambda|^2) / pi
        return rng.normal(scale=math.sqrt(0.5), size=(n, 2))
    # columns: cos(theta) uniform on [-1, 1], phi uniform on [0, 2pi)
    u = rng.random((n, 2))
    return np.column_stack([1.0 - 2.0 * u[:, 0], 2.0 * math.pi * u[:, 1]])


def _raw_to_diameters(law: HiddenVariableLaw, raw: np.ndarray) -> np.ndarray:
    if law.manifold == "wh":
        return wh_diameter(raw[:, 0] ** 2 + raw[:, 1] ** 2)
    # distance from the north pole: sin(theta/2) = sqrt((1 - cos theta) / 2)
    return np.sqrt(0.5 * (1.0 - raw[:, 0]))


def _raw_to_point(law: HiddenVariableLaw, row: np.ndarray):
    if law.manifold == "wh":
        return wh.WHPoint(complex(row[0], row[1]))
    return su2.SpherePoint(math.acos(float(np.clip(row[0], -1.0, 1.0))), float(row[1]))


def sample_hidden(law: HiddenVariableLaw, rng: np.random.Generator):
    """One hidden relation as a manifold point (its diameter is its distance from ``|0>``)."""
    return _raw_to_point(law, _draw_raw(law, rng, 1)[0])


def block_diameters(law: HiddenVariableLaw, seed: int, block_index: int) -> np.ndarray:
    return _raw_to_diameters(law, _draw_raw(law, block_rng(seed, block_index), BLOCK_SIZE))


def hidden_diameters(law: HiddenVariableLaw, n: int, seed: int) -> np.ndarray:
    """The first ``n`` hidden diameters of the stream for ``seed``."""
    n_blocks = -(-n // BLOCK_SIZE)
    parts = [block_diameters(law, seed, b) for b in range(n_blocks)]
    return np.concatenate(parts)[:n] if parts else np.empty(0)


def _count_block(law, seed, block_index, n_trials, relation_d) -> int:
    d = block_diameters(law, seed, block_index)
    stop = min(BLOCK_SIZE, n_trials - block_index * BLOCK_SIZE)
    return int(np.count_nonzero(relation_d < d[:stop]))


def count_coincidences(
    law: HiddenVariableLaw, relation_d: float, n_trials: int, seed: int, workers: int | None = None
) -> int:
    n_blocks = -(-n_trials // BLOCK_SIZE)
    workers = min(workers or worker_count(), n_blocks)
    blocks = range(n_blocks)
    if workers <= 1:
        return sum(_count_block(law, seed, b, n_trials, relation_d) for b in blocks)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        counts = pool.map(lambda b: _count_block(law, seed, b, n_trials, relation_d), blocks)
        return sum(counts)


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    hidden_diameter: float
    relation_diameter: float
    coincidence: bool


@dataclass
class ExperimentReport:
    manifold: str
    g1: list
    g2: list
    n_trials: int
    seed: int
    relation_diameter: float
    observed_rate: float
    predicted_rate: float
    z_score: float
    z_threshold: float = Z_THRESHOLD
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = abs(self.z_score) <= self.z_threshold

    def to_dict(self) -> dict:
        out = asdict(self)
        out["pass"] = out.pop("passed")
        return out


def _coords(point) -> list:
    if isinstance(point, su2.SpherePoint):
        return [point.theta, point.phi]
    out = []
    for z in point.lam:
        out.extend([float(z.real), float(z.imag)])
    return out


def _check_settings(law: HiddenVariableLaw, g1, g2) -> None:
    cls = law.point_type()
    if not (isinstance(g1, cls) and isinstance(g2, cls)):
        raise DimensionError(f"settings must be {cls.__name__} for the {law.manifold} law")


def z_score(observed: float, predicted: float, n: int) -> float:
    var = predicted * (1.0 - predicted) / n
    if var > 0:
        return (observed - predicted) / math.sqrt(var)
    if observed == predicted:
        return 0.0
    return math.copysign(math.inf, observed - predicted)


def run_epr_experiment(
    law: HiddenVariableLaw, g1, g2, n_trials: int, seed: int, workers: int | None = None
) -> ExperimentReport:
    if n_trials < MIN_TRIALS:
        raise ParameterError(f"n_trials below minimum {MIN_TRIALS}")
    _check_settings(law, g1, g2)
    d = point_distance(g1, g2)
    hits = count_coincidences(law, d, n_trials, seed, workers)
    observed = hits / n_trials
    predicted = 1.0 - d * d
    return ExperimentReport(
        manifold=law.manifold,
        g1=_coords(g1),
        g2=_coords(g2),
        n_trials=n_trials,
        seed=seed,
        relation_diameter=d,
        observed_rate=observed,
        predicted_rate=predicted,
        z_score=z_score(observed, predicted, n_trials),
    )


def trial_records(law: HiddenVariableLaw, g1, g2, n_trials: int, seed: int) -> Iterator[TrialRecord]:
    _check_settings(law, g1, g2)
    d = point_distance(g1, g2)
    done = 0
    block = 0
    while done < n_trials:
        hidden = block_diameters(law, seed, block)
        for h in hidden[: n_trials - done]:
            yield TrialRecord(done, float(h), d, bool(d < h))
            done += 1
        block += 1


def write_trials_csv(records, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["trial_index", "hidden_diameter", "relation_diameter", "coincidence"])
    for rec in records:
        writer.writerow(
            [rec.trial_index, repr(rec.hidden_diameter), repr(rec.relation_diameter),
             int(rec.coincidence)]
        )


@dataclass(frozen=True)
class StabilityTransform:
    """A stability-group element applied to both detector settings.

    kinds: ``identity``; ``phase`` (global phase, labels unchanged);
    ``number_evolution`` (wh: ``lambda -> exp(-i H t) lambda``, parameters
    ``omega`` or ``hamiltonian`` and ``t``); ``su2_rotation`` (su2: common unitary).
    """

    kind: str
    t: float = 0.0
    omega: float = 1.0
    hamiltonian: wh.QuadraticHamiltonian | None = None
    unitary: Operator | None = None

    def apply(self, manifold: str, point):
        if self.kind in ("identity", "phase"):
            return point
        if self.kind == "number_evolution" and manifold == "wh":
            h = self.hamiltonian or wh.QuadraticHamiltonian(self.omega * np.eye(point.n_modes))
            return wh.evolve_point(point, h, self.t)
        if self.kind == "su2_rotation" and manifold == "su2":
            if self.unitary is None or self.unitary.kind != "unitary":
                raise KindError("su2_rotation needs a certified unitary")
            return su2.rotate_point(self.unitary, point)
        raise ParameterError(
            f"{self.kind!r} is not a stability transformation of the {manifold} manifold"
        )


@dataclass
class CovarianceReport:
    manifold: str
    n_trials: int
    seed: int
    predicted_before: float
    predicted_after: list[float]
    max_relation_shift: float
    identical_streams: list[bool]
    observed_before: float
    observed_after: list[float]

    @property
    def passed(self) -> bool:
        return all(self.identical_streams)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["pass"] = self.passed
        return out


def coincidence_stream(law: HiddenVariableLaw, g1, g2, n_trials: int, seed: int) -> np.ndarray:
    _check_settings(law, g1, g2)
    return point_distance(g1, g2) < hidden_diameters(law, n_trials, seed)


def covariance_check(
    law: HiddenVariableLaw,
    g1,
    g2,
    transformations: Sequence[StabilityTransform],
    n_trials: int,
    seed: int,
) -> CovarianceReport:
    """Replay the same seed after moving both settings by each transformation.

    The coincidence decision sequence must be bit-identical; the relation
    diameter may move by rounding only (reported as ``max_relation_shift``).
    """
    if n_trials < MIN_TRIALS:
        raise ParameterError(f"n_trials below minimum {MIN_TRIALS}")
    _check_settings(law, g1, g2)
    moved = [(tr.apply(law.manifold, g1), tr.apply(law.manifold, g2)) for tr in transformations]

    d0 = point_distance(g1, g2)
    base = coincidence_stream(law, g1, g2, n_trials, seed)
    after_pred, after_obs, same, shift = [], [], [], 0.0
    for h1, h2 in moved:
        d = point_distance(h1, h2)
        shift = max(shift, abs(d - d0))
        stream = coincidence_stream(law, h1, h2, n_trials, seed)
        same.append(bool(np.array_equal(stream, base)))
        after_pred.append(1.0 - d * d)
        after_obs.append(float(stream.mean()))
    return CovarianceReport(
        manifold=law.manifold,
        n_trials=n_trials,
        seed=seed,
        predicted_before=1.0 - d0 * d0,
        predicted_after=after_pred,
        max_relation_shift=shift,
        identical_streams=same,
        observed_before=float(base.mean()),
        observed_after=after_obs,
    )


@dataclass
class CdfReport:
    manifold: str
    n_samples: int
    seed: int
    ks_statistic: float
    band: float

    @property
    def passed(self) -> bool:
        return self.ks_statistic <= self.band

    def to_dict(self) -> dict:
        out = asdict(self)
        out["pass"] = self.passed
        return out


def diameter_cdf(r):
    """Target law ``P(d(h) < r) = r^2`` on ``[0, 1]``."""
    return np.clip(np.asarray(r, dtype=float), 0.0, 1.0) ** 2


def cdf_diagnostics(law: HiddenVariableLaw, n_samples: int, seed: int) -> CdfReport:
    if n_samples < MIN_CDF_SAMPLES:
        raise ParameterError(f"n_samples below minimum {MIN_CDF_SAMPLES}")
    d = hidden_diameters(law, n_samples, seed)
    ks = float(stats.kstest(d, diameter_cdf).statistic)
    return CdfReport(law.manifold, n_samples, seed, ks, KS_BAND / math.sqrt(n_samples))
