"""Verification suites driven by the CLI.

Each suite returns an ordered list of ``Case`` objects (plus optional extra
report sections). Library errors inside a case become a failed case carrying
the message, so one broken check never hides the others.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy.special import gammainc

from qsurvey import bell, hidden_variable as hv, metric, su2
from qsurvey import weyl_heisenberg as wh
from qsurvey.errors import QSurveyError
from qsurvey.hilbert import Operator, matrix_exponential, random_hermitian
from qsurvey.reports import Case, at_most, failed, within

SUITES = ("identity", "metric", "bell", "dispersion", "dynamics", "hv-epr", "hv-cdf")
ALL_SUITES = SUITES + ("all",)
# report labels used by the non-verify commands
COMMAND_SUITES = ("survey",)
MANIFOLDS = ("su2", "wh")

DEFAULT_SEED = 0
DEFAULT_TRIALS = 1_000_000
DEFAULT_CUTOFF = 64
DEFAULT_R = 0.5
MAX_CUTOFF = 256
# largest single-mode |lambda|^2 used by the wh suites
WH_SUITE_MAX_NORM_SQ = 4.0

WH_DEFAULT_GRID = (0.0, 0.5, 1.0, 1.5, 2.0)
SU2_DEFAULT_GRID = (0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4, math.pi)


class ConfigError(ValueError):
    pass


@dataclass
class SuiteConfig:
    suite: str = "all"
    manifold: str = "su2"
    seed: int = DEFAULT_SEED
    n_trials: int = DEFAULT_TRIALS
    cutoff: int = DEFAULT_CUTOFF
    r: float = DEFAULT_R
    grid: list[float] | None = None
    output_path: str | None = None
    format: str = "json"

    def validate(self) -> None:
        if self.suite not in ALL_SUITES + COMMAND_SUITES:
            raise ConfigError(f"unknown suite {self.suite!r}")
        if self.manifold not in MANIFOLDS:
            raise ConfigError(f"manifold must be one of {MANIFOLDS}")
        if self.format not in ("json", "csv"):
            raise ConfigError("format must be json or csv")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.n_trials < hv.MIN_TRIALS:
            raise ConfigError(f"n_trials below minimum {hv.MIN_TRIALS}")
        if not (0.0 <= self.r < 1.0):
            raise ConfigError("r must be in [0,1)")
        if not (1 <= self.cutoff <= MAX_CUTOFF):
            raise ConfigError(f"cutoff must be in [1, {MAX_CUTOFF}]")
        if self.manifold == "wh":
            need = wh.minimal_cutoff(WH_SUITE_MAX_NORM_SQ)
            if self.cutoff < need:
                raise ConfigError(f"cutoff must be >= {need} for the wh suites")
            if self.suite in ("bell", "all"):
                try:
                    bell.check_cutoff_for_r(self.r, wh.FockCutoff(self.cutoff))
                except QSurveyError as exc:
                    raise ConfigError(str(exc)) from None
        if self.grid is not None:
            if not self.grid or any(not math.isfinite(x) or x < 0 for x in self.grid):
                raise ConfigError("grid values must be finite and non-negative")
            if self.manifold == "su2" and any(x > math.pi for x in self.grid):
                raise ConfigError("su2 grid values are Bloch angles in [0, pi]")

    def echo(self) -> dict:
        out = asdict(self)
        out.pop("output_path")
        return out

    def settings_grid(self) -> list[float]:
        if self.grid is not None:
            return list(self.grid)
        return list(SU2_DEFAULT_GRID if self.manifold == "su2" else WH_DEFAULT_GRID)


@dataclass
class SuiteResult:
    cases: list[Case] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def add(self, name: str, fn: Callable[[], Case | list[Case]]) -> None:
        try:
            out = fn()
        except QSurveyError as exc:
            self.cases.append(failed(name, exc))
            return
        for case in out if isinstance(out, list) else [out]:
            self.cases.append(case)


def setting_pair(manifold: str, coordinate: float):
    if manifold == "su2":
        return su2.NORTH_POLE, su2.SpherePoint(coordinate, 0.0)
    return wh.WHPoint(0.0), wh.WHPoint(coordinate)


# -- identity -------------------------------------------------------------


def _identity_su2(res: SuiteResult, cfg: SuiteConfig) -> None:
    def coarse():
        op = su2.identity_resolution(su2.SphereQuadrature(2, 3)).entries
        return [
            at_most("identity_resolution", float(np.max(np.abs(op - np.eye(2)))), 1e-12),
            within("identity_trace_volume", 2.0, float(np.trace(op).real), 1e-12),
        ]

    def fine():
        op = su2.identity_resolution(su2.SphereQuadrature(8, 16)).entries
        return at_most("identity_resolution_refined", float(np.max(np.abs(op - np.eye(2)))), 1e-13)

    res.add("identity_resolution", coarse)
    res.add("identity_resolution_refined", fine)


def _identity_wh(res: SuiteResult, cfg: SuiteConfig) -> None:
    c = wh.FockCutoff(cfg.cutoff)
    radius = max(6.0, math.ceil(math.sqrt(c.n_max)))

    def run():
        op = wh.identity_resolution(c, radius, 200, 2 * c.n_max + 1).entries
        diag = np.real(np.diag(op))[:11]
        expected = gammainc(np.arange(1, 12), radius ** 2)
        off = op - np.diag(np.diag(op))
        return [
            at_most("identity_diagonal_incomplete_gamma", float(np.max(np.abs(diag - expected))), 1e-10),
            at_most("identity_offdiagonal", float(np.max(np.abs(off))), 1e-10),
        ]

    res.add("identity_resolution", run)


# -- metric ---------------------------------------------------------------


def _metric(res: SuiteResult, cfg: SuiteConfig) -> None:
    m = cfg.manifold

    def axioms():
        rep = metric.verify_metric_axioms(m, 10_000, cfg.seed)
        return within("metric_axiom_violations", 0, rep.violations, 0, "brute-force")

    def invariance():
        rep = metric.stability_invariance_check(m, 200, cfg.seed, wh.FockCutoff(cfg.cutoff))
        return at_most("stability_invariance", rep.max_deviation, 1e-10, "brute-force")

    def closed_forms():
        cut = wh.FockCutoff(cfg.cutoff)
        if m == "su2":
            a, b = su2.NORTH_POLE, su2.SpherePoint(math.pi, 0.0)
            d = metric.distance(su2.coherent_point(a), su2.coherent_point(b))
            return [
                within("diameter_antipodal", 1.0, d, 1e-10),
                at_most("diameter_closed_form_agreement",
                        max(metric.closed_form_agreement(su2.NORTH_POLE, su2.SpherePoint(t, 1.0))
                            for t in np.linspace(0, math.pi, 13)), 1e-10),
            ]
        unit = metric.distance(wh.coherent_vector(wh.WHPoint(0), cut),
                               wh.coherent_vector(wh.WHPoint(1), cut))
        ln2 = metric.distance(wh.coherent_vector(wh.WHPoint(0), cut),
                              wh.coherent_vector(wh.WHPoint(math.sqrt(math.log(2))), cut))
        return [
            within("diameter_unit_separation", math.sqrt(1 - math.exp(-1)), unit, 1e-10),
            within("diameter_half_overlap", math.sqrt(0.5), ln2, 1e-10),
        ]

    res.add("metric_axiom_violations", axioms)
    res.add("stability_invariance", invariance)
    res.add("diameter_closed_forms", closed_forms)


# -- bell -----------------------------------------------------------------


def _bell_su2(res: SuiteResult, cfg: SuiteConfig) -> None:
    def construction():
        b = bell.build_bell_su2()
        target = np.eye(2) / math.sqrt(2)
        singlet = su2.singlet_via_tau(b)
        expected = np.array([[0, 1], [-1, 0]]) / math.sqrt(2)
        fidelity = abs(np.vdot(expected.ravel(), singlet.matrix.ravel())) ** 2
        return [
            at_most("bell_matrix", float(np.max(np.abs(b.matrix - target))), 1e-12),
            within("bell_norm", 1.0, b.norm(), 1e-12),
            at_most("singlet_coefficients", float(np.max(np.abs(singlet.matrix - expected))), 1e-12),
            at_most("singlet_antisymmetry", float(np.max(np.abs(singlet.matrix + singlet.matrix.T))), 1e-12),
            within("singlet_fidelity", 1.0, fidelity, 1e-12),
        ]

    def correlations():
        b = bell.build_bell_su2()
        rng = np.random.default_rng(cfg.seed)
        worst_diag, worst_cond = 0.0, 0.0
        for _ in range(50):
            g, h = su2.random_point(rng), su2.random_point(rng)
            worst_diag = max(worst_diag, abs(bell.conditional_probability(b, g, g) - 1.0))
            worst_cond = max(worst_cond, abs(bell.conditional_probability(b, g, h)
                                             - su2.overlap_probability(g, h)))
        return [
            at_most("epr_diagonal", worst_diag, 1e-10),
            at_most("conditional_equals_overlap", worst_cond, 1e-10),
        ]

    def normalization():
        rec = bell.normalization_volume("su2")
        return [
            within("normalization_volume", 2.0, rec.volume, 1e-12),
            within("normalization_constant", 2 ** -0.5, rec.constant, 1e-12),
        ]

    res.add("bell_construction", construction)
    res.add("bell_correlations", correlations)
    res.add("normalization", normalization)


def _bell_wh(res: SuiteResult, cfg: SuiteConfig) -> None:
    c = wh.FockCutoff(cfg.cutoff)
    r = cfg.r

    def twisted():
        b = bell.build_bell_wh(r, c)
        r1, r2 = bell.twisted_vacuum_residuals(r, c)
        return [
            within("twisted_vacuum_norm", 1.0, b.norm(), 1e-10),
            at_most("annihilator_residual_1", r1, 1e-12),
            at_most("annihilator_residual_2", r2, 1e-12),
        ]

    def commutator():
        return at_most("twisted_commutator", bell.annihilator_commutator_deviation(r, c.n_max), 1e-12)

    def amplitudes():
        b = bell.build_bell_wh(r, c)
        worst = 0.0
        for lam in (0.0, 0.5, 1.0 + 0.5j):
            for mu in (0.0, -0.5j, 1.0):
                num = bell.pair_amplitude(b, wh.WHPoint(lam), wh.WHPoint(mu))
                ref = bell.wh_amplitude_closed_form(r, lam, mu)
                worst = max(worst, abs(num - ref) / abs(ref))
        return at_most("amplitude_closed_form", worst, 1e-8)

    def limit():
        r1 = 1.0 - 1e-6
        worst = 0.0
        for lam, mu in ((0, 1), (0.5, -0.5), (1j, -1j), (2, 0), (1 + 1j, 1)):
            worst = max(worst, abs(bell.scaled_pair_probability(r1, lam, mu)
                                   - math.exp(-abs(lam - mu) ** 2)))
        return at_most("r_to_one_limit", worst, 1e-5)

    def improper():
        rec = bell.normalization_volume("wh")
        return within("wh_bell_improper", 1.0, float(rec.improper), 0.0, "structural")

    res.add("twisted_vacuum", twisted)
    res.add("twisted_commutator", commutator)
    res.add("amplitude_closed_form", amplitudes)
    res.add("r_to_one_limit", limit)
    res.add("wh_bell_improper", improper)


# -- dispersion -----------------------------------------------------------


def _dispersion_wh(res: SuiteResult, cfg: SuiteConfig) -> None:
    c = wh.FockCutoff(cfg.cutoff)

    def law():
        out = []
        for omega, lam in ((1.0, 1.0), (2.0, 1.5), (1.0, 0.0)):
            got = wh.dispersion(wh.WHPoint(lam), wh.QuadraticHamiltonian.number(omega), c)
            out.append(within(f"dispersion[omega={omega!r},lambda={lam!r}]", omega * abs(lam), got, 1e-8))
        return out

    def local():
        out = []
        h = wh.QuadraticHamiltonian.number(1.0)
        for lam, tol in ((1.0, 1e-3), (2.0, 4e-3)):
            rep = metric.local_diameter_check(wh.WHPoint(lam), h, [1e-3], c)
            out.append(within(f"local_diameter_rate[lambda={lam!r}]", lam, rep.diameters[0] / 1e-3, tol))
        rep = metric.local_diameter_check(wh.WHPoint(1.0), h, [1e-2, 5e-3, 2.5e-3], c)
        # the symmetric window makes the ratio error even in dt
        out.append(within("local_diameter_halving_factor", 4.0, rep.halving_factors[-1], 0.8, "derived"))
        return out

    res.add("dispersion_law", law)
    res.add("local_diameter", local)


def _dispersion_su2(res: SuiteResult, cfg: SuiteConfig) -> None:
    _, _, sz = su2.pauli()
    h = Operator(sz / 2, kind="hermitian")

    def run():
        out = []
        for theta in (math.pi / 6, math.pi / 2):
            rep = metric.local_diameter_check(su2.SpherePoint(theta, 0.4), h, [1e-2, 5e-3, 2.5e-3])
            out.append(within(f"dispersion[theta={theta!r}]", math.sin(theta) / 2, rep.dispersion, 1e-12))
            out.append(within(f"local_diameter_ratio[theta={theta!r}]", 1.0, rep.ratios[-1], 1e-4))
        return out

    res.add("dispersion_law", run)


# -- dynamics -------------------------------------------------------------


def _dynamics_wh(res: SuiteResult, cfg: SuiteConfig) -> None:
    c = wh.FockCutoff(cfg.cutoff)
    h = wh.QuadraticHamiltonian.number(1.0)

    def fidelity():
        out = []
        for t in (0.5, 1.0, 2 * math.pi):
            f = wh.evolve_state_fidelity(wh.WHPoint(1.0), h, t, c)
            out.append(within(f"evolution_fidelity[t={t!r}]", 1.0, f, 1e-10))
        v = wh.coherent_vector(wh.WHPoint(1.0), c).amplitudes
        back = wh.number_evolution(1.0, 2 * math.pi, c.n_max) @ v
        out.append(within("evolution_period", 1.0, abs(np.vdot(v, back)) ** 2, 1e-10))
        return out

    def heisenberg():
        p = wh.WHPoint(1.0)
        big = wh.heisenberg_residual(p, 1.0, 0.3, 1e-3, c)
        small = wh.heisenberg_residual(p, 1.0, 0.3, 5e-4, c)
        return within("heisenberg_residual_order", 4.0, big / small, 0.5, "derived")

    def photon_number():
        rng = np.random.default_rng(cfg.seed)
        worst = 0.0
        for _ in range(20):
            ham = wh.QuadraticHamiltonian(random_hermitian(3, rng).entries)
            p = wh.WHPoint(rng.normal(size=3) + 1j * rng.normal(size=3))
            q = wh.evolve_point(p, ham, rng.uniform(-3, 3))
            worst = max(worst, abs(q.mean_photon_number() - p.mean_photon_number()))
        return at_most("photon_number_conservation", worst, 1e-12)

    res.add("evolution_fidelity", fidelity)
    res.add("heisenberg_residual_order", heisenberg)
    res.add("photon_number_conservation", photon_number)


def _dynamics_su2(res: SuiteResult, cfg: SuiteConfig) -> None:
    def run():
        rng = np.random.default_rng(cfg.seed)
        _, _, sz = su2.pauli()
        h = Operator(sz / 2, kind="hermitian")
        worst_orbit, worst_iso = 0.0, 0.0
        for _ in range(20):
            p, q = su2.random_point(rng), su2.random_point(rng)
            t = rng.uniform(-3, 3)
            u = matrix_exponential(h, t)
            moved = u.apply(su2.coherent_point(p))
            # rotation about the reference axis shifts the azimuth
            target = su2.coherent_point(su2.SpherePoint(p.theta, p.phi + t))
            worst_orbit = max(worst_orbit, 1.0 - abs(np.vdot(target.amplitudes, moved.amplitudes)) ** 2)
            g = matrix_exponential(random_hermitian(2, rng), t)
            before = metric.distance(su2.coherent_point(p), su2.coherent_point(q))
            after = metric.distance(g.apply(su2.coherent_point(p)), g.apply(su2.coherent_point(q)))
            worst_iso = max(worst_iso, abs(after - before))
        return [
            at_most("orbit_fidelity_defect", worst_orbit, 1e-12),
            at_most("evolution_isometry", worst_iso, 1e-10),
        ]

    res.add("su2_dynamics", run)


# -- hidden variable ------------------------------------------------------


def _hv_epr(res: SuiteResult, cfg: SuiteConfig) -> None:
    law = hv.HiddenVariableLaw(cfg.manifold)
    experiments = []
    for coord in cfg.settings_grid():
        name = f"epr[{coord!r}]"

        def run(coord=coord, name=name):
            g1, g2 = setting_pair(cfg.manifold, coord)
            rep = hv.run_epr_experiment(law, g1, g2, cfg.n_trials, cfg.seed)
            experiments.append(rep.to_dict())
            sigma = math.sqrt(rep.predicted_rate * (1 - rep.predicted_rate) / rep.n_trials)
            return Case(name, rep.predicted_rate, rep.observed_rate, hv.Z_THRESHOLD * sigma,
                        rep.passed, "statistical")

        res.add(name, run)

    def covariance():
        if cfg.manifold == "wh":
            g1, g2 = wh.WHPoint(0.3 + 0.2j), wh.WHPoint(1.1 - 0.4j)
            moves = [hv.StabilityTransform("number_evolution", t=0.7), hv.StabilityTransform("phase")]
        else:
            g1, g2 = su2.SpherePoint(0.4, 1.0), su2.SpherePoint(2.0, 0.3)
            rot = su2.random_su2(np.random.default_rng(cfg.seed))
            moves = [hv.StabilityTransform("su2_rotation", unitary=rot),
                     hv.StabilityTransform("su2_rotation", unitary=su2.rotation([0, 0, 1], 0.9))]
        rep = hv.covariance_check(law, g1, g2, moves, min(cfg.n_trials, 200_000), cfg.seed)
        return within("covariance_replay", 1.0, float(rep.passed), 0.0, "replay")

    res.add("covariance_replay", covariance)
    res.extra["experiments"] = experiments


def _hv_cdf(res: SuiteResult, cfg: SuiteConfig) -> None:
    def run():
        n = max(cfg.n_trials, hv.MIN_CDF_SAMPLES)
        rep = hv.cdf_diagnostics(hv.HiddenVariableLaw(cfg.manifold), n, cfg.seed)
        return at_most("hidden_diameter_ks", rep.ks_statistic, rep.band, "statistical")

    res.add("hidden_diameter_ks", run)


_RUNNERS = {
    ("identity", "su2"): _identity_su2,
    ("identity", "wh"): _identity_wh,
    ("metric", "su2"): _metric,
    ("metric", "wh"): _metric,
    ("bell", "su2"): _bell_su2,
    ("bell", "wh"): _bell_wh,
    ("dispersion", "su2"): _dispersion_su2,
    ("dispersion", "wh"): _dispersion_wh,
    ("dynamics", "su2"): _dynamics_su2,
    ("dynamics", "wh"): _dynamics_wh,
    ("hv-epr", "su2"): _hv_epr,
    ("hv-epr", "wh"): _hv_epr,
    ("hv-cdf", "su2"): _hv_cdf,
    ("hv-cdf", "wh"): _hv_cdf,
}


def run_suite(cfg: SuiteConfig) -> SuiteResult:
    names = SUITES if cfg.suite == "all" else (cfg.suite,)
    total = SuiteResult()
    for name in names:
        part = SuiteResult()
        _RUNNERS[(name, cfg.manifold)](part, cfg)
        for case in part.cases:
            if cfg.suite == "all":
                case.name = f"{name}/{case.name}"
            total.cases.append(case)
        total.extra.update(part.extra)
    return total


def survey_rows(manifold: str, grid: list[float]) -> list[tuple[float, float, float]]:
    rows = []
    for coord in grid:
        if manifold == "su2":
            rel = metric.CoherenceRelation.su2(coord)
        else:
            rel = metric.CoherenceRelation.wh(coord)
        d = metric.relation_diameter(rel)
        rows.append((float(coord), d, 1.0 - d * d))
    return rows


__all__ = [
    "ConfigError",
    "SuiteConfig",
    "SuiteResult",
    "run_suite",
    "setting_pair",
    "survey_rows",
]
