"""Acceptance criteria, one test each, at the stated tolerances.

Every test reports through the ``criterion`` fixture so the terminal summary
lists one PASS/FAIL line per criterion.
"""

import cmath
import json
import math
import time
import timeit

import numpy as np
import pytest
from scipy.special import gammainc

from qsurvey import bell, cli, metric, su2
from qsurvey import hidden_variable as hv
from qsurvey import weyl_heisenberg as wh
from qsurvey.hilbert import TauMap
from qsurvey.reports import stable_bytes


def best_time(fn, repeat=20):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def disk_point(rng, radius):
    return radius * math.sqrt(rng.uniform()) * cmath.exp(2j * math.pi * rng.uniform())


def test_su2_identity_resolution(criterion):
    def build():
        return su2.identity_resolution(su2.SphereQuadrature(2, 3)).entries

    op = build()
    dev = float(np.max(np.abs(op - np.eye(2))))
    trace = float(np.trace(op).real)
    elapsed = best_time(build)
    ok = dev <= 1e-12 and abs(trace - 2) <= 1e-12 and elapsed < 1e-3
    assert criterion(ok, f"max dev {dev:.1e}, trace {trace!r}, {elapsed * 1e3:.3f} ms")


def test_su2_bell_matrix_and_singlet(criterion):
    def build():
        b = su2.bell_state(su2.SphereQuadrature(2, 3))
        return b, su2.singlet_via_tau(b, TauMap.spin_half_time_reversal())

    b, s = build()
    dev = float(np.max(np.abs(b.matrix - 2 ** -0.5 * np.eye(2))))
    target = np.array([[0, 1], [-1, 0]]) / math.sqrt(2)
    fid = abs(np.vdot(target.ravel(), s.matrix.ravel())) ** 2
    elapsed = best_time(build)
    ok = dev <= 1e-12 and fid >= 1 - 1e-12 and elapsed < 1e-3
    assert criterion(ok, f"bell dev {dev:.1e}, singlet fidelity 1-{1 - fid:.1e}, {elapsed * 1e3:.3f} ms")


def test_wh_overlap_law(criterion, rng):
    c = wh.FockCutoff(64)
    pairs = [(disk_point(rng, 2), disk_point(rng, 2)) for _ in range(200)]
    t0 = time.perf_counter()
    worst = max(
        abs(wh.overlap_probability(wh.WHPoint(a), wh.WHPoint(b))
            - wh.overlap_probability_numeric(wh.WHPoint(a), wh.WHPoint(b), c))
        for a, b in pairs
    )
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 1.0
    assert criterion(ok, f"max error {worst:.1e} over 200 pairs, {elapsed:.3f} s")


def test_displacement_composition_phase(criterion, rng):
    n_max = 64
    worst = 0.0
    for _ in range(50):
        lam, mu = disk_point(rng, 1.5), disk_point(rng, 1.5)
        _, theta = wh.displacement_compose(wh.WHPoint(lam), wh.WHPoint(mu))
        prod = wh.displacement_operator(mu, n_max).entries @ wh.displacement_operator(lam, n_max).entries
        total = wh.displacement_operator(lam + mu, n_max).entries
        # phase of the product relative to u(lam + mu), read on the vacuum column
        z = np.vdot(total[:, 0], prod[:, 0])
        worst = max(worst, abs(cmath.phase(z) - theta), abs(abs(z) - 1))
    ok = worst <= 1e-8
    assert criterion(ok, f"max phase error {worst:.1e} over 50 pairs (product u(mu)u(lam))")


def test_wh_identity_resolution(criterion):
    c = wh.FockCutoff(32)
    op = wh.identity_resolution(c, 6.0, 120, 2 * c.n_max + 1).entries
    diag_err = float(np.max(np.abs(np.real(np.diag(op))[:11] - gammainc(np.arange(1, 12), 36.0))))
    off = float(np.max(np.abs(op - np.diag(np.diag(op)))))
    ok = diag_err <= 1e-10 and off <= 1e-10
    assert criterion(ok, f"diag error {diag_err:.1e} (n<=10), off-diagonal {off:.1e}")


@pytest.mark.parametrize("manifold", ["su2", "wh"])
def test_metric_axioms(criterion, manifold):
    rep = metric.verify_metric_axioms(manifold, 10_000, seed=0)
    ok = rep.violations == 0 and rep.min_triangle_margin >= -1e-12
    assert criterion(ok, f"{rep.violations} violations, min triangle margin {rep.min_triangle_margin:.1e}")


def test_dispersion_law(criterion):
    worst = 0.0
    for omega, lam in ((1.0, 1.0), (2.0, 1.5), (0.5, 1 - 1j), (1.0, 0.0)):
        got = wh.dispersion(wh.WHPoint(lam), wh.QuadraticHamiltonian.number(omega))
        worst = max(worst, abs(got - omega * abs(lam)))
    ok = worst <= 1e-8
    assert criterion(ok, f"max |dispersion - omega|lambda|| = {worst:.1e}")


def test_local_diameter_first_order_halving(criterion):
    """Ratio d/(dt*dispersion) -> 1, deviation halving with dt (factor 2 +/- 20%)."""
    rep = metric.local_diameter_check(wh.WHPoint(1.0), wh.QuadraticHamiltonian.number(1.0),
                                      [1e-2, 5e-3, 2.5e-3], wh.FockCutoff(48))
    converges = abs(rep.ratios[-1] - 1) <= 1e-3
    factors = rep.halving_factors
    ok = converges and all(abs(f - 2.0) <= 0.4 for f in factors)
    detail = (f"ratio {rep.ratios[-1]:.9f}; halving factors "
              + ", ".join(f"{f:.3f}" for f in factors)
              + f" (observed order {rep.observed_orders()[-1]:.2f})")
    assert criterion(ok, detail)


def test_dynamics_equivalence(criterion):
    c = wh.FockCutoff(48)
    h = wh.QuadraticHamiltonian.number(1.0)
    fids = [wh.evolve_state_fidelity(wh.WHPoint(1.0), h, t, c) for t in (0.5, 1.0, 2 * math.pi)]
    big = wh.heisenberg_residual(wh.WHPoint(1.0), 1.0, 0.3, 1e-3, c)
    small = wh.heisenberg_residual(wh.WHPoint(1.0), 1.0, 0.3, 5e-4, c)
    order = math.log2(big / small)
    ok = min(fids) >= 1 - 1e-10 and abs(order - 2) <= 0.25
    assert criterion(ok, f"min fidelity 1-{1 - min(fids):.1e}; Heisenberg residual order {order:.3f}")


def test_twisted_vacuum(criterion):
    c = wh.FockCutoff(64)
    norm = bell.build_bell_wh(0.5, c).norm()
    r1, r2 = bell.twisted_vacuum_residuals(0.5, c)
    comm = bell.annihilator_commutator_deviation(0.5, 64)
    ok = abs(norm - 1) <= 1e-10 and max(r1, r2) <= 1e-12 and comm <= 1e-12
    assert criterion(ok, f"norm-1 {norm - 1:.1e}, residuals {r1:.1e}/{r2:.1e}, commutator {comm:.1e}")


def test_r_to_one_limit(criterion):
    r = 1 - 1e-6
    grid = [complex(x, y) for x in np.linspace(-2, 2, 17) for y in np.linspace(-2, 2, 17)
            if abs(complex(x, y)) <= 2]
    worst = 0.0
    for lam in grid:
        for mu in grid:
            if abs(lam - mu) <= 2:
                worst = max(worst, abs(bell.scaled_pair_probability(r, lam, mu) - math.exp(-abs(lam - mu) ** 2)))
    ok = worst <= 1e-5
    assert criterion(ok, f"max error {worst:.1e} at r = 1 - 1e-6 over |lam|,|mu| <= 2")


def test_hidden_variable_reproduction(criterion):
    t0 = time.perf_counter()
    zs = []
    for manifold, grid in (("wh", (0.0, 0.5, 1.0, 1.5, 2.0)),
                           ("su2", (0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4, math.pi))):
        law = hv.HiddenVariableLaw(manifold)
        for k, coord in enumerate(grid):
            g1, g2 = (su2.NORTH_POLE, su2.SpherePoint(coord, 0)) if manifold == "su2" else (wh.WHPoint(0), wh.WHPoint(coord))
            zs.append(hv.run_epr_experiment(law, g1, g2, 1_000_000, seed=7 + k).z_score)
    ks = [hv.cdf_diagnostics(hv.HiddenVariableLaw(m), 1_000_000, seed=1) for m in ("wh", "su2")]
    elapsed = time.perf_counter() - t0
    worst_z = max(abs(z) for z in zs)
    ok = worst_z <= 3.89 and all(k.passed for k in ks) and elapsed < 60
    detail = (f"max |z| {worst_z:.2f} over 10 settings; KS "
              + "/".join(f"{k.ks_statistic:.1e}" for k in ks) + f" vs band {ks[0].band:.2e}; {elapsed:.1f} s")
    assert criterion(ok, detail)


def test_covariance_replay(criterion, rng):
    reports = [
        hv.covariance_check(hv.HiddenVariableLaw("wh"), wh.WHPoint(0.3 + 0.1j), wh.WHPoint(-0.5 + 0.9j),
                            [hv.StabilityTransform("identity"), hv.StabilityTransform("number_evolution", t=0.7)],
                            1_000_000, seed=3),
        hv.covariance_check(hv.HiddenVariableLaw("su2"), su2.SpherePoint(0.7, 0.2), su2.SpherePoint(2.1, 4.0),
                            [hv.StabilityTransform("identity"),
                             hv.StabilityTransform("su2_rotation", unitary=su2.random_su2(rng))],
                            1_000_000, seed=3),
    ]
    ok = all(r.passed for r in reports)
    shift = max(r.max_relation_shift for r in reports)
    assert criterion(ok, f"identical coincidence streams {[r.identical_streams for r in reports]}, "
                         f"max relation shift {shift:.1e}")


def test_cli_determinism_and_exit_codes(criterion, capsys, tmp_path):
    outs = []
    for _ in range(2):
        code = cli.main(["verify", "--suite", "all", "--manifold", "su2", "--seed", "42"])
        outs.append((code, json.loads(capsys.readouterr().out)))
    same = stable_bytes(outs[0][1]) == stable_bytes(outs[1][1])
    codes = [outs[0][0]]
    codes.append(cli.main(["verify", "--suite", "bell", "--manifold", "wh", "--r", "1.5"]))
    codes.append(cli.main(["verify", "--suite", "identity", "--out", str(tmp_path / "no" / "x.json")]))
    capsys.readouterr()
    ok = same and codes == [0, 2, 2]
    assert criterion(ok, f"stable regions identical: {same}; exit codes {codes}")
