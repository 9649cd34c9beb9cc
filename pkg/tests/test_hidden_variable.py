import io
import math

import numpy as np
import pytest

from qsurvey import hidden_variable as hv
from qsurvey import su2
from qsurvey import weyl_heisenberg as wh
from qsurvey.errors import DimensionError, ParameterError
from qsurvey.metric import point_distance

WH = hv.HiddenVariableLaw("wh")
SU2 = hv.HiddenVariableLaw("su2")


def binomial_sigma(p, n):
    return math.sqrt(p * (1 - p) / n)


def test_law_descriptors():
    assert WH.density == "maxwellian"
    assert SU2.density == "uniform_sphere"
    with pytest.raises(ParameterError):
        hv.HiddenVariableLaw("sl2")


def test_wh_tail_probability():
    n = 1_000_000
    rng = hv.block_rng(11, 0)
    lam = rng.normal(scale=math.sqrt(0.5), size=(n, 2))
    # same draw path as the lab: the first block of the stream reproduces these points
    assert np.array_equal(hv._draw_raw(WH, hv.block_rng(11, 0), 10), lam[:10])
    tail = float(np.mean(lam[:, 0] ** 2 + lam[:, 1] ** 2 >= 1.0))
    assert abs(tail - math.exp(-1)) <= 3 * binomial_sigma(math.exp(-1), n)


def test_su2_cap_probability():
    n = 1_000_000
    d = hv.hidden_diameters(SU2, n, seed=12)
    # theta < 2 arcsin(r) is the same event as d < r
    frac = float(np.mean(d < 0.5))
    assert abs(frac - 0.25) <= 3 * binomial_sigma(0.25, n)


def test_sample_hidden_points():
    rng = np.random.default_rng(4)
    p = hv.sample_hidden(WH, rng)
    assert isinstance(p, wh.WHPoint)
    q = hv.sample_hidden(SU2, rng)
    assert isinstance(q, su2.SpherePoint)
    # diameters computed from points agree with the vectorised path
    raw = hv._draw_raw(SU2, np.random.default_rng(5), 3)
    for row, d in zip(raw, hv._raw_to_diameters(SU2, raw)):
        assert point_distance(su2.NORTH_POLE, hv._raw_to_point(SU2, row)) == pytest.approx(d, abs=1e-12)


def test_degenerate_radius():
    d = hv.hidden_diameters(WH, 50_000, seed=1)
    assert np.count_nonzero(d < 0) == 0
    assert hv.diameter_cdf(0.0) == 0.0


def test_equal_settings_always_coincide():
    rep = hv.run_epr_experiment(WH, wh.WHPoint(0.3j), wh.WHPoint(0.3j), 100_000, seed=3)
    assert rep.predicted_rate == 1.0 and rep.observed_rate == 1.0
    assert rep.z_score == 0.0 and rep.passed


def test_wh_unit_separation():
    rep = hv.run_epr_experiment(WH, wh.WHPoint(0), wh.WHPoint(1), 1_000_000, seed=7)
    assert rep.predicted_rate == pytest.approx(math.exp(-1), abs=1e-15)
    assert abs(rep.z_score) <= 3.89


def test_su2_quarter_turn():
    rep = hv.run_epr_experiment(SU2, su2.NORTH_POLE, su2.SpherePoint(math.pi / 2, 0), 1_000_000, seed=7)
    assert rep.predicted_rate == pytest.approx(0.5, abs=1e-15)
    assert abs(rep.z_score) <= 3.89


def test_experiment_preconditions():
    with pytest.raises(ParameterError, match="n_trials below minimum 1000"):
        hv.run_epr_experiment(WH, wh.WHPoint(0), wh.WHPoint(1), 999, seed=0)
    with pytest.raises(DimensionError):
        hv.run_epr_experiment(WH, su2.NORTH_POLE, su2.NORTH_POLE, 1000, seed=0)


def test_z_score_degenerate():
    assert hv.z_score(1.0, 1.0, 10) == 0.0
    assert hv.z_score(0.9, 1.0, 10) == -math.inf


def test_determinism_and_worker_independence(monkeypatch):
    g1, g2 = wh.WHPoint(0), wh.WHPoint(0.8)
    n = 3 * hv.BLOCK_SIZE + 123
    serial = hv.run_epr_experiment(WH, g1, g2, n, seed=21, workers=1).to_dict()
    assert serial == hv.run_epr_experiment(WH, g1, g2, n, seed=21, workers=4).to_dict()
    monkeypatch.setenv("QSURVEY_THREADS", "3")
    assert hv.worker_count() == 3
    assert serial == hv.run_epr_experiment(WH, g1, g2, n, seed=21).to_dict()
    assert serial != hv.run_epr_experiment(WH, g1, g2, n, seed=22).to_dict()


def test_counts_match_record_stream():
    g1, g2 = su2.NORTH_POLE, su2.SpherePoint(1.0, 0.5)
    n = hv.BLOCK_SIZE + 17
    records = list(hv.trial_records(SU2, g1, g2, n, seed=2))
    assert [r.trial_index for r in records[:3]] == [0, 1, 2]
    assert all(r.coincidence == (r.relation_diameter < r.hidden_diameter) for r in records)
    hits = sum(r.coincidence for r in records)
    assert hits == hv.count_coincidences(SU2, point_distance(g1, g2), n, seed=2)


def test_bad_thread_setting(monkeypatch):
    monkeypatch.setenv("QSURVEY_THREADS", "many")
    with pytest.raises(ParameterError):
        hv.worker_count()


def test_trials_csv_format():
    buf = io.StringIO()
    hv.write_trials_csv(hv.trial_records(WH, wh.WHPoint(0), wh.WHPoint(0.5), 1000, seed=0), buf)
    lines = buf.getvalue().split("\n")
    assert lines[0] == "trial_index,hidden_diameter,relation_diameter,coincidence"
    assert lines[-1] == "" and len(lines) == 1002
    idx, h, d, c = lines[1].split(",")
    assert idx == "0" and c == str(int(float(d) < float(h)))
    assert "\r" not in buf.getvalue()


def test_covariance_wh_evolution():
    tr = hv.StabilityTransform("number_evolution", t=0.7)
    rep = hv.covariance_check(WH, wh.WHPoint(0.2), wh.WHPoint(1 - 0.3j), [tr], 200_000, seed=5)
    assert rep.passed and rep.identical_streams == [True]
    assert rep.observed_after == [rep.observed_before]
    assert rep.max_relation_shift <= 1e-15


def test_covariance_su2_rotation_and_identity(rng):
    tr = [hv.StabilityTransform("identity"), hv.StabilityTransform("phase"),
          hv.StabilityTransform("su2_rotation", unitary=su2.random_su2(rng))]
    rep = hv.covariance_check(SU2, su2.SpherePoint(0.4, 0.1), su2.SpherePoint(2.0, 1.3), tr, 200_000, seed=5)
    assert rep.identical_streams == [True, True, True]
    assert rep.max_relation_shift <= 1e-14


def test_covariance_rejects_non_stability():
    with pytest.raises(ParameterError):
        hv.covariance_check(SU2, su2.NORTH_POLE, su2.NORTH_POLE,
                            [hv.StabilityTransform("number_evolution", t=1.0)], 1000, seed=0)
    with pytest.raises(ParameterError):
        hv.StabilityTransform("translation").apply("wh", wh.WHPoint(0))


@pytest.mark.parametrize("law", [WH, SU2], ids=["wh", "su2"])
def test_cdf_diagnostics(law):
    rep = hv.cdf_diagnostics(law, 1_000_000, seed=1)
    assert rep.band == pytest.approx(1.95e-3)
    assert rep.passed


def test_cdf_band_scaling():
    rep = hv.cdf_diagnostics(WH, 10_000, seed=2)
    assert rep.band == pytest.approx(1.95 / 100)
    with pytest.raises(ParameterError):
        hv.cdf_diagnostics(WH, 9_999, seed=2)
