import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsurvey import su2
from qsurvey import weyl_heisenberg as wh
from qsurvey.errors import DimensionError, ParameterError
from qsurvey.hilbert import Operator, StateVector, random_state
from qsurvey.metric import (
    CoherenceRelation,
    closed_form_agreement,
    distance,
    local_diameter_check,
    point_distance,
    relation_diameter,
    stability_invariance_check,
    verify_metric_axioms,
    wh_diameter,
)


def naive_distance(u, v):
    a = u / np.linalg.norm(u)
    b = v / np.linalg.norm(v)
    return math.sqrt(max(0.0, 1 - abs(np.vdot(a, b)) ** 2))


def test_distance_examples():
    u = StateVector([1, 1j, 0])
    assert distance(u, u) == 0.0
    assert distance(StateVector([1, 0]), StateVector([0, 1])) == 1.0
    c = wh.FockCutoff(64)
    d = distance(wh.coherent_vector(wh.WHPoint(0.2), c), wh.coherent_vector(wh.WHPoint(1.2), c))
    assert d == pytest.approx(math.sqrt(1 - math.exp(-1)), abs=1e-10)
    assert d == pytest.approx(0.7950600976, abs=1e-10)


def test_distance_dimension_mismatch():
    with pytest.raises(DimensionError):
        distance(StateVector([1, 0]), StateVector([1, 0, 0]))


def test_distance_matches_naive_formula(rng):
    for _ in range(100):
        u, v = random_state(6, rng), random_state(6, rng)
        assert distance(u, v) == pytest.approx(naive_distance(u.amplitudes, v.amplitudes), abs=1e-12)


def test_distance_resolves_nearby_states():
    # naive 1 - |<u|v>|^2 loses everything below ~1e-8
    eps = 1e-11
    u = StateVector([1, 0])
    v = StateVector([math.cos(eps), math.sin(eps)])
    assert distance(u, v) == pytest.approx(eps, rel=1e-6)


def test_distance_exactly_symmetric(rng):
    for _ in range(500):
        u, v = random_state(5, rng), random_state(5, rng)
        assert distance(u, v) == distance(v, u)


def test_relation_diameter_examples():
    assert relation_diameter(CoherenceRelation.su2(0.0)) == 0.0
    assert relation_diameter(CoherenceRelation.wh(0)) == 0.0
    assert relation_diameter(CoherenceRelation.su2(math.pi)) == 1.0
    z = math.sqrt(math.log(2))
    assert relation_diameter(CoherenceRelation.wh(z)) == pytest.approx(0.7071067812, abs=1e-10)
    c = wh.FockCutoff(64)
    oracle = distance(wh.coherent_vector(wh.WHPoint(0), c), wh.coherent_vector(wh.WHPoint(z), c))
    assert relation_diameter(CoherenceRelation.wh(z)) == pytest.approx(oracle, abs=1e-10)
    antipodal = distance(su2.coherent_point(su2.NORTH_POLE), su2.coherent_point(su2.SpherePoint(math.pi, 0)))
    assert antipodal == pytest.approx(1.0, abs=1e-15)


def test_relation_between_mixed_points():
    with pytest.raises(DimensionError):
        CoherenceRelation.between(su2.NORTH_POLE, wh.WHPoint(0))
    with pytest.raises(DimensionError):
        CoherenceRelation.between(wh.WHPoint([0, 0]), wh.WHPoint(0))


def test_wh_diameter_small_argument():
    assert wh_diameter(1e-30) == pytest.approx(1e-15, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi), st.floats(0, math.pi), st.floats(0, 2 * math.pi))
def test_su2_closed_form_matches_states(t1, p1, t2, p2):
    a, b = su2.SpherePoint(t1 % math.pi, p1), su2.SpherePoint(t2, p2)
    assert closed_form_agreement(a, b) <= 1e-10


def test_wh_closed_form_matches_states(rng):
    c = wh.FockCutoff(64)
    for _ in range(50):
        lam, mu = rng.uniform(-1.4, 1.4, 2) @ [1, 1j], rng.uniform(-1.4, 1.4, 2) @ [1, 1j]
        assert closed_form_agreement(wh.WHPoint(lam), wh.WHPoint(mu), c) <= 1e-10


@pytest.mark.parametrize("manifold", ["su2", "wh"])
def test_metric_axioms(manifold):
    rep = verify_metric_axioms(manifold, 10_000, seed=3)
    assert rep.violations == 0
    assert rep.min_triangle_margin >= -1e-12


def test_metric_axioms_deterministic():
    a = verify_metric_axioms("wh", 500, seed=9).to_dict()
    assert a == verify_metric_axioms("wh", 500, seed=9).to_dict()


def test_local_diameter_unit_amplitude():
    rep = local_diameter_check(wh.WHPoint(1.0), wh.QuadraticHamiltonian.number(1.0), [1e-3], wh.FockCutoff(48))
    assert rep.dispersion == pytest.approx(1.0, abs=1e-8)
    assert rep.diameters[0] / 1e-3 == pytest.approx(1.0, abs=1e-3)


def test_local_diameter_amplitude_two():
    rep = local_diameter_check(wh.WHPoint(2.0), wh.QuadraticHamiltonian.number(1.0), [1e-3], wh.FockCutoff(64))
    assert rep.diameters[0] / 1e-3 == pytest.approx(2.0, abs=4e-3)


def test_local_diameter_vacuum_does_not_move():
    rep = local_diameter_check(wh.WHPoint(0.0), wh.QuadraticHamiltonian.number(1.0), [1e-2, 5e-3])
    assert rep.diameters == [0.0, 0.0]
    assert math.isnan(rep.ratios[0])


def test_local_diameter_su2_orbit():
    # precession about z of the equatorial state: dispersion 1/2 for H = sigma_z / 2
    h = Operator(0.5 * su2.pauli()[2], kind="hermitian")
    rep = local_diameter_check(su2.SpherePoint(math.pi / 2, 0), h, [1e-2, 5e-3])
    assert rep.dispersion == pytest.approx(0.5, abs=1e-14)
    assert rep.ratios[-1] == pytest.approx(1.0, abs=1e-5)


def test_local_diameter_error_is_even_in_dt():
    """Deviation of the ratio from 1 scales as dt^2 for sin-shaped orbits."""
    rep = local_diameter_check(wh.WHPoint(1.0), wh.QuadraticHamiltonian.number(1.0),
                               [4e-2, 2e-2, 1e-2], wh.FockCutoff(48))
    for f in rep.halving_factors:
        assert f == pytest.approx(4.0, rel=0.05)


def test_local_diameter_rejects_bad_steps():
    h = wh.QuadraticHamiltonian.number(1.0)
    with pytest.raises(ParameterError):
        local_diameter_check(wh.WHPoint(1.0), h, [1e-3, 1e-2])
    with pytest.raises(ParameterError):
        local_diameter_check(wh.WHPoint(1.0), h, [0.0])


@pytest.mark.parametrize("manifold", ["su2", "wh"])
def test_stability_invariance(manifold):
    rep = stability_invariance_check(manifold, 30, seed=5, cutoff=wh.FockCutoff(64))
    assert rep.max_deviation <= 1e-10


def test_number_evolution_preserves_distance_explicitly():
    c = wh.FockCutoff(64)
    a, b = wh.coherent_vector(wh.WHPoint(0.3 - 0.4j), c), wh.coherent_vector(wh.WHPoint(-1 + 0.2j), c)
    v = wh.number_evolution(1.7, 0.9, c.n_max)
    before = distance(a, b)
    after = distance(StateVector(v @ a.amplitudes), StateVector(v @ b.amplitudes))
    assert abs(before - after) <= 1e-10
    moved = point_distance(wh.evolve_point(wh.WHPoint(0.3 - 0.4j), wh.QuadraticHamiltonian.number(1.7), 0.9),
                           wh.evolve_point(wh.WHPoint(-1 + 0.2j), wh.QuadraticHamiltonian.number(1.7), 0.9))
    assert moved == pytest.approx(before, abs=1e-10)
