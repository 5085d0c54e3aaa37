import numpy as np
import pytest

from src.dynamics import conjugate_model, default_automorphism, dissipative
from src.errors import PseudoOrbitError
from src.geometry import hausdorff_distance, torus_distance
from src.orbits import (
    close_pseudo_orbit,
    closing_point,
    find_periodic_orbits,
    matching_data_report,
    minimal_period,
    periodic_data,
    periodic_search,
    periodic_seeds,
    profile_violations,
    pseudo_orbit_epsilon,
    srb_equals_mme_test,
)
from src.parry import homoclinic_segment
from src.structure import hyperbolicity_estimates

from .conftest import LOG_MU, STABLE_EIGENVALUE


@pytest.mark.parametrize("period", [1, 2, 3, 4])
def test_seed_count_matches_fixed_points_of_the_power(period):
    lin = default_automorphism()
    seeds = periodic_seeds(lin, period)
    assert len(seeds) == lin.periodic_count(period)
    images = (seeds @ np.linalg.matrix_power(lin.matrix, period).T) % 1.0
    assert hausdorff_distance(images, seeds) < 1e-12


def test_linear_orbits_up_to_period_three(linear):
    orbits = find_periodic_orbits(linear, 3)
    assert [o.period for o in orbits] == [1, 2]
    assert np.allclose(orbits[0].point, 0.0)
    for o in orbits:
        assert o.residual < 1e-12
        assert minimal_period(linear, o.point, o.period) == o.period


def test_dissipative_orbits_survive_the_perturbation(dissipative_orbits, dissipative_map):
    assert sorted(o.period for o in dissipative_orbits) == [1, 2]
    for o in dissipative_orbits:
        back = dissipative_map.iterate_lift(o.point, o.period)
        assert torus_distance(back, o.point) < 1e-11


def test_search_reports_seed_budget(linear):
    result = periodic_search(linear, 2)
    lin = linear.linear
    assert result.seeds == lin.periodic_count(1) + lin.periodic_count(2)
    assert len(result.orbits) == 2


def test_fixed_point_data_of_the_linear_map(linear):
    orbit = find_periodic_orbits(linear, 1)[0]
    data = periodic_data(linear, orbit)
    assert data.trace == pytest.approx(-STABLE_EIGENVALUE, abs=1e-7)
    assert data.log_unstable_det == pytest.approx(LOG_MU, abs=1e-6)
    assert data.stable_multiplier == pytest.approx(STABLE_EIGENVALUE, abs=1e-7)
    assert data.determinant_residual < 1e-10
    row = data.to_row()
    assert row["period"] == 1 and row["trace"] == data.trace


def test_srb_equals_mme_on_linear_and_shear(linear, shear_map):
    assert srb_equals_mme_test(linear, find_periodic_orbits(linear, 3)).passed
    report = srb_equals_mme_test(shear_map, find_periodic_orbits(shear_map, 3))
    assert report.passed
    assert report.common_value == pytest.approx(LOG_MU, abs=1e-6)


def test_srb_differs_from_mme_on_dissipative(dissipative_map, dissipative_orbits):
    report = srb_equals_mme_test(dissipative_map, dissipative_orbits)
    assert not report.passed
    assert report.max_deviation > 1e-6


def test_matching_data_under_conjugacy(dissipative_map, dissipative_orbits, conjugacy):
    g = conjugate_model(dissipative_map, conjugacy)
    report = matching_data_report(dissipative_map, g, "conjugacy", dissipative_orbits, conjugacy=conjugacy)
    assert report.passed
    assert all(row.status == "matched" for row in report.rows)


def test_matching_data_flags_a_different_map(dissipative_orbits, dissipative_map):
    other = dissipative(0.5)
    report = matching_data_report(dissipative_map, other, "continuation", dissipative_orbits)
    assert not report.passed
    assert report.flagged


def test_closing_recovers_the_period_two_orbit(dissipative_map, dissipative_orbits):
    orbit = next(o for o in dissipative_orbits if o.period == 2)
    segments = [(orbit.point + 1e-5, 2), (orbit.point - 1e-5, 2)]
    epsilon = pseudo_orbit_epsilon(dissipative_map, segments)
    result = closing_point(dissipative_map, segments)
    assert result.periodic_point.period == 2
    assert torus_distance(result.periodic_point.point, orbit.point) < 1e-4
    assert max(result.segment_errors) <= 20 * epsilon
    assert len(result.profile_rows()) == 4


def test_close_pseudo_orbit_from_points(dissipative_map, dissipative_orbits):
    orbit = next(o for o in dissipative_orbits if o.period == 2)
    pseudo = np.concatenate([orbit.points, orbit.points]) + 2e-6
    result = close_pseudo_orbit(dissipative_map, pseudo, segments=2)
    assert result.periodic_point.period == 2
    assert hausdorff_distance(result.periodic_point.points, orbit.points) < 1e-9


def test_closing_rejects_coarse_pseudo_orbits(dissipative_map):
    with pytest.raises(PseudoOrbitError):
        closing_point(dissipative_map, [([0.1, 0.2, 0.3], 3), ([0.6, 0.5, 0.9], 3)])
    with pytest.raises(PseudoOrbitError, match="same length"):
        closing_point(dissipative_map, [([0.1, 0.2, 0.3], 2), ([0.1, 0.2, 0.3], 3)])


def test_homoclinic_closing_profile_respects_the_measured_rate(dissipative_map, dissipative_loops):
    alpha = hyperbolicity_estimates(dissipative_map, sample_size=16).alpha
    pseudo = np.concatenate([homoclinic_segment(dissipative_map, loop, 24) for loop in dissipative_loops])
    result = close_pseudo_orbit(dissipative_map, pseudo, len(dissipative_loops))
    assert result.profile.shape == (2, 48)
    assert profile_violations(result.profile, result.epsilon, alpha) == 0


def test_unstructured_profile_is_flagged(rng):
    profile = rng.uniform(0.0, 1e-3, size=(2, 24))
    assert profile_violations(profile, 1e-3, 0.83) > 0
    assert profile_violations(np.zeros((1, 4)), 0.0, 0.83) == 0
