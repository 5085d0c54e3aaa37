import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from src.errors import SingularMatrixError
from src.geometry import (
    condition2,
    det2,
    eigenlines2,
    fit_power_law,
    hausdorff_distance,
    is_scalar2,
    lift_near,
    line_angle,
    operator_norm2,
    operator_norm3,
    principal_angle,
    project_to_torus,
    rotation2,
    singular_values2,
    sl_pm_normalize,
    spectrum2,
    spectrum3,
    torus_delta,
    torus_distance,
    torus_distance_bruteforce,
)

coords = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False, allow_infinity=False)
points = st.lists(coords, min_size=3, max_size=3).map(np.array)
entries = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False, allow_infinity=False)
matrices2 = st.lists(entries, min_size=4, max_size=4).map(lambda v: np.array(v).reshape(2, 2))


@settings(max_examples=200, deadline=None)
@given(points)
def test_project_to_torus_lands_in_unit_cube(v):
    x = project_to_torus(v)
    assert np.all(x >= 0.0) and np.all(x < 1.0)
    assert np.allclose(np.round(v - x), v - x, atol=1e-9)


def test_project_snaps_values_just_below_one():
    assert np.array_equal(project_to_torus([1.0 - 1e-14, 0.5, -1e-15]), [0.0, 0.5, 0.0])


@settings(max_examples=200, deadline=None)
@given(points, points)
def test_fast_distance_matches_bruteforce(x, y):
    assert torus_distance(x, y) == pytest.approx(torus_distance_bruteforce(x, y), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(points, points)
def test_delta_is_shortest_and_antisymmetric(x, y):
    d = torus_delta(x, y)
    assert np.all(np.abs(d) <= 0.5 + 1e-12)
    assert np.allclose(d + torus_delta(y, x), np.round(d + torus_delta(y, x)), atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(points, points)
def test_lift_near_is_within_half_a_unit(x, ref):
    lifted = lift_near(x, ref)
    assert np.all(np.abs(lifted - ref) <= 0.5 + 1e-9)
    assert torus_distance(lifted, x) < 1e-9


def test_hausdorff_distance_of_shifted_sets():
    a = np.array([[0.1, 0.1, 0.1], [0.9, 0.5, 0.2]])
    b = a + np.array([0.0, 0.0, 1e-3])
    assert hausdorff_distance(a, b) == pytest.approx(1e-3)
    assert hausdorff_distance(a, a) == 0.0


def test_default_automorphism_spectrum():
    lam = spectrum3([[0, -1, 1], [1, 0, 0], [0, 1, 0]])
    assert lam.classification == "complex-pair"
    assert lam.moduli[0] == pytest.approx(0.6823278, abs=1e-7)
    assert lam.moduli[1] == pytest.approx(1.2106078, abs=1e-6)
    assert lam.moduli[1] == pytest.approx(lam.moduli[2])
    assert not lam.degenerate


def test_spectrum3_matches_numpy_on_real_spectrum():
    m = np.array([[2.0, 1.0, 0.0], [1.0, 1.0, 1.0], [0.0, 1.0, 3.0]])
    report = spectrum3(m)
    expected = np.sort(np.abs(np.linalg.eigvals(m)))
    assert np.allclose(report.moduli, expected, atol=1e-10)


def test_spectrum2_elliptic_and_degenerate():
    assert spectrum2(rotation2(0.3)).classification == "on-unit-circle"
    assert spectrum2(np.eye(2)).degenerate
    assert spectrum2(np.diag([2.0, 0.5])).moduli == pytest.approx((0.5, 2.0))


@settings(max_examples=200, deadline=None)
@given(matrices2)
def test_sl_pm_normalize_unit_determinant(a):
    assume(abs(det2(a)) > 1e-6)
    n = sl_pm_normalize(a)
    assert abs(det2(n)) == pytest.approx(1.0)
    assert np.sign(det2(n)) == np.sign(det2(a))


def test_sl_pm_normalize_rejects_singular():
    with pytest.raises(SingularMatrixError):
        sl_pm_normalize(np.array([[1.0, 2.0], [2.0, 4.0]]))


@settings(max_examples=200, deadline=None)
@given(matrices2)
def test_singular_values_match_svd(a):
    expected = np.linalg.svd(a, compute_uv=False)
    assert np.allclose(singular_values2(a), expected, atol=1e-7 * max(1.0, expected[0] ** 2))
    assert operator_norm2(a) == pytest.approx(expected[0], abs=1e-7 * max(1.0, expected[0] ** 2))


def test_condition_and_operator_norm3():
    assert condition2(np.diag([4.0, 0.25])) == pytest.approx(16.0)
    m = np.array([[0, -1, 1], [1, 0, 0], [0, 1, 0]], dtype=float)
    assert operator_norm3(m) == pytest.approx(np.linalg.norm(m, 2), rel=1e-8)


def test_eigenlines_by_type():
    assert eigenlines2(rotation2(0.7)) == []
    assert eigenlines2(2.0 * np.eye(2)) == []
    lines = eigenlines2(np.diag([3.0, 1.0 / 3.0]))
    assert len(lines) == 2
    assert line_angle(lines[0], lines[1]) == pytest.approx(math.pi / 2)
    assert len(eigenlines2(np.array([[1.0, 1.0], [0.0, 1.0]]))) == 1


def test_scalar_and_angles():
    assert is_scalar2(3.0 * np.eye(2))
    assert not is_scalar2(rotation2(1e-3))
    e1 = np.array([[1.0], [0.0], [0.0]])
    e2 = np.array([[0.0], [1.0], [0.0]])
    assert principal_angle(e1, e2) == pytest.approx(math.pi / 2)


def test_power_law_fit_recovers_exponent():
    d = np.logspace(-4, -1, 12)
    fit = fit_power_law(d, 3.0 * d**0.7)
    assert fit.exponent == pytest.approx(0.7, abs=1e-9)
    assert fit.constant == pytest.approx(3.0, rel=1e-9)
    assert fit.violations == []


def test_power_law_fit_ignores_zero_samples():
    fit = fit_power_law([1e-3, 1e-2], [0.0, 0.0])
    assert fit.samples == 0 and fit.exponent == 0.0
