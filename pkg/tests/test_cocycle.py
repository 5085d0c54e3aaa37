from dataclasses import dataclass

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.cocycle import (
    CoboundaryCocycle,
    CocycleSpec,
    ConstantCocycle,
    MatrixTrigField,
    NormalizedCocycle,
    PullbackCocycle,
    TrigCocycle,
    UnstableDerivativeCocycle,
    cocycle_eval,
    compose,
    fiber_bunching_report,
    leg_holonomy,
    path_equivariance_residual,
    path_holonomies,
    periodic_product,
    quadrilateral_holonomy,
    six_point_check,
    stable_holonomy,
)
from src.dynamics import dissipative
from src.errors import CocycleError
from src.geometry import rotation2
from src.orbits import periodic_data
from src.structure import Leg, UsPath, build_quadrilateral, leaf_pair, six_point_configuration

unit = st.floats(min_value=0.0, max_value=1.0, exclude_max=True, allow_nan=False)
torus_points = st.lists(unit, min_size=3, max_size=3).map(np.array)
steps = st.integers(min_value=1, max_value=5)

TRIG = TrigCocycle(
    matrix_field=MatrixTrigField.from_terms(
        [[1.3, 0.2], [-0.4, 0.8]],
        [((1, 0, 0), [[0.1, 0.0], [0.05, -0.1]], 0.2), ((0, 1, -1), [[0.0, 0.08], [0.02, 0.0]], 1.1)],
    )
)
MODEL = dissipative()


@settings(max_examples=40, deadline=None)
@given(torus_points, steps, steps)
def test_cocycle_law_for_matrix_fields(x, n, m):
    total = cocycle_eval(TRIG, MODEL, x, n + m).value
    first = cocycle_eval(TRIG, MODEL, x, n)
    second = cocycle_eval(TRIG, MODEL, MODEL.iterate_lift(x, n), m)
    assert np.allclose(total, second.value @ first.value, rtol=1e-10, atol=1e-12)


@settings(max_examples=10, deadline=None)
@given(torus_points, steps, steps)
def test_cocycle_law_in_the_unstable_frame(x, n, m):
    du = UnstableDerivativeCocycle(model=MODEL)
    total = cocycle_eval(du, MODEL, x, n + m).value
    first = cocycle_eval(du, MODEL, x, n).value
    second = cocycle_eval(du, MODEL, MODEL.iterate_lift(x, n), m).value
    assert np.allclose(total, second @ first, atol=1e-8 * np.linalg.norm(total))


def test_negative_and_zero_steps():
    x = np.array([0.3, 0.8, 0.45])
    assert np.array_equal(cocycle_eval(TRIG, MODEL, x, 0).value, np.eye(2))
    back = cocycle_eval(TRIG, MODEL, x, -3).value
    start = MODEL.inverse_evaluate(MODEL.inverse_evaluate(MODEL.inverse_evaluate(x)))
    assert np.allclose(back @ cocycle_eval(TRIG, MODEL, start, 3).value, np.eye(2), atol=1e-10)


def test_normalized_products_have_unit_determinant(du_cocycle, dissipative_map):
    normalized = NormalizedCocycle(base=du_cocycle)
    product = cocycle_eval(normalized, dissipative_map, [0.12, 0.34, 0.56], 7)
    assert abs(product.determinant) == pytest.approx(1.0, abs=1e-12)


def test_periodic_product_matches_unstable_periodic_data(du_cocycle, dissipative_map, dissipative_orbits):
    for orbit in dissipative_orbits:
        data = periodic_data(dissipative_map, orbit)
        assert np.allclose(periodic_product(du_cocycle, dissipative_map, orbit), data.unstable_matrix, atol=1e-10)


def test_constant_cocycle_holonomy_is_identity(rotation_cocycle, dissipative_map):
    x = np.array([0.2, 0.6, 0.3])
    pair = leaf_pair(dissipative_map, x, "stable", parameter=[0.04])
    h = stable_holonomy(rotation_cocycle, dissipative_map, x, pair.partner, displacement=pair.displacement)
    assert np.allclose(h.value, np.eye(2), atol=1e-12)


def test_constant_cocycle_rejects_singular_matrix():
    with pytest.raises(CocycleError):
        ConstantCocycle(matrix=np.zeros((2, 2)))


@pytest.mark.parametrize("kind, parameter", [("stable", [0.03]), ("unstable", [0.02, -0.015])])
def test_holonomy_of_the_reversed_leg_is_the_inverse(du_cocycle, dissipative_map, kind, parameter):
    pair = leaf_pair(dissipative_map, [0.41, 0.27, 0.66], kind, parameter=parameter)
    leg = Leg.from_pair(pair)
    forward = leg_holonomy(du_cocycle, dissipative_map, leg)
    backward = leg_holonomy(du_cocycle, dissipative_map, leg.reversed())
    assert forward.n_used > 0
    assert np.allclose(backward.value @ forward.value, np.eye(2), atol=1e-7)


def test_holonomy_is_equivariant(du_cocycle, dissipative_map):
    pair = leaf_pair(dissipative_map, [0.15, 0.72, 0.38], "stable", parameter=[0.02])
    path = UsPath((Leg.from_pair(pair),))
    assert path_equivariance_residual(du_cocycle, dissipative_map, path) < 1e-6


def test_linear_model_has_trivial_quadrilateral_holonomy(linear):
    du = UnstableDerivativeCocycle(model=linear)
    quad = build_quadrilateral(linear, [0.4, 0.3, 0.6], 0.02, (0.03, 0.01))
    assert np.allclose(quadrilateral_holonomy(du, linear, quad), np.eye(2), atol=1e-8)


def test_pch_composes_leg_holonomies_in_path_order(du_cocycle, dissipative_map):
    quad = build_quadrilateral(dissipative_map, [0.4, 0.3, 0.6], 0.02, (0.03, 0.01))
    holonomies = path_holonomies(du_cocycle, dissipative_map, quad.as_path())
    expected = holonomies[3].value @ holonomies[2].value @ holonomies[1].value @ holonomies[0].value
    assert np.allclose(compose(holonomies), expected)
    assert np.allclose(quadrilateral_holonomy(du_cocycle, dissipative_map, quad), expected, atol=1e-8)


def test_unstable_derivative_is_fiber_bunched(du_cocycle, dissipative_map):
    report = fiber_bunching_report(du_cocycle, dissipative_map, horizon=12, samples=4)
    assert report.bunched
    assert report.to_dict()["bunched"] is True


def test_strongly_dominated_constant_cocycle_is_not_bunched(dissipative_map):
    report = fiber_bunching_report(ConstantCocycle(matrix=np.diag([4.0, 0.25])), dissipative_map, horizon=12, samples=4)
    assert not report.bunched


def test_rotation_cocycle_is_bunched(dissipative_map):
    assert fiber_bunching_report(ConstantCocycle(matrix=rotation2(0.9)), dissipative_map, horizon=12, samples=4).bunched


@pytest.mark.slow
def test_six_point_identity(du_cocycle, dissipative_map):
    config = six_point_configuration(dissipative_map, [0.33, 0.51, 0.24])
    assert six_point_check(du_cocycle, dissipative_map, config).residual < 1e-6


@dataclass(frozen=True, eq=False, kw_only=True)
class VanishingCocycle(CocycleSpec):
    kind = "vanishing"

    def raw(self, points):
        return np.zeros(np.asarray(points).shape[:-1] + (2, 2))


def test_singular_backward_product_is_a_cocycle_error(dissipative_map):
    with pytest.raises(CocycleError, match="singular"):
        cocycle_eval(VanishingCocycle(), dissipative_map, [0.1, 0.2, 0.3], -2)


def test_oracle_roles(dissipative_map, conjugacy):
    pullback = PullbackCocycle(model=dissipative_map, conjugacy=conjugacy)
    assert pullback.oracle_role == "conjugacy"
    assert CoboundaryCocycle.oracle_role == "coboundary"
    assert NormalizedCocycle(base=pullback).oracle_role == "conjugacy"
    assert NormalizedCocycle(base=ConstantCocycle()).oracle_role is None
    assert NormalizedCocycle(base=ConstantCocycle()).fiber_dim == 2


def test_cocycles_require_their_data():
    with pytest.raises(TypeError):
        UnstableDerivativeCocycle()
    with pytest.raises(TypeError):
        NormalizedCocycle()


def test_contracted_rotation_is_bunched_over_the_linear_map(linear):
    report = fiber_bunching_report(ConstantCocycle(matrix=0.7 * rotation2(0.9)), linear, horizon=12, samples=4)
    assert report.theta_backward < 1.0
    assert report.bunched


@pytest.mark.parametrize("kind, parameter", [("stable", [0.02]), ("unstable", [0.004, 0.002])])
def test_pushed_legs_are_equivariant(du_cocycle, dissipative_map, kind, parameter):
    leg = Leg.from_pair(leaf_pair(dissipative_map, [0.15, 0.72, 0.38], kind, parameter=parameter))
    h = leg_holonomy(du_cocycle, dissipative_map, leg).value
    pushed = leg
    for n in range(1, 6):
        pushed = pushed.pushed(dissipative_map)
        h_n = leg_holonomy(du_cocycle, dissipative_map, pushed).value
        a_x = cocycle_eval(du_cocycle, dissipative_map, leg.start, n).value
        a_y = cocycle_eval(du_cocycle, dissipative_map, leg.end, n).value
        assert np.allclose(h_n, a_y @ h @ np.linalg.inv(a_x), atol=1e-7), f"n = {n}"
