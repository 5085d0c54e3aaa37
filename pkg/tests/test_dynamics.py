import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.dynamics import (
    DEFAULT_MATRIX,
    FIXTURES,
    AnosovMapModel,
    AutomorphismSpec,
    ConjugacyMapSpec,
    PerturbationSpec,
    conjugate_model,
    conjugated,
    default_automorphism,
    dissipative,
    small_conjugacy,
)
from src.errors import ModelError
from src.geometry import project_to_torus, torus_distance

from .conftest import STABLE_EIGENVALUE, UNSTABLE_MODULUS

unit = st.floats(min_value=0.0, max_value=1.0, exclude_max=True, allow_nan=False)
torus_points = st.lists(unit, min_size=3, max_size=3).map(np.array)


def test_default_automorphism_constants():
    lin = default_automorphism()
    assert lin.stable_eigenvalue == pytest.approx(STABLE_EIGENVALUE, abs=1e-7)
    assert lin.unstable_moduli[0] == pytest.approx(UNSTABLE_MODULUS, abs=1e-6)
    assert lin.unstable_moduli[1] == pytest.approx(UNSTABLE_MODULUS, abs=1e-6)
    assert np.allclose(lin.matrix @ lin.stable_direction, lin.stable_eigenvalue * lin.stable_direction)
    assert np.array_equal(lin.integer_matrix @ np.round(lin.inverse).astype(int), np.eye(3, dtype=int))


def test_unstable_block_is_a_scaled_rotation():
    lin = default_automorphism()
    block = lin.unstable_block
    assert np.allclose(np.abs(np.linalg.eigvals(block)), UNSTABLE_MODULUS, atol=1e-6)
    frame = lin.unstable_frame
    assert np.allclose(frame.T @ frame, np.eye(2))


@pytest.mark.parametrize("period, count", [(1, 1), (2, 3), (3, 1), (4, 3)])
def test_periodic_point_counts(period, count):
    assert default_automorphism().periodic_count(period) == count


@pytest.mark.parametrize(
    "rows, message",
    [
        ([[2, 0, 0], [0, 1, 0], [0, 0, 1]], "determinant"),
        ([[1, 0, 0], [0, 1, 0], [0, 0, 1]], "hyperbolic"),
        ([[0.5, 0, 0], [0, 1, 0], [0, 0, 2]], "integers"),
        ([[2, 1, 0], [1, 1, 0], [0, 0, 1]], "hyperbolic"),
    ],
)
def test_automorphism_rejects_bad_matrices(rows, message):
    with pytest.raises(ModelError, match=message):
        AutomorphismSpec.from_rows(rows)


def test_automorphism_requires_two_unstable_directions():
    # 逆矩阵的不稳定维数为 1
    with pytest.raises(ModelError, match="unstable dimension"):
        AutomorphismSpec(np.round(np.linalg.inv(np.array(DEFAULT_MATRIX, dtype=float))))


def test_perturbation_c1_bound_enforced():
    with pytest.raises(ModelError, match="amplitude_bound"):
        PerturbationSpec.from_terms([((1, 0, 0), (0.1, 0.0, 0.0), 0.0)], amplitude_bound=0.25)


def test_model_invertibility_certificate():
    big = PerturbationSpec.from_terms([((1, 1, 1), (0.05, 0.05, 0.05), 0.0)], amplitude_bound=1.0)
    with pytest.raises(ModelError, match="invertibility"):
        AnosovMapModel(big, automorphism=default_automorphism())


def test_perturbation_is_periodic():
    p = dissipative().perturbation
    x = np.array([0.12, 0.4, 0.77])
    assert np.allclose(p.displacement(x), p.displacement(x + np.array([1.0, -2.0, 3.0])), atol=1e-14)


def test_difference_matches_direct_evaluation_for_large_steps():
    model = dissipative()
    x = np.array([0.3, 0.1, 0.6])
    delta = np.array([0.05, -0.02, 0.01])
    direct = model.evaluate_lift(x + delta) - model.evaluate_lift(x)
    assert np.allclose(model.difference(x, delta), direct, atol=1e-14)


def test_difference_keeps_relative_precision_for_tiny_steps():
    model = dissipative()
    x = np.array([0.3, 0.1, 0.6])
    delta = np.array([1e-13, 0.0, 0.0])
    expected = model.differential(x) @ delta
    assert np.allclose(model.difference(x, delta), expected, rtol=1e-6, atol=0.0)


@settings(max_examples=50, deadline=None)
@given(torus_points)
def test_inverse_round_trip(x):
    model = dissipative()
    back = model.inverse_evaluate(model.evaluate(x))
    assert torus_distance(back, project_to_torus(x)) < 1e-11


@settings(max_examples=30, deadline=None)
@given(torus_points)
def test_inverse_difference_inverts_difference(x):
    model = dissipative()
    delta = np.array([1e-4, -3e-5, 2e-5])
    assert np.allclose(model.inverse_difference(x, model.difference(x, delta)), delta, rtol=1e-10, atol=1e-18)


def test_differential_matches_finite_differences():
    model = dissipative()
    x = np.array([0.21, 0.52, 0.83])
    h = 1e-6
    fd = np.column_stack([(model.evaluate_lift(x + h * e) - model.evaluate_lift(x - h * e)) / (2 * h) for e in np.eye(3)])
    assert np.allclose(model.differential(x), fd, atol=1e-8)


def test_fixtures_share_the_default_linear_part():
    for factory in FIXTURES.values():
        model = factory()
        assert np.array_equal(model.linear.integer_matrix, np.array(DEFAULT_MATRIX))


def test_volume_preserving_fixture_keeps_determinant():
    model = FIXTURES["volume_preserving_shear"]()
    for x in np.random.default_rng(3).random((8, 3)):
        assert abs(np.linalg.det(model.differential(x))) == pytest.approx(1.0, abs=1e-12)


def test_fingerprint_tracks_perturbation():
    assert dissipative().fingerprint == dissipative().fingerprint
    assert dissipative().fingerprint != dissipative(0.5).fingerprint


def test_conjugated_model_intertwines():
    f = dissipative()
    h = small_conjugacy()
    g = conjugate_model(f, h)
    x = np.array([0.41, 0.13, 0.92])
    assert torus_distance(g.evaluate(h.evaluate(x)), h.evaluate(f.evaluate(x))) < 1e-12
    assert torus_distance(g.inverse_evaluate(g.evaluate(x)), x) < 1e-11


def test_conjugated_differential_is_similar():
    f = dissipative()
    g = conjugated(f)
    h = small_conjugacy()
    x = np.array([0.61, 0.33, 0.08])
    y = h.evaluate(x)
    expected = h.differential(f.evaluate_lift(x)) @ f.differential(x) @ np.linalg.inv(h.differential(x))
    assert np.allclose(g.differential(y), expected, atol=1e-10)


def test_conjugacy_certificate():
    big = PerturbationSpec.from_terms([((1, 0, 0), (0.2, 0.0, 0.0), 0.0)], amplitude_bound=2.0)
    with pytest.raises(ModelError, match="conjugacy certificate"):
        ConjugacyMapSpec(big)


def test_map_model_requires_its_automorphism():
    with pytest.raises(TypeError):
        AnosovMapModel(PerturbationSpec.zero())
    model = AnosovMapModel(PerturbationSpec.zero(), automorphism=default_automorphism())
    assert model.with_perturbation(PerturbationSpec.zero()).automorphism is model.automorphism
