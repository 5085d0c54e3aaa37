import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from src.cocycle import NormalizedCocycle
from src.errors import (
    ClassificationRefused,
    ConjugatorNotFoundError,
    ReducibleRepresentationError,
    TraceMismatchError,
    WordError,
)
from src.experiment import fixed_point
from src.experiment.suites import coboundary_fixture
from src.geometry import PowerLawFit, rotation2
from src.parry import (
    ConjugacyField,
    ParryEvaluation,
    ParryWord,
    align_frames,
    check_trace_window,
    classify_group,
    conjugation_residual,
    dichotomy_report,
    extend_conjugacy,
    fixed_point_matrix,
    grid_points,
    normalized_trace,
    parry_generators,
    parry_loops,
    parry_word_eval,
    periodic_shadow_approximant,
    rotation_angle,
    schur_conjugator,
    trace_match_report,
    word_path,
)
from src.parry.conjugacy import FieldSample
from src.parry.dichotomy import _field_verdict

entries = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False)
matrices2 = st.lists(entries, min_size=4, max_size=4).map(lambda v: np.array(v).reshape(2, 2))

ELLIPTIC = 1.2 * rotation2(0.4)
HYPERBOLIC = np.array([[2.0, 1.0], [1.0, 1.0]])


def evaluation(value, index=1):
    return ParryEvaluation(np.asarray(value, dtype=float), ParryWord.parse([index]), 10, 0.0, "limit_Rn")


def test_word_parsing_and_labels():
    word = ParryWord.parse([1, -2])
    assert word.letters == ((0, 1), (1, -1))
    assert word.label == "g1 g2^-1"
    assert not word.is_positive
    assert word.inverse().to_list() == [2, -1]
    assert word.then(ParryWord.parse([3])).to_list() == [1, -2, 3]


@pytest.mark.parametrize("signed", [[0], []])
def test_invalid_words(signed):
    with pytest.raises(WordError):
        ParryWord.parse(signed)


def test_word_references_missing_generator():
    with pytest.raises(WordError, match="only 1 generators"):
        ParryWord.parse([2]).check(1)


def test_word_evaluation_order():
    g1, g2 = evaluation(ELLIPTIC, 1), evaluation(HYPERBOLIC, 2)
    result = parry_word_eval([g1, g2], ParryWord.parse([1, -2]))
    assert np.allclose(result.value, np.linalg.inv(HYPERBOLIC) @ ELLIPTIC)
    assert result.method == "word_product"


def test_trace_window():
    assert normalized_trace(ELLIPTIC) == pytest.approx(2 * math.cos(0.4))
    assert check_trace_window(ELLIPTIC) == pytest.approx(2 * math.cos(0.4))
    with pytest.raises(ClassificationRefused):
        check_trace_window(np.diag([2.0, 0.5]))
    assert rotation_angle(ELLIPTIC) == pytest.approx(0.4)
    assert rotation_angle(HYPERBOLIC) == 0.0


def test_classify_trivial_group():
    result = classify_group(ELLIPTIC, [evaluation(np.eye(2)), evaluation(np.eye(2), 2)])
    assert result.verdict == "trivial"


def test_classify_elliptic_generator_as_irreducible():
    result = classify_group(ELLIPTIC, [evaluation(rotation2(0.5))])
    assert result.verdict == "irreducible"
    assert any("elliptic_angle" in e for e in result.evidence)


def test_classify_transverse_hyperbolics_as_irreducible():
    other = np.array([[1.0, 1.0], [1.0, 2.0]])
    result = classify_group(ELLIPTIC, [evaluation(HYPERBOLIC), evaluation(other, 2)])
    assert result.verdict == "irreducible"


@settings(max_examples=100, deadline=None)
@given(matrices2)
def test_schur_conjugator_recovers_the_conjugation(c):
    det = np.linalg.det(c)
    assume(abs(det) > 0.2 and np.linalg.cond(c) < 20)
    c_inv = np.linalg.inv(c)
    values_a = [ELLIPTIC, HYPERBOLIC]
    values_b = [c @ a @ c_inv for a in values_a]
    found = schur_conjugator(values_a, values_b)
    assert abs(np.linalg.det(found)) == pytest.approx(1.0)
    assert conjugation_residual(found, values_a, values_b) < 1e-8
    normalized = c / math.sqrt(abs(det))
    assert np.allclose(found, normalized, atol=1e-7) or np.allclose(found, -normalized, atol=1e-7)


def test_schur_conjugator_refuses_reducible_input():
    diag = np.diag([2.0, 0.5])
    with pytest.raises(ReducibleRepresentationError):
        schur_conjugator([diag], [diag])


def test_schur_conjugator_reports_trace_witness():
    with pytest.raises(TraceMismatchError) as info:
        schur_conjugator([rotation2(0.3)], [rotation2(0.5)])
    assert info.value.details["witness"]["word"] == [1]


def test_schur_conjugator_checks_product_traces():
    # 单个迹与行列式相同，乘积的迹不同
    other = np.array([[2.0, 2.0], [0.5, 1.0]])
    with pytest.raises(TraceMismatchError) as info:
        schur_conjugator([ELLIPTIC, HYPERBOLIC], [ELLIPTIC, other])
    assert info.value.witness["word"] == [1, 2]


def test_schur_conjugator_without_common_solution():
    with pytest.raises(ConjugatorNotFoundError):
        schur_conjugator([rotation2(0.3)], [rotation2(0.3001)], trace_tolerance=1e-3)


def test_align_frames_conjugates_fixed_point_matrices():
    k0 = np.array([[1.5, 0.3], [-0.2, 0.8]])
    b_p = np.linalg.inv(k0) @ ELLIPTIC @ k0
    k = align_frames(ELLIPTIC, b_p)
    assert np.allclose(k @ b_p @ np.linalg.inv(k), ELLIPTIC, atol=1e-8)
    assert abs(np.linalg.det(k)) == pytest.approx(1.0)


def test_align_frames_rejects_different_spectra():
    with pytest.raises(TraceMismatchError):
        align_frames(ELLIPTIC, 1.2 * rotation2(0.7))


def test_grid_points():
    grid = grid_points(2)
    assert grid.shape == (8, 3)
    assert set(np.unique(grid)) == {0.25, 0.75}


def test_loops_close_at_the_fixed_point(dissipative_loops, dissipative_fixed_point):
    assert len(dissipative_loops) == 2
    path = word_path(dissipative_loops, ParryWord.parse([1, -2]))
    assert path.is_loop
    assert len(path.legs) == 4


def test_generators_of_the_oracle_pair_share_traces(oracle_pair, dissipative_map, dissipative_loops, dissipative_orbits):
    a, b = oracle_pair
    gen_a = parry_generators(a, dissipative_map, dissipative_loops)
    gen_b = parry_generators(b, dissipative_map, dissipative_loops)
    assert all(g.method == "limit_Rn" and g.n_used > 0 for g in gen_a)
    report = trace_match_report(a, b, dissipative_map, dissipative_orbits, gen_a, gen_b, tolerance=1e-6)
    assert report.matched
    assert report.max_deviation < 1e-6


def test_fixed_point_matrix_is_elliptic(oracle_pair, dissipative_map, dissipative_fixed_point):
    a, _ = oracle_pair
    a_p = a.finalize(fixed_point_matrix(a, dissipative_map, dissipative_fixed_point))
    assert 0.0 < normalized_trace(a_p) < 2.0
    assert abs(np.linalg.det(a_p)) == pytest.approx(1.0)


@pytest.mark.slow
def test_oracle_pair_is_conjugate(oracle_pair, dissipative_map, dissipative_fixed_point, dissipative_loops, dissipative_orbits):
    a, b = oracle_pair
    report = dichotomy_report(
        a, b, dissipative_map, dissipative_fixed_point, dissipative_loops, dissipative_orbits, grid=grid_points(1)
    )
    assert report.verdict == "conjugate"
    assert report.conjugacy_field.passed
    assert report.to_dict()["verdict"] == "conjugate"


def field_with_residual(residual):
    sample = FieldSample([0.5, 0.5, 0.5], np.eye(2).tolist(), np.eye(2).tolist(), 0.0, residual)
    return ConjugacyField(np.zeros(3), np.eye(2), [sample], PowerLawFit(1.0, 0.5, 0), 1e-4, 1e-4)


@pytest.mark.parametrize("residual, verdict", [(1e-9, "conjugate"), (1e-2, "inconclusive")])
def test_failing_field_makes_the_verdict_inconclusive(residual, verdict):
    assert _field_verdict("conjugate", field_with_residual(residual)) == verdict


def test_coboundary_cocycle_is_an_almost_coboundary(shear_map):
    cocycle = NormalizedCocycle(base=coboundary_fixture(shear_map))
    p = fixed_point(shear_map)
    loops = parry_loops(shear_map, p, 2)
    report = dichotomy_report(cocycle, cocycle, shear_map, p, loops, grid=grid_points(1))
    assert report.verdict == "almost_coboundary"
    assert report.conjugacy_field.passed
    assert np.array_equal(report.conjugator, np.eye(2))


def test_periodic_shadow_gap_shrinks_with_the_horizon(oracle_pair, dissipative_map, dissipative_loops):
    a, _ = oracle_pair
    word = ParryWord.parse([1])
    shadows = [periodic_shadow_approximant(a, dissipative_map, dissipative_loops, word, n) for n in (16, 24, 32)]
    assert [s.horizon for s in shadows] == [16, 24, 32]
    assert shadows[-1].gap < shadows[0].gap
    assert all(np.isfinite(s.gap) for s in shadows)


def test_perturbed_anchor_value_is_rejected(oracle_pair, dissipative_map, dissipative_fixed_point):
    a, b = oracle_pair
    c_p = b.oracle(dissipative_fixed_point)
    grid = grid_points(1)
    exact = extend_conjugacy(a, b, dissipative_map, dissipative_fixed_point, c_p, grid)
    assert exact.passed
    perturbed = c_p + 1e-2 * np.diag([1.0, -1.0])
    field_ = extend_conjugacy(a, b, dissipative_map, dissipative_fixed_point, perturbed, grid, path_tolerance=np.inf)
    assert not field_.passed
    assert field_.max_residual > 1e-4
