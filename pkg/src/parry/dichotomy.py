"""归一化、迹匹配与二择一判定

A 的同宿完整群平凡时 A 是几乎上边缘；否则群不可约，
迹匹配的 B 通过 Schur 共轭子与全局延拓和 A 共轭。
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg, optimize

from ..cocycle import (
    CocycleSpec,
    ConstantCocycle,
    FiberBunchingReport,
    NormalizedCocycle,
    fiber_bunching_report,
    pch_along_path,
    periodic_product,
)
from ..config import ParrySettings
from ..dynamics import MapLike
from ..errors import CocycleError, TraceMismatchError
from ..geometry import project_to_torus
from ..orbits import PeriodicOrbit, SrbReport
from .classify import GroupClassification, check_trace_window, classify_group
from .conjugacy import ConjugacyField, commutation_system, extend_conjugacy, grid_points, schur_conjugator
from .generators import ParryEvaluation, fixed_point_matrix, parry_generators, parry_word_eval
from .loops import HomoclinicLoop, ParryWord

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class NormalizationResult:
    cocycle: NormalizedCocycle
    determinant_test: SrbReport
    bunching: Optional[FiberBunchingReport] = None
    loop_agreement: Optional[float] = None

    @property
    def hypotheses_met(self) -> bool:
        bunched = self.bunching is None or self.bunching.bunched
        return self.determinant_test.passed and bunched

    def to_dict(self) -> dict:
        return {
            "cocycle": self.cocycle.describe(),
            "determinant_test": self.determinant_test.to_dict(),
            "bunching": None if self.bunching is None else self.bunching.to_dict(),
            "loop_agreement": self.loop_agreement,
            "hypotheses_met": self.hypotheses_met,
        }


def normalize_cocycle(
    cocycle: CocycleSpec,
    model: MapLike,
    orbits: Sequence[PeriodicOrbit],
    tolerance: float = 1e-6,
    loops: Sequence[HomoclinicLoop] = (),
    holonomy_tolerance: float = 1e-9,
    bunching_horizon: Optional[int] = None,
    jobs: int = 1,
) -> NormalizationResult:
    """B(x) = |det A(x)|^{-1/2} A(x)

    行列式检验: log|det A^k_p| / k 在所有周期轨道上应为常数；
    不满足时仍返回归一化余圈，只报告前提不成立。
    """
    if not orbits:
        raise CocycleError("determinant test needs at least one periodic orbit")
    averages = []
    for orbit in orbits:
        det = abs(float(np.linalg.det(periodic_product(cocycle, model, orbit))))
        averages.append(math.log(det) / orbit.period)
    common = float(np.mean(averages))
    deviation = float(max(abs(a - common) for a in averages))
    report = SrbReport(averages, common, deviation, tolerance, deviation <= tolerance)
    if not report.passed:
        logger.warning(f"determinant is not cohomologically constant on periodic data (deviation {deviation:.3e})")

    normalized = NormalizedCocycle(base=cocycle)
    bunching = None
    if bunching_horizon is not None:
        bunching = fiber_bunching_report(normalized, model, horizon=bunching_horizon, jobs=jobs)

    agreement = None
    if loops:
        # 标量在完整极限中相消
        agreement = 0.0
        for loop in loops:
            raw = pch_along_path(cocycle, model, loop.path, holonomy_tolerance)
            norm = pch_along_path(normalized, model, loop.path, holonomy_tolerance)
            agreement = max(agreement, float(np.linalg.norm(normalized.finalize(raw) - norm)))
    return NormalizationResult(normalized, report, bunching, agreement)


@dataclass(frozen=True)
class TraceRow:
    kind: str
    label: str
    trace_a: float
    trace_b: float
    deviation: float


@dataclass(frozen=True, eq=False)
class TraceMatchReport:
    rows: list[TraceRow]
    tolerance: float
    witness: Optional[dict] = None

    @property
    def matched(self) -> bool:
        return self.witness is None

    @property
    def max_deviation(self) -> float:
        return max((r.deviation for r in self.rows), default=0.0)

    def table(self) -> list[tuple]:
        """(word, trace_A, trace_B, deviation)"""
        return [(r.label, r.trace_a, r.trace_b, r.deviation) for r in self.rows]

    def to_dict(self) -> dict:
        return {
            "matched": self.matched,
            "tolerance": self.tolerance,
            "max_deviation": self.max_deviation,
            "witness": self.witness,
            "rows": [r.__dict__ for r in self.rows],
        }


def trace_match_report(
    a: CocycleSpec,
    b: CocycleSpec,
    model: MapLike,
    orbits: Sequence[PeriodicOrbit],
    generators_a: Sequence[ParryEvaluation] = (),
    generators_b: Sequence[ParryEvaluation] = (),
    words: Sequence[ParryWord] = (),
    tolerance: float = 1e-5,
) -> TraceMatchReport:
    rows = []
    for orbit in orbits:
        ta = float(np.trace(periodic_product(a, model, orbit)))
        tb = float(np.trace(periodic_product(b, model, orbit)))
        label = f"orbit k={orbit.period} {np.round(orbit.point, 8).tolist()}"
        rows.append(TraceRow("orbit", label, ta, tb, abs(ta - tb)))
    if generators_a and generators_b:
        for word in words:
            ta = parry_word_eval(generators_a, word).trace
            tb = parry_word_eval(generators_b, word).trace
            rows.append(TraceRow("word", word.label, ta, tb, abs(ta - tb)))

    witness = None
    for row in rows:
        if row.deviation > tolerance:
            witness = dict(row.__dict__)
            break
    if witness is None:
        logger.info(f"traces matched on {len(rows)} orbits and words (max deviation {max((r.deviation for r in rows), default=0.0):.3e})")
    else:
        logger.warning(f"trace mismatch on {witness['label']}: deviation {witness['deviation']:.3e}")
    return TraceMatchReport(rows, tolerance, witness)


def align_frames(a_p: ArrayLike, b_p: ArrayLike, tolerance: float = 1e-8) -> NDArray[np.float64]:
    """K 使 K B_p K^{-1} = A_p；在二维解空间上取 |det K| / ‖K‖_F^2 最大者"""
    a_p = np.asarray(a_p, dtype=float)
    b_p = np.asarray(b_p, dtype=float)
    system = commutation_system([b_p], [a_p])
    basis = linalg.null_space(system, rcond=tolerance)
    dim = basis.shape[1]
    if dim == 0:
        witness = {"label": "fixed point", "trace_a": float(np.trace(a_p)), "trace_b": float(np.trace(b_p))}
        raise TraceMismatchError("fixed-point matrices are not conjugate", witness=witness)
    if dim == 4:
        return np.eye(2)
    k1 = basis[:, 0].reshape(2, 2, order="F")
    k2 = basis[:, 1].reshape(2, 2, order="F") if dim > 1 else np.zeros((2, 2))

    def score(theta: float) -> float:
        k = math.cos(theta) * k1 + math.sin(theta) * k2
        return -abs(float(np.linalg.det(k))) / float(np.sum(k * k))

    thetas = np.linspace(0.0, math.pi, 64, endpoint=False)
    best = thetas[int(np.argmin([score(t) for t in thetas]))]
    step = math.pi / 64
    result = optimize.minimize_scalar(score, bounds=(best - step, best + step), method="bounded")
    k = math.cos(result.x) * k1 + math.sin(result.x) * k2
    det = float(np.linalg.det(k))
    if abs(det) < 1e-12:
        raise TraceMismatchError("no invertible frame alignment at the fixed point", witness={"label": "fixed point"})
    return k / math.sqrt(abs(det))


@dataclass(frozen=True, eq=False)
class DichotomyReport:
    verdict: str
    a_p: NDArray[np.float64]
    b_p: NDArray[np.float64]
    alignment: NDArray[np.float64]
    trace_match: TraceMatchReport
    classification: GroupClassification
    generators_a: list[ParryEvaluation]
    generators_b: list[ParryEvaluation]
    classification_b: Optional[GroupClassification] = None
    conjugator: Optional[NDArray[np.float64]] = None
    conjugacy_field: Optional[ConjugacyField] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "a_p": self.a_p.tolist(),
            "b_p": self.b_p.tolist(),
            "alignment": self.alignment.tolist(),
            "trace_match": self.trace_match.to_dict(),
            "classification": self.classification.to_dict(),
            "classification_b": None if self.classification_b is None else self.classification_b.to_dict(),
            "generators_a": [g.to_dict() for g in self.generators_a],
            "generators_b": [g.to_dict() for g in self.generators_b],
            "conjugator": None if self.conjugator is None else self.conjugator.tolist(),
            "field": None if self.conjugacy_field is None else self.conjugacy_field.to_dict(),
        }


def _field_verdict(verdict: str, field_: ConjugacyField) -> str:
    """延拓出的共轭场未通过容差时只给出 inconclusive"""
    if field_.passed:
        return verdict
    logger.warning(
        f"{verdict} field fails its tolerances: residual {field_.max_residual:.3e} > {field_.residual_tolerance:.1e}"
    )
    return "inconclusive"


def dichotomy_report(
    a: CocycleSpec,
    b: CocycleSpec,
    model: MapLike,
    p: ArrayLike,
    loops: Sequence[HomoclinicLoop],
    orbits: Sequence[PeriodicOrbit] = (),
    words: Sequence[ParryWord] = (),
    grid: Optional[ArrayLike] = None,
    tolerance: float = 1e-9,
    settings: Optional[ParrySettings] = None,
    jobs: int = 1,
) -> DichotomyReport:
    """迹匹配 → 标架对齐 → 分类 → 平凡: 几乎上边缘 / 不可约: Schur + 延拓"""
    settings = settings or ParrySettings()
    p = project_to_torus(np.asarray(p, dtype=float))
    grid = grid_points(3) if grid is None else np.asarray(grid, dtype=float)
    a_p = a.finalize(fixed_point_matrix(a, model, p))
    b_p = b.finalize(fixed_point_matrix(b, model, p))
    check_trace_window(a_p)

    gen_a = parry_generators(a, model, loops, tolerance, crossval_factor=settings.crossval_factor, jobs=jobs)
    gen_b = parry_generators(b, model, loops, tolerance, crossval_factor=settings.crossval_factor, jobs=jobs)
    matched = trace_match_report(a, b, model, orbits, gen_a, gen_b, words, settings.trace_tolerance)
    if not matched.matched:
        raise TraceMismatchError(f"traces differ on {matched.witness['label']}", witness=matched.witness)

    k = align_frames(a_p, b_p)
    k_inv = np.linalg.inv(k)
    aligned = [ParryEvaluation(k @ g.value @ k_inv, g.word, g.n_used, g.cauchy_gap, g.method, g.cross_check) for g in gen_b]

    thresholds = dict(
        trivial_tolerance=settings.trivial_tolerance,
        transversality=settings.transversality,
        common_line_tolerance=settings.common_line_tolerance,
    )
    classification = classify_group(a_p, gen_a, **thresholds)
    classification_b = classify_group(a_p, aligned, **thresholds)
    if classification_b.verdict != classification.verdict:
        logger.warning(f"classification differs between A ({classification.verdict}) and aligned B ({classification_b.verdict})")

    extension = dict(
        grid=grid,
        tolerance=tolerance,
        path_tolerance=settings.path_tolerance,
        residual_tolerance=settings.residual_tolerance,
        jobs=jobs,
    )
    common = dict(
        a_p=a_p,
        b_p=b_p,
        alignment=k,
        trace_match=matched,
        classification=classification,
        generators_a=gen_a,
        generators_b=gen_b,
        classification_b=classification_b,
    )
    if classification.verdict == "trivial":
        # C(f x) A_p = A(x) C(x)，C_p = Id
        field_ = extend_conjugacy(ConstantCocycle(matrix=a_p), a, model, p, np.eye(2), **extension)
        verdict = _field_verdict("almost_coboundary", field_)
        logger.info(f"dichotomy: {verdict}, equation residual {field_.max_residual:.3e}")
        return DichotomyReport(verdict, conjugator=np.eye(2), conjugacy_field=field_, **common)

    if classification.verdict != "irreducible":
        logger.warning(f"dichotomy stops at classification verdict {classification.verdict}")
        return DichotomyReport(classification.verdict, **common)

    c_aligned = schur_conjugator(
        [a_p] + [g.value for g in gen_a],
        [k @ b_p @ k_inv] + [g.value for g in aligned],
        settings.trace_tolerance,
    )
    c_p = k_inv @ c_aligned
    field_ = extend_conjugacy(a, b, model, p, c_p, **extension)
    verdict = _field_verdict("conjugate", field_)
    logger.info(f"dichotomy: {verdict}, path disagreement {field_.max_disagreement:.3e}, residual {field_.max_residual:.3e}")
    return DichotomyReport(verdict, conjugator=c_p, conjugacy_field=field_, **common)
