"""各实验类型的计算阶段

每个阶段返回可 JSON 化的 payload:
{"tables": {文件名: {"header": [...], "rows": [...]}}, "documents": {文件名: {...}}, "summary": {...}}
"""

import logging
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from ..cocycle import (
    CocycleSpec,
    NormalizedCocycle,
    holonomy_hoelder_fit,
    leg_holonomy,
    path_equivariance_residual,
    pch_along_path,
    quadrilateral_map,
    six_point_check,
)
from ..dynamics import AnosovMapModel, ConjugacyMapSpec
from ..errors import ToleranceViolation
from ..orbits import close_pseudo_orbit, find_periodic_orbits, periodic_data, periodic_search, srb_equals_mme_test
from ..parallel import parallel_map
from ..parry import (
    ParryWord,
    align_frames,
    dichotomy_report,
    extend_conjugacy,
    fixed_point_matrix,
    grid_points,
    homoclinic_segment,
    normalize_cocycle,
    parry_generators,
    parry_loops,
    parry_word_eval,
    periodic_shadow_approximant,
    schur_conjugator,
    trace_match_report,
)
from ..structure import (
    Leg,
    compute_splitting,
    hyperbolicity_estimates,
    invariance_defect,
    leaf_pair,
    six_point_configuration,
    sobol_sample,
    splitting_hoelder_fit,
)
from .builders import build_cocycle, build_conjugacy, build_model, fixed_point
from .models import ExperimentConfig

logger = logging.getLogger(__name__)

TRACE_HEADER = ["word", "trace_A", "trace_B", "deviation"]


class RunContext:
    """一次 run 共享的惰性对象"""

    def __init__(self, config: ExperimentConfig, jobs: int = 1):
        self.config = config
        self.jobs = jobs
        self.model: AnosovMapModel = build_model(config.map)
        self.conjugacy: Optional[ConjugacyMapSpec] = build_conjugacy(config.conjugacy)

    @property
    def seed(self) -> int:
        return self.config.experiment.seed

    @property
    def tolerance(self) -> float:
        return self.config.holonomy.tolerance

    @cached_property
    def cocycle_a(self) -> CocycleSpec:
        return build_cocycle(self.config.experiment.cocycle, self.model, self.conjugacy, self.config.numerics.frame_rotation)

    @cached_property
    def cocycle_b(self) -> CocycleSpec:
        return build_cocycle(self.config.experiment.cocycle_b, self.model, self.conjugacy, self.config.numerics.frame_rotation)

    @cached_property
    def p(self) -> np.ndarray:
        return fixed_point(self.model)

    @cached_property
    def loops(self):
        parry = self.config.parry
        return parry_loops(self.model, self.p, parry.generator_budget, parry.lattice_radius, parry.min_distance)

    @cached_property
    def orbits(self):
        o = self.config.orbits
        return find_periodic_orbits(self.model, self.config.experiment.max_period, o.newton_tolerance, o.hausdorff_tolerance, self.jobs)

    @cached_property
    def words(self) -> list[ParryWord]:
        return [ParryWord.parse(w) for w in self.config.experiment.words]

    @cached_property
    def points(self) -> np.ndarray:
        return sobol_sample(self.config.experiment.samples, self.seed)

    def generators(self, cocycle: CocycleSpec):
        return parry_generators(
            cocycle, self.model, self.loops, self.tolerance, self.config.holonomy.max_steps, self.config.parry.crossval_factor, self.jobs
        )


def _violation(error: ToleranceViolation) -> dict:
    return {"type": type(error).__name__, "message": str(error), "details": error.details}


def splitting_stage(ctx: RunContext) -> dict:
    n = ctx.config.numerics
    rows = []
    for x in ctx.points:
        s = compute_splitting(ctx.model, x, n.splitting_budget, n.splitting_tolerance, n.frame_rotation)
        defect = invariance_defect(ctx.model, x, n.splitting_budget, n.splitting_tolerance)
        rows.append([*s.point, s.convergence_residual, defect, s.depth])
    pairs = list(zip(ctx.points[:-1], ctx.points[1:]))
    fit = splitting_hoelder_fit(ctx.model, pairs, n.splitting_budget)
    estimates = hyperbolicity_estimates(ctx.model, n.sample_size, ctx.seed, n.warmup, ctx.jobs)
    return {
        "tables": {"splitting.csv": {"header": ["x", "y", "z", "residual", "invariance_defect", "depth"], "rows": rows}},
        "documents": {"hyperbolicity.json": {"estimates": estimates.to_dict(), "hoelder_fit": fit.to_dict()}},
        "summary": {"alpha": estimates.alpha, "max_invariance_defect": max(r[4] for r in rows)},
    }


def orbits_stage(ctx: RunContext) -> dict:
    o = ctx.config.orbits
    search = periodic_search(ctx.model, ctx.config.experiment.max_period, o.newton_tolerance, o.hausdorff_tolerance, ctx.jobs)
    data = [periodic_data(ctx.model, orbit) for orbit in search.orbits]
    rows = [list(d.to_row().values()) for d in data]
    lattice = ctx.model.linear.integer_matrix
    counts = {}
    for k in range(1, ctx.config.experiment.max_period + 1):
        expected = abs(round(float(np.linalg.det(np.linalg.matrix_power(lattice, k) - np.eye(3)))))
        found = sum(orb.period for orb in search.orbits if k % orb.period == 0)
        counts[str(k)] = {"points": found, "expected": expected}
    srb = srb_equals_mme_test(ctx.model, data, o.srb_tolerance)
    return {
        "tables": {"orbits.csv": {"header": ["period", "x", "y", "z", "trace", "log_det", "residual"], "rows": rows}},
        "documents": {
            "orbits.json": {"counts": counts, "seeds": search.seeds, "skipped": search.skipped, "srb_equals_mme": srb.to_dict()}
        },
        "summary": {"orbits": len(rows), "counts_match": all(c["points"] == c["expected"] for c in counts.values())},
    }


def closing_stage(ctx: RunContext) -> dict:
    e = ctx.config.experiment
    chosen = [ctx.loops[j % len(ctx.loops)] for j in range(e.segments)]
    pseudo = np.concatenate([homoclinic_segment(ctx.model, loop, e.horizon) for loop in chosen])
    result = close_pseudo_orbit(ctx.model, pseudo, e.segments, ctx.config.orbits.closing_epsilon)
    estimates = hyperbolicity_estimates(ctx.model, ctx.config.numerics.sample_size, ctx.seed, jobs=ctx.jobs)
    rows = [[r["segment"], r["k"], r["distance"]] for r in result.profile_rows()]
    document = dict(result.to_dict(), measured_alpha=estimates.alpha, horizon=e.horizon, segments=e.segments)
    return {
        "tables": {"closing_profile.csv": {"header": ["segment", "k", "distance"], "rows": rows}},
        "documents": {"closing.json": document},
        "summary": {"fitted_alpha": result.fitted_alpha, "measured_alpha": estimates.alpha, "epsilon": result.epsilon},
    }


def sample_legs(ctx: RunContext, scale: float = 0.03) -> list[Leg]:
    """每个样本点一条 u-腿与一条 s-腿，参数由 seed 决定"""
    rng = np.random.default_rng(ctx.seed)
    legs = []
    for x in ctx.points:
        u = rng.uniform(-scale, scale, size=2)
        s = rng.uniform(-scale, scale, size=1)
        legs.append(Leg.from_pair(leaf_pair(ctx.model, x, "unstable", parameter=u)))
        legs.append(Leg.from_pair(leaf_pair(ctx.model, x, "stable", parameter=s)))
    return legs


def holonomy_stage(ctx: RunContext) -> dict:
    cocycle = ctx.cocycle_a
    legs = sample_legs(ctx)
    h = ctx.config.holonomy
    records = parallel_map(lambda leg: leg_holonomy(cocycle, ctx.model, leg, h.tolerance, h.max_steps), legs, jobs=ctx.jobs, desc="holonomies")
    rows = [
        [leg.kind, *leg.start, leg.length, r.n_used, r.cauchy_gap, float(np.linalg.norm(r.value - np.eye(2)))]
        for leg, r in zip(legs, records)
    ]
    fit = holonomy_hoelder_fit(cocycle, ctx.model, legs, h.tolerance)
    return {
        "tables": {
            "holonomy.csv": {
                "header": ["kind", "x", "y", "z", "length", "n_used", "cauchy_gap", "distance_to_identity"],
                "rows": rows,
            }
        },
        "documents": {"holonomy.json": {"cocycle": cocycle.describe(), "hoelder_fit": fit.to_dict(), "records": [r.to_dict() for r in records]}},
        "summary": {"exponent": fit.exponent, "eta": cocycle.eta, "max_cauchy_gap": max(r.cauchy_gap for r in records)},
    }


def pch_stage(ctx: RunContext) -> dict:
    cocycle = ctx.cocycle_a
    rows, loops = [], []
    for i, loop in enumerate(ctx.loops):
        value = pch_along_path(cocycle, ctx.model, loop.path, ctx.tolerance)
        equivariance = path_equivariance_residual(cocycle, ctx.model, loop.path, ctx.tolerance)
        rows.append([f"g{i + 1}", *loop.point, float(np.trace(value)), float(np.linalg.det(value)), float(np.linalg.norm(value - np.eye(2))), equivariance])
        loops.append(dict(loop.to_dict(), pch=value.tolist()))
    header = ["loop", "x", "y", "z", "trace", "det", "distance_to_identity", "equivariance_residual"]
    return {
        "tables": {"pch.csv": {"header": header, "rows": rows}},
        "documents": {"pch.json": {"base": ctx.p.tolist(), "loops": loops}},
        "summary": {"loops": len(rows), "traces": [r[4] for r in rows]},
    }


def quadrilateral_stage(ctx: RunContext) -> dict:
    cocycle = ctx.cocycle_a
    rows = []
    for x in ctx.points:
        check = six_point_check(cocycle, ctx.model, six_point_configuration(ctx.model, x), ctx.tolerance)
        phi = quadrilateral_map(cocycle, ctx.model, x, 0.02, (0.03, 0.01), tolerance=ctx.tolerance)
        rows.append([*x, check.residual, float(np.trace(phi)), float(np.linalg.norm(phi - np.eye(2)))])
    return {
        "tables": {"quadrilateral.csv": {"header": ["x", "y", "z", "six_point_residual", "trace", "distance_to_identity"], "rows": rows}},
        "documents": {},
        "summary": {"max_six_point_residual": max(r[3] for r in rows)},
    }


def parry_stage(ctx: RunContext) -> dict:
    cocycle = ctx.cocycle_a
    generators = ctx.generators(cocycle)
    evaluations = [parry_word_eval(generators, w) for w in ctx.words]
    word_rows = [[e.word.label, e.trace, e.n_used, e.cauchy_gap, e.method] for e in generators + evaluations]
    shadow_rows = []
    for word in ctx.words:
        if not word.is_positive:
            continue
        for n in ctx.config.parry.horizons:
            s = periodic_shadow_approximant(cocycle, ctx.model, ctx.loops, word, n, ctx.config.orbits.closing_epsilon)
            shadow_rows.append([word.label, n, s.period, s.epsilon, s.gap, s.trace_gap, s.cyclic_trace, s.periodic_trace])
    return {
        "tables": {
            "words.csv": {"header": ["word", "trace", "n_used", "cauchy_gap", "method"], "rows": word_rows},
            "shadows.csv": {
                "header": ["word", "horizon", "period", "epsilon", "gap", "trace_gap", "cyclic_trace", "periodic_trace"],
                "rows": shadow_rows,
            },
        },
        "documents": {"generators.json": {"base": ctx.p.tolist(), "generators": [g.to_dict() for g in generators], "words": [e.to_dict() for e in evaluations]}},
        "summary": {"generators": len(generators), "max_trace_gap": max((r[5] for r in shadow_rows), default=0.0)},
    }


def trace_match_stage(ctx: RunContext) -> dict:
    a, b = ctx.cocycle_a, ctx.cocycle_b
    report = trace_match_report(a, b, ctx.model, ctx.orbits, ctx.generators(a), ctx.generators(b), ctx.words, ctx.config.parry.trace_tolerance)
    payload = {
        "tables": {"traces.csv": {"header": TRACE_HEADER, "rows": report.table()}},
        "documents": {"trace_match.json": report.to_dict()},
        "summary": {"matched": report.matched, "max_deviation": report.max_deviation, "tolerance": report.tolerance},
    }
    if not report.matched:
        payload["violation"] = {"type": "TraceMismatchError", "message": f"traces differ on {report.witness['label']}", "details": {"witness": report.witness}}
    return payload


def _base(cocycle: CocycleSpec) -> CocycleSpec:
    return cocycle.base if isinstance(cocycle, NormalizedCocycle) else cocycle


def dichotomy_stage(ctx: RunContext) -> dict:
    a, b = ctx.cocycle_a, ctx.cocycle_b
    srb_tol = ctx.config.orbits.srb_tolerance
    norm_a = normalize_cocycle(_base(a), ctx.model, ctx.orbits, srb_tol)
    norm_b = normalize_cocycle(_base(b), ctx.model, ctx.orbits, srb_tol)
    grid = grid_points(ctx.config.experiment.grid_size)
    try:
        report = dichotomy_report(a, b, ctx.model, ctx.p, ctx.loops, ctx.orbits, ctx.words, grid, ctx.tolerance, ctx.config.parry, ctx.jobs)
    except ToleranceViolation as e:
        return {
            "tables": {},
            "documents": {"dichotomy.json": {"verdict": "refused", "error": _violation(e)}},
            "summary": {"verdict": "refused"},
            "violation": _violation(e),
        }
    document = dict(report.to_dict(), normalization_a=norm_a.to_dict(), normalization_b=norm_b.to_dict())
    summary = {"verdict": report.verdict}
    if report.conjugacy_field is not None:
        summary.update(max_residual=report.conjugacy_field.max_residual, max_disagreement=report.conjugacy_field.max_disagreement)
    out = {
        "tables": {"traces.csv": {"header": TRACE_HEADER, "rows": report.trace_match.table()}},
        "documents": {"dichotomy.json": document},
        "summary": summary,
    }
    if report.verdict == "inconclusive":
        field_ = report.conjugacy_field
        out["violation"] = _violation(
            ToleranceViolation(
                f"dichotomy field fails: residual {field_.max_residual:.3e} > {field_.residual_tolerance:.1e}",
                max_residual=field_.max_residual,
                max_disagreement=field_.max_disagreement,
            )
        )
    return out


def conjugacy_stage(ctx: RunContext) -> dict:
    a, b = ctx.cocycle_a, ctx.cocycle_b
    a_p = a.finalize(fixed_point_matrix(a, ctx.model, ctx.p))
    b_p = b.finalize(fixed_point_matrix(b, ctx.model, ctx.p))
    k = align_frames(a_p, b_p)
    k_inv = np.linalg.inv(k)
    gen_a = [g.value for g in ctx.generators(a)]
    gen_b = [k @ g.value @ k_inv for g in ctx.generators(b)]
    parry = ctx.config.parry
    c_p = k_inv @ schur_conjugator([a_p] + gen_a, [k @ b_p @ k_inv] + gen_b, parry.trace_tolerance)
    try:
        field_ = extend_conjugacy(
            a, b, ctx.model, ctx.p, c_p, grid_points(ctx.config.experiment.grid_size),
            ctx.tolerance, parry.path_tolerance, parry.residual_tolerance, ctx.jobs,
        )
    except ToleranceViolation as e:
        return {"tables": {}, "documents": {"conjugacy.json": {"c_p": c_p.tolist(), "error": _violation(e)}}, "summary": {"passed": False}, "violation": _violation(e)}
    rows = [[*s.point, s.disagreement, s.equation_residual] for s in field_.samples]
    out = {
        "tables": {"conjugacy_field.csv": {"header": ["x", "y", "z", "path_disagreement", "equation_residual"], "rows": rows}},
        "documents": {"conjugacy.json": field_.to_dict()},
        "summary": {"passed": field_.passed, "max_residual": field_.max_residual, "max_disagreement": field_.max_disagreement, "oracle_deviation": field_.oracle_deviation},
    }
    if not field_.passed:
        out["violation"] = _violation(
            ToleranceViolation(
                f"conjugacy equation residual {field_.max_residual:.3e} > {parry.residual_tolerance:.1e}",
                max_residual=field_.max_residual,
            )
        )
    return out


STAGES: dict[str, Callable[[RunContext], dict]] = {
    "splitting": splitting_stage,
    "orbits": orbits_stage,
    "closing": closing_stage,
    "holonomy": holonomy_stage,
    "pch": pch_stage,
    "quadrilateral": quadrilateral_stage,
    "parry": parry_stage,
    "trace-match": trace_match_stage,
    "dichotomy": dichotomy_stage,
    "conjugacy": conjugacy_stage,
}
