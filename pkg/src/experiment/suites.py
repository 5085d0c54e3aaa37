"""verify 的验收套件（桌面规模）"""

import logging
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from ..cocycle import (
    CoboundaryCocycle,
    CocycleSpec,
    ConstantCocycle,
    MatrixTrigField,
    NormalizedCocycle,
    PullbackCocycle,
    UnstableDerivativeCocycle,
    cocycle_eval,
    compose,
    fiber_bunching_report,
    holonomy_hoelder_fit,
    leg_holonomy,
    path_equivariance_residual,
    path_holonomies,
    pch_along_path,
    quadrilateral_map,
    six_point_check,
)
from ..dynamics import FIXTURES, MapLike, dissipative, linear_model, small_conjugacy, stable_shear
from ..errors import PathDependenceError, RigidityError, ToleranceViolation
from ..geometry import project_to_torus, rotation2
from ..orbits import close_pseudo_orbit, find_periodic_orbits, profile_violations, srb_equals_mme_test
from ..parry import (
    ParryWord,
    dichotomy_report,
    extend_conjugacy,
    grid_points,
    homoclinic_segment,
    parry_generators,
    parry_loops,
    periodic_shadow_approximant,
    trace_match_report,
)
from ..structure import Leg, UsPath, build_quadrilateral, hyperbolicity_estimates, leaf_pair, six_point_configuration, sobol_sample
from .builders import fixed_point
from .models import ExperimentConfig

logger = logging.getLogger(__name__)

# 数值稳定区以下的差距不参与单调性判断
GAP_FLOOR = 1e-11

# 各套件的验收样本数；SuiteContext.samples 可整体覆盖
HOLONOMY_POINTS = 50
PCH_LOOPS = 50
QUADRILATERAL_CONFIGURATIONS = 20
DEFAULT_POINTS = 8


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tolerance: float
    relation: str
    passed: bool


def at_most(name: str, value: float, tolerance: float) -> Check:
    return Check(name, float(value), float(tolerance), "<=", bool(value <= tolerance))


def at_least(name: str, value: float, bound: float) -> Check:
    return Check(name, float(value), float(bound), ">=", bool(value >= bound))


def holds(name: str, condition: bool, value: float = 0.0) -> Check:
    return Check(name, float(value), 0.0, "holds", bool(condition))


@dataclass
class SuiteResult:
    name: str
    checks: list[Check] = field(default_factory=list)
    error: Optional[str] = None
    error_code: int = 0

    @property
    def passed(self) -> bool:
        return self.error is None and all(c.passed for c in self.checks)

    @property
    def exit_code(self) -> int:
        """中断时沿用异常的退出码，检查未通过为 4"""
        if self.error is not None:
            return self.error_code
        return 0 if self.passed else ToleranceViolation.exit_code

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "error": self.error, "checks": [asdict(c) for c in self.checks]}


class SuiteContext:
    def __init__(self, config: ExperimentConfig, tol_scale: float = 1.0, jobs: int = 1, samples: Optional[int] = None):
        self.config = config
        self.scale = tol_scale
        self.jobs = jobs
        self.samples = samples
        self.seed = config.experiment.seed

    def tol(self, value: float) -> float:
        return value * self.scale

    @property
    def holonomy_tol(self) -> float:
        return self.config.holonomy.tolerance

    def points(self, count: int = DEFAULT_POINTS) -> np.ndarray:
        return sobol_sample(self.samples or count, self.seed)

    def loops(self, model: MapLike, count: int = 2):
        parry = self.config.parry
        return parry_loops(model, fixed_point(model), count, parry.lattice_radius, parry.min_distance)


def _triple(model: MapLike, x, kind: str, first, second) -> tuple[Leg, Leg, Leg]:
    """x→y, y→z, x→z 三条同叶片腿"""
    a = leaf_pair(model, x, kind, parameter=first)
    b = leaf_pair(model, x, kind, parameter=second)
    leg_kind = "u" if kind == "unstable" else "s"
    return Leg.from_pair(a), Leg(leg_kind, a.partner, b.partner, b.displacement - a.displacement), Leg.from_pair(b)


def holonomy_algebra(ctx: SuiteContext) -> list[Check]:
    model = dissipative()
    cocycle = UnstableDerivativeCocycle(model=model)
    rng = np.random.default_rng(ctx.seed)
    tol = ctx.holonomy_tol
    composition, inverse, equivariance = 0.0, 0.0, 0.0
    legs = []
    # 每点一组不稳定三元组和一组稳定三元组；不稳定腿取短，推前 5 次后仍在坐标卡内
    for x in ctx.points(HOLONOMY_POINTS):
        for kind, size, radius in (("unstable", 2, 0.005), ("stable", 1, 0.03)):
            xy, yz, xz = _triple(model, x, kind, rng.uniform(-radius, radius, size), rng.uniform(-radius, radius, size))
            h_xy = leg_holonomy(cocycle, model, xy, tol).value
            h_yz = leg_holonomy(cocycle, model, yz, tol).value
            h_xz = leg_holonomy(cocycle, model, xz, tol).value
            composition = max(composition, float(np.linalg.norm(h_yz @ h_xy - h_xz)))
            back = leg_holonomy(cocycle, model, xy.reversed(), tol).value
            inverse = max(inverse, float(np.linalg.norm(back @ h_xy - np.eye(2))))
            pushed = xy
            for n in range(1, 6):
                pushed = pushed.pushed(model)
                h_n = leg_holonomy(cocycle, model, pushed, tol).value
                a_x = cocycle_eval(cocycle, model, xy.start, n).value
                a_y = cocycle_eval(cocycle, model, xy.end, n).value
                equivariance = max(equivariance, float(np.linalg.norm(h_n - a_y @ h_xy @ np.linalg.inv(a_x))))
            legs.append(xz)
    fit = holonomy_hoelder_fit(cocycle, model, legs, tol)
    return [
        at_most("composition residual", composition, ctx.tol(1e-7)),
        at_most("inverse residual", inverse, ctx.tol(1e-7)),
        at_most("equivariance residual (n <= 5)", equivariance, ctx.tol(1e-7)),
        at_least("hoelder exponent", fit.exponent, cocycle.eta - 0.15),
    ]


def _quadrilateral_paths(model: MapLike, ctx: SuiteContext, count: int = DEFAULT_POINTS) -> list[UsPath]:
    rng = np.random.default_rng(ctx.seed + 1)
    quads = []
    for a in ctx.points(count):
        quad = build_quadrilateral(model, a, float(rng.uniform(0.01, 0.03)), tuple(rng.uniform(-0.03, 0.03, 2)))
        quads.append(UsPath(quad.legs))
    return quads


def pch_algebra(ctx: SuiteContext) -> list[Check]:
    model = dissipative()
    cocycle = UnstableDerivativeCocycle(model=model)
    concatenation, equivariance = 0.0, 0.0
    for path in _quadrilateral_paths(model, ctx, PCH_LOOPS):
        whole = pch_along_path(cocycle, model, path, ctx.holonomy_tol)
        first = pch_along_path(cocycle, model, UsPath(path.legs[:2]), ctx.holonomy_tol)
        second = pch_along_path(cocycle, model, UsPath(path.legs[2:]), ctx.holonomy_tol)
        concatenation = max(concatenation, float(np.linalg.norm(whole - second @ first)))
        equivariance = max(equivariance, path_equivariance_residual(cocycle, model, path, ctx.holonomy_tol))
    return [
        at_most("concatenation residual", concatenation, ctx.tol(1e-7)),
        at_most("f-equivariance residual", equivariance, ctx.tol(1e-7)),
    ]


def linear_degeneracy(ctx: SuiteContext) -> list[Check]:
    model = linear_model()
    cocycle = ConstantCocycle(matrix=rotation2(0.9))
    rng = np.random.default_rng(ctx.seed)
    eye = np.eye(2)
    holonomy = 0.0
    for x in ctx.points():
        for kind, size in (("unstable", 2), ("stable", 1)):
            leg = Leg.from_pair(leaf_pair(model, x, kind, parameter=rng.uniform(-0.05, 0.05, size)))
            holonomy = max(holonomy, float(np.linalg.norm(leg_holonomy(cocycle, model, leg, ctx.holonomy_tol).value - eye)))
    paths = _quadrilateral_paths(model, ctx)
    pch = max(float(np.linalg.norm(compose(path_holonomies(cocycle, model, path, ctx.holonomy_tol)) - eye)) for path in paths)
    quad = max(
        float(np.linalg.norm(quadrilateral_map(cocycle, model, a, 0.02, (0.03, 0.01), tolerance=ctx.holonomy_tol) - eye))
        for a in ctx.points()
    )
    generators = parry_generators(cocycle, model, ctx.loops(model), ctx.holonomy_tol)
    parry = max(float(np.linalg.norm(g.value - eye)) for g in generators)
    return [
        at_most("holonomy distance to identity", holonomy, ctx.tol(1e-9)),
        at_most("PCH distance to identity", pch, ctx.tol(1e-9)),
        at_most("quadrilateral distance to identity", quad, ctx.tol(1e-9)),
        at_most("Parry generator distance to identity", parry, ctx.tol(1e-9)),
    ]


def closing(ctx: SuiteContext) -> list[Check]:
    model = dissipative()
    measured = hyperbolicity_estimates(model, ctx.config.numerics.sample_size, ctx.seed, jobs=ctx.jobs).alpha
    loops = ctx.loops(model, 3)
    horizon = ctx.config.experiment.horizon
    checks = []
    for m in (1, 2, 3):
        chosen = [loops[j % len(loops)] for j in range(m)]
        pseudo = np.concatenate([homoclinic_segment(model, loop, horizon) for loop in chosen])
        result = close_pseudo_orbit(model, pseudo, m, ctx.config.orbits.closing_epsilon)
        violations = profile_violations(result.profile, result.epsilon, measured)
        checks.append(at_most(f"m={m} fitted alpha", result.fitted_alpha, measured + 0.05))
        checks.append(at_most(f"m={m} pointwise bound violations", violations, 0))
    return checks


def fiber_bunching(ctx: SuiteContext) -> list[Check]:
    h = ctx.config.holonomy
    checks = []
    for name, factory in sorted(FIXTURES.items()):
        model = factory()
        report = fiber_bunching_report(UnstableDerivativeCocycle(model=model), model, horizon=h.bunching_horizon, samples=h.bunching_samples, seed=ctx.seed, threshold=h.bunching_threshold, jobs=ctx.jobs)
        checks.append(Check(f"{name} theta", report.theta_fit, h.bunching_threshold, "<", report.bunched))
    model = linear_model()
    control = fiber_bunching_report(ConstantCocycle(matrix=np.diag([4.0, 0.25])), model, horizon=h.bunching_horizon, samples=h.bunching_samples, seed=ctx.seed, threshold=h.bunching_threshold)
    checks.append(holds("hyperbolic constant cocycle reported not bunched", not control.bunched, control.theta_fit))
    return checks


def trace_extension(ctx: SuiteContext) -> list[Check]:
    model = dissipative()
    cocycle = NormalizedCocycle(base=UnstableDerivativeCocycle(model=model))
    loops = ctx.loops(model)
    horizons = ctx.config.parry.horizons
    checks = []
    for i in range(len(loops)):
        word = ParryWord(((i, 1),))
        shadows = [periodic_shadow_approximant(cocycle, model, loops, word, n, ctx.config.orbits.closing_epsilon) for n in horizons]
        gaps = np.array([s.gap for s in shadows])
        live = gaps > GAP_FLOOR
        decreasing = bool(np.all(np.diff(gaps[live]) < 0)) if np.count_nonzero(live) > 1 else True
        slope = float(np.polyfit(np.array(horizons)[live], np.log(gaps[live]), 1)[0]) if np.count_nonzero(live) > 1 else -1.0
        checks.append(holds(f"{word.label} gap decreasing", decreasing, gaps[-1]))
        checks.append(at_most(f"{word.label} log-linear slope", slope, 0.0))
        checks.append(at_most(f"{word.label} final trace gap", shadows[-1].trace_gap, ctx.tol(1e-5)))
    return checks


def coboundary_fixture(model: MapLike) -> CoboundaryCocycle:
    """C(x) = I + 小三角项，中间矩阵椭圆"""
    terms = [((1, 0, 0), [[0.05, 0.02], [0.0, -0.03]], 0.3), ((0, 1, 1), [[0.0, 0.04], [-0.02, 0.01]], 1.2)]
    return CoboundaryCocycle(model=model, matrix_field=MatrixTrigField.from_terms(np.eye(2), terms))


def coboundary(ctx: SuiteContext) -> list[Check]:
    model = stable_shear()
    cocycle = NormalizedCocycle(base=coboundary_fixture(model))
    loops = ctx.loops(model)
    generators = parry_generators(cocycle, model, loops, ctx.holonomy_tol)
    distance = max(float(np.linalg.norm(g.value - np.eye(2))) for g in generators)
    report = dichotomy_report(
        cocycle, cocycle, model, fixed_point(model), loops, grid=grid_points(2), tolerance=ctx.holonomy_tol, settings=ctx.config.parry, jobs=ctx.jobs
    )
    residual = report.conjugacy_field.max_residual if report.conjugacy_field is not None else float("inf")
    return [
        at_most("generator distance to identity", distance, ctx.tol(1e-5)),
        holds("verdict almost_coboundary", report.verdict == "almost_coboundary"),
        at_most("constant-cocycle conjugacy residual", residual, ctx.tol(1e-4)),
    ]


def oracle_cocycles(model: MapLike) -> tuple[CocycleSpec, CocycleSpec]:
    a = NormalizedCocycle(base=UnstableDerivativeCocycle(model=model))
    b = NormalizedCocycle(base=PullbackCocycle(model=model, conjugacy=small_conjugacy()))
    return a, b


def oracle_pair(ctx: SuiteContext) -> list[Check]:
    model = dissipative()
    a, b = oracle_cocycles(model)
    orbits = find_periodic_orbits(model, ctx.config.experiment.max_period, jobs=ctx.jobs)
    traces = trace_match_report(a, b, model, orbits, tolerance=ctx.tol(1e-7))
    report = dichotomy_report(
        a, b, model, fixed_point(model), ctx.loops(model), orbits, grid=grid_points(ctx.config.experiment.grid_size),
        tolerance=ctx.holonomy_tol, settings=ctx.config.parry, jobs=ctx.jobs,
    )
    checks = [
        at_most("periodic trace deviation", traces.max_deviation, ctx.tol(1e-7)),
        holds("verdict conjugate", report.verdict == "conjugate"),
    ]
    if report.conjugacy_field is not None:
        field_ = report.conjugacy_field
        checks.append(at_most("conjugacy equation residual", field_.max_residual, ctx.tol(1e-4)))
        checks.append(at_most("independent-path disagreement", field_.max_disagreement, ctx.tol(1e-4)))
        checks.append(at_most("deviation from known conjugacy", field_.oracle_deviation, ctx.tol(1e-4)))
    return checks


def quadrilateral(ctx: SuiteContext) -> list[Check]:
    model = dissipative()
    a_cocycle, b_cocycle = oracle_cocycles(model)
    six_point, matching = 0.0, 0.0
    for x in ctx.points(QUADRILATERAL_CONFIGURATIONS):
        check = six_point_check(a_cocycle, model, six_point_configuration(model, x), ctx.holonomy_tol)
        six_point = max(six_point, check.residual)
        phi_a = quadrilateral_map(a_cocycle, model, x, 0.02, (0.03, 0.01), tolerance=ctx.holonomy_tol)
        phi_b = quadrilateral_map(b_cocycle, model, x, 0.02, (0.03, 0.01), tolerance=ctx.holonomy_tol)
        c = b_cocycle.oracle(x)
        matching = max(matching, float(np.linalg.norm(phi_a - np.linalg.inv(c) @ phi_b @ c)))
    return [
        at_most("six-point identity residual", six_point, ctx.tol(1e-6)),
        at_most("quadrilateral matching relation", matching, ctx.tol(1e-4)),
    ]


def negative_controls(ctx: SuiteContext) -> list[Check]:
    model = dissipative()
    a, b = oracle_cocycles(model)
    orbits = find_periodic_orbits(model, ctx.config.experiment.max_period, jobs=ctx.jobs)

    wrong = NormalizedCocycle(base=ConstantCocycle(matrix=rotation2(0.4)))
    mismatch = trace_match_report(a, wrong, model, orbits, tolerance=ctx.tol(1e-5))
    checks = [holds("trace-mismatched pair rejected with witness", not mismatch.matched, mismatch.max_deviation)]

    srb = srb_equals_mme_test(model, orbits, ctx.config.orbits.srb_tolerance)
    checks.append(holds("dissipative map fails SRB = MME", not srb.passed, srb.max_deviation))

    p = fixed_point(model)
    c_p = b.oracle(p) + np.array([[0.0, 1e-2], [0.0, 0.0]])
    grid = project_to_torus(p + np.array([[0.03, 0.02, 0.01], [-0.02, 0.03, 0.01]]))
    try:
        field_ = extend_conjugacy(a, b, model, p, c_p, grid, ctx.holonomy_tol, ctx.config.parry.path_tolerance, ctx.config.parry.residual_tolerance)
        detected, value = not field_.passed, field_.max_residual
    except PathDependenceError as e:
        detected, value = True, e.details.get("disagreement", 0.0)
    checks.append(holds("perturbed C_p fails the conjugacy audit", detected, value))
    return checks


SUITES: dict[str, Callable[[SuiteContext], list[Check]]] = {
    "holonomy-algebra": holonomy_algebra,
    "pch-algebra": pch_algebra,
    "linear-degeneracy": linear_degeneracy,
    "closing": closing,
    "fiber-bunching": fiber_bunching,
    "trace-extension": trace_extension,
    "coboundary": coboundary,
    "oracle-pair": oracle_pair,
    "quadrilateral": quadrilateral,
    "negative-controls": negative_controls,
}


def run_suite(name: str, ctx: SuiteContext) -> SuiteResult:
    result = SuiteResult(name)
    try:
        result.checks = SUITES[name](ctx)
    except RigidityError as e:
        logger.warning(f"suite {name} aborted: {e}")
        result.error, result.error_code = f"{type(e).__name__}: {e}", e.exit_code
    failed = [c.name for c in result.checks if not c.passed]
    logger.info(f"suite {name}: {'passed' if result.passed else 'FAILED'} {failed if failed else ''}")
    return result


def verify(names: list[str], ctx: SuiteContext) -> list[SuiteResult]:
    """names 为 ["all"] 时运行全部套件"""
    if names == ["all"]:
        names = list(SUITES)
    return [run_suite(name, ctx) for name in names]
