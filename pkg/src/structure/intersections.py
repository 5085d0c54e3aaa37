"""叶片交点: 稳定完整点映射、同宿点、us-回路与 us-四边形"""

import itertools
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..dynamics import MapLike
from ..errors import ExtensionRangeError, HomoclinicSearchError, IntersectionError, LeafCertificationError, NumericalError
from ..geometry import project_to_torus, torus_delta, torus_distance
from .charts import LeafPair, chart_base, evaluate_chart, leaf_pair
from .leaves import Leg, QuadrilateralSpec, UsPath

logger = logging.getLogger(__name__)

NEWTON_STEPS = 30
EXTENSION_MARGIN = 0.8


def intersect_leaves(
    model: MapLike,
    u_base: ArrayLike,
    s_base: ArrayLike,
    target: ArrayLike,
    seed_threshold: float = 1e-12,
) -> tuple[LeafPair, LeafPair]:
    """求 (s, t) 使 δ^u_{u_base}(s) - δ^s_{s_base}(t) = target

    交点为 u_base + δ^u = s_base + δ^s + (target 与两基点差的整数部分)。
    """
    ucb = chart_base(model, u_base, "unstable")
    scb = chart_base(model, s_base, "stable")
    target = np.asarray(target, dtype=float)
    system = np.column_stack([ucb.frame, -scb.frame])
    z = np.linalg.solve(system, target)
    scale = max(1.0, float(np.linalg.norm(target)))
    residual = np.inf
    for _ in range(NEWTON_STEPS):
        du, ju, _ = evaluate_chart(model, ucb, z[:2], seed_threshold)
        ds, js, _ = evaluate_chart(model, scb, z[2:], seed_threshold)
        r = du[0] - ds[0] - target
        residual = float(np.linalg.norm(r))
        if residual <= 1e-13 * scale:
            break
        z = z - np.linalg.solve(np.column_stack([ju[0], -js[0]]), r)
    else:
        raise IntersectionError(f"leaf intersection did not converge (residual {residual:.3e})", residual=residual)
    return leaf_pair(model, ucb.base, "unstable", parameter=z[:2]), leaf_pair(model, scb.base, "stable", parameter=z[2:])


@dataclass(frozen=True, eq=False)
class HolonomyPoint:
    """w = Hol^s_{a,b}(x) ∈ W^s(x) ∩ W^u_loc(b)"""

    point: NDArray[np.float64]
    unstable_leg: Leg
    stable_leg: Leg
    shift: int
    consistency: float


def _local_holonomy_point(model, b, x, target, seed_threshold):
    u_pair, s_pair = intersect_leaves(model, b, x, target, seed_threshold)
    return u_pair.displacement, s_pair.displacement, u_pair, s_pair


def _shifted(model: MapLike, a, d_ab, d_ax, steps: int, forward: bool):
    """沿 a 的轨道移动 steps 步，同时用精确差分移动两条腿"""
    a_k, ab, ax = a, d_ab, d_ax
    history = [(a_k, ab, ax)]
    for _ in range(steps):
        if forward:
            ab, ax = model.difference(a_k, ab), model.difference(a_k, ax)
            a_k = model.evaluate(a_k)
        else:
            a_k = model.inverse_evaluate(a_k)
            ab, ax = model.inverse_difference(a_k, ab), model.inverse_difference(a_k, ax)
        history.append((a_k, ab, ax))
    return history


def _transport_back(model: MapLike, history, base_of, leg: NDArray[np.float64], forward: bool) -> NDArray[np.float64]:
    """把第 n 步上的位移沿基点轨道移回第 0 步"""
    for k in range(len(history) - 1, 0, -1):
        if forward:
            leg = model.inverse_difference(base_of(history[k - 1]), leg)
        else:
            leg = model.difference(base_of(history[k]), leg)
    return leg


def stable_holonomy_point(
    model: MapLike,
    a: ArrayLike,
    b: ArrayLike,
    x: ArrayLike,
    ab: Optional[ArrayLike] = None,
    ax: Optional[ArrayLike] = None,
    radius: float = 0.25,
    max_shift: int = 40,
    seed_threshold: float = 1e-12,
) -> HolonomyPoint:
    """Hol^s_{a,b}(x)，b ∈ W^s(a)，x ∈ W^u(a)

    ab / ax 为 a→b、a→x 的提升位移（默认取最短位移）。两条腿超出 radius 时
    沿轨道移动 n 步进入局部范围，求局部交点后再移回。
    """
    a = project_to_torus(np.asarray(a, dtype=float))
    b = project_to_torus(np.asarray(b, dtype=float))
    x = project_to_torus(np.asarray(x, dtype=float))
    d_ab = torus_delta(a, b) if ab is None else np.asarray(ab, dtype=float)
    d_ax = torus_delta(a, x) if ax is None else np.asarray(ax, dtype=float)

    if max(np.linalg.norm(d_ab), np.linalg.norm(d_ax)) <= radius:
        g, e, u_pair, s_pair = _local_holonomy_point(model, b, x, d_ax - d_ab, seed_threshold)
        w = project_to_torus(x + e)
        unstable_leg = Leg("u", b, w, g, u_pair)
        stable_leg = Leg("s", x, w, e, s_pair)
        return HolonomyPoint(w, unstable_leg, stable_leg, 0, torus_distance(project_to_torus(b + g), w))

    limit = EXTENSION_MARGIN * radius
    histories = {
        True: _shifted(model, a, d_ab, d_ax, max_shift, forward=True),
        False: _shifted(model, a, d_ab, d_ax, max_shift, forward=False),
    }
    for n, forward in itertools.product(range(1, max_shift + 1), (False, True)):
        _, ab_n, ax_n = histories[forward][n]
        if max(np.linalg.norm(ab_n), np.linalg.norm(ax_n)) <= limit:
            break
    else:
        raise ExtensionRangeError(
            f"no shift within {max_shift} steps brings both legs inside radius {radius}",
            ab=float(np.linalg.norm(d_ab)),
            ax=float(np.linalg.norm(d_ax)),
        )

    history = histories[forward][: n + 1]
    a_n, ab_n, ax_n = history[-1]
    b_n, x_n = project_to_torus(a_n + ab_n), project_to_torus(a_n + ax_n)
    g_n, e_n, _, _ = _local_holonomy_point(model, b_n, x_n, ax_n - ab_n, seed_threshold)
    g = _transport_back(model, history, lambda h: project_to_torus(h[0] + h[1]), g_n, forward)
    e = _transport_back(model, history, lambda h: project_to_torus(h[0] + h[2]), e_n, forward)
    w = project_to_torus(x + e)
    consistency = torus_distance(project_to_torus(b + g), w)
    logger.debug(f"holonomy point via {'forward' if forward else 'backward'} shift {n}: consistency {consistency:.3e}")
    return HolonomyPoint(w, Leg("u", b, w, g), Leg("s", x, w, e), n if forward else -n, consistency)


@dataclass(frozen=True, eq=False)
class HomoclinicPoint:
    """z ∈ W^u(p) ∩ W^s(p)；u_pair: p→z 沿不稳定叶片，s_pair: p→z 沿稳定叶片（差一个格点）"""

    point: NDArray[np.float64]
    base: NDArray[np.float64]
    lattice: tuple[int, int, int]
    u_pair: LeafPair
    s_pair: LeafPair

    @property
    def distance(self) -> float:
        return torus_distance(self.base, self.point)

    def to_dict(self) -> dict:
        return {
            "point": self.point.tolist(),
            "base": self.base.tolist(),
            "lattice": list(self.lattice),
            "u_displacement": self.u_pair.displacement.tolist(),
            "s_displacement": self.s_pair.displacement.tolist(),
            "u_parameter": self.u_pair.parameter.tolist(),
            "s_parameter": self.s_pair.parameter.tolist(),
        }


def _balance(model: MapLike, m: NDArray[np.float64], max_shift: int = 24) -> NDArray[np.float64]:
    """沿轨道滑动格点向量 m -> L^j m，使线性模型下两条腿的较长者最短"""
    lin = model.linear
    basis = np.column_stack([lin.unstable_frame, lin.stable_direction])
    mat, inv = lin.integer_matrix.astype(float), lin.inverse

    def legs(v):
        c = np.linalg.solve(basis, v)
        return max(np.linalg.norm(lin.unstable_frame @ c[:2]), abs(c[2]))

    best, best_cost = m, legs(m)
    for step in (mat, inv):
        v = m.copy()
        for _ in range(max_shift):
            v = np.round(step @ v)
            cost = legs(v)
            if cost < best_cost:
                best, best_cost = v, cost
    return best


def homoclinic_points(
    model: MapLike,
    p: ArrayLike,
    count: int = 4,
    lattice_radius: int = 2,
    min_distance: float = 1e-3,
    fixed_tolerance: float = 1e-10,
    seed_threshold: float = 1e-12,
) -> list[HomoclinicPoint]:
    """枚举 |m|∞ <= lattice_radius 的格点，求 δ^u_p(s) - δ^s_p(t) = m 的横截交点"""
    p = project_to_torus(np.asarray(p, dtype=float))
    fixed_residual = torus_distance(model.evaluate(p), p)
    if fixed_residual > fixed_tolerance:
        raise HomoclinicSearchError(f"base point is not fixed (residual {fixed_residual:.3e})", residual=fixed_residual)

    seen: set[tuple[int, int, int]] = set()
    found: list[HomoclinicPoint] = []
    span = range(-lattice_radius, lattice_radius + 1)
    for m in itertools.product(span, span, span):
        if not any(m):
            continue
        balanced = _balance(model, np.array(m, dtype=float))
        key = tuple(int(v) for v in balanced)
        if key in seen:
            continue
        seen.add(key)
        try:
            u_pair, s_pair = intersect_leaves(model, p, p, balanced, seed_threshold)
        except NumericalError as e:
            logger.warning(f"homoclinic seed {key} skipped: {e}")
            continue
        z = u_pair.partner
        if torus_distance(z, p) < min_distance:
            continue
        found.append(HomoclinicPoint(z, p, key, u_pair, s_pair))

    if not found:
        raise HomoclinicSearchError("no homoclinic point found within the lattice budget", lattice_radius=lattice_radius)
    found.sort(key=lambda h: (h.distance, h.lattice))
    logger.info(f"homoclinic search: {len(found)} candidates, returning {min(count, len(found))}")
    return found[:count]


def build_us_loop(
    model: MapLike,
    p: ArrayLike,
    z: HomoclinicPoint,
    min_distance: float = 1e-3,
    tolerance: float = 1e-6,
) -> UsPath:
    """两腿回路: u-腿 p→z，s-腿 z→p"""
    if torus_distance(z.point, p) < min_distance:
        raise LeafCertificationError("degenerate loop: homoclinic point coincides with the base point")
    path = UsPath((Leg.from_pair(z.u_pair), Leg.from_pair(z.s_pair, reverse=True)))
    return path.certify(model, tolerance)


def build_quadrilateral(
    model: MapLike,
    a: ArrayLike,
    b_param: float,
    x_param: Sequence[float],
    radius: float = 0.25,
) -> QuadrilateralSpec:
    """b = W^s_loc(a) 上参数 b_param 的点，x = W^u_loc(a) 上参数 x_param 的点，x3 = Hol^s_{a,b}(x)"""
    s_pair = leaf_pair(model, a, "stable", parameter=[b_param])
    u_pair = leaf_pair(model, a, "unstable", parameter=x_param)
    hol = stable_holonomy_point(
        model, a, s_pair.partner, u_pair.partner, s_pair.displacement, u_pair.displacement, radius=radius
    )
    return QuadrilateralSpec.from_legs(
        (
            Leg.from_pair(s_pair),
            hol.unstable_leg,
            hol.stable_leg.reversed(),
            Leg.from_pair(u_pair, reverse=True),
        )
    )


@dataclass(frozen=True, eq=False)
class SixPointConfiguration:
    """x2, x3 ∈ W^s(x1)，x6 ∈ W^u(x1)，x5 = Hol^s_{x1,x2}(x6)，x4 = Hol^s_{x1,x3}(x6)"""

    points: dict[str, NDArray[np.float64]]
    main: QuadrilateralSpec
    first: QuadrilateralSpec
    second: QuadrilateralSpec
    link: Leg


def six_point_configuration(
    model: MapLike,
    x1: ArrayLike,
    stable_params: tuple[float, float] = (0.02, -0.03),
    unstable_param: Sequence[float] = (0.03, 0.01),
    radius: float = 0.25,
) -> SixPointConfiguration:
    """H(x1,x3,x4,x6) = S⁻¹ H(x2,x1,x6,x5)⁻¹ H(x2,x3,x4,x5) S，S 为 x1→x2 的稳定完整"""
    pair2 = leaf_pair(model, x1, "stable", parameter=[stable_params[0]])
    pair3 = leaf_pair(model, x1, "stable", parameter=[stable_params[1]])
    pair6 = leaf_pair(model, x1, "unstable", parameter=unstable_param)
    x1 = pair2.base
    x2, x3, x6 = pair2.partner, pair3.partner, pair6.partner
    hol5 = stable_holonomy_point(model, x1, x2, x6, pair2.displacement, pair6.displacement, radius=radius)
    hol4 = stable_holonomy_point(model, x1, x3, x6, pair3.displacement, pair6.displacement, radius=radius)
    x4, x5 = hol4.point, hol5.point

    s12 = Leg.from_pair(pair2)
    s23 = Leg("s", x2, x3, pair3.displacement - pair2.displacement)
    s45 = Leg("s", x4, x5, hol5.stable_leg.displacement - hol4.stable_leg.displacement)
    main = QuadrilateralSpec.from_legs(
        (Leg.from_pair(pair3), hol4.unstable_leg, hol4.stable_leg.reversed(), Leg.from_pair(pair6, reverse=True))
    )
    first = QuadrilateralSpec.from_legs((s12.reversed(), Leg.from_pair(pair6), hol5.stable_leg, hol5.unstable_leg.reversed()))
    second = QuadrilateralSpec.from_legs((s23, hol4.unstable_leg, s45, hol5.unstable_leg.reversed()))
    points = {"x1": x1, "x2": x2, "x3": x3, "x4": x4, "x5": x5, "x6": x6}
    return SixPointConfiguration(points, main, first, second, s12)
