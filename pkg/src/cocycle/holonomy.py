"""稳定/不稳定完整（holonomy）的极限公式

H^u_{x,y} = lim F^n_{f^{-n} y} (F^n_{f^{-n} x})^{-1}
H^s_{x,y} = lim (F^n_y)^{-1} F^n_x

逐步增加 n，直到连续两次 Cauchy 差都小于 tol。
"""

import logging
from dataclasses import dataclass
from typing import Iterator, Literal, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..dynamics import MapLike
from ..errors import ChartRadiusError, HolonomyConvergenceError, LeafCertificationError
from ..geometry import PowerLawFit, fit_power_law, project_to_torus, torus_delta
from ..structure import Leg, compute_splitting, leaf_pair
from .spec import CocycleSpec

logger = logging.getLogger(__name__)

HolonomyKind = Literal["stable", "unstable"]

MAX_STEPS = 200
CONSECUTIVE_GAPS = 2


@dataclass(frozen=True, eq=False)
class HolonomyApproximant:
    value: NDArray[np.float64]
    start: NDArray[np.float64]
    end: NDArray[np.float64]
    kind: HolonomyKind
    n_used: int
    cauchy_gap: float

    def to_dict(self) -> dict:
        return {
            "from": self.start.tolist(),
            "to": self.end.tolist(),
            "kind": self.kind,
            "n_used": self.n_used,
            "matrix": self.value.tolist(),
            "cauchy_gap": self.cauchy_gap,
        }


def partner_orbit(
    model: MapLike,
    start: NDArray[np.float64],
    displacement: NDArray[np.float64],
    forward: bool,
    separation: Optional[tuple[NDArray[np.float64], NDArray[np.float64]]],
) -> Iterator[tuple[NDArray[np.float64], NDArray[np.float64]]]:
    """依次给出 (x_k, y_k - x_k)，k = 0, 1, ...（稳定向前，不稳定向后），第一项总是 (start, displacement)

    有坐标卡伙伴轨道时先用它，用尽后再用精确差分继续迭代。
    """
    x, delta = start, displacement
    if separation is None:
        yield x, delta
    else:
        orbit, offsets = separation
        for k in range(len(orbit)):
            yield orbit[k], offsets[k]
        x, delta = orbit[-1], offsets[-1]
    while True:
        if forward:
            delta = model.difference(x, delta)
            x = model.evaluate(x)
        else:
            x = model.inverse_evaluate(x)
            delta = model.inverse_difference(x, delta)
        yield x, delta


def chart_separation(
    model: MapLike, x: NDArray[np.float64], displacement: NDArray[np.float64], kind: HolonomyKind
) -> Optional[tuple[NDArray[np.float64], NDArray[np.float64]]]:
    """在 x 处按位移求解叶片坐标卡，给出伙伴轨道

    端点不在叶片上时返回 None，由精确差分迭代接手。
    """
    try:
        pair = leaf_pair(model, x, kind, displacement=displacement)
    except (LeafCertificationError, ChartRadiusError) as e:
        logger.debug(f"no chart separation for {kind} pair at {x.tolist()}: {e}")
        return None
    return pair.orbit, pair.offsets


def _converged(gaps: list[float], tolerance: float) -> bool:
    return len(gaps) >= CONSECUTIVE_GAPS and all(g < tolerance for g in gaps[-CONSECUTIVE_GAPS:])


def _identity(start, end, kind: HolonomyKind) -> HolonomyApproximant:
    return HolonomyApproximant(np.eye(2), start, end, kind, 0, 0.0)


def _endpoints(x: ArrayLike, y: ArrayLike, displacement: Optional[ArrayLike]):
    x = np.asarray(x, dtype=float)
    d = torus_delta(x, y) if displacement is None else np.asarray(displacement, dtype=float)
    return project_to_torus(x), project_to_torus(x + d), d


def unstable_holonomy(
    cocycle: CocycleSpec,
    model: MapLike,
    x: ArrayLike,
    y: ArrayLike,
    tolerance: float = 1e-9,
    max_steps: int = MAX_STEPS,
    displacement: Optional[ArrayLike] = None,
    separation=None,
) -> HolonomyApproximant:
    """y ∈ W^u(x)；深端用固定参考标架进入，两端用全局平凡化读出"""
    x, y, d = _endpoints(x, y, displacement)
    if not np.any(d):
        return _identity(x, y, "unstable")
    if separation is None:
        separation = chart_separation(model, x, d, "unstable")

    entry = cocycle.loose_entry()
    size = cocycle.fiber_dim
    qx, qy = np.eye(size), np.eye(size)
    previous = None
    gaps: list[float] = []
    orbit = partner_orbit(model, x, d, forward=False, separation=separation)
    next(orbit)
    for n in range(1, max_steps + 1):
        px, delta = next(orbit)
        qx = qx @ cocycle.raw(px)
        qy = qy @ cocycle.raw(px + delta)
        scale = np.linalg.norm(qx)
        qx, qy = qx / scale, qy / scale
        wx, wy = qx @ entry, qy @ entry
        if size == 3:
            wx, wy = cocycle.frame(wx).T @ wx, cocycle.frame(wy).T @ wy
        current = wy @ np.linalg.inv(wx)
        if previous is not None:
            gaps.append(float(np.linalg.norm(current - previous)))
            if _converged(gaps, tolerance):
                return HolonomyApproximant(cocycle.finalize(current), x, y, "unstable", n, gaps[-1])
        previous = current

    gap = gaps[-1] if gaps else float("inf")
    raise HolonomyConvergenceError(
        f"unstable holonomy did not converge in {max_steps} steps (gap {gap:.3e})", cauchy_gap=gap
    )


def stable_holonomy(
    cocycle: CocycleSpec,
    model: MapLike,
    x: ArrayLike,
    y: ArrayLike,
    tolerance: float = 1e-9,
    max_steps: int = MAX_STEPS,
    displacement: Optional[ArrayLike] = None,
    separation=None,
) -> HolonomyApproximant:
    """y ∈ W^s(x)；起点用两点各自的平凡化进入，远端共用 x_n 的标架读出"""
    x, y, d = _endpoints(x, y, displacement)
    if not np.any(d):
        return _identity(x, y, "stable")
    if separation is None:
        separation = chart_separation(model, x, d, "stable")

    size = cocycle.fiber_dim
    if size == 3:
        wx = cocycle.frame(cocycle.entry_plane(x, compute_splitting(model, x).unstable_plane))
        wy = cocycle.frame(cocycle.entry_plane(y, compute_splitting(model, y).unstable_plane))
    else:
        wx, wy = np.eye(2), np.eye(2)

    previous = None
    gaps: list[float] = []
    orbit = partner_orbit(model, x, d, forward=True, separation=separation)
    for n in range(1, max_steps + 1):
        px, delta = next(orbit)
        wx = cocycle.raw(px) @ wx
        wy = cocycle.raw(px + delta) @ wy
        scale = np.linalg.norm(wx)
        wx, wy = wx / scale, wy / scale
        if size == 3:
            exit_frame = cocycle.frame(wx).T
            current = np.linalg.solve(exit_frame @ wy, exit_frame @ wx)
        else:
            current = np.linalg.solve(wy, wx)
        if previous is not None:
            gaps.append(float(np.linalg.norm(current - previous)))
            if _converged(gaps, tolerance):
                return HolonomyApproximant(cocycle.finalize(current), x, y, "stable", n, gaps[-1])
        previous = current

    gap = gaps[-1] if gaps else float("inf")
    raise HolonomyConvergenceError(
        f"stable holonomy did not converge in {max_steps} steps (gap {gap:.3e})", cauchy_gap=gap
    )


def leg_holonomy(
    cocycle: CocycleSpec,
    model: MapLike,
    leg: Leg,
    tolerance: float = 1e-9,
    max_steps: int = MAX_STEPS,
) -> HolonomyApproximant:
    fn = stable_holonomy if leg.kind == "s" else unstable_holonomy
    return fn(
        cocycle,
        model,
        leg.start,
        leg.end,
        tolerance=tolerance,
        max_steps=max_steps,
        displacement=leg.displacement,
        separation=leg.separation(),
    )


def holonomy_hoelder_fit(
    cocycle: CocycleSpec,
    model: MapLike,
    legs: Sequence[Leg],
    tolerance: float = 1e-9,
) -> PowerLawFit:
    """‖H - Id‖ ≤ c d(x, y)^η 的拟合；超出拟合包络的样本记为 violations"""
    distances, values = [], []
    for leg in legs:
        if leg.length == 0.0:
            continue
        h = leg_holonomy(cocycle, model, leg, tolerance)
        distances.append(leg.length)
        values.append(float(np.linalg.norm(h.value - np.eye(2), 2)))
    fit = fit_power_law(np.array(distances), np.array(values))
    logger.info(f"holonomy Hölder fit: c {fit.constant:.3f}, exponent {fit.exponent:.3f}, {len(fit.violations)} violations")
    return fit
