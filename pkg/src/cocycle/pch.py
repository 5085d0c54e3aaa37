"""us-路径上的周期循环完整（PCH）与四边形完整

路径 γ = (leg_1, ..., leg_k) 的 PCH 是协变输运 H_k ⋯ H_1，
因而 PCH_{γ2*γ1} = PCH_{γ2} · PCH_{γ1}。
"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..dynamics import MapLike
from ..parallel import parallel_map
from ..structure import (
    QuadrilateralSpec,
    SixPointConfiguration,
    UsPath,
    build_quadrilateral,
)
from .holonomy import MAX_STEPS, HolonomyApproximant, leg_holonomy
from .spec import CocycleSpec

logger = logging.getLogger(__name__)


def path_holonomies(
    cocycle: CocycleSpec,
    model: MapLike,
    path: UsPath,
    tolerance: float = 1e-9,
    max_steps: int = MAX_STEPS,
    jobs: int = 1,
) -> list[HolonomyApproximant]:
    """逐腿完整，按路径顺序返回"""
    return parallel_map(
        lambda leg: leg_holonomy(cocycle, model, leg, tolerance, max_steps),
        list(path.legs),
        jobs=jobs,
    )


def compose(holonomies: Sequence[HolonomyApproximant]) -> NDArray[np.float64]:
    out = np.eye(2)
    for h in holonomies:
        out = h.value @ out
    return out


def pch_along_path(
    cocycle: CocycleSpec,
    model: MapLike,
    path: UsPath,
    tolerance: float = 1e-9,
    max_steps: int = MAX_STEPS,
    jobs: int = 1,
) -> NDArray[np.float64]:
    return compose(path_holonomies(cocycle, model, path, tolerance, max_steps, jobs))


def quadrilateral_holonomy(
    cocycle: CocycleSpec,
    model: MapLike,
    quad: QuadrilateralSpec,
    tolerance: float = 1e-9,
    max_steps: int = MAX_STEPS,
) -> NDArray[np.float64]:
    """H^u_{x4,x1} H^s_{x3,x4} H^u_{x2,x3} H^s_{x1,x2}"""
    return pch_along_path(cocycle, model, quad.as_path(), tolerance, max_steps)


def quadrilateral_map(
    cocycle: CocycleSpec,
    model: MapLike,
    a: ArrayLike,
    b_param: float,
    x_param: Sequence[float],
    radius: float = 0.25,
    tolerance: float = 1e-9,
) -> NDArray[np.float64]:
    """Φ_{a,b}(x)：以 (a, b, Hol^s_{a,b}(x), x) 为顶点的四边形完整"""
    quad = build_quadrilateral(model, a, b_param, x_param, radius)
    return quadrilateral_holonomy(cocycle, model, quad, tolerance)


@dataclass(frozen=True)
class SixPointCheck:
    direct: list[list[float]]
    conjugated: list[list[float]]
    residual: float

    def to_dict(self) -> dict:
        return {"direct": self.direct, "conjugated": self.conjugated, "residual": self.residual}


def six_point_check(
    cocycle: CocycleSpec,
    model: MapLike,
    config: SixPointConfiguration,
    tolerance: float = 1e-9,
) -> SixPointCheck:
    """H(x1,x3,x4,x6) 与 S^{-1} H(x2,x1,x6,x5)^{-1} H(x2,x3,x4,x5) S 的比较"""
    direct = quadrilateral_holonomy(cocycle, model, config.main, tolerance)
    first = quadrilateral_holonomy(cocycle, model, config.first, tolerance)
    second = quadrilateral_holonomy(cocycle, model, config.second, tolerance)
    link = leg_holonomy(cocycle, model, config.link, tolerance).value
    conjugated = np.linalg.solve(link, np.linalg.solve(first, second) @ link)
    residual = float(np.linalg.norm(direct - conjugated))
    logger.info(f"six-point identity residual {residual:.3e}")
    return SixPointCheck(direct.tolist(), conjugated.tolist(), residual)


def path_equivariance_residual(
    cocycle: CocycleSpec,
    model: MapLike,
    path: UsPath,
    tolerance: float = 1e-9,
) -> float:
    """‖PCH_γ - F_y^{-1} PCH_{f(γ)} F_x‖，F 为单步余圈"""
    direct = pch_along_path(cocycle, model, path, tolerance)
    pushed = pch_along_path(cocycle, model, path.pushed(model), tolerance)
    f_start = cocycle.evaluate(model, path.start)
    f_end = cocycle.evaluate(model, path.end)
    return float(np.linalg.norm(direct - np.linalg.solve(f_end, pushed @ f_start)))
