"""周期轨道搜索: 线性模型的有理周期点 + Newton 延拓"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from ..dynamics import AutomorphismSpec, MapLike
from ..errors import PeriodicOrbitError
from ..geometry import hausdorff_distance, project_to_torus, torus_distance
from ..parallel import parallel_map

logger = logging.getLogger(__name__)

NEWTON_STEPS = 40
RESIDUAL_BOUND = 1e-10


@dataclass(frozen=True, eq=False)
class PeriodicOrbit:
    point: NDArray[np.float64]
    period: int
    residual: float
    lift_translation: tuple[int, int, int]
    points: NDArray[np.float64] = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "point": self.point.tolist(),
            "period": self.period,
            "residual": self.residual,
            "lift_translation": list(self.lift_translation),
        }


@dataclass(frozen=True)
class PeriodicSearchResult:
    orbits: list[PeriodicOrbit]
    skipped: int
    seeds: int


def periodic_seeds(lin: AutomorphismSpec, period: int) -> NDArray[np.float64]:
    """(L^k - I)^{-1} Z^3 / Z^3 的全部元素，由单位向量的像生成闭包"""
    power = np.linalg.matrix_power(lin.integer_matrix, period) - np.eye(3, dtype=np.int64)
    denominator = abs(round(float(np.linalg.det(power))))
    if denominator == 0:
        raise PeriodicOrbitError(f"L^{period} - I is singular")
    generators = np.linalg.inv(power.astype(float)).T % 1.0

    def key(v: NDArray[np.float64]) -> tuple[int, ...]:
        return tuple(int(c) % denominator for c in np.round(v * denominator))

    found = {key(np.zeros(3)): np.zeros(3)}
    frontier = [np.zeros(3)]
    while frontier and len(found) < denominator:
        nxt = []
        for v in frontier:
            for g in generators:
                w = (v + g) % 1.0
                k = key(w)
                if k not in found:
                    found[k] = np.array(k, dtype=float) / denominator
                    nxt.append(found[k])
        frontier = nxt
    return np.array(sorted(found.values(), key=tuple))


def minimal_period(model: MapLike, x: NDArray[np.float64], period: int, tolerance: float = 1e-8) -> int:
    y = x
    for d in range(1, period + 1):
        y = model.evaluate(y)
        if period % d == 0 and torus_distance(y, x) <= tolerance:
            return d
    return period


def _newton_periodic(model: MapLike, seed: NDArray[np.float64], period: int, tolerance: float):
    lin = model.linear
    translation = np.round(np.linalg.matrix_power(lin.matrix, period) @ seed - seed)
    x = seed.copy()
    for _ in range(NEWTON_STEPS):
        image, jac = model.iterate_with_jacobian(x, period)
        r = image - x - translation
        if np.max(np.abs(r)) <= tolerance:
            return project_to_torus(x), translation
        x = x - np.linalg.solve(jac - np.eye(3), r)
    raise PeriodicOrbitError(f"periodic Newton diverged from seed {seed.tolist()}", period=period)


def _orbit_points(model: MapLike, x: NDArray[np.float64], period: int) -> NDArray[np.float64]:
    pts = [x]
    for _ in range(period - 1):
        pts.append(model.evaluate(pts[-1]))
    return np.array(pts)


def _canonical(model: MapLike, x: NDArray[np.float64], period: int) -> PeriodicOrbit:
    """取轨道上字典序最小的点作为代表"""
    pts = _orbit_points(model, x, period)
    rep = min(pts, key=tuple)
    image = model.iterate_lift(rep, period)
    residual = torus_distance(project_to_torus(image), rep)
    translation = tuple(int(v) for v in np.round(image - rep))
    return PeriodicOrbit(rep, period, residual, translation, _orbit_points(model, rep, period))


def periodic_search(
    model: MapLike,
    max_period: int,
    newton_tolerance: float = 1e-13,
    hausdorff_tolerance: float = 1e-8,
    jobs: Optional[int] = None,
) -> PeriodicSearchResult:
    orbits: list[PeriodicOrbit] = []
    skipped = 0
    total = 0
    for period in range(1, max_period + 1):
        seeds = periodic_seeds(model.linear, period)
        total += len(seeds)

        def solve(seed, period=period):
            try:
                x, _ = _newton_periodic(model, seed, period, newton_tolerance)
            except (PeriodicOrbitError, np.linalg.LinAlgError) as e:
                logger.warning(f"periodic seed skipped: {e}")
                return None
            if minimal_period(model, x, period) != period:
                return False
            orbit = _canonical(model, x, period)
            return orbit if orbit.residual <= RESIDUAL_BOUND else None

        for result in parallel_map(solve, seeds, jobs=jobs, desc=f"period {period}"):
            if result is None:
                skipped += 1
            elif result is not False:
                if not any(
                    o.period == period and hausdorff_distance(o.points, result.points) < hausdorff_tolerance
                    for o in orbits
                ):
                    orbits.append(result)

    orbits.sort(key=lambda o: (o.period, tuple(o.point)))
    logger.info(f"periodic search up to period {max_period}: {len(orbits)} orbits, {skipped} seeds skipped")
    return PeriodicSearchResult(orbits, skipped, total)


def find_periodic_orbits(
    model: MapLike,
    max_period: int,
    newton_tolerance: float = 1e-13,
    hausdorff_tolerance: float = 1e-8,
    jobs: Optional[int] = None,
) -> list[PeriodicOrbit]:
    """周期 <= max_period 的全部周期轨道，按 (周期, 代表点) 排序"""
    return periodic_search(model, max_period, newton_tolerance, hausdorff_tolerance, jobs).orbits
