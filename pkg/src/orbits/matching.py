"""两个映射之间的周期数据匹配"""

import logging
from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from ..dynamics import AnosovMapModel, ConjugacyMapSpec, MapLike
from ..errors import CorrespondenceError, PeriodicOrbitError
from ..geometry import hausdorff_distance, project_to_torus, torus_distance
from .search import PeriodicOrbit, _canonical, _newton_periodic, minimal_period

logger = logging.getLogger(__name__)

Correspondence = Literal["identity", "conjugacy", "continuation"]


@dataclass(frozen=True)
class MatchRow:
    period: int
    point_f: list[float]
    point_g: Optional[list[float]]
    coefficients_f: list[float]
    coefficients_g: Optional[list[float]]
    deviation: Optional[float]
    status: Literal["matched", "mismatch", "unmatched"]


@dataclass(frozen=True)
class MatchingReport:
    mode: Correspondence
    rows: list[MatchRow]
    max_deviation: float
    tolerance: float
    passed: bool
    flagged: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "flagged": self.flagged,
            "rows": [row.__dict__ for row in self.rows],
        }


def characteristic_coefficients(model: MapLike, point: NDArray[np.float64], period: int) -> NDArray[np.float64]:
    """D_p f^k 的特征多项式系数"""
    _, jac = model.iterate_with_jacobian(point, period)
    return np.poly(jac).real


def continue_orbit(
    start: AnosovMapModel,
    end: AnosovMapModel,
    orbit: PeriodicOrbit,
    steps: int = 8,
    tolerance: float = 1e-13,
) -> NDArray[np.float64]:
    """扰动线性插值 (1-s) P_f + s P_g，逐步 Newton 延拓周期点"""
    if not np.array_equal(start.linear.integer_matrix, end.linear.integer_matrix):
        raise CorrespondenceError("continuation needs two models with the same linear part")
    x = orbit.point
    for i in range(1, steps + 1):
        s = i / steps
        perturbation = start.perturbation.scaled(1.0 - s).combined(end.perturbation.scaled(s))
        model = start.with_perturbation(perturbation)
        x, _ = _newton_periodic(model, x, orbit.period, tolerance)
    return x


def _corresponding_points(
    f: MapLike,
    g: MapLike,
    orbits: Sequence[PeriodicOrbit],
    mode: Correspondence,
    conjugacy: Optional[ConjugacyMapSpec],
    steps: int,
) -> list[Optional[NDArray[np.float64]]]:
    if mode == "identity":
        return [o.point for o in orbits]
    if mode == "conjugacy":
        if conjugacy is None:
            raise CorrespondenceError("conjugacy correspondence needs the conjugating map h")
        return [conjugacy.evaluate(o.point) for o in orbits]
    if not isinstance(f, AnosovMapModel) or not isinstance(g, AnosovMapModel):
        raise CorrespondenceError("continuation correspondence needs two perturbation models")

    images: list[Optional[NDArray[np.float64]]] = []
    for o in orbits:
        try:
            images.append(continue_orbit(f, g, o, steps))
        except PeriodicOrbitError as e:
            logger.warning(f"continuation lost the orbit at {o.point.tolist()}: {e}")
            images.append(None)
    return images


def matching_data_report(
    f: MapLike,
    g: MapLike,
    correspondence: Correspondence,
    orbits: Sequence[PeriodicOrbit],
    conjugacy: Optional[ConjugacyMapSpec] = None,
    tolerance: float = 1e-7,
    steps: int = 8,
) -> MatchingReport:
    """逐轨道比较 D_p f^k 与 D_q g^k 的特征多项式"""
    images = _corresponding_points(f, g, orbits, correspondence, conjugacy, steps)
    canon: list[Optional[PeriodicOrbit]] = []
    for orbit, q in zip(orbits, images):
        if q is None:
            canon.append(None)
            continue
        q = project_to_torus(q)
        closing = torus_distance(project_to_torus(g.iterate_lift(q, orbit.period)), q)
        period_g = minimal_period(g, q, orbit.period) if closing <= 1e-8 else None
        if period_g != orbit.period:
            raise CorrespondenceError(
                f"orbit of period {orbit.period} paired with a point of period {period_g}",
                point=orbit.point.tolist(),
            )
        canon.append(_canonical(g, q, orbit.period))

    # 两条轨道延拓到同一条轨道视为碰撞，不做猜测
    for i, a in enumerate(canon):
        for j in range(i + 1, len(canon)):
            b = canon[j]
            if a is not None and b is not None and a.period == b.period:
                if hausdorff_distance(a.points, b.points) < 1e-8:
                    logger.warning(f"orbit collision between rows {i} and {j}; both marked unmatched")
                    canon[i] = canon[j] = None

    rows: list[MatchRow] = []
    for orbit, q_orbit, image in zip(orbits, canon, images):
        coeff_f = characteristic_coefficients(f, orbit.point, orbit.period)
        if q_orbit is None:
            rows.append(MatchRow(orbit.period, orbit.point.tolist(), None, coeff_f.tolist(), None, None, "unmatched"))
            continue
        q = project_to_torus(image)
        coeff_g = characteristic_coefficients(g, q, orbit.period)
        deviation = float(np.max(np.abs(coeff_f - coeff_g)))
        status = "matched" if deviation <= tolerance else "mismatch"
        rows.append(MatchRow(orbit.period, orbit.point.tolist(), q.tolist(), coeff_f.tolist(), coeff_g.tolist(), deviation, status))

    flagged = [i for i, row in enumerate(rows) if row.status != "matched"]
    finite = [row.deviation for row in rows if row.status != "unmatched"]
    max_deviation = float(max(finite)) if finite else 0.0
    passed = not flagged
    logger.info(f"matching data ({correspondence}): max deviation {max_deviation:.3e}, {len(flagged)} flagged")
    return MatchingReport(correspondence, rows, max_deviation, tolerance, passed, flagged)
