"""叶片隶属检验与 us-路径"""

import logging
import math
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..dynamics import MapLike
from ..errors import LeafCertificationError
from ..geometry import project_to_torus, torus_delta, torus_distance
from .charts import LeafPair

logger = logging.getLogger(__name__)

LegKind = Literal["s", "u"]

EXTRA_STEPS = 12
ENDPOINT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class MembershipResult:
    kind: LegKind
    passed: bool
    initial_distance: float
    min_distance: float
    steps: int


def contraction_rate(model: MapLike) -> float:
    """线性部分的单步最慢收缩率 max(|λ_s|, 1/|λ_u|min)"""
    lin = model.linear
    return max(abs(lin.stable_eigenvalue), 1.0 / lin.unstable_moduli[0])


def leaf_membership(
    model: MapLike,
    x: ArrayLike,
    kind: LegKind,
    y: Optional[ArrayLike] = None,
    displacement: Optional[ArrayLike] = None,
    tolerance: float = 1e-6,
) -> MembershipResult:
    """y ∈ W^s(x)（或 W^u(x)）当且仅当迭代距离在 n* + 12 步内降到 tolerance 以下

    n* = ceil(log(tol / d0) / log(rate))；差分用精确差分映射迭代。
    """
    x = project_to_torus(np.asarray(x, dtype=float))
    if displacement is None:
        if y is None:
            raise ValueError("leaf_membership needs y or a displacement")
        displacement = torus_delta(x, y)
    delta = np.asarray(displacement, dtype=float)
    d0 = float(np.linalg.norm(delta))
    if d0 <= tolerance:
        return MembershipResult(kind, True, d0, d0, 0)

    steps = math.ceil(math.log(tolerance / d0) / math.log(contraction_rate(model))) + EXTRA_STEPS
    best = d0
    point = x
    for _ in range(steps):
        if kind == "s":
            delta = model.difference(point, delta)
            point = model.evaluate(point)
        else:
            point = model.inverse_evaluate(point)
            delta = model.inverse_difference(point, delta)
        best = min(best, float(np.linalg.norm(delta)))
        if best <= tolerance:
            break
    passed = best <= tolerance
    if not passed:
        logger.debug(f"{kind}-membership failed: d0 {d0:.3e}, min distance {best:.3e} after {steps} steps")
    return MembershipResult(kind, passed, d0, best, steps)


def pair_membership(pair: LeafPair, tolerance: float = 1e-6) -> MembershipResult:
    """用坐标卡记录的伙伴轨道做隶属检验（长腿不再迭代差分）"""
    kind: LegKind = "s" if pair.kind == "stable" else "u"
    distances = np.linalg.norm(pair.offsets, axis=-1)
    best = float(np.min(distances))
    return MembershipResult(kind, best <= tolerance, float(distances[0]), best, len(distances) - 1)


@dataclass(frozen=True, eq=False)
class Leg:
    """us-路径的一段: start 与 end 在同一 s- 或 u-叶片上

    displacement 是 end - start 的提升；pair 若存在，以 start（pair_at_end 时以 end）为基点。
    """

    kind: LegKind
    start: NDArray[np.float64]
    end: NDArray[np.float64]
    displacement: NDArray[np.float64]
    pair: Optional[LeafPair] = None
    pair_at_end: bool = False

    @classmethod
    def from_pair(cls, pair: LeafPair, reverse: bool = False) -> "Leg":
        kind: LegKind = "s" if pair.kind == "stable" else "u"
        base, partner = pair.base, pair.partner
        if reverse:
            return cls(kind, partner, base, -pair.displacement, pair, pair_at_end=True)
        return cls(kind, base, partner, pair.displacement, pair)

    @classmethod
    def local(cls, kind: LegKind, start: ArrayLike, end: ArrayLike) -> "Leg":
        start = project_to_torus(np.asarray(start, dtype=float))
        end = project_to_torus(np.asarray(end, dtype=float))
        return cls(kind, start, end, torus_delta(start, end))

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.displacement))

    def reversed(self) -> "Leg":
        return Leg(self.kind, self.end, self.start, -self.displacement, self.pair, not self.pair_at_end)

    def separation(self) -> Optional[tuple[NDArray[np.float64], NDArray[np.float64]]]:
        """(start 的轨道, end - start 沿轨道的偏移)；没有 pair 时返回 None"""
        if self.pair is None:
            return None
        if self.pair_at_end:
            return self.pair.orbit + self.pair.offsets, -self.pair.offsets
        return self.pair.orbit, self.pair.offsets

    def certify(self, model: MapLike, tolerance: float = 1e-6) -> MembershipResult:
        if self.pair is not None:
            return pair_membership(self.pair, tolerance)
        return leaf_membership(model, self.start, self.kind, displacement=self.displacement, tolerance=tolerance)

    def pushed(self, model: MapLike) -> "Leg":
        """f(γ): 端点取像，位移用精确差分推前"""
        return Leg(
            self.kind,
            model.evaluate(self.start),
            model.evaluate(self.end),
            model.difference(self.start, self.displacement),
        )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "start": self.start.tolist(),
            "end": self.end.tolist(),
            "displacement": self.displacement.tolist(),
        }


def _check_joint(first: Leg, second: Leg) -> None:
    gap = torus_distance(first.end, second.start)
    if gap > ENDPOINT_TOLERANCE:
        raise LeafCertificationError(f"consecutive legs do not share an endpoint (gap {gap:.3e})", gap=gap)


@dataclass(frozen=True, eq=False)
class UsPath:
    legs: tuple[Leg, ...]
    certificates: list[MembershipResult] = field(default_factory=list)

    def __post_init__(self):
        if not self.legs:
            raise LeafCertificationError("empty us-path")
        object.__setattr__(self, "legs", tuple(self.legs))
        for first, second in zip(self.legs, self.legs[1:]):
            _check_joint(first, second)

    @property
    def start(self) -> NDArray[np.float64]:
        return self.legs[0].start

    @property
    def end(self) -> NDArray[np.float64]:
        return self.legs[-1].end

    @property
    def is_loop(self) -> bool:
        return torus_distance(self.start, self.end) <= ENDPOINT_TOLERANCE

    def certify(self, model: MapLike, tolerance: float = 1e-6) -> "UsPath":
        """逐腿检验；返回带证书的同一路径"""
        results = [leg.certify(model, tolerance) for leg in self.legs]
        for i, result in enumerate(results):
            if not result.passed:
                raise LeafCertificationError(
                    f"leg {i} ({result.kind}) failed membership: min distance {result.min_distance:.3e}",
                    leg=i,
                    min_distance=result.min_distance,
                )
        return UsPath(self.legs, results)

    def reversed(self) -> "UsPath":
        return UsPath(tuple(leg.reversed() for leg in reversed(self.legs)))

    def pushed(self, model: MapLike) -> "UsPath":
        return UsPath(tuple(leg.pushed(model) for leg in self.legs))

    def to_dict(self) -> dict:
        return {"legs": [leg.to_dict() for leg in self.legs]}


def concatenate(first: UsPath, second: UsPath) -> UsPath:
    """先走 first 再走 second"""
    _check_joint(first.legs[-1], second.legs[0])
    return UsPath(first.legs + second.legs)


@dataclass(frozen=True, eq=False)
class QuadrilateralSpec:
    """x2 ∈ W^s(x1) ∩ W^u(x3)，x4 ∈ W^u(x1) ∩ W^s(x3)

    腿依次为 x1→x2 (s)、x2→x3 (u)、x3→x4 (s)、x4→x1 (u)。
    """

    x1: NDArray[np.float64]
    x2: NDArray[np.float64]
    x3: NDArray[np.float64]
    x4: NDArray[np.float64]
    legs: tuple[Leg, Leg, Leg, Leg]

    def __post_init__(self):
        kinds = tuple(leg.kind for leg in self.legs)
        if kinds != ("s", "u", "s", "u"):
            raise LeafCertificationError(f"quadrilateral legs must alternate s,u,s,u; got {kinds}")
        corners = (self.x1, self.x2, self.x3, self.x4, self.x1)
        for leg, a, b in zip(self.legs, corners, corners[1:]):
            if torus_distance(leg.start, a) > ENDPOINT_TOLERANCE or torus_distance(leg.end, b) > ENDPOINT_TOLERANCE:
                raise LeafCertificationError("quadrilateral legs do not match the corners")

    @classmethod
    def from_legs(cls, legs: tuple[Leg, Leg, Leg, Leg]) -> "QuadrilateralSpec":
        return cls(legs[0].start, legs[1].start, legs[2].start, legs[3].start, tuple(legs))

    def as_path(self) -> UsPath:
        return UsPath(self.legs)

    def validate(self, model: MapLike, tolerance: float = 1e-6) -> UsPath:
        return self.as_path().certify(model, tolerance)
