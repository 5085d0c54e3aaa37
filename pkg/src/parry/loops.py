"""同宿回路与 Parry 字"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..dynamics import MapLike
from ..errors import NumericalError, WordError
from ..structure import HomoclinicPoint, Leg, UsPath, build_us_loop, homoclinic_points

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class HomoclinicLoop:
    """u-腿 p→z，s-腿 z→p"""

    base: NDArray[np.float64]
    z: HomoclinicPoint
    path: UsPath

    @property
    def point(self) -> NDArray[np.float64]:
        return self.z.point

    def unstable_offsets(self) -> NDArray[np.float64]:
        """z_{-k} - p，k = 0..depth"""
        return self.z.u_pair.offsets

    def stable_offsets(self) -> NDArray[np.float64]:
        """z_k - p，k = 0..depth"""
        return self.z.s_pair.offsets

    def to_dict(self) -> dict:
        return {"base": self.base.tolist(), "homoclinic": self.z.to_dict(), "path": self.path.to_dict()}


def parry_loops(
    model: MapLike,
    p: ArrayLike,
    count: int = 4,
    lattice_radius: int = 2,
    min_distance: float = 1e-3,
    tolerance: float = 1e-6,
) -> list[HomoclinicLoop]:
    """按到 p 的距离排序的前 count 个同宿点各给出一条回路"""
    points = homoclinic_points(model, p, count=count, lattice_radius=lattice_radius, min_distance=min_distance)
    loops = []
    for z in points:
        try:
            path = build_us_loop(model, z.base, z, min_distance, tolerance)
        except NumericalError as e:
            logger.warning(f"homoclinic loop through {z.point.tolist()} rejected: {e}")
            continue
        loops.append(HomoclinicLoop(z.base, z, path))
    logger.info(f"registered {len(loops)} homoclinic loops at {np.round(points[0].base, 6).tolist() if points else p}")
    return loops


@dataclass(frozen=True)
class ParryWord:
    """字母 (生成元下标, ±1)，按列表顺序走，值为 ρ(ℓ_k)⋯ρ(ℓ_1)"""

    letters: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if not self.letters:
            raise WordError("a Parry word needs at least one letter")
        for index, exponent in self.letters:
            if exponent not in (1, -1) or index < 0:
                raise WordError(f"invalid letter ({index}, {exponent})", letter=[index, exponent])

    @classmethod
    def parse(cls, signed: Sequence[int]) -> "ParryWord":
        """[1, -2] 表示 γ_1 之后走 γ_2^{-1}（下标从 1 开始）"""
        if any(v == 0 for v in signed):
            raise WordError("letter 0 is not a generator; indices start at 1", word=list(signed))
        return cls(tuple((abs(int(v)) - 1, 1 if v > 0 else -1) for v in signed))

    @property
    def label(self) -> str:
        return " ".join(f"g{i + 1}" if e > 0 else f"g{i + 1}^-1" for i, e in self.letters)

    @property
    def is_positive(self) -> bool:
        return all(e > 0 for _, e in self.letters)

    def inverse(self) -> "ParryWord":
        return ParryWord(tuple((i, -e) for i, e in reversed(self.letters)))

    def then(self, other: "ParryWord") -> "ParryWord":
        """先走 self 再走 other"""
        return ParryWord(self.letters + other.letters)

    def check(self, size: int) -> None:
        for index, _ in self.letters:
            if index >= size:
                raise WordError(f"letter g{index + 1} references one of only {size} generators", size=size)

    def to_list(self) -> list[int]:
        return [(i + 1) * e for i, e in self.letters]


def word_path(loops: Sequence[HomoclinicLoop], word: ParryWord) -> UsPath:
    """字对应的 us-回路（逆字母走反向回路）"""
    word.check(len(loops))
    legs: list[Leg] = []
    for index, exponent in word.letters:
        path = loops[index].path
        legs.extend((path if exponent > 0 else path.reversed()).legs)
    return UsPath(tuple(legs))
