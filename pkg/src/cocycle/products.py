"""余圈乘积 A^n_x"""

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..dynamics import MapLike
from ..errors import CocycleError
from ..geometry import project_to_torus
from ..orbits import PeriodicOrbit, periodic_frames
from ..structure import OrbitTrack, backward_points, compute_splitting, forward_points
from .spec import CocycleSpec


@dataclass(frozen=True, eq=False)
class CocycleProduct:
    value: NDArray[np.float64]
    base: NDArray[np.float64]
    steps: int

    @property
    def determinant(self) -> float:
        return float(np.linalg.det(self.value))

    def to_dict(self) -> dict:
        return {"value": self.value.tolist(), "base": self.base.tolist(), "steps": self.steps}


def _forward_product(
    cocycle: CocycleSpec,
    model: MapLike,
    x: NDArray[np.float64],
    n: int,
    plane: NDArray[np.float64] | None,
) -> NDArray[np.float64]:
    points = forward_points(model, x, n)[:n]
    raws = cocycle.raw(points)
    if cocycle.fiber_dim == 2:
        out = np.eye(2)
        for raw in raws:
            out = raw @ out
        return out

    if plane is None:
        plane = compute_splitting(model, x).unstable_plane
    # W = Q R，Q 正交列；每步只对 Q 推前再做 QR
    q = cocycle.frame(cocycle.entry_plane(x, plane))
    r = np.eye(2)
    for raw in raws:
        q, step = np.linalg.qr(raw @ q)
        r = step @ r
    return cocycle.frame(q).T @ q @ r


def cocycle_eval(
    cocycle: CocycleSpec,
    model: MapLike,
    x: ArrayLike,
    n: int,
    plane: NDArray[np.float64] | None = None,
) -> CocycleProduct:
    """A^n_x；n < 0 时为 (A^{-n}_{f^n x})^{-1}，n = 0 时为单位阵"""
    x = project_to_torus(np.asarray(x, dtype=float))
    n = int(n)
    if n == 0:
        return CocycleProduct(np.eye(2), x, 0)
    if n > 0:
        value = _forward_product(cocycle, model, x, n, plane)
    else:
        start = backward_points(model, x, -n)[0]
        try:
            value = np.linalg.inv(_forward_product(cocycle, model, start, -n, None))
        except np.linalg.LinAlgError as e:
            raise CocycleError(f"cocycle product is singular at n = {n}", n=n) from e
    if not np.all(np.isfinite(value)):
        raise CocycleError(f"cocycle product overflowed at n = {n}", n=n)
    return CocycleProduct(cocycle.finalize(value), x, n)


def track_blocks(cocycle: CocycleSpec, model: MapLike, track: OrbitTrack) -> NDArray[np.float64]:
    """沿轨道的单步矩阵 A(x_t)，t = -backward .. forward-1"""
    points = track.points[:-1]
    raws = cocycle.raw(points)
    if cocycle.fiber_dim == 2:
        return np.asarray([cocycle.finalize(r) for r in raws])
    frames = np.array([cocycle.frame(cocycle.entry_plane(p, u)) for p, u in zip(track.points, track.unstable)])
    return np.array([cocycle.finalize(frames[i + 1].T @ raws[i] @ frames[i]) for i in range(len(points))])


def periodic_product(cocycle: CocycleSpec, model: MapLike, orbit: PeriodicOrbit) -> NDArray[np.float64]:
    """A^k_p 沿周期轨道，每个点用该点的精确平凡化"""
    points = orbit.points if len(orbit.points) == orbit.period else forward_points(model, orbit.point, orbit.period)[:-1]
    raws = cocycle.raw(points)
    if cocycle.fiber_dim == 2:
        blocks = list(raws)
    else:
        planes = periodic_frames(model, orbit).unstable
        frames = [cocycle.frame(cocycle.entry_plane(q, u)) for q, u in zip(points, planes)]
        k = len(points)
        blocks = [frames[(i + 1) % k].T @ raws[i] @ frames[i] for i in range(k)]
    total = np.eye(2)
    for block in blocks:
        total = block @ total
    return cocycle.finalize(total)
