"""双曲分裂 E^s ⊕ E^u 与全局平凡化标架

E^u 由线性不稳定平面沿后向轨道推前（逐步 Gram-Schmidt）得到，
E^s 由线性稳定方向沿前向轨道拉回得到。
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..dynamics import MapLike
from ..errors import FrameDegeneracyError, SplittingConvergenceError
from ..geometry import (
    PowerLawFit,
    fit_power_law,
    orthonormalize_pair,
    principal_angle,
    project_to_torus,
    rotation2,
    torus_distance,
)
from .memo import BoundedCache

logger = logging.getLogger(__name__)

FRAME_MIN_SINGULAR = 0.1
DEPTH_STEP = 8
FIRST_DEPTH = 16
FIXED_POINT_TOLERANCE = 1e-11


@dataclass(frozen=True, eq=False)
class OrbitTrack:
    """x_t, t ∈ [-backward, forward] 及其上的 E^u 标架与 E^s 方向；下标 i 对应 t = i - backward"""

    points: NDArray[np.float64]
    unstable: NDArray[np.float64]
    stable: NDArray[np.float64]
    backward: int
    forward: int

    def index(self, t: int) -> int:
        return t + self.backward

    def point(self, t: int) -> NDArray[np.float64]:
        return self.points[self.index(t)]

    def plane(self, t: int) -> NDArray[np.float64]:
        return self.unstable[self.index(t)]

    def line(self, t: int) -> NDArray[np.float64]:
        return self.stable[self.index(t)]


@dataclass(frozen=True, eq=False)
class Splitting:
    point: NDArray[np.float64]
    stable_direction: NDArray[np.float64]
    unstable_plane: NDArray[np.float64]
    unstable_frame: NDArray[np.float64]
    convergence_residual: float
    depth: int

    def to_dict(self) -> dict:
        return {
            "point": self.point.tolist(),
            "stable_direction": self.stable_direction.tolist(),
            "unstable_frame": self.unstable_frame.T.tolist(),
            "convergence_residual": self.convergence_residual,
            "depth": self.depth,
        }


def _orient_like(v: NDArray[np.float64], reference: NDArray[np.float64]) -> NDArray[np.float64]:
    v = v / np.linalg.norm(v)
    return -v if float(v @ reference) < 0 else v


def _fixed_orbit(model: MapLike, x: NDArray[np.float64], steps: int) -> Optional[NDArray[np.float64]]:
    """不动点的轨道取常值序列"""
    if torus_distance(model.evaluate(x), x) > FIXED_POINT_TOLERANCE:
        return None
    return np.repeat(x[None, :], steps + 1, axis=0)


def backward_points(model: MapLike, x: ArrayLike, steps: int) -> NDArray[np.float64]:
    """[x_{-steps}, ..., x_0]"""
    x = project_to_torus(np.asarray(x, dtype=float))
    fixed = _fixed_orbit(model, x, steps)
    if fixed is not None:
        return fixed
    pts = [x]
    for _ in range(steps):
        pts.append(model.inverse_evaluate(pts[-1]))
    return np.array(pts[::-1])


def forward_points(model: MapLike, x: ArrayLike, steps: int) -> NDArray[np.float64]:
    """[x_0, ..., x_steps]"""
    x = project_to_torus(np.asarray(x, dtype=float))
    fixed = _fixed_orbit(model, x, steps)
    if fixed is not None:
        return fixed
    pts = [x]
    for _ in range(steps):
        pts.append(model.evaluate(pts[-1]))
    return np.array(pts)


def push_plane(model: MapLike, points: NDArray[np.float64], frame: NDArray[np.float64]) -> NDArray[np.float64]:
    """沿 points 推前 3x2 标架，返回每个点上的正交标架"""
    out = np.empty((len(points), 3, 2))
    out[0] = orthonormalize_pair(frame)
    for i in range(1, len(points)):
        out[i] = orthonormalize_pair(model.differential(points[i - 1]) @ out[i - 1])
    return out


def pull_line(model: MapLike, points: NDArray[np.float64], vector: NDArray[np.float64]) -> NDArray[np.float64]:
    """沿 points 从末端拉回方向向量，返回每个点上的单位向量"""
    reference = np.asarray(vector, dtype=float)
    out = np.empty((len(points), 3))
    out[-1] = _orient_like(reference, reference)
    for i in range(len(points) - 2, -1, -1):
        v = np.linalg.solve(model.differential(points[i]), out[i + 1])
        out[i] = _orient_like(v, reference)
    return out


def track_orbit(model: MapLike, x: ArrayLike, backward: int, forward: int, warmup: int = 48) -> OrbitTrack:
    """沿轨道计算分裂；两端各多走 warmup 步使标架收敛"""
    lin = model.linear
    back = backward_points(model, x, backward + warmup)
    fwd = forward_points(model, x, forward + warmup)
    points = np.concatenate([back, fwd[1:]])
    planes = push_plane(model, points, lin.unstable_frame)
    lines = pull_line(model, points, lin.stable_direction)
    lo, hi = warmup, len(points) - warmup
    return OrbitTrack(
        points=points[lo:hi],
        unstable=planes[lo:hi],
        stable=lines[lo:hi],
        backward=backward,
        forward=forward,
    )


def frame_from_plane(plane: ArrayLike, reference: ArrayLike, rotation: float = 0.0) -> NDArray[np.float64]:
    """Φ_x: 参考标架 E0 正交投影到平面后 Gram-Schmidt，再右乘 R_θ"""
    u = orthonormalize_pair(np.asarray(plane, dtype=float))
    reference = np.asarray(reference, dtype=float)
    coords = np.swapaxes(u, -1, -2) @ reference
    sigma = np.linalg.svd(coords, compute_uv=False)[..., -1]
    if np.any(sigma < FRAME_MIN_SINGULAR):
        raise FrameDegeneracyError(
            f"projected reference frame degenerate (smallest singular value {float(np.min(sigma)):.3e})",
            smallest_singular_value=float(np.min(sigma)),
        )
    frame = orthonormalize_pair(u @ coords)
    if rotation:
        frame = frame @ rotation2(rotation)
    return frame


SPLITTING_CACHE_SIZE = 4096
_SPLITTING_CACHE: BoundedCache[Splitting] = BoundedCache(SPLITTING_CACHE_SIZE)


def clear_splitting_cache() -> None:
    _SPLITTING_CACHE.clear()


def compute_splitting(
    model: MapLike,
    x: ArrayLike,
    n: int = 96,
    tolerance: float = 1e-10,
    rotation: float = 0.0,
) -> Splitting:
    """加深迭代直到相邻两次的主角差 < tolerance"""
    x = project_to_torus(np.asarray(x, dtype=float))
    key = (model.fingerprint, tuple(np.round(x, 14)), n, tolerance, rotation)
    cached = _SPLITTING_CACHE.get(key)
    if cached is not None:
        return cached

    lin = model.linear
    back = backward_points(model, x, n)
    fwd = forward_points(model, x, n)
    previous = None
    residual = np.inf
    depth = FIRST_DEPTH
    while depth <= n:
        plane = push_plane(model, back[n - depth:], lin.unstable_frame)[-1]
        line = pull_line(model, fwd[: depth + 1], lin.stable_direction)[0]
        if previous is not None:
            residual = max(principal_angle(plane, previous[0]), principal_angle(line, previous[1]))
            logger.debug(f"splitting depth {depth}: residual {residual:.3e}")
            if residual < tolerance:
                break
        previous = (plane, line)
        depth += DEPTH_STEP
    else:
        raise SplittingConvergenceError(
            f"splitting did not converge within {n} steps (residual {residual:.3e})",
            residual=float(residual),
            point=x.tolist(),
        )

    result = Splitting(
        point=x,
        stable_direction=line,
        unstable_plane=plane,
        unstable_frame=frame_from_plane(plane, lin.unstable_frame, rotation),
        convergence_residual=float(residual),
        depth=depth,
    )
    return _SPLITTING_CACHE.setdefault(key, result)


def invariance_defect(model: MapLike, x: ArrayLike, n: int = 96, tolerance: float = 1e-10) -> float:
    """max(∠(Df E^u(x), E^u(fx)), ∠(Df E^s(x), E^s(fx)))"""
    here = compute_splitting(model, x, n, tolerance)
    there = compute_splitting(model, model.evaluate(here.point), n, tolerance)
    jac = model.differential(here.point)
    return max(
        principal_angle(jac @ here.unstable_plane, there.unstable_plane),
        principal_angle(jac @ here.stable_direction, there.stable_direction),
    )


def splitting_hoelder_fit(model: MapLike, pairs: list[tuple[ArrayLike, ArrayLike]], n: int = 96) -> PowerLawFit:
    """拟合 ∠(E^u(x), E^u(y)) ≤ K d(x, y)^β"""
    distances, angles = [], []
    for x, y in pairs:
        sx = compute_splitting(model, x, n)
        sy = compute_splitting(model, y, n)
        distances.append(torus_distance(sx.point, sy.point))
        angles.append(principal_angle(sx.unstable_plane, sy.unstable_plane))
    return fit_power_law(distances, angles)
