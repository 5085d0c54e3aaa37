"""局部叶片坐标卡

精确坐标卡: 不稳定叶片上的点由后向轨道深处的切向种子
δ_{-n} = D^u f^{-n} Φ_x s 经精确差分推前得到；稳定叶片对称地用逆差分拉回。
每次求值同时给出伙伴点整条轨道的偏移（leaf pair）和对参数的 Jacobian。
多项式坐标卡 LeafChart 是对精确坐标卡的 7 次拟合，带尾项界。
"""

import logging
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from numpy.polynomial import chebyshev
from numpy.typing import ArrayLike, NDArray

from ..dynamics import MapLike
from ..errors import ChartRadiusError, LeafCertificationError
from ..geometry import principal_angle, project_to_torus
from .memo import BoundedCache
from .splitting import frame_from_plane, track_orbit

logger = logging.getLogger(__name__)

LeafKind = Literal["stable", "unstable"]

GAUSS_NEWTON_STEPS = 40


@dataclass(frozen=True, eq=False)
class ChartBase:
    """坐标卡的轨道数据；下标 k 对应 x_{-k}（不稳定）或 x_k（稳定）"""

    base: NDArray[np.float64]
    kind: LeafKind
    points: NDArray[np.float64]
    frames: NDArray[np.float64]
    frame: NDArray[np.float64]

    @property
    def dim(self) -> int:
        return self.frame.shape[1]

    @property
    def depth(self) -> int:
        return len(self.points) - 1


@dataclass(frozen=True, eq=False)
class LeafPair:
    """x 与同一叶片上伙伴点 y = x + displacement 的轨道对

    offsets[k] 是 y 与 x 在时刻 -k（不稳定）或 k（稳定）的提升差。
    """

    base: NDArray[np.float64]
    kind: LeafKind
    parameter: NDArray[np.float64]
    displacement: NDArray[np.float64]
    jacobian: NDArray[np.float64]
    offsets: NDArray[np.float64]
    orbit: NDArray[np.float64]

    @property
    def partner(self) -> NDArray[np.float64]:
        return project_to_torus(self.base + self.displacement)

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.displacement))


BASE_CACHE_SIZE = 512
CHART_CACHE_SIZE = 1024
_BASE_CACHE: BoundedCache[ChartBase] = BoundedCache(BASE_CACHE_SIZE)


def clear_chart_cache() -> None:
    _BASE_CACHE.clear()
    _CHART_CACHE.clear()


def project_along(plane: NDArray[np.float64], line: NDArray[np.float64], v: NDArray[np.float64]) -> NDArray[np.float64]:
    """沿 E^s 把 v 投影到 E^u"""
    basis = np.column_stack([plane, line])
    coords = np.linalg.solve(basis, v)
    return plane @ coords[:2]


def unstable_chart_base(
    model: MapLike, x: ArrayLike, depth: int = 260, warmup: int = 48, rotation: float = 0.0
) -> ChartBase:
    x = project_to_torus(np.asarray(x, dtype=float))
    track = track_orbit(model, x, backward=depth, forward=0, warmup=warmup)
    points = track.points[::-1]
    planes = track.unstable[::-1]
    lines = track.stable[::-1]
    frames = np.empty((depth + 1, 3, 2))
    frames[0] = frame_from_plane(planes[0], model.linear.unstable_frame, rotation)
    for k in range(1, depth + 1):
        pulled = np.linalg.solve(model.differential(points[k]), frames[k - 1])
        frames[k] = project_along(planes[k], lines[k], pulled)
    return ChartBase(base=x, kind="unstable", points=points, frames=frames, frame=frames[0])


def stable_chart_base(model: MapLike, x: ArrayLike, depth: int = 260, warmup: int = 48) -> ChartBase:
    x = project_to_torus(np.asarray(x, dtype=float))
    track = track_orbit(model, x, backward=0, forward=depth, warmup=warmup)
    points = track.points
    lines = track.stable
    scale = np.ones(depth + 1)
    for k in range(1, depth + 1):
        scale[k] = scale[k - 1] * float(lines[k] @ model.differential(points[k - 1]) @ lines[k - 1])
    frames = (scale[:, None] * lines)[:, :, None]
    return ChartBase(base=x, kind="stable", points=points, frames=frames, frame=lines[0][:, None])


def chart_base(
    model: MapLike, x: ArrayLike, kind: LeafKind, depth: int = 260, warmup: int = 48, rotation: float = 0.0
) -> ChartBase:
    """带缓存的坐标卡轨道数据；重复写入相同键是幂等的"""
    x = project_to_torus(np.asarray(x, dtype=float))
    key = (model.fingerprint, kind, tuple(np.round(x, 14)), depth, warmup, rotation)
    cached = _BASE_CACHE.get(key)
    if cached is not None:
        return cached
    if kind == "unstable":
        built = unstable_chart_base(model, x, depth, warmup, rotation)
    elif kind == "stable":
        built = stable_chart_base(model, x, depth, warmup)
    else:
        raise ValueError(f"unknown leaf kind: {kind}")
    return _BASE_CACHE.setdefault(key, built)


def evaluate_chart(
    model: MapLike, cb: ChartBase, params: ArrayLike, seed_threshold: float = 1e-12
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    """批量求值精确坐标卡

    Returns:
        (位移 (N,3), Jacobian (N,3,d), 轨道偏移 (K+1,N,3))
    """
    params = np.asarray(params, dtype=float).reshape(-1, cb.dim)
    seeds = np.einsum("kid,nd->kni", cb.frames, params)
    sizes = np.max(np.linalg.norm(seeds, axis=-1), axis=1)
    small = np.flatnonzero(sizes <= seed_threshold)
    if len(small) == 0:
        deepest = float(np.linalg.norm(cb.frames[-1], 2))
        raise ChartRadiusError(
            f"{cb.kind} chart parameter too large for depth {cb.depth}",
            max_certified_radius=seed_threshold / max(deepest, 1e-300),
        )
    n = int(small[0])

    offsets = seeds.copy()
    delta = seeds[n]
    jac = np.broadcast_to(cb.frames[n], (len(params), 3, cb.dim)).copy()
    for k in range(n, 0, -1):
        if cb.kind == "unstable":
            jac = model.differential(cb.points[k] + delta) @ jac
            delta = model.difference(cb.points[k], delta)
        else:
            delta = model.inverse_difference(cb.points[k - 1], delta)
            jac = np.linalg.solve(model.differential(cb.points[k - 1] + delta), jac)
        offsets[k - 1] = delta
    return delta, jac, offsets


def _make_pair(cb: ChartBase, parameter, delta, jac, offsets) -> LeafPair:
    return LeafPair(
        base=cb.base,
        kind=cb.kind,
        parameter=np.asarray(parameter, dtype=float).reshape(cb.dim),
        displacement=delta,
        jacobian=jac,
        offsets=offsets,
        orbit=cb.points,
    )


def leaf_pair(
    model: MapLike,
    x: ArrayLike,
    kind: LeafKind,
    parameter: Optional[ArrayLike] = None,
    displacement: Optional[ArrayLike] = None,
    depth: int = 260,
    warmup: int = 48,
    seed_threshold: float = 1e-12,
    tolerance: float = 1e-10,
) -> LeafPair:
    """给定参数或提升位移，返回叶片上的伙伴点及其轨道

    给定位移时用 Gauss-Newton 求参数；残差超过 tolerance 说明伙伴点不在叶片上。
    """
    cb = chart_base(model, x, kind, depth, warmup)
    if parameter is not None:
        delta, jac, offsets = evaluate_chart(model, cb, parameter, seed_threshold)
        return _make_pair(cb, parameter, delta[0], jac[0], offsets[:, 0])
    if displacement is None:
        raise ValueError("leaf_pair needs a parameter or a displacement")

    target = np.asarray(displacement, dtype=float)
    param = np.linalg.lstsq(cb.frame, target, rcond=None)[0]
    residual = np.inf
    for _ in range(GAUSS_NEWTON_STEPS):
        delta, jac, offsets = evaluate_chart(model, cb, param, seed_threshold)
        r = delta[0] - target
        residual = float(np.linalg.norm(r))
        step = np.linalg.lstsq(jac[0], r, rcond=None)[0]
        param = param - step
        if np.linalg.norm(step) <= 1e-15 * (1.0 + np.linalg.norm(param)):
            break
    delta, jac, offsets = evaluate_chart(model, cb, param, seed_threshold)
    residual = float(np.linalg.norm(delta[0] - target))
    if residual > tolerance:
        raise LeafCertificationError(
            f"point is not on the {kind} leaf (residual {residual:.3e})",
            residual=residual,
            base=cb.base.tolist(),
        )
    return _make_pair(cb, param, delta[0], jac[0], offsets[:, 0])


def _monomials(uv: NDArray[np.float64], degree: int) -> NDArray[np.float64]:
    """总次数 <= degree 的单项式 u^i v^j"""
    cols = []
    for total in range(degree + 1):
        for i in range(total, -1, -1):
            cols.append(uv[:, 0] ** i * uv[:, 1] ** (total - i))
    return np.column_stack(cols)


def _sample_nodes(dim: int, degree: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """单位区间/单位圆盘上的拟合节点与独立检验节点"""
    if dim == 1:
        count = 4 * (degree + 1)
        fit = np.cos(np.pi * np.arange(count) / (count - 1))
        check = np.cos(np.pi * (np.arange(count - 1) + 0.5) / (count - 1))
        return fit[:, None], check[:, None]
    rings, spokes = 8, 16
    angles = 2.0 * np.pi * np.arange(spokes) / spokes

    def disc(radii, shift):
        r, a = np.meshgrid(radii, angles + shift, indexing="ij")
        return np.column_stack([(r * np.cos(a)).ravel(), (r * np.sin(a)).ravel()])

    fit = np.vstack([np.zeros((1, 2)), disc(np.sqrt((np.arange(rings) + 0.5) / rings), 0.0)])
    check = disc(np.sqrt((np.arange(rings) + 1.0) / rings), np.pi / spokes)
    return fit, check


@dataclass(frozen=True, eq=False)
class LeafChart:
    """W_loc 的多项式参数化；参数取自切空间内半径 radius 的圆盘（或区间）"""

    base: NDArray[np.float64]
    kind: LeafKind
    radius: float
    degree: int
    coefficients: NDArray[np.float64]
    frame: NDArray[np.float64]
    tail_bound: float
    tangency_residual: float

    def _design(self, params: ArrayLike) -> NDArray[np.float64]:
        u = np.asarray(params, dtype=float).reshape(-1, self.frame.shape[1]) / self.radius
        if self.frame.shape[1] == 1:
            return chebyshev.chebvander(u[:, 0], self.degree)
        return _monomials(u, self.degree)

    def displacement(self, params: ArrayLike) -> NDArray[np.float64]:
        return self._design(params) @ self.coefficients

    def evaluate(self, params: ArrayLike) -> NDArray[np.float64]:
        return project_to_torus(self.base + self.displacement(params))

    def to_dict(self) -> dict:
        return {
            "base": self.base.tolist(),
            "kind": self.kind,
            "radius": self.radius,
            "degree": self.degree,
            "frame": self.frame.T.tolist(),
            "tail_bound": self.tail_bound,
            "tangency_residual": self.tangency_residual,
        }


def _fit_chart(model: MapLike, cb: ChartBase, radius: float, degree: int, seed_threshold: float) -> LeafChart:
    fit_nodes, check_nodes = _sample_nodes(cb.dim, degree)
    fit_values = evaluate_chart(model, cb, fit_nodes * radius, seed_threshold)[0]
    check_values = evaluate_chart(model, cb, check_nodes * radius, seed_threshold)[0]
    if cb.dim == 1:
        design = chebyshev.chebvander(fit_nodes[:, 0], degree)
    else:
        design = _monomials(fit_nodes, degree)
    coefficients = np.linalg.lstsq(design, fit_values, rcond=None)[0]

    chart = LeafChart(cb.base, cb.kind, radius, degree, coefficients, cb.frame, 0.0, 0.0)
    tail = float(np.max(np.abs(chart.displacement(check_nodes * radius) - check_values)))
    if cb.dim == 1:
        tangent = chebyshev.chebval(0.0, chebyshev.chebder(coefficients)) / radius
        tangent = np.asarray(tangent).reshape(3, 1)
    else:
        tangent = coefficients[1:3].T / radius
    return LeafChart(
        base=cb.base,
        kind=cb.kind,
        radius=radius,
        degree=degree,
        coefficients=coefficients,
        frame=cb.frame,
        tail_bound=tail,
        tangency_residual=principal_angle(tangent, cb.frame),
    )


_CHART_CACHE: BoundedCache[LeafChart] = BoundedCache(CHART_CACHE_SIZE)


def leaf_chart(
    model: MapLike,
    x: ArrayLike,
    kind: LeafKind,
    radius: float = 0.05,
    degree: int = 7,
    tolerance: float = 1e-9,
    depth: int = 260,
    warmup: int = 48,
    seed_threshold: float = 1e-12,
    max_halvings: int = 8,
) -> LeafChart:
    """拟合并认证局部叶片坐标卡；半径过大时报告最大可认证半径"""
    x = project_to_torus(np.asarray(x, dtype=float))
    key = (model.fingerprint, kind, tuple(np.round(x, 14)), radius, degree, tolerance)
    cached = _CHART_CACHE.get(key)
    if cached is not None:
        return cached

    cb = chart_base(model, x, kind, depth, warmup)
    r = radius
    for _ in range(max_halvings + 1):
        chart = _fit_chart(model, cb, r, degree, seed_threshold)
        logger.debug(f"{kind} chart radius {r:.3e}: tail bound {chart.tail_bound:.3e}")
        if chart.tail_bound <= tolerance:
            if r == radius:
                return _CHART_CACHE.setdefault(key, chart)
            raise ChartRadiusError(
                f"{kind} chart at radius {radius} not certified; tail bound exceeds {tolerance:.1e}",
                max_certified_radius=r,
            )
        r /= 2.0
    raise ChartRadiusError(f"{kind} chart could not be certified at any tested radius", max_certified_radius=0.0)
