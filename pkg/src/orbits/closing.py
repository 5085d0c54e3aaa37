"""闭合引理: 由近回归段构造阴影周期点（多重打靶 Newton）"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import sparse
from scipy.sparse.linalg import spsolve

from ..dynamics import MapLike
from ..errors import ClosingError, PseudoOrbitError
from ..geometry import project_to_torus, torus_distance
from .search import PeriodicOrbit, _orbit_points

logger = logging.getLogger(__name__)

NEWTON_STEPS = 30
PROFILE_SLACK = 10.0
PROFILE_FLOOR = 1e-15


@dataclass(frozen=True, eq=False)
class ClosingResult:
    periodic_point: PeriodicOrbit
    segment_errors: list[float]
    fitted_alpha: float
    fitted_C: float
    epsilon: float
    profile: NDArray[np.float64]

    def profile_rows(self) -> list[dict]:
        m, n = self.profile.shape
        return [
            {"segment": j, "k": k, "distance": float(self.profile[j, k])}
            for j in range(m)
            for k in range(n)
        ]

    def to_dict(self) -> dict:
        return {
            "periodic_point": self.periodic_point.to_dict(),
            "segment_errors": list(self.segment_errors),
            "fitted_alpha": self.fitted_alpha,
            "fitted_C": self.fitted_C,
            "epsilon": self.epsilon,
        }


def pseudo_orbit_epsilon(model: MapLike, segments: Sequence[tuple[ArrayLike, int]]) -> float:
    """max(d(f^n x_j, x_j), d(x_j, x_l))"""
    starts = [project_to_torus(np.asarray(x, dtype=float)) for x, _ in segments]
    returns = [torus_distance(_orbit_points(model, x, n + 1)[-1], x) for x, (_, n) in zip(starts, segments)]
    mutual = [torus_distance(a, b) for a in starts for b in starts]
    return float(max(returns + mutual))


def _shooting_jacobian(model: MapLike, points: NDArray[np.float64]) -> sparse.csr_matrix:
    """块 (i, i) = Df(X_i)，块 (i, i+1) = -I（循环）"""
    size = len(points)
    blocks = model.differential(points)
    rows, cols, vals = [], [], []
    for i in range(size):
        j = (i + 1) % size
        for a in range(3):
            for b in range(3):
                rows.append(3 * i + a)
                cols.append(3 * i + b)
                vals.append(blocks[i, a, b])
            rows.append(3 * i + a)
            cols.append(3 * j + a)
            vals.append(-1.0)
    # coo -> csr 时相同位置的项相加（size == 1 时对角块与 -I 重合）
    return sparse.coo_matrix((vals, (rows, cols)), shape=(3 * size, 3 * size)).tocsr()


def _reach(shape: tuple[int, int]) -> NDArray[np.int64]:
    k = np.arange(shape[1])
    return np.broadcast_to(np.minimum(k, shape[1] - k), shape)


def _log_fit(profile: NDArray[np.float64], epsilon: float) -> Optional[tuple[float, float]]:
    """log(d / ε) 对 min(k, n-k) 的最小二乘直线；样本不足时为 None"""
    reach = _reach(profile.shape).ravel()
    ratio = profile.ravel() / epsilon
    mask = ratio > 1e-300
    if np.count_nonzero(mask) < 2 or len(np.unique(reach[mask])) < 2:
        return None
    slope, intercept = np.polyfit(reach[mask], np.log(ratio[mask]), 1)
    return float(np.exp(slope)), float(np.exp(intercept))


def _fit_profile(profile: NDArray[np.float64], epsilon: float) -> tuple[float, float]:
    if epsilon == 0.0:
        return 0.0, 0.0
    reach = _reach(profile.shape).ravel()
    ratio = profile.ravel() / epsilon
    fit = _log_fit(profile, epsilon)
    if fit is None:
        return 0.0, float(np.max(ratio))
    alpha, constant = fit
    # 上调 C 使界逐点成立
    constant = max(constant, float(np.max(ratio / alpha**reach)))
    return alpha, constant


def profile_violations(
    profile: NDArray[np.float64],
    epsilon: float,
    alpha: float,
    slack: float = PROFILE_SLACK,
    floor: float = PROFILE_FLOOR,
) -> int:
    """以给定的 α（通常取实测收缩率）检验剖面

    C 取对数剖面最小二乘直线的截距；超出 slack · C · ε · α^{min(k, n-k)} + floor 的点计为违例。
    """
    if epsilon == 0.0:
        return int(np.count_nonzero(profile > floor))
    fit = _log_fit(profile, epsilon)
    constant = float(np.max(profile) / epsilon) if fit is None else fit[1]
    bound = slack * constant * epsilon * float(alpha) ** _reach(profile.shape) + floor
    return int(np.count_nonzero(profile > bound))


def _shooting_period(points: NDArray[np.float64], tolerance: float = 1e-8) -> int:
    size = len(points)
    for d in range(1, size):
        if size % d == 0 and np.max(torus_distance(points, np.roll(points, -d, axis=0))) <= tolerance:
            return d
    return size


def _total_translation(model: MapLike, translation: NDArray[np.float64]) -> tuple[int, ...]:
    """T_{k+1} = L T_k + c_k，用 Python 整数避免溢出"""
    lin = [[int(v) for v in row] for row in model.linear.integer_matrix]
    total = [0, 0, 0]
    for c in translation:
        total = [sum(lin[i][j] * total[j] for j in range(3)) + int(c[i]) for i in range(3)]
    return tuple(total)


def _shadow(
    model: MapLike,
    pseudo: NDArray[np.float64],
    m: int,
    n: int,
    epsilon: float,
    tolerance: float,
) -> ClosingResult:
    following = np.roll(pseudo, -1, axis=0)
    translation = np.round(model.evaluate_lift(pseudo) - following)

    x = pseudo.copy()
    residual = np.inf
    for _ in range(NEWTON_STEPS):
        r = model.evaluate_lift(x) - np.roll(x, -1, axis=0) - translation
        residual = float(np.max(np.abs(r)))
        logger.debug(f"closing Newton residual {residual:.3e}")
        if residual <= tolerance:
            break
        step = spsolve(_shooting_jacobian(model, x).tocsc(), r.ravel())
        x = x - step.reshape(-1, 3)
    else:
        raise ClosingError(f"multiple shooting did not converge (residual {residual:.3e})", residual=residual)

    x = project_to_torus(x)
    profile = torus_distance(x, project_to_torus(pseudo)).reshape(m, n)
    segment_errors = [float(v) for v in np.max(profile, axis=1)]
    alpha, constant = _fit_profile(profile, epsilon)

    # 长周期时直接迭代会放大舍入误差，周期与平移都从打靶解读出
    period = _shooting_period(x)
    orbit = PeriodicOrbit(
        point=x[0],
        period=period,
        residual=residual,
        lift_translation=_total_translation(model, translation[:period]),
        points=x[:period],
    )
    logger.info(f"closing: period {m * n}, epsilon {epsilon:.3e}, alpha {alpha:.4f}, C {constant:.3f}")
    return ClosingResult(orbit, segment_errors, alpha, constant, epsilon, profile)


def closing_point(
    model: MapLike,
    segments: Sequence[tuple[ArrayLike, int]],
    epsilon_bound: float = 0.05,
    tolerance: float = 1e-12,
) -> ClosingResult:
    """m 段长 n 的伪轨道 → 周期 mn 的阴影周期点

    未知量是伪轨道的全部 mn 个点，残差 F(X_i) - X_{i+1} - c_i，整数平移 c_i 由伪轨道确定。
    """
    lengths = {int(n) for _, n in segments}
    if len(lengths) != 1:
        raise PseudoOrbitError("all segments must have the same length", lengths=sorted(lengths))
    n = lengths.pop()
    m = len(segments)
    epsilon = pseudo_orbit_epsilon(model, segments)
    if epsilon > epsilon_bound:
        raise PseudoOrbitError(f"pseudo-orbit too coarse: epsilon {epsilon:.3e} > {epsilon_bound:.3e}", epsilon=epsilon)
    pseudo = np.concatenate([_orbit_points(model, project_to_torus(np.asarray(x, dtype=float)), n) for x, _ in segments])
    return _shadow(model, pseudo, m, n, epsilon, tolerance)


def close_pseudo_orbit(
    model: MapLike,
    pseudo: ArrayLike,
    segments: int,
    epsilon_bound: float = 0.05,
    tolerance: float = 1e-12,
) -> ClosingResult:
    """给定全部伪轨道点（例如由叶片伙伴轨道精确给出）直接闭合

    ε 取相邻点 F(X_i) 与 X_{i+1} 的最大环面距离。
    """
    pseudo = np.asarray(pseudo, dtype=float)
    if len(pseudo) % segments:
        raise PseudoOrbitError("pseudo-orbit length is not a multiple of the segment count", size=len(pseudo))
    mismatch = torus_distance(model.evaluate(pseudo), project_to_torus(np.roll(pseudo, -1, axis=0)))
    epsilon = float(np.max(mismatch))
    if epsilon > epsilon_bound:
        raise PseudoOrbitError(f"pseudo-orbit too coarse: epsilon {epsilon:.3e} > {epsilon_bound:.3e}", epsilon=epsilon)
    return _shadow(model, pseudo, segments, len(pseudo) // segments, epsilon, tolerance)
