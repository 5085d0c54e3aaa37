"""双曲性常数的经验估计（Sobol 样本上的包络）"""

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.stats import qmc

from ..dynamics import MapLike
from ..geometry import singular_values2
from ..parallel import parallel_map
from .charts import project_along
from .splitting import track_orbit

logger = logging.getLogger(__name__)

SHADOW_STEPS = 8


@dataclass(frozen=True)
class HyperbolicityEstimates:
    """ν: 不稳定扩张率，μ: 稳定收缩率的倒数，α: 最大单步收缩"""

    nu_minus: float
    nu_plus: float
    mu_minus: float
    mu_plus: float
    alpha: float
    shadow_constant: float
    stable_bunching: float
    unstable_bunching: float
    sample: dict

    def to_dict(self) -> dict:
        return asdict(self)


def sobol_sample(size: int, seed: int = 7) -> NDArray[np.float64]:
    """打乱的 Sobol 点，取 2 的幂再截断"""
    sampler = qmc.Sobol(d=3, scramble=True, seed=seed)
    m = max(0, math.ceil(math.log2(max(size, 1))))
    return sampler.random_base2(m)[:size]


@dataclass(frozen=True)
class _PointRates:
    stable: NDArray[np.float64]
    unstable_min: NDArray[np.float64]
    unstable_max: NDArray[np.float64]
    stable_products: NDArray[np.float64]
    unstable_products: NDArray[np.float64]


def _point_rates(model: MapLike, x: NDArray[np.float64], warmup: int) -> _PointRates:
    track = track_orbit(model, x, backward=0, forward=SHADOW_STEPS, warmup=warmup)
    adapted = model.linear.adapted_basis
    psi = np.array([project_along(p, s, adapted) for p, s in zip(track.unstable, track.stable)])

    stable, u_min, u_max = [], [], []
    stable_prod, unstable_prod = [], []
    running_s = 1.0
    running_u = np.eye(2)
    for k in range(SHADOW_STEPS):
        jac = model.differential(track.points[k])
        s = float(np.linalg.norm(jac @ track.stable[k]))
        adapted_block = np.linalg.pinv(psi[k + 1]) @ jac @ psi[k]
        sv = singular_values2(adapted_block)
        stable.append(s)
        u_max.append(sv[0])
        u_min.append(sv[1])
        # 欧氏范数下的 n 步乘积，用于阴影常数
        running_s *= s
        running_u = track.unstable[k + 1].T @ jac @ track.unstable[k] @ running_u
        stable_prod.append(running_s)
        unstable_prod.append(singular_values2(running_u))
    return _PointRates(
        np.array(stable), np.array(u_min), np.array(u_max), np.array(stable_prod), np.array(unstable_prod)
    )


def hyperbolicity_estimates(
    model: MapLike,
    sample_size: int = 64,
    seed: int = 7,
    warmup: int = 48,
    jobs: int | None = None,
) -> HyperbolicityEstimates:
    """在准随机样本上测量单步收缩/扩张率并报告极值"""
    points = sobol_sample(sample_size, seed)
    rates = parallel_map(lambda x: _point_rates(model, x, warmup), points, jobs=jobs, desc="hyperbolicity")

    stable = np.concatenate([r.stable for r in rates])
    u_min = np.concatenate([r.unstable_min for r in rates])
    u_max = np.concatenate([r.unstable_max for r in rates])
    nu_minus, nu_plus = float(np.min(u_min)), float(np.max(u_max))
    mu_minus, mu_plus = float(1.0 / np.max(stable)), float(1.0 / np.min(stable))
    alpha = float(max(np.max(stable), np.max(1.0 / u_min)))

    n = np.arange(1, SHADOW_STEPS + 1)
    ratios = [1.0]
    for r in rates:
        ratios.extend(r.stable_products * mu_minus**n)
        ratios.extend(1.0 / (r.stable_products * mu_plus**n))
        ratios.extend(r.unstable_products[:, 0] / nu_plus**n)
        ratios.extend(nu_minus**n / r.unstable_products[:, 1])
    shadow = float(max(ratios))

    log_sum = math.log(mu_minus) + math.log(nu_minus)
    estimates = HyperbolicityEstimates(
        nu_minus=nu_minus,
        nu_plus=nu_plus,
        mu_minus=mu_minus,
        mu_plus=mu_plus,
        alpha=alpha,
        shadow_constant=shadow,
        stable_bunching=log_sum / math.log(nu_plus),
        unstable_bunching=log_sum / math.log(mu_plus),
        sample={"kind": "sobol", "scrambled": True, "size": int(len(points)), "seed": seed, "steps": SHADOW_STEPS},
    )
    logger.info(
        f"hyperbolicity: nu [{nu_minus:.6f}, {nu_plus:.6f}], mu [{mu_minus:.6f}, {mu_plus:.6f}], alpha {alpha:.6f}"
    )
    return estimates
