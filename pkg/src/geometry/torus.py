"""环面点与提升向量的运算"""

import itertools

import numpy as np
from numpy.typing import ArrayLike, NDArray

# 坐标 mod 1，取值 [0, 1)
TorusPoint = NDArray[np.float64]
# 万有覆叠 R^3 中的点
LiftVector = NDArray[np.float64]

SNAP_TOLERANCE = 1e-12

_TRANSLATES = np.array(list(itertools.product((-1, 0, 1), repeat=3)), dtype=float)


def project_to_torus(v: ArrayLike) -> TorusPoint:
    """提升向量投影到 [0,1)^3；距离 1 不足 1e-12 的坐标归零"""
    v = np.asarray(v, dtype=float)
    x = v - np.floor(v)
    return np.where(x >= 1.0 - SNAP_TOLERANCE, 0.0, x)


def lift_near(x: ArrayLike, ref: ArrayLike) -> LiftVector:
    """x 的最靠近 ref 的提升"""
    x = np.asarray(x, dtype=float)
    return x + np.round(np.asarray(ref, dtype=float) - x)


def torus_delta(x: ArrayLike, y: ArrayLike) -> NDArray[np.float64]:
    """从 x 到 y 的最短位移（在所有整数平移中）"""
    d = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
    return d - np.round(d)


def torus_distance(x: ArrayLike, y: ArrayLike) -> float | NDArray[np.float64]:
    return np.linalg.norm(torus_delta(x, y), axis=-1)


def torus_distance_bruteforce(x: ArrayLike, y: ArrayLike) -> float:
    """遍历 27 个最近的整数平移求距离，用于校验快速路径"""
    d = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
    d = d - np.floor(d)
    return float(np.min(np.linalg.norm(d[None, :] + _TRANSLATES, axis=1)))


def hausdorff_distance(a: ArrayLike, b: ArrayLike) -> float:
    """两个有限点集在环面上的 Hausdorff 距离"""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    pairwise = torus_distance(a[:, None, :], b[None, :, :])
    return float(max(pairwise.min(axis=1).max(), pairwise.min(axis=0).max()))
