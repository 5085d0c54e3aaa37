"""2x2 / 3x3 小矩阵线性代数"""

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import subspace_angles

from ..errors import SingularMatrixError

Matrix2 = NDArray[np.float64]
Matrix3 = NDArray[np.float64]

Classification = Literal["real-split", "complex-pair", "on-unit-circle"]

UNIT_CIRCLE_TOLERANCE = 1e-9
DISCRIMINANT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SpectrumReport:
    """特征值、模长与分类；degenerate 标记判别式接近零的情形"""

    eigenvalues: tuple[complex, ...]
    moduli: tuple[float, ...]
    classification: Classification
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "moduli": list(self.moduli),
            "classification": self.classification,
            "degenerate": self.degenerate,
        }


def _classify(roots: list[complex]) -> Classification:
    if any(abs(abs(z) - 1.0) <= UNIT_CIRCLE_TOLERANCE for z in roots):
        return "on-unit-circle"
    if any(z.imag != 0.0 for z in roots):
        return "complex-pair"
    return "real-split"


def _refine_real_root(r: float, a: float, b: float, c: float, steps: int = 4) -> float:
    for _ in range(steps):
        value = ((r + a) * r + b) * r + c
        slope = (3.0 * r + 2.0 * a) * r + b
        if slope == 0.0:
            break
        step = value / slope
        r -= step
        if abs(step) <= 1e-16 * max(1.0, abs(r)):
            break
    return r


def spectrum3(m: ArrayLike) -> SpectrumReport:
    """3x3 矩阵特征值: Cardano 公式 + Newton 修正"""
    m = np.asarray(m, dtype=float)
    tr = float(np.trace(m))
    c2 = float(
        m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        + m[0, 0] * m[2, 2] - m[0, 2] * m[2, 0]
        + m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1]
    )
    det = float(np.linalg.det(m))

    # λ^3 + aλ^2 + bλ + c
    a, b, c = -tr, c2, -det
    p = b - a * a / 3.0
    q = 2.0 * a**3 / 27.0 - a * b / 3.0 + c
    disc = -4.0 * p**3 - 27.0 * q * q
    shift = -a / 3.0

    if disc < -DISCRIMINANT_TOLERANCE:
        root = math.sqrt(q * q / 4.0 + p**3 / 27.0)
        y = np.cbrt(-q / 2.0 + root) + np.cbrt(-q / 2.0 - root)
        r = _refine_real_root(float(y) + shift, a, b, c)
        # 除去实根后的二次因子 λ^2 + βλ + γ
        beta = a + r
        gamma = b + r * beta
        imag = math.sqrt(max(gamma - beta * beta / 4.0, 0.0))
        roots = [complex(r, 0.0), complex(-beta / 2.0, imag), complex(-beta / 2.0, -imag)]
        degenerate = False
    elif disc > DISCRIMINANT_TOLERANCE:
        scale = 2.0 * math.sqrt(-p / 3.0)
        arg = (3.0 * q / (2.0 * p)) * math.sqrt(-3.0 / p)
        phi = math.acos(max(-1.0, min(1.0, arg))) / 3.0
        roots = [
            complex(_refine_real_root(scale * math.cos(phi - 2.0 * math.pi * k / 3.0) + shift, a, b, c), 0.0)
            for k in range(3)
        ]
        degenerate = False
    else:
        if abs(p) < DISCRIMINANT_TOLERANCE:
            roots = [complex(shift, 0.0)] * 3
        else:
            simple = 3.0 * q / p + shift
            double = -3.0 * q / (2.0 * p) + shift
            roots = [complex(simple, 0.0), complex(double, 0.0), complex(double, 0.0)]
        degenerate = True

    roots.sort(key=lambda z: (abs(z), z.imag))
    return SpectrumReport(
        eigenvalues=tuple(roots),
        moduli=tuple(abs(z) for z in roots),
        classification=_classify(roots),
        degenerate=degenerate,
    )


def spectrum2(m: ArrayLike) -> SpectrumReport:
    """2x2 矩阵特征值（闭式）"""
    m = np.asarray(m, dtype=float)
    tr = float(m[0, 0] + m[1, 1])
    det = float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    disc = tr * tr - 4.0 * det
    if disc < -DISCRIMINANT_TOLERANCE:
        imag = math.sqrt(-disc) / 2.0
        roots = [complex(tr / 2.0, imag), complex(tr / 2.0, -imag)]
    else:
        root = math.sqrt(max(disc, 0.0))
        big = (tr + math.copysign(root, tr)) / 2.0
        small = det / big if big != 0.0 else 0.0
        roots = [complex(big, 0.0), complex(small, 0.0)]
    roots.sort(key=lambda z: (abs(z), z.imag))
    return SpectrumReport(
        eigenvalues=tuple(roots),
        moduli=tuple(abs(z) for z in roots),
        classification=_classify(roots),
        degenerate=abs(disc) <= DISCRIMINANT_TOLERANCE,
    )


def det2(a: ArrayLike) -> NDArray[np.float64]:
    a = np.asarray(a, dtype=float)
    return a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]


def sl_pm_normalize(a: ArrayLike) -> Matrix2:
    """|det A|^{-1/2} A，保持行列式符号"""
    a = np.asarray(a, dtype=float)
    det = det2(a)
    if np.any(~np.isfinite(det)) or np.any(np.abs(det) < 1e-300):
        raise SingularMatrixError("cannot normalize a singular matrix", det=det.tolist())
    return a / np.sqrt(np.abs(det))[..., None, None]


def singular_values2(a: ArrayLike) -> NDArray[np.float64]:
    """2x2 奇异值闭式解，返回 (..., 2)，降序"""
    a = np.asarray(a, dtype=float)
    frob = np.sum(a * a, axis=(-2, -1))
    det = np.abs(det2(a))
    root = np.sqrt(np.maximum(frob * frob - 4.0 * det * det, 0.0))
    s_max = np.sqrt((frob + root) / 2.0)
    s_min = np.divide(det, s_max, out=np.zeros_like(s_max), where=s_max > 0)
    return np.stack([s_max, s_min], axis=-1)


def operator_norm2(a: ArrayLike) -> float | NDArray[np.float64]:
    return singular_values2(a)[..., 0]


def operator_norm3(m: ArrayLike, steps: int = 30) -> float:
    """幂迭代 + Rayleigh 商"""
    m = np.asarray(m, dtype=float)
    gram = m.T @ m
    v = np.array([1.0, 0.7548776662, 0.5698402910])
    v /= np.linalg.norm(v)
    for _ in range(steps):
        w = gram @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
    return float(math.sqrt(max(v @ gram @ v, 0.0)))


def condition2(a: ArrayLike) -> float | NDArray[np.float64]:
    s = singular_values2(a)
    return s[..., 0] / s[..., 1]


def rotation2(theta: float) -> Matrix2:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def orthonormalize_pair(p: ArrayLike) -> NDArray[np.float64]:
    """(…,3,2) 标架的 Gram-Schmidt 正交化"""
    p = np.asarray(p, dtype=float)
    first = p[..., :, 0]
    first = first / np.linalg.norm(first, axis=-1, keepdims=True)
    second = p[..., :, 1] - np.sum(first * p[..., :, 1], axis=-1, keepdims=True) * first
    second = second / np.linalg.norm(second, axis=-1, keepdims=True)
    return np.stack([first, second], axis=-1)


def principal_angle(u: ArrayLike, v: ArrayLike) -> float:
    """两个列空间之间的最大主角"""
    u = np.asarray(u, dtype=float).reshape(3, -1)
    v = np.asarray(v, dtype=float).reshape(3, -1)
    return float(np.max(subspace_angles(u, v)))


def is_scalar2(a: ArrayLike, tol: float = 1e-9) -> bool:
    a = np.asarray(a, dtype=float)
    scale = max(float(np.max(np.abs(a))), 1e-300)
    return abs(a[0, 1]) <= tol * scale and abs(a[1, 0]) <= tol * scale and abs(a[0, 0] - a[1, 1]) <= tol * scale


def _orient(v: NDArray[np.float64]) -> NDArray[np.float64]:
    v = v / np.linalg.norm(v)
    k = int(np.argmax(np.abs(v)))
    return -v if v[k] < 0 else v


def eigenlines2(a: ArrayLike, tol: float = 1e-12) -> list[NDArray[np.float64]]:
    """2x2 矩阵的实不变直线（椭圆型为空，抛物型一条，双曲型两条）"""
    a = np.asarray(a, dtype=float)
    if is_scalar2(a):
        return []
    tr = a[0, 0] + a[1, 1]
    det = det2(a)
    disc = tr * tr - 4.0 * det
    scale = max(tr * tr, abs(det), 1e-300)
    if disc < -tol * scale:
        return []
    root = math.sqrt(max(disc, 0.0))
    lines = []
    for lam in ((tr + root) / 2.0, (tr - root) / 2.0):
        shifted = a - lam * np.eye(2)
        # 零空间取自范数较大的一行
        row = shifted[0] if np.linalg.norm(shifted[0]) >= np.linalg.norm(shifted[1]) else shifted[1]
        line = _orient(np.array([-row[1], row[0]]))
        if not any(line_angle(line, other) < 1e-12 for other in lines):
            lines.append(line)
    return lines


def line_angle(u: ArrayLike, v: ArrayLike) -> float:
    """两条直线之间的夹角，取值 [0, π/2]"""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    cos = abs(float(u @ v)) / (np.linalg.norm(u) * np.linalg.norm(v))
    return math.acos(min(1.0, cos))
