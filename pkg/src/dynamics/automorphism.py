"""双曲环面自同构及其线性特征数据"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..errors import ModelError
from ..geometry import SpectrumReport, orthonormalize_pair, spectrum3


def _orient(v: NDArray[np.float64]) -> NDArray[np.float64]:
    v = v / np.linalg.norm(v)
    k = int(np.argmax(np.abs(v)))
    return -v if v[k] < 0 else v


@dataclass(frozen=True, eq=False)
class AutomorphismSpec:
    """整数矩阵 L，det = ±1，谱与单位圆不交，dim E^u = 2"""

    matrix: NDArray[np.float64]

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (3, 3):
            raise ModelError(f"automorphism must be 3x3, got shape {m.shape}")
        if not np.array_equal(m, np.round(m)):
            raise ModelError("automorphism entries must be integers")
        det = round(float(np.linalg.det(m)))
        if abs(det) != 1:
            raise ModelError(f"automorphism determinant must be ±1, got {det}")
        object.__setattr__(self, "matrix", m)

        report = self.spectrum
        if report.classification == "on-unit-circle" or report.degenerate:
            raise ModelError("automorphism is not hyperbolic", spectrum=report.to_dict())
        unstable = sum(1 for r in report.moduli if r > 1.0)
        if unstable != 2:
            raise ModelError(f"unstable dimension must be 2, got {unstable}")

    @classmethod
    def from_rows(cls, rows: ArrayLike) -> "AutomorphismSpec":
        return cls(np.asarray(rows, dtype=float))

    @property
    def integer_matrix(self) -> NDArray[np.int64]:
        return np.round(self.matrix).astype(np.int64)

    @cached_property
    def inverse(self) -> NDArray[np.float64]:
        return np.round(np.linalg.inv(self.matrix))

    @cached_property
    def spectrum(self) -> SpectrumReport:
        return spectrum3(self.matrix)

    @cached_property
    def smallest_singular_value(self) -> float:
        return float(np.linalg.svd(self.matrix, compute_uv=False)[-1])

    @cached_property
    def _eigen(self) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
        return np.linalg.eig(self.matrix)

    @cached_property
    def stable_eigenvalue(self) -> float:
        values, _ = self._eigen
        i = int(np.argmin(np.abs(values)))
        return float(values[i].real)

    @cached_property
    def stable_direction(self) -> NDArray[np.float64]:
        """E^s 的单位方向（最大分量取正）"""
        values, vectors = self._eigen
        i = int(np.argmin(np.abs(values)))
        return _orient(vectors[:, i].real)

    @cached_property
    def unstable_moduli(self) -> tuple[float, float]:
        values, _ = self._eigen
        moduli = sorted(float(abs(v)) for v in values if abs(v) > 1.0)
        return moduli[0], moduli[1]

    @cached_property
    def adapted_basis(self) -> NDArray[np.float64]:
        """E^u 的实 Jordan 基 [Re v, Im v]，归一化使 |r|^2 + |s|^2 = 2

        复对情形下 L [r s] = [r s] [[a, b], [-b, a]]。
        """
        values, vectors = self._eigen
        idx = [i for i in range(3) if abs(values[i]) > 1.0]
        if any(abs(values[i].imag) > 0.0 for i in idx):
            j = next(i for i in idx if values[i].imag > 0.0)
            v = vectors[:, j]
            basis = np.stack([v.real, v.imag], axis=1)
            return basis * np.sqrt(2.0 / np.sum(basis * basis))
        basis = np.stack([vectors[:, i].real for i in idx], axis=1)
        return basis / np.linalg.norm(basis, axis=0)

    @cached_property
    def unstable_frame(self) -> NDArray[np.float64]:
        """线性不稳定特征平面的正交标架 E0 (3x2)"""
        return orthonormalize_pair(self.adapted_basis)

    @cached_property
    def unstable_block(self) -> NDArray[np.float64]:
        """L 在 E0 坐标下的 2x2 限制"""
        e0 = self.unstable_frame
        return e0.T @ self.matrix @ e0

    def periodic_count(self, period: int) -> int:
        """|det(L^k - I)|，即线性模型周期 k 点的个数"""
        power = np.linalg.matrix_power(self.integer_matrix, period)
        return abs(round(float(np.linalg.det(power - np.eye(3)))))
