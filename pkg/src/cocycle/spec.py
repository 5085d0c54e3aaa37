"""2x2 线性余圈的种类

三维种类（不稳定导数、拉回）的原始值是 3x3 导数，读出时用全局平凡化 Φ；
二维种类直接给出 2x2 矩阵。
"""

import math
from dataclasses import dataclass, field
from typing import ClassVar, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..dynamics import ConjugacyMapSpec, MapLike
from ..errors import CocycleError
from ..geometry import det2, orthonormalize_pair, sl_pm_normalize
from ..structure import compute_splitting, frame_from_plane

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class MatrixTrigField:
    """C(x) = base + Σ coefficient_j sin(2π<k_j, x> + φ_j)"""

    base: NDArray[np.float64]
    frequencies: NDArray[np.float64] = field(default_factory=lambda: np.zeros((0, 3)))
    coefficients: NDArray[np.float64] = field(default_factory=lambda: np.zeros((0, 2, 2)))
    phases: NDArray[np.float64] = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        object.__setattr__(self, "base", np.asarray(self.base, dtype=float).reshape(2, 2))
        object.__setattr__(self, "frequencies", np.asarray(self.frequencies, dtype=float).reshape(-1, 3))
        object.__setattr__(self, "coefficients", np.asarray(self.coefficients, dtype=float).reshape(-1, 2, 2))
        object.__setattr__(self, "phases", np.asarray(self.phases, dtype=float).reshape(-1))
        if not np.array_equal(self.frequencies, np.round(self.frequencies)):
            raise CocycleError("matrix field frequencies must be integer vectors")

    @classmethod
    def from_terms(cls, base: ArrayLike, terms: list[tuple]) -> "MatrixTrigField":
        if not terms:
            return cls(np.asarray(base, dtype=float))
        k, c, phi = zip(*terms)
        return cls(np.asarray(base, dtype=float), np.array(k, dtype=float), np.array(c, dtype=float), np.array(phi, dtype=float))

    @property
    def sup_perturbation(self) -> float:
        """Σ ‖coefficient_j‖_2 ≥ sup ‖C(x) - base‖"""
        return float(sum(np.linalg.norm(c, 2) for c in self.coefficients))

    def evaluate(self, x: ArrayLike) -> NDArray[np.float64]:
        x = np.asarray(x, dtype=float)
        out = np.broadcast_to(self.base, x.shape[:-1] + (2, 2)).copy()
        if len(self.phases):
            weights = np.sin(TWO_PI * (x @ self.frequencies.T) + self.phases)
            out += np.einsum("...m,mij->...ij", weights, self.coefficients)
        return out


@dataclass(frozen=True, eq=False, kw_only=True)
class CocycleSpec:
    """余圈的公共接口；子类给出 raw 以及（三维时）入口平面"""

    eta: float = 0.5

    kind = "abstract"
    fiber_dim = 2
    # oracle(x) 的含义: "conjugacy" 为 C(f x) A(x) = B(x) C(x) 中的 C，"coboundary" 为生成场
    oracle_role: ClassVar[Optional[str]] = None

    def raw(self, points: ArrayLike) -> NDArray[np.float64]:
        raise NotImplementedError

    def entry_plane(self, x: ArrayLike, plane: NDArray[np.float64]) -> NDArray[np.float64]:
        """f 的 E^u(x) → raw 作用空间里的平面"""
        return plane

    def frame(self, plane: NDArray[np.float64]) -> NDArray[np.float64]:
        raise NotImplementedError

    def loose_entry(self) -> NDArray[np.float64]:
        return np.eye(self.fiber_dim)[:, :2] if self.fiber_dim == 3 else np.eye(2)

    def finalize(self, m: NDArray[np.float64]) -> NDArray[np.float64]:
        return m

    def oracle(self, x: ArrayLike) -> Optional[NDArray[np.float64]]:
        """已知的共轭场 C(x)（若存在）"""
        return None

    def evaluate(self, model: MapLike, x: ArrayLike) -> NDArray[np.float64]:
        """单步取值 A(x)"""
        x = np.asarray(x, dtype=float)
        if self.fiber_dim == 2:
            return self.finalize(self.raw(x))
        here = compute_splitting(model, x).unstable_plane
        entry = self.frame(self.entry_plane(x, here))
        pushed = self.raw(x) @ entry
        return self.finalize(self.frame(pushed).T @ pushed)

    def describe(self) -> dict:
        return {"kind": self.kind, "eta": self.eta}


@dataclass(frozen=True, eq=False, kw_only=True)
class UnstableDerivativeCocycle(CocycleSpec):
    """D^u f 在平凡化 Φ 下的矩阵"""

    model: MapLike
    rotation: float = 0.0

    kind = "unstable_derivative"
    fiber_dim = 3

    def raw(self, points: ArrayLike) -> NDArray[np.float64]:
        return np.asarray(self.model.differential(points))

    def frame(self, plane: NDArray[np.float64]) -> NDArray[np.float64]:
        return frame_from_plane(plane, self.model.linear.unstable_frame, self.rotation)

    def loose_entry(self) -> NDArray[np.float64]:
        return self.model.linear.unstable_frame


@dataclass(frozen=True, eq=False, kw_only=True)
class PullbackCocycle(CocycleSpec):
    """x ↦ D^u g(h x)，g = h f h^{-1}，在 g 的平凡化下；C(x) = Φ^g_{hx}^T Dh(x) Φ^f_x 是已知共轭"""

    model: MapLike
    conjugacy: ConjugacyMapSpec
    rotation: float = 0.0

    kind = "pullback"
    fiber_dim = 3
    oracle_role = "conjugacy"

    def raw(self, points: ArrayLike) -> NDArray[np.float64]:
        points = np.asarray(points, dtype=float)
        fx = self.model.evaluate_lift(points)
        return (
            self.conjugacy.differential(fx)
            @ self.model.differential(points)
            @ np.linalg.inv(self.conjugacy.differential(points))
        )

    def entry_plane(self, x: ArrayLike, plane: NDArray[np.float64]) -> NDArray[np.float64]:
        return orthonormalize_pair(self.conjugacy.differential(x) @ plane)

    def frame(self, plane: NDArray[np.float64]) -> NDArray[np.float64]:
        return frame_from_plane(plane, self.model.linear.unstable_frame, self.rotation)

    def loose_entry(self) -> NDArray[np.float64]:
        return self.model.linear.unstable_frame

    def oracle(self, x: ArrayLike) -> NDArray[np.float64]:
        x = np.asarray(x, dtype=float)
        phi_f = frame_from_plane(compute_splitting(self.model, x).unstable_plane, self.model.linear.unstable_frame, self.rotation)
        mapped = self.conjugacy.differential(x) @ phi_f
        return self.frame(mapped).T @ mapped


@dataclass(frozen=True, eq=False, kw_only=True)
class ConstantCocycle(CocycleSpec):
    matrix: NDArray[np.float64] = field(default_factory=lambda: np.eye(2))

    kind = "constant"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float).reshape(2, 2)
        if abs(float(det2(m))) < 1e-300:
            raise CocycleError("constant cocycle matrix is singular")
        object.__setattr__(self, "matrix", m)

    def raw(self, points: ArrayLike) -> NDArray[np.float64]:
        points = np.asarray(points, dtype=float)
        return np.broadcast_to(self.matrix, points.shape[:-1] + (2, 2)).copy()


@dataclass(frozen=True, eq=False, kw_only=True)
class CoboundaryCocycle(CocycleSpec):
    """A(x) = C(f x) L C(x)^{-1}"""

    model: MapLike
    matrix_field: MatrixTrigField
    middle: NDArray[np.float64] = field(default_factory=lambda: np.array([[0.5, -1.0], [0.75, 0.5]]))

    kind = "coboundary"
    oracle_role = "coboundary"

    def __post_init__(self):
        object.__setattr__(self, "middle", np.asarray(self.middle, dtype=float).reshape(2, 2))
        base_sigma = np.linalg.svd(self.matrix_field.base, compute_uv=False)[-1]
        if self.matrix_field.sup_perturbation >= base_sigma:
            raise CocycleError("coboundary C-field is not certified invertible")

    def raw(self, points: ArrayLike) -> NDArray[np.float64]:
        points = np.asarray(points, dtype=float)
        c_here = self.matrix_field.evaluate(points)
        c_next = self.matrix_field.evaluate(self.model.evaluate(points))
        return c_next @ self.middle @ np.linalg.inv(c_here)

    def oracle(self, x: ArrayLike) -> NDArray[np.float64]:
        return self.matrix_field.evaluate(np.asarray(x, dtype=float))


@dataclass(frozen=True, eq=False, kw_only=True)
class TrigCocycle(CocycleSpec):
    """矩阵值三角多项式 A(x)"""

    matrix_field: MatrixTrigField

    kind = "trig_custom"

    def __post_init__(self):
        base_sigma = np.linalg.svd(self.matrix_field.base, compute_uv=False)[-1]
        if self.matrix_field.sup_perturbation >= base_sigma:
            raise CocycleError("trig cocycle is not certified invertible")

    def raw(self, points: ArrayLike) -> NDArray[np.float64]:
        return self.matrix_field.evaluate(points)


@dataclass(frozen=True, eq=False, kw_only=True)
class NormalizedCocycle(CocycleSpec):
    """逐点 SL^± 归一化 |det A|^{-1/2} A；乘积与完整量都等于基余圈结果的归一化"""

    base: CocycleSpec

    kind = "normalized"

    def __post_init__(self):
        object.__setattr__(self, "eta", self.base.eta)

    @property
    def fiber_dim(self) -> int:
        return self.base.fiber_dim

    @property
    def oracle_role(self) -> Optional[str]:
        return self.base.oracle_role

    def raw(self, points):
        return self.base.raw(points)

    def entry_plane(self, x, plane):
        return self.base.entry_plane(x, plane)

    def frame(self, plane):
        return self.base.frame(plane)

    def loose_entry(self):
        return self.base.loose_entry()

    def finalize(self, m: NDArray[np.float64]) -> NDArray[np.float64]:
        return sl_pm_normalize(self.base.finalize(m))

    def oracle(self, x):
        c = self.base.oracle(x)
        return None if c is None else sl_pm_normalize(c)

    def describe(self) -> dict:
        return {"kind": self.kind, "eta": self.eta, "base": self.base.describe()}
