"""映射模型: 线性部分 + 三角扰动，精确微分与 Newton 求逆"""

import hashlib
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Protocol, runtime_checkable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..errors import InverseConvergenceError, ModelError
from ..geometry import project_to_torus
from .automorphism import AutomorphismSpec
from .perturbation import PerturbationSpec

logger = logging.getLogger(__name__)

MAX_NEWTON_STEPS = 50


@runtime_checkable
class MapLike(Protocol):
    """下游模块所需的映射接口；AnosovMapModel 与 ConjugatedModel 都满足"""

    @property
    def linear(self) -> AutomorphismSpec: ...

    @property
    def fingerprint(self) -> str: ...

    def evaluate_lift(self, x: ArrayLike) -> NDArray[np.float64]: ...

    def evaluate(self, x: ArrayLike) -> NDArray[np.float64]: ...

    def differential(self, x: ArrayLike) -> NDArray[np.float64]: ...

    def difference(self, x: ArrayLike, delta: ArrayLike) -> NDArray[np.float64]: ...

    def inverse_lift(self, y: ArrayLike) -> NDArray[np.float64]: ...

    def inverse_evaluate(self, y: ArrayLike) -> NDArray[np.float64]: ...

    def inverse_difference(self, x: ArrayLike, eta: ArrayLike) -> NDArray[np.float64]: ...


@dataclass(frozen=True, eq=False)
class TrigMap:
    """x -> M x + P(x)，M 为整数矩阵，P 为 Z^3 周期三角多项式"""

    perturbation: PerturbationSpec
    inverse_tolerance: float = 1e-12

    @property
    def matrix(self) -> NDArray[np.float64]:
        raise NotImplementedError

    @property
    def matrix_inverse(self) -> NDArray[np.float64]:
        raise NotImplementedError

    def evaluate_lift(self, x: ArrayLike) -> NDArray[np.float64]:
        x = np.asarray(x, dtype=float)
        return x @ self.matrix.T + self.perturbation.displacement(x)

    def evaluate(self, x: ArrayLike) -> NDArray[np.float64]:
        return project_to_torus(self.evaluate_lift(x))

    def differential(self, x: ArrayLike) -> NDArray[np.float64]:
        return self.matrix + self.perturbation.jacobian(x)

    def difference(self, x: ArrayLike, delta: ArrayLike) -> NDArray[np.float64]:
        """F(x + δ) - F(x)，对小 δ 保持相对精度"""
        delta = np.asarray(delta, dtype=float)
        return delta @ self.matrix.T + self.perturbation.difference(x, delta)

    def inverse_lift(self, y: ArrayLike) -> NDArray[np.float64]:
        """Newton 迭代，初值 M^{-1} y"""
        y = np.asarray(y, dtype=float)
        x = y @ self.matrix_inverse.T
        if self.perturbation.is_zero:
            return x
        residual = np.inf
        for _ in range(MAX_NEWTON_STEPS):
            r = self.evaluate_lift(x) - y
            residual = float(np.max(np.linalg.norm(r, axis=-1)))
            x = x - np.linalg.solve(self.differential(x), r[..., None])[..., 0]
            if residual <= self.inverse_tolerance:
                return x
        raise InverseConvergenceError(
            f"inverse did not converge, residual {residual:.3e}", residual=residual
        )

    def inverse_evaluate(self, y: ArrayLike) -> NDArray[np.float64]:
        return project_to_torus(self.inverse_lift(y))

    def inverse_difference(self, x: ArrayLike, eta: ArrayLike) -> NDArray[np.float64]:
        """求 δ 使 F(x + δ) - F(x) = η"""
        x = np.asarray(x, dtype=float)
        eta = np.asarray(eta, dtype=float)
        delta = eta @ self.matrix_inverse.T
        if self.perturbation.is_zero:
            return delta
        scale = max(float(np.max(np.linalg.norm(eta, axis=-1))), 1e-300)
        residual = np.inf
        for _ in range(MAX_NEWTON_STEPS):
            r = self.difference(x, delta) - eta
            residual = float(np.max(np.linalg.norm(r, axis=-1)))
            delta = delta - np.linalg.solve(self.differential(x + delta), r[..., None])[..., 0]
            if residual <= 1e-14 * scale:
                return delta
        raise InverseConvergenceError(
            f"inverse difference did not converge, relative residual {residual / scale:.3e}",
            residual=residual / scale,
        )

    def iterate_lift(self, x: ArrayLike, n: int) -> NDArray[np.float64]:
        x = np.asarray(x, dtype=float)
        for _ in range(n):
            x = self.evaluate_lift(x)
        return x

    def iterate_with_jacobian(self, x: ArrayLike, n: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """F^n 的提升与 Jacobian（按轨道顺序的乘积）"""
        x = np.asarray(x, dtype=float)
        jac = np.eye(3)
        for _ in range(n):
            jac = self.differential(x) @ jac
            x = self.evaluate_lift(x)
        return x, jac


@dataclass(frozen=True, eq=False, kw_only=True)
class AnosovMapModel(TrigMap):
    """双曲自同构 L 的小 C^1 扰动 f = L + P"""

    automorphism: AutomorphismSpec

    def __post_init__(self):
        margin = self.automorphism.smallest_singular_value
        if self.perturbation.c1_norm >= margin:
            raise ModelError(
                f"invertibility certificate fails: C1 size {self.perturbation.c1_norm:.3e} "
                f">= smallest singular value {margin:.3e}"
            )

    @property
    def linear(self) -> AutomorphismSpec:
        return self.automorphism

    @property
    def matrix(self) -> NDArray[np.float64]:
        return self.automorphism.matrix

    @property
    def matrix_inverse(self) -> NDArray[np.float64]:
        return self.automorphism.inverse

    @cached_property
    def fingerprint(self) -> str:
        payload = f"{self.automorphism.integer_matrix.tolist()}|{self.perturbation.fingerprint}"
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def with_perturbation(self, perturbation: PerturbationSpec) -> "AnosovMapModel":
        return AnosovMapModel(perturbation, self.inverse_tolerance, automorphism=self.automorphism)


@dataclass(frozen=True, eq=False)
class ConjugacyMapSpec(TrigMap):
    """h(x) = x + 小周期位移，与恒等同伦"""

    def __post_init__(self):
        if self.perturbation.c1_norm >= 1.0:
            raise ModelError(
                f"conjugacy certificate fails: C1 size {self.perturbation.c1_norm:.3e} >= 1"
            )

    @property
    def matrix(self) -> NDArray[np.float64]:
        return np.eye(3)

    @property
    def matrix_inverse(self) -> NDArray[np.float64]:
        return np.eye(3)

    @cached_property
    def fingerprint(self) -> str:
        return f"h-{self.perturbation.fingerprint}"


@dataclass(frozen=True, eq=False)
class ConjugatedModel:
    """g = h ∘ f ∘ h^{-1}，惰性求值，周期数据与 f 精确匹配"""

    base: MapLike
    conjugacy: ConjugacyMapSpec

    @property
    def linear(self) -> AutomorphismSpec:
        return self.base.linear

    @cached_property
    def fingerprint(self) -> str:
        payload = f"{self.base.fingerprint}|{self.conjugacy.fingerprint}"
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def evaluate_lift(self, y: ArrayLike) -> NDArray[np.float64]:
        x = self.conjugacy.inverse_lift(y)
        return self.conjugacy.evaluate_lift(self.base.evaluate_lift(x))

    def evaluate(self, y: ArrayLike) -> NDArray[np.float64]:
        return project_to_torus(self.evaluate_lift(y))

    def differential(self, y: ArrayLike) -> NDArray[np.float64]:
        x = self.conjugacy.inverse_lift(y)
        fx = self.base.evaluate_lift(x)
        return (
            self.conjugacy.differential(fx)
            @ self.base.differential(x)
            @ np.linalg.inv(self.conjugacy.differential(x))
        )

    def difference(self, y: ArrayLike, delta: ArrayLike) -> NDArray[np.float64]:
        x = self.conjugacy.inverse_lift(y)
        xi = self.conjugacy.inverse_difference(x, delta)
        eta = self.base.difference(x, xi)
        return self.conjugacy.difference(self.base.evaluate_lift(x), eta)

    def inverse_lift(self, z: ArrayLike) -> NDArray[np.float64]:
        w = self.conjugacy.inverse_lift(z)
        return self.conjugacy.evaluate_lift(self.base.inverse_lift(w))

    def inverse_evaluate(self, z: ArrayLike) -> NDArray[np.float64]:
        return project_to_torus(self.inverse_lift(z))

    def inverse_difference(self, y: ArrayLike, eta: ArrayLike) -> NDArray[np.float64]:
        x = self.conjugacy.inverse_lift(y)
        fx = self.base.evaluate_lift(x)
        zeta = self.conjugacy.inverse_difference(fx, eta)
        xi = self.base.inverse_difference(x, zeta)
        return self.conjugacy.difference(x, xi)

    def iterate_lift(self, y: ArrayLike, n: int) -> NDArray[np.float64]:
        y = np.asarray(y, dtype=float)
        for _ in range(n):
            y = self.evaluate_lift(y)
        return y

    def iterate_with_jacobian(self, y: ArrayLike, n: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        y = np.asarray(y, dtype=float)
        jac = np.eye(3)
        for _ in range(n):
            jac = self.differential(y) @ jac
            y = self.evaluate_lift(y)
        return y, jac


def conjugate_model(f: MapLike, h: ConjugacyMapSpec) -> ConjugatedModel:
    """构造 g = h f h^{-1} 的求值器"""
    if not isinstance(h, ConjugacyMapSpec):
        raise ModelError("conjugacy must be a ConjugacyMapSpec with identity linear part")
    logger.debug(f"conjugating model {f.fingerprint} by {h.fingerprint}")
    return ConjugatedModel(f, h)
