"""常用模型族，供实验配置与测试共用"""

import numpy as np

from .automorphism import AutomorphismSpec
from .model import AnosovMapModel, ConjugacyMapSpec, ConjugatedModel, conjugate_model
from .perturbation import PerturbationSpec

# 伴随矩阵 (0,1,0 / 0,0,1 / 1,0,1) 的逆，特征多项式 λ^3 - λ^2 - 1 的倒数多项式
DEFAULT_MATRIX = ((0, -1, 1), (1, 0, 0), (0, 1, 0))


def default_automorphism() -> AutomorphismSpec:
    return AutomorphismSpec.from_rows(DEFAULT_MATRIX)


def linear_model(automorphism: AutomorphismSpec | None = None) -> AnosovMapModel:
    return AnosovMapModel(PerturbationSpec.zero(), automorphism=automorphism or default_automorphism())


def volume_preserving_shear(scale: float = 1.0) -> AnosovMapModel:
    """f = L ∘ (x, y + φ(x, z), z)，频率与位移正交，det Df = det L"""
    lin = default_automorphism()
    shear = np.array([0.0, 1.0, 0.0])
    terms = [
        ((1, 0, 0), lin.matrix @ (0.010 * scale * shear), 0.2),
        ((0, 0, 1), lin.matrix @ (0.008 * scale * shear), 0.9),
    ]
    return AnosovMapModel(PerturbationSpec.from_terms(terms), automorphism=lin)


def stable_shear(scale: float = 1.0) -> AnosovMapModel:
    """f(x) = L x + e_s φ(x)

    E^s 恰为线性稳定方向，沿 E^s 的商映射就是 L，
    因此 D^u f 与常数余圈上同调（SRB 测度等于最大熵测度）。
    """
    lin = default_automorphism()
    e_s = lin.stable_direction
    terms = [
        ((1, 0, 0), 0.015 * scale * e_s, 0.3),
        ((0, 1, 1), 0.010 * scale * e_s, 1.1),
    ]
    return AnosovMapModel(PerturbationSpec.from_terms(terms), automorphism=lin)


def dissipative(scale: float = 1.0) -> AnosovMapModel:
    """一般扰动，<k, a> != 0，不保体积"""
    lin = default_automorphism()
    terms = [
        ((1, 0, 0), (0.012 * scale, 0.006 * scale, 0.0), 0.5),
        ((0, 1, 1), (0.004 * scale, 0.010 * scale, 0.006 * scale), 1.7),
    ]
    return AnosovMapModel(PerturbationSpec.from_terms(terms), automorphism=lin)


def small_conjugacy(amplitude: float = 2e-3) -> ConjugacyMapSpec:
    """h(x) = x + 小位移，用于构造 g = h f h^{-1}"""
    terms = [
        ((0, 1, 0), (amplitude, 0.0, amplitude / 2.0), 0.4),
        ((1, 1, 0), (0.0, amplitude, 0.0), 1.3),
    ]
    return ConjugacyMapSpec(PerturbationSpec.from_terms(terms, amplitude_bound=0.1))


def conjugated_linear(amplitude: float = 2e-3) -> ConjugatedModel:
    return conjugate_model(linear_model(), small_conjugacy(amplitude))


def conjugated(model: AnosovMapModel, amplitude: float = 2e-3) -> ConjugatedModel:
    return conjugate_model(model, small_conjugacy(amplitude))


FIXTURES = {
    "linear": linear_model,
    "volume_preserving_shear": volume_preserving_shear,
    "stable_shear": stable_shear,
    "dissipative": dissipative,
}
