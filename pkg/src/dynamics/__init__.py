"""映射模型: 双曲自同构、三角扰动与共轭"""

from .automorphism import AutomorphismSpec
from .fixtures import (
    DEFAULT_MATRIX,
    FIXTURES,
    conjugated,
    conjugated_linear,
    default_automorphism,
    dissipative,
    linear_model,
    small_conjugacy,
    stable_shear,
    volume_preserving_shear,
)
from .model import AnosovMapModel, ConjugacyMapSpec, ConjugatedModel, MapLike, conjugate_model
from .perturbation import PerturbationSpec

__all__ = [
    "AnosovMapModel",
    "AutomorphismSpec",
    "ConjugacyMapSpec",
    "ConjugatedModel",
    "DEFAULT_MATRIX",
    "FIXTURES",
    "MapLike",
    "PerturbationSpec",
    "conjugate_model",
    "conjugated",
    "conjugated_linear",
    "default_automorphism",
    "dissipative",
    "linear_model",
    "small_conjugacy",
    "stable_shear",
    "volume_preserving_shear",
]
