"""环面几何与小矩阵内核"""

from .fitting import PowerLawFit, fit_power_law
from .linalg import (
    SpectrumReport,
    condition2,
    det2,
    eigenlines2,
    is_scalar2,
    line_angle,
    operator_norm2,
    operator_norm3,
    orthonormalize_pair,
    principal_angle,
    rotation2,
    singular_values2,
    sl_pm_normalize,
    spectrum2,
    spectrum3,
)
from .torus import (
    LiftVector,
    TorusPoint,
    hausdorff_distance,
    lift_near,
    project_to_torus,
    torus_delta,
    torus_distance,
    torus_distance_bruteforce,
)

__all__ = [
    "LiftVector",
    "PowerLawFit",
    "SpectrumReport",
    "TorusPoint",
    "condition2",
    "det2",
    "eigenlines2",
    "fit_power_law",
    "hausdorff_distance",
    "is_scalar2",
    "lift_near",
    "line_angle",
    "operator_norm2",
    "operator_norm3",
    "orthonormalize_pair",
    "principal_angle",
    "project_to_torus",
    "rotation2",
    "singular_values2",
    "sl_pm_normalize",
    "spectrum2",
    "spectrum3",
    "torus_delta",
    "torus_distance",
    "torus_distance_bruteforce",
]
