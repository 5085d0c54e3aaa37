"""2x2 线性余圈: 乘积、纤维聚束、完整与 PCH"""

from .bunching import FiberBunchingReport, fiber_bunching_report
from .holonomy import (
    HolonomyApproximant,
    holonomy_hoelder_fit,
    leg_holonomy,
    partner_orbit,
    stable_holonomy,
    unstable_holonomy,
)
from .pch import (
    SixPointCheck,
    compose,
    path_equivariance_residual,
    path_holonomies,
    pch_along_path,
    quadrilateral_holonomy,
    quadrilateral_map,
    six_point_check,
)
from .products import CocycleProduct, cocycle_eval, periodic_product, track_blocks
from .spec import (
    CoboundaryCocycle,
    CocycleSpec,
    ConstantCocycle,
    MatrixTrigField,
    NormalizedCocycle,
    PullbackCocycle,
    TrigCocycle,
    UnstableDerivativeCocycle,
)

__all__ = [
    "CoboundaryCocycle",
    "CocycleProduct",
    "CocycleSpec",
    "ConstantCocycle",
    "FiberBunchingReport",
    "HolonomyApproximant",
    "MatrixTrigField",
    "NormalizedCocycle",
    "PullbackCocycle",
    "SixPointCheck",
    "TrigCocycle",
    "UnstableDerivativeCocycle",
    "cocycle_eval",
    "compose",
    "fiber_bunching_report",
    "holonomy_hoelder_fit",
    "leg_holonomy",
    "partner_orbit",
    "path_equivariance_residual",
    "path_holonomies",
    "periodic_product",
    "pch_along_path",
    "quadrilateral_holonomy",
    "quadrilateral_map",
    "six_point_check",
    "stable_holonomy",
    "track_blocks",
    "unstable_holonomy",
]
