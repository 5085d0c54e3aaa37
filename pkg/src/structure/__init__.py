"""不变结构: 分裂、叶片坐标卡、us-路径与同宿点"""

from .charts import (
    ChartBase,
    LeafChart,
    LeafPair,
    chart_base,
    clear_chart_cache,
    evaluate_chart,
    leaf_chart,
    leaf_pair,
    project_along,
)
from .hyperbolicity import HyperbolicityEstimates, hyperbolicity_estimates, sobol_sample
from .intersections import (
    HolonomyPoint,
    HomoclinicPoint,
    SixPointConfiguration,
    build_quadrilateral,
    build_us_loop,
    homoclinic_points,
    intersect_leaves,
    six_point_configuration,
    stable_holonomy_point,
)
from .leaves import (
    Leg,
    MembershipResult,
    QuadrilateralSpec,
    UsPath,
    concatenate,
    contraction_rate,
    leaf_membership,
    pair_membership,
)
from .splitting import (
    OrbitTrack,
    Splitting,
    backward_points,
    clear_splitting_cache,
    compute_splitting,
    forward_points,
    frame_from_plane,
    invariance_defect,
    splitting_hoelder_fit,
    track_orbit,
)

__all__ = [
    "ChartBase",
    "HolonomyPoint",
    "HomoclinicPoint",
    "HyperbolicityEstimates",
    "LeafChart",
    "LeafPair",
    "Leg",
    "MembershipResult",
    "OrbitTrack",
    "QuadrilateralSpec",
    "SixPointConfiguration",
    "Splitting",
    "UsPath",
    "backward_points",
    "build_quadrilateral",
    "build_us_loop",
    "chart_base",
    "clear_chart_cache",
    "clear_splitting_cache",
    "compute_splitting",
    "concatenate",
    "contraction_rate",
    "evaluate_chart",
    "forward_points",
    "frame_from_plane",
    "homoclinic_points",
    "hyperbolicity_estimates",
    "intersect_leaves",
    "invariance_defect",
    "leaf_chart",
    "leaf_membership",
    "leaf_pair",
    "pair_membership",
    "project_along",
    "six_point_configuration",
    "sobol_sample",
    "splitting_hoelder_fit",
    "stable_holonomy_point",
    "track_orbit",
]
