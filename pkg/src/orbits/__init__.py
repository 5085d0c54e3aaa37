"""周期轨道: 搜索、闭合引理、周期数据"""

from .closing import ClosingResult, close_pseudo_orbit, closing_point, profile_violations, pseudo_orbit_epsilon
from .data import (
    PeriodicData,
    PeriodicFrames,
    SrbReport,
    periodic_data,
    periodic_frames,
    srb_equals_mme_test,
)
from .matching import (
    MatchingReport,
    MatchRow,
    characteristic_coefficients,
    continue_orbit,
    matching_data_report,
)
from .search import (
    PeriodicOrbit,
    PeriodicSearchResult,
    find_periodic_orbits,
    minimal_period,
    periodic_search,
    periodic_seeds,
)

__all__ = [
    "ClosingResult",
    "MatchRow",
    "MatchingReport",
    "PeriodicData",
    "PeriodicFrames",
    "PeriodicOrbit",
    "PeriodicSearchResult",
    "SrbReport",
    "characteristic_coefficients",
    "close_pseudo_orbit",
    "closing_point",
    "continue_orbit",
    "find_periodic_orbits",
    "matching_data_report",
    "minimal_period",
    "periodic_data",
    "periodic_frames",
    "periodic_search",
    "periodic_seeds",
    "profile_violations",
    "pseudo_orbit_epsilon",
    "srb_equals_mme_test",
]
