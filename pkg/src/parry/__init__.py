"""Parry 表示: 同宿回路、生成元、分类、共轭子与二择一判定"""

from .classify import GroupClassification, check_trace_window, classify_group, normalized_trace, rotation_angle
from .conjugacy import (
    ConjugacyField,
    FieldSample,
    audit_path,
    canonical_path,
    commutation_system,
    conjugation_residual,
    extend_conjugacy,
    grid_points,
    schur_conjugator,
    trace_witness,
    transport,
)
from .dichotomy import (
    DichotomyReport,
    NormalizationResult,
    TraceMatchReport,
    TraceRow,
    align_frames,
    dichotomy_report,
    normalize_cocycle,
    trace_match_report,
)
from .generators import (
    ParryEvaluation,
    PeriodicShadow,
    base_frame,
    fixed_point_matrix,
    homoclinic_segment,
    parry_generator,
    parry_generators,
    parry_word_eval,
    periodic_shadow_approximant,
    rn_at,
    rn_sequence,
)
from .loops import HomoclinicLoop, ParryWord, parry_loops, word_path

__all__ = [
    "ConjugacyField",
    "DichotomyReport",
    "FieldSample",
    "GroupClassification",
    "HomoclinicLoop",
    "NormalizationResult",
    "ParryEvaluation",
    "ParryWord",
    "PeriodicShadow",
    "TraceMatchReport",
    "TraceRow",
    "align_frames",
    "audit_path",
    "base_frame",
    "canonical_path",
    "check_trace_window",
    "classify_group",
    "commutation_system",
    "conjugation_residual",
    "dichotomy_report",
    "extend_conjugacy",
    "fixed_point_matrix",
    "homoclinic_segment",
    "grid_points",
    "normalize_cocycle",
    "normalized_trace",
    "parry_generator",
    "parry_generators",
    "parry_loops",
    "parry_word_eval",
    "periodic_shadow_approximant",
    "rn_at",
    "rn_sequence",
    "rotation_angle",
    "schur_conjugator",
    "trace_witness",
    "transport",
    "word_path",
]
