"""同宿完整群的分类: 平凡 / 不可约 / 可约非平凡 / 未定"""

import logging
import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from numpy.typing import NDArray

from ..errors import ClassificationRefused
from ..geometry import eigenlines2, is_scalar2, line_angle, sl_pm_normalize
from .generators import ParryEvaluation

logger = logging.getLogger(__name__)

Verdict = Literal["trivial", "irreducible", "reducible_nontrivial", "undetermined"]


@dataclass(frozen=True)
class GroupClassification:
    verdict: Verdict
    normalized_trace: float
    evidence: list[dict] = field(default_factory=list)
    samples: int = 0

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "normalized_trace": self.normalized_trace,
            "samples": self.samples,
            "evidence": self.evidence,
        }


def normalized_trace(m: NDArray[np.float64]) -> float:
    """|Tr A| / sqrt|det A|"""
    return abs(float(np.trace(m))) / math.sqrt(abs(float(np.linalg.det(m))))


def check_trace_window(a_p: NDArray[np.float64]) -> float:
    t = normalized_trace(a_p)
    if not 0.0 < t < 2.0:
        raise ClassificationRefused(
            f"fixed-point matrix outside the elliptic window: normalized trace {t:.6f} not in (0, 2)",
            normalized_trace=t,
        )
    return t


def rotation_angle(m: NDArray[np.float64]) -> float:
    """椭圆元素的旋转角；非椭圆返回 0"""
    t = float(np.trace(sl_pm_normalize(m)))
    if np.linalg.det(m) < 0 or abs(t) >= 2.0:
        return 0.0
    return math.acos(abs(t) / 2.0) if abs(t) > 0 else math.pi / 2


def _lines_transverse(a: list[NDArray[np.float64]], b: list[NDArray[np.float64]], threshold: float) -> bool:
    return bool(a) and bool(b) and min(line_angle(u, v) for u in a for v in b) > threshold


def classify_group(
    a_p: NDArray[np.float64],
    generators: Sequence[ParryEvaluation],
    trivial_tolerance: float = 1e-5,
    transversality: float = 1e-3,
    common_line_tolerance: float = 1e-6,
) -> GroupClassification:
    """生成元值及其 A_p 共轭作为样本；门限外的边界情形给出 undetermined"""
    t = check_trace_window(a_p)
    labels = [g.word.label for g in generators]
    values = [sl_pm_normalize(g.value) for g in generators]

    distances = [float(np.linalg.norm(v - np.eye(2))) for v in values]
    evidence = [{"word": label, "value": v.tolist(), "distance_to_identity": d} for label, v, d in zip(labels, values, distances)]
    if all(d <= trivial_tolerance for d in distances):
        logger.info(f"homoclinic group trivial: max distance to identity {max(distances, default=0.0):.3e}")
        return GroupClassification("trivial", t, evidence, len(values))

    # G_p 在 A_p 共轭下不变
    a_inv = np.linalg.inv(a_p)
    samples = list(zip(labels, values))
    samples += [(f"A_p {label} A_p^-1", a_p @ v @ a_inv) for label, v in zip(labels, values)]
    samples = [(label, v) for label, v in samples if not is_scalar2(v, trivial_tolerance)]

    for label, v in samples:
        angle = rotation_angle(v)
        if angle > transversality:
            evidence.append({"word": label, "elliptic_angle": angle})
            logger.info(f"homoclinic group irreducible: elliptic element {label} (angle {angle:.3e})")
            return GroupClassification("irreducible", t, evidence, len(samples))

    lines = [(label, eigenlines2(v)) for label, v in samples]
    for i, (label_a, la) in enumerate(lines):
        for label_b, lb in lines[i + 1 :]:
            if _lines_transverse(la, lb, transversality):
                angle = min(line_angle(u, v) for u in la for v in lb)
                evidence.append({"words": [label_a, label_b], "eigenline_angle": angle})
                logger.info(f"homoclinic group irreducible: {label_a} and {label_b} share no eigenline ({angle:.3e})")
                return GroupClassification("irreducible", t, evidence, len(samples))

    if lines and all(ls for _, ls in lines):
        for candidate in lines[0][1]:
            gaps = [min(line_angle(candidate, u) for u in ls) for _, ls in lines]
            if max(gaps) <= common_line_tolerance:
                evidence.append({"common_line": candidate.tolist(), "max_angle": max(gaps)})
                logger.info("homoclinic group reducible: common invariant line")
                return GroupClassification("reducible_nontrivial", t, evidence, len(samples))

    logger.warning("homoclinic group classification undetermined at the current thresholds")
    return GroupClassification("undetermined", t, evidence, len(samples))
