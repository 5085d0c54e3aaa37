"""Schur 共轭子与共轭场的全局延拓"""

import itertools
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from ..cocycle import CocycleSpec, compose, path_holonomies
from ..dynamics import MapLike
from ..errors import (
    ConjugatorNotFoundError,
    PathDependenceError,
    ReducibleRepresentationError,
    TraceMismatchError,
)
from ..geometry import PowerLawFit, fit_power_law, project_to_torus, torus_delta, torus_distance
from ..parallel import parallel_map
from ..structure import Leg, UsPath, intersect_leaves

logger = logging.getLogger(__name__)

NULL_TOLERANCE = 1e-7


def commutation_system(values_a: Sequence[ArrayLike], values_b: Sequence[ArrayLike]) -> NDArray[np.float64]:
    """C a = b C 的线性系统，vec 按列展开: (a^T ⊗ I - I ⊗ b) vec(C) = 0"""
    eye = np.eye(2)
    rows = [np.kron(np.asarray(a).T, eye) - np.kron(eye, np.asarray(b)) for a, b in zip(values_a, values_b)]
    return np.vstack(rows)


def trace_witness(values_a: Sequence[ArrayLike], values_b: Sequence[ArrayLike], tolerance: float = 1e-5) -> Optional[dict]:
    """单个元素与两两乘积上的迹比较，返回第一个失配的证据"""
    for i, (a, b) in enumerate(zip(values_a, values_b)):
        d = abs(float(np.trace(a)) - float(np.trace(b)))
        if d > tolerance:
            return {"word": [i + 1], "trace_a": float(np.trace(a)), "trace_b": float(np.trace(b)), "deviation": d}
    for i, j in itertools.combinations(range(len(values_a)), 2):
        ta = float(np.trace(np.asarray(values_a[j]) @ values_a[i]))
        tb = float(np.trace(np.asarray(values_b[j]) @ values_b[i]))
        if abs(ta - tb) > tolerance:
            return {"word": [i + 1, j + 1], "trace_a": ta, "trace_b": tb, "deviation": abs(ta - tb)}
    return None


def schur_conjugator(
    values_a: Sequence[ArrayLike],
    values_b: Sequence[ArrayLike],
    trace_tolerance: float = 1e-5,
    null_tolerance: float = NULL_TOLERANCE,
) -> NDArray[np.float64]:
    """C ∈ SL^±(2) 使 C a_i C^{-1} = b_i 对所有 i 成立

    解空间须为一维（二维以上说明表示可约）；|det C| = 1，符号取 Tr C ≥ 0。
    """
    if len(values_a) != len(values_b) or not values_a:
        raise ConjugatorNotFoundError("conjugator needs two non-empty lists of equal length")
    witness = trace_witness(values_a, values_b, trace_tolerance)
    if witness is not None:
        raise TraceMismatchError(f"traces differ on word {witness['word']}", witness=witness)

    system = commutation_system(values_a, values_b)
    scale = max(float(np.linalg.norm(system)), 1e-300)
    _, sigma, vt = linalg.svd(system / scale)
    if sigma[-1] > null_tolerance:
        raise ConjugatorNotFoundError(
            f"no simultaneous conjugator (smallest singular value {sigma[-1]:.3e})", smallest=float(sigma[-1])
        )
    if sigma[-2] <= null_tolerance:
        raise ReducibleRepresentationError(
            "conjugator solution space has dimension ≥ 2; the input representation is reducible",
            singular_values=sigma.tolist(),
        )
    c = vt[-1].reshape(2, 2, order="F")
    c = c / np.sqrt(abs(np.linalg.det(c)))
    if np.trace(c) < 0:
        c = -c
    return c


def conjugation_residual(c: ArrayLike, values_a: Sequence[ArrayLike], values_b: Sequence[ArrayLike]) -> float:
    c = np.asarray(c, dtype=float)
    c_inv = np.linalg.inv(c)
    return float(max(np.linalg.norm(c @ a @ c_inv - b) for a, b in zip(values_a, values_b)))


def _linear_legs(model: MapLike, target: NDArray[np.float64]) -> float:
    lin = model.linear
    coords = np.linalg.solve(np.column_stack([lin.unstable_frame, lin.stable_direction]), target)
    return max(float(np.linalg.norm(coords[:2])), abs(float(coords[2])))


def _best_target(model: MapLike, start: NDArray[np.float64], end: NDArray[np.float64]) -> NDArray[np.float64]:
    """end - start 的提升中较长腿最短者"""
    base = torus_delta(start, end)
    shifts = itertools.product((-1, 0, 1), repeat=3)
    return min((base + np.array(m, dtype=float) for m in shifts), key=lambda t: _linear_legs(model, t))


def canonical_path(model: MapLike, p: ArrayLike, x: ArrayLike) -> UsPath:
    """u-腿 p → w，s-腿 w → x，w ∈ W^u(p) ∩ W^s(x)"""
    p = project_to_torus(np.asarray(p, dtype=float))
    x = project_to_torus(np.asarray(x, dtype=float))
    u_pair, s_pair = intersect_leaves(model, p, x, _best_target(model, p, x))
    return UsPath((Leg.from_pair(u_pair), Leg.from_pair(s_pair, reverse=True)))


def audit_path(model: MapLike, p: ArrayLike, x: ArrayLike) -> UsPath:
    """s-腿 p → w'，u-腿 w' → x，w' ∈ W^s(p) ∩ W^u(x)"""
    p = project_to_torus(np.asarray(p, dtype=float))
    x = project_to_torus(np.asarray(x, dtype=float))
    u_pair, s_pair = intersect_leaves(model, x, p, _best_target(model, x, p))
    return UsPath((Leg.from_pair(s_pair), Leg.from_pair(u_pair, reverse=True)))


def transport(
    a: CocycleSpec,
    b: CocycleSpec,
    model: MapLike,
    path: UsPath,
    c_p: NDArray[np.float64],
    tolerance: float = 1e-9,
) -> NDArray[np.float64]:
    """C(x) = H^B_path C_p (H^A_path)^{-1}"""
    h_a = compose(path_holonomies(a, model, path, tolerance))
    h_b = compose(path_holonomies(b, model, path, tolerance))
    return h_b @ c_p @ np.linalg.inv(h_a)


@dataclass(frozen=True)
class FieldSample:
    point: list[float]
    value: list[list[float]]
    audit_value: list[list[float]]
    disagreement: float
    equation_residual: float


@dataclass(frozen=True, eq=False)
class ConjugacyField:
    anchor: NDArray[np.float64]
    c_p: NDArray[np.float64]
    samples: list[FieldSample]
    hoelder_fit: PowerLawFit
    path_tolerance: float
    residual_tolerance: float
    oracle_deviation: Optional[float] = None

    @property
    def max_disagreement(self) -> float:
        return max((s.disagreement for s in self.samples), default=0.0)

    @property
    def max_residual(self) -> float:
        return max((s.equation_residual for s in self.samples), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_disagreement <= self.path_tolerance and self.max_residual <= self.residual_tolerance

    def value_at(self, i: int) -> NDArray[np.float64]:
        return np.array(self.samples[i].value)

    def to_dict(self) -> dict:
        return {
            "anchor": self.anchor.tolist(),
            "c_p": self.c_p.tolist(),
            "max_disagreement": self.max_disagreement,
            "max_residual": self.max_residual,
            "path_tolerance": self.path_tolerance,
            "residual_tolerance": self.residual_tolerance,
            "oracle_deviation": self.oracle_deviation,
            "passed": self.passed,
            "hoelder_fit": self.hoelder_fit.to_dict(),
            "samples": [s.__dict__ for s in self.samples],
        }


def grid_points(size: int, offset: float = 0.5) -> NDArray[np.float64]:
    """size^3 个格心点 (i + offset) / size"""
    axis = (np.arange(size) + offset) / size
    return np.array(list(itertools.product(axis, axis, axis)))


def _field_sample(a, b, model, p, c_p, x, tolerance) -> FieldSample:
    c_x = transport(a, b, model, canonical_path(model, p, x), c_p, tolerance)
    c_audit = transport(a, b, model, audit_path(model, p, x), c_p, tolerance)
    fx = model.evaluate(x)
    c_fx = transport(a, b, model, canonical_path(model, p, fx), c_p, tolerance)
    residual = float(np.linalg.norm(c_fx @ a.evaluate(model, x) - b.evaluate(model, x) @ c_x))
    return FieldSample(
        point=np.asarray(x, dtype=float).tolist(),
        value=c_x.tolist(),
        audit_value=c_audit.tolist(),
        disagreement=float(np.linalg.norm(c_x - c_audit)),
        equation_residual=residual,
    )


def extend_conjugacy(
    a: CocycleSpec,
    b: CocycleSpec,
    model: MapLike,
    p: ArrayLike,
    c_p: ArrayLike,
    grid: ArrayLike,
    tolerance: float = 1e-9,
    path_tolerance: float = 1e-4,
    residual_tolerance: float = 1e-4,
    jobs: int = 1,
) -> ConjugacyField:
    """沿 us-路径把 C_p 输运到网格点，用反序路径审计路径无关性

    满足 C(f x) A(x) = B(x) C(x)；路径分歧超过 path_tolerance 时报 PathDependenceError。
    """
    p = project_to_torus(np.asarray(p, dtype=float))
    c_p = np.asarray(c_p, dtype=float)
    grid = np.asarray(grid, dtype=float).reshape(-1, 3)
    samples = parallel_map(
        lambda x: _field_sample(a, b, model, p, c_p, x, tolerance),
        list(grid),
        jobs=jobs,
        desc="conjugacy field",
    )

    worst = max((s.disagreement for s in samples), default=0.0)
    if worst > path_tolerance:
        raise PathDependenceError(
            f"conjugacy transport depends on the path: disagreement {worst:.3e} > {path_tolerance:.1e}",
            disagreement=worst,
        )

    distances, jumps = [], []
    for i, j in itertools.combinations(range(len(samples)), 2):
        distances.append(torus_distance(np.array(samples[i].point), np.array(samples[j].point)))
        jumps.append(float(np.linalg.norm(np.array(samples[i].value) - np.array(samples[j].value))))
    fit = fit_power_law(np.array(distances), np.array(jumps))

    # 拉回余圈自带已知共轭；比较时不计整体符号
    oracle = None
    if b.oracle_role == "conjugacy":
        oracle = 0.0
        for s in samples:
            expected = b.oracle(np.array(s.point))
            value = np.asarray(s.value)
            oracle = max(oracle, float(min(np.linalg.norm(value - expected), np.linalg.norm(value + expected))))

    field_ = ConjugacyField(p, c_p, samples, fit, path_tolerance, residual_tolerance, oracle)
    logger.info(
        f"conjugacy field on {len(samples)} points: path disagreement {worst:.3e}, "
        f"equation residual {field_.max_residual:.3e}"
    )
    return field_
