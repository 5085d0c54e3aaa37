"""Parry 表示的生成元: R_n 极限与周期阴影 P_n

R_n = (A_p^n)^{-1} A^{2n}_{f^{-n} z} (A_p^n)^{-1}，端点纤维用 p 处的平凡化识别；
P_n 把同一公式放到闭合引理给出的真周期轨道上。
"""

import logging
from dataclasses import dataclass, field
from typing import Iterator, Literal, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..cocycle import CocycleSpec, partner_orbit, pch_along_path, periodic_product
from ..dynamics import MapLike
from ..errors import CrossValidationError, HolonomyConvergenceError, WordError
from ..geometry import project_to_torus
from ..orbits import ClosingResult, close_pseudo_orbit
from ..parallel import parallel_map
from ..structure import compute_splitting
from .loops import HomoclinicLoop, ParryWord

logger = logging.getLogger(__name__)

Method = Literal["limit_Rn", "periodic_Pn", "word_product"]

MAX_STEPS = 200


@dataclass(frozen=True, eq=False)
class ParryEvaluation:
    value: NDArray[np.float64]
    word: ParryWord
    n_used: int
    cauchy_gap: float
    method: Method
    cross_check: Optional[float] = None

    @property
    def trace(self) -> float:
        return float(np.trace(self.value))

    def to_dict(self) -> dict:
        return {
            "word": self.word.to_list(),
            "label": self.word.label,
            "method": self.method,
            "value": self.value.tolist(),
            "trace": self.trace,
            "n_used": self.n_used,
            "cauchy_gap": self.cauchy_gap,
            "cross_check": self.cross_check,
        }


def base_frame(cocycle: CocycleSpec, model: MapLike, p: ArrayLike) -> Optional[NDArray[np.float64]]:
    """p 处的 Φ_p（二维余圈为 None）"""
    if cocycle.fiber_dim == 2:
        return None
    plane = compute_splitting(model, p).unstable_plane
    return cocycle.frame(cocycle.entry_plane(p, plane))


def _read(frame: Optional[NDArray[np.float64]], m: NDArray[np.float64]) -> NDArray[np.float64]:
    return m if frame is None else frame.T @ m @ frame


def fixed_point_matrix(cocycle: CocycleSpec, model: MapLike, p: ArrayLike) -> NDArray[np.float64]:
    """未归一化的 A_p"""
    p = project_to_torus(np.asarray(p, dtype=float))
    return _read(base_frame(cocycle, model, p), cocycle.raw(p))


def _homoclinic_orbit(model: MapLike, loop: HomoclinicLoop):
    """两个迭代器: z_{-k} (k ≥ 1) 与 z_k (k ≥ 0)，都以 p 加偏移的形式给出"""
    u_pair, s_pair = loop.z.u_pair, loop.z.s_pair
    backward = partner_orbit(model, u_pair.base, u_pair.displacement, False, (u_pair.orbit, u_pair.offsets))
    forward = partner_orbit(model, s_pair.base, s_pair.displacement, True, (s_pair.orbit, s_pair.offsets))
    next(backward)
    return (x + d for x, d in backward), (x + d for x, d in forward)


def rn_sequence(cocycle: CocycleSpec, model: MapLike, loop: HomoclinicLoop) -> Iterator[NDArray[np.float64]]:
    """依次给出 R_1, R_2, ...（未 finalize）"""
    p = loop.base
    frame = base_frame(cocycle, model, p)
    a_inv = np.linalg.inv(fixed_point_matrix(cocycle, model, p))
    backward, forward = _homoclinic_orbit(model, loop)
    middle = np.eye(cocycle.fiber_dim)
    power = np.eye(2)
    while True:
        middle = cocycle.raw(next(forward)) @ middle @ cocycle.raw(next(backward))
        power = power @ a_inv
        yield power @ _read(frame, middle) @ power


def rn_at(cocycle: CocycleSpec, model: MapLike, loop: HomoclinicLoop, n: int) -> NDArray[np.float64]:
    sequence = rn_sequence(cocycle, model, loop)
    for _ in range(n - 1):
        next(sequence)
    return cocycle.finalize(next(sequence))


def parry_generator(
    cocycle: CocycleSpec,
    model: MapLike,
    loop: HomoclinicLoop,
    index: int = 0,
    tolerance: float = 1e-9,
    max_steps: int = MAX_STEPS,
    crossval_factor: float = 10.0,
    cross_validate: bool = True,
) -> ParryEvaluation:
    """R_n 在 tol/10 下收敛，再与回路 PCH 比对（容差 crossval_factor · tol）"""
    inner = tolerance / 10.0
    previous = None
    gaps: list[float] = []
    value = None
    n_used = 0
    for n, current in enumerate(rn_sequence(cocycle, model, loop), start=1):
        if previous is not None:
            gaps.append(float(np.linalg.norm(current - previous)))
            if len(gaps) >= 2 and gaps[-1] < inner and gaps[-2] < inner:
                value, n_used = cocycle.finalize(current), n
                break
        if n >= max_steps:
            break
        previous = current
    if value is None:
        gap = gaps[-1] if gaps else float("inf")
        raise HolonomyConvergenceError(f"R_n for generator g{index + 1} did not converge (gap {gap:.3e})", cauchy_gap=gap)

    word = ParryWord(((index, 1),))
    if not cross_validate:
        return ParryEvaluation(value, word, n_used, gaps[-1], "limit_Rn")
    pch = pch_along_path(cocycle, model, loop.path, tolerance, max_steps)
    disagreement = float(np.linalg.norm(value - pch))
    if disagreement > crossval_factor * tolerance:
        raise CrossValidationError(
            f"generator g{index + 1}: R_n and loop PCH disagree by {disagreement:.3e}",
            disagreement=disagreement,
            generator=index + 1,
        )
    logger.info(f"generator g{index + 1}: n={n_used}, trace {np.trace(value):.10f}, PCH agreement {disagreement:.2e}")
    return ParryEvaluation(value, word, n_used, gaps[-1], "limit_Rn", disagreement)


def parry_generators(
    cocycle: CocycleSpec,
    model: MapLike,
    loops: Sequence[HomoclinicLoop],
    tolerance: float = 1e-9,
    max_steps: int = MAX_STEPS,
    crossval_factor: float = 10.0,
    jobs: int = 1,
) -> list[ParryEvaluation]:
    return parallel_map(
        lambda item: parry_generator(cocycle, model, item[1], item[0], tolerance, max_steps, crossval_factor),
        list(enumerate(loops)),
        jobs=jobs,
        desc="generators",
    )


def parry_word_eval(generators: Sequence[ParryEvaluation], word: ParryWord) -> ParryEvaluation:
    """ρ(ℓ_k)^{e_k} ⋯ ρ(ℓ_1)^{e_1}"""
    word.check(len(generators))
    value = np.eye(2)
    for index, exponent in word.letters:
        g = generators[index].value
        value = (g if exponent > 0 else np.linalg.inv(g)) @ value
    used = [generators[i] for i, _ in word.letters]
    return ParryEvaluation(
        value=value,
        word=word,
        n_used=max(g.n_used for g in used),
        cauchy_gap=float(sum(g.cauchy_gap for g in used)),
        method="word_product",
    )


@dataclass(frozen=True, eq=False)
class PeriodicShadow:
    evaluation: ParryEvaluation
    rn_value: NDArray[np.float64]
    gap: float
    horizon: int
    period: int
    epsilon: float
    cyclic_trace: float
    identified_trace: float
    periodic_trace: float
    power_defect: float
    closing: ClosingResult = field(repr=False)

    @property
    def trace_gap(self) -> float:
        return abs(self.evaluation.trace - float(np.trace(self.rn_value)))

    def to_dict(self) -> dict:
        return {
            "word": self.evaluation.word.to_list(),
            "horizon": self.horizon,
            "period": self.period,
            "epsilon": self.epsilon,
            "pn": self.evaluation.value.tolist(),
            "rn": self.rn_value.tolist(),
            "gap": self.gap,
            "trace_gap": self.trace_gap,
            "trace": self.evaluation.trace,
            "cyclic_trace": self.cyclic_trace,
            "identified_trace": self.identified_trace,
            "periodic_trace": self.periodic_trace,
            "power_defect": self.power_defect,
        }


def homoclinic_segment(model: MapLike, loop: HomoclinicLoop, n: int) -> NDArray[np.float64]:
    """z_{-n}, ..., z_{n-1}"""
    backward, forward = _homoclinic_orbit(model, loop)
    past = [next(backward) for _ in range(n)]
    future = [next(forward) for _ in range(n)]
    return np.array(past[::-1] + future)


def _periodic_cocycle_trace(cocycle: CocycleSpec, model: MapLike, closing: ClosingResult) -> float:
    orbit = closing.periodic_point
    repeat = closing.profile.size // orbit.period
    return float(np.trace(np.linalg.matrix_power(periodic_product(cocycle, model, orbit), repeat)))


def periodic_shadow_approximant(
    cocycle: CocycleSpec,
    model: MapLike,
    loops: Sequence[HomoclinicLoop],
    word: ParryWord,
    n: int,
    epsilon_bound: float = 0.05,
) -> PeriodicShadow:
    """周期 2nm 的阴影轨道上的 P_n 及其与 R_n 的差距"""
    word.check(len(loops))
    if not word.is_positive:
        raise WordError("periodic shadows are built for positive words only", word=word.to_list())
    chosen = [loops[i] for i, _ in word.letters]
    p = chosen[0].base
    segments = [homoclinic_segment(model, loop, n) for loop in chosen]
    closing = close_pseudo_orbit(model, np.concatenate(segments), len(segments), epsilon_bound)

    period = 2 * n * len(chosen)
    points = closing.periodic_point.points
    points = np.tile(points, (period // len(points), 1))
    frame = base_frame(cocycle, model, p)
    a_p = fixed_point_matrix(cocycle, model, p)
    a_inv_n = np.linalg.matrix_power(np.linalg.inv(a_p), n)
    a_inv_2n = a_inv_n @ a_inv_n

    pn = np.eye(2)
    rn = np.eye(2)
    cyclic = np.eye(2)
    identified = np.eye(2)
    for j, loop in enumerate(chosen):
        block = np.eye(cocycle.fiber_dim)
        for q in points[2 * n * j : 2 * n * (j + 1)]:
            block = cocycle.raw(q) @ block
        g = _read(frame, block)
        pn = a_inv_n @ g @ a_inv_n @ pn
        cyclic = g @ a_inv_2n @ cyclic
        identified = g @ identified
        rn = rn_at(cocycle, model, loop, n) @ rn

    pn = cocycle.finalize(pn)
    gap = float(np.linalg.norm(pn - rn))
    normalized_power = cocycle.finalize(np.linalg.matrix_power(a_p, 2 * n))
    shadow = PeriodicShadow(
        evaluation=ParryEvaluation(pn, word, n, gap, "periodic_Pn"),
        rn_value=rn,
        gap=gap,
        horizon=n,
        period=closing.periodic_point.period,
        epsilon=closing.epsilon,
        cyclic_trace=float(np.trace(cocycle.finalize(cyclic))),
        identified_trace=float(np.trace(cocycle.finalize(identified))),
        periodic_trace=_periodic_cocycle_trace(cocycle, model, closing),
        power_defect=float(np.linalg.norm(normalized_power - np.eye(2))),
        closing=closing,
    )
    logger.info(f"P_n for {word.label} at n={n}: gap {gap:.3e}, epsilon {closing.epsilon:.3e}")
    return shadow
