"""周期数据: 不稳定导数矩阵、迹、谱与 SRB = MME 检验"""

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from ..dynamics import MapLike
from ..errors import PeriodicOrbitError
from ..geometry import SpectrumReport, orthonormalize_pair, principal_angle, spectrum2
from ..structure import frame_from_plane
from .search import PeriodicOrbit, _orbit_points

logger = logging.getLogger(__name__)

FRAME_STEPS = 240
FRAME_TOLERANCE = 1e-14


@dataclass(frozen=True, eq=False)
class PeriodicFrames:
    points: NDArray[np.float64]
    unstable: NDArray[np.float64]
    stable: NDArray[np.float64]


def periodic_frames(model: MapLike, orbit: PeriodicOrbit) -> PeriodicFrames:
    """沿周期轨道反复绕行，推前 E0 得 E^u，拉回 e_s 得 E^s"""
    lin = model.linear
    pts = orbit.points if len(orbit.points) == orbit.period else _orbit_points(model, orbit.point, orbit.period)
    k = orbit.period
    jacs = model.differential(pts)
    if jacs.ndim == 2:
        jacs = np.broadcast_to(jacs, (k, 3, 3))
    rounds = max(2, -(-FRAME_STEPS // k))

    plane = lin.unstable_frame
    line = lin.stable_direction
    for _ in range(rounds):
        previous = plane
        for j in range(k):
            plane = orthonormalize_pair(jacs[j] @ plane)
        for j in range(k - 1, -1, -1):
            v = np.linalg.solve(jacs[j], line)
            line = v / np.linalg.norm(v)
        if principal_angle(plane, previous) < FRAME_TOLERANCE:
            break

    planes = np.empty((k, 3, 2))
    lines = np.empty((k, 3))
    planes[0] = plane
    for j in range(1, k):
        planes[j] = orthonormalize_pair(jacs[j - 1] @ planes[j - 1])
    lines[0] = line if float(line @ lin.stable_direction) >= 0 else -line
    for j in range(k - 1, 0, -1):
        nxt = lines[(j + 1) % k]
        v = np.linalg.solve(jacs[j], nxt)
        lines[j] = v / np.linalg.norm(v)
    return PeriodicFrames(pts, planes, lines)


@dataclass(frozen=True, eq=False)
class PeriodicData:
    orbit: PeriodicOrbit
    unstable_matrix: NDArray[np.float64]
    blocks: NDArray[np.float64]
    trace: float
    spectrum: SpectrumReport
    full_jacobian: NDArray[np.float64]
    log_unstable_det: float
    stable_multiplier: float
    determinant_residual: float
    frames: NDArray[np.float64] = field(repr=False)

    @property
    def normalized_trace(self) -> float:
        return abs(self.trace) / np.sqrt(abs(np.linalg.det(self.unstable_matrix)))

    def to_row(self) -> dict:
        x, y, z = self.orbit.point
        return {
            "period": self.orbit.period,
            "x": x,
            "y": y,
            "z": z,
            "trace": self.trace,
            "log_det": self.log_unstable_det,
            "residual": self.orbit.residual,
        }


def periodic_data(model: MapLike, orbit: PeriodicOrbit, rotation: float = 0.0) -> PeriodicData:
    """D^u f^k 在全局平凡化 Φ 下的矩阵：逐步 2x2 块按轨道顺序相乘"""
    frames = periodic_frames(model, orbit)
    reference = model.linear.unstable_frame
    phi = np.array([frame_from_plane(p, reference, rotation) for p in frames.unstable])
    k = orbit.period
    jacs = np.broadcast_to(model.differential(frames.points), (k, 3, 3))

    blocks = np.array([phi[(j + 1) % k].T @ jacs[j] @ phi[j] for j in range(k)])
    unstable = np.eye(2)
    full = np.eye(3)
    stable = 1.0
    for j in range(k):
        unstable = blocks[j] @ unstable
        full = jacs[j] @ full
        stable *= float(frames.stable[(j + 1) % k] @ jacs[j] @ frames.stable[j])

    det_u = float(np.linalg.det(unstable))
    det_full = float(np.linalg.det(full))
    residual = abs(abs(det_full) - abs(det_u) * abs(stable)) / max(abs(det_full), 1e-300)
    return PeriodicData(
        orbit=orbit,
        unstable_matrix=unstable,
        blocks=blocks,
        trace=float(np.trace(unstable)),
        spectrum=spectrum2(unstable),
        full_jacobian=full,
        log_unstable_det=float(np.log(abs(det_u))),
        stable_multiplier=stable,
        determinant_residual=residual,
        frames=phi,
    )


@dataclass(frozen=True)
class SrbReport:
    averages: list[float]
    common_value: float
    max_deviation: float
    tolerance: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "averages": self.averages,
            "common_value": self.common_value,
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def srb_equals_mme_test(
    model: MapLike,
    orbits: Sequence[PeriodicOrbit | PeriodicData],
    tolerance: float = 1e-6,
) -> SrbReport:
    """log|det D^u f^k| / k 在所有周期轨道上是否为常数"""
    data = [o if isinstance(o, PeriodicData) else periodic_data(model, o) for o in orbits]
    if not data:
        raise PeriodicOrbitError("SRB = MME test needs at least one periodic orbit")
    averages = [d.log_unstable_det / d.orbit.period for d in data]
    common = float(np.mean(averages))
    deviation = float(max(abs(a - common) for a in averages))
    passed = deviation <= tolerance
    logger.info(f"SRB = MME test: common value {common:.10f}, deviation {deviation:.3e}, passed={passed}")
    return SrbReport(averages, common, deviation, tolerance, passed)
