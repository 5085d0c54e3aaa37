"""三角多项式扰动: x -> Σ a_j sin(2π<k_j, x> + φ_j)"""

import hashlib
import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..errors import ModelError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class PerturbationSpec:
    """有限三角多项式，Z^3 周期，C^1 范数有可计算的上界"""

    frequencies: NDArray[np.float64]
    amplitudes: NDArray[np.float64]
    phases: NDArray[np.float64]
    amplitude_bound: float = 0.25

    def __post_init__(self):
        k = np.asarray(self.frequencies, dtype=float).reshape(-1, 3)
        a = np.asarray(self.amplitudes, dtype=float).reshape(-1, 3)
        phi = np.asarray(self.phases, dtype=float).reshape(-1)
        if not (len(k) == len(a) == len(phi)):
            raise ModelError("perturbation term arrays have mismatched lengths")
        if not np.array_equal(k, np.round(k)):
            raise ModelError("perturbation frequencies must be integer vectors")
        object.__setattr__(self, "frequencies", k)
        object.__setattr__(self, "amplitudes", a)
        object.__setattr__(self, "phases", phi)
        if self.c1_norm > self.amplitude_bound:
            raise ModelError(
                f"C1 size {self.c1_norm:.3e} exceeds amplitude_bound {self.amplitude_bound:.3e}"
            )

    @classmethod
    def from_terms(
        cls,
        terms: Iterable[tuple[Sequence[int], Sequence[float], float]],
        amplitude_bound: float = 0.25,
    ) -> "PerturbationSpec":
        terms = list(terms)
        if not terms:
            return cls.zero(amplitude_bound)
        k, a, phi = zip(*terms)
        return cls(np.array(k, dtype=float), np.array(a, dtype=float), np.array(phi, dtype=float), amplitude_bound)

    @classmethod
    def zero(cls, amplitude_bound: float = 0.25) -> "PerturbationSpec":
        return cls(np.zeros((0, 3)), np.zeros((0, 3)), np.zeros(0), amplitude_bound)

    @property
    def is_zero(self) -> bool:
        return len(self.phases) == 0 or not np.any(self.amplitudes)

    @cached_property
    def c1_norm(self) -> float:
        """Σ 2π |a_j| |k_j|，导数的上界"""
        return float(TWO_PI * np.sum(np.linalg.norm(self.amplitudes, axis=1) * np.linalg.norm(self.frequencies, axis=1)))

    def _angles(self, x: NDArray[np.float64]) -> NDArray[np.float64]:
        return TWO_PI * (x @ self.frequencies.T) + self.phases

    def displacement(self, x: ArrayLike) -> NDArray[np.float64]:
        x = np.asarray(x, dtype=float)
        if self.is_zero:
            return np.zeros_like(x)
        return np.sin(self._angles(x)) @ self.amplitudes

    def jacobian(self, x: ArrayLike) -> NDArray[np.float64]:
        x = np.asarray(x, dtype=float)
        if self.is_zero:
            return np.zeros(x.shape[:-1] + (3, 3))
        weights = TWO_PI * np.cos(self._angles(x))
        return np.einsum("...m,mi,mj->...ij", weights, self.amplitudes, self.frequencies)

    def difference(self, x: ArrayLike, delta: ArrayLike) -> NDArray[np.float64]:
        """P(x + δ) - P(x)，用 2cos(θ+ε/2)sin(ε/2) 避免相消"""
        x = np.asarray(x, dtype=float)
        delta = np.asarray(delta, dtype=float)
        if self.is_zero:
            return np.zeros(np.broadcast(x, delta).shape)
        eps = TWO_PI * (delta @ self.frequencies.T)
        theta = self._angles(x)
        return (2.0 * np.cos(theta + eps / 2.0) * np.sin(eps / 2.0)) @ self.amplitudes

    def scaled(self, factor: float) -> "PerturbationSpec":
        return PerturbationSpec(self.frequencies, self.amplitudes * factor, self.phases, self.amplitude_bound)

    def combined(self, other: "PerturbationSpec") -> "PerturbationSpec":
        return PerturbationSpec(
            np.vstack([self.frequencies, other.frequencies]),
            np.vstack([self.amplitudes, other.amplitudes]),
            np.concatenate([self.phases, other.phases]),
            max(self.amplitude_bound, other.amplitude_bound),
        )

    def to_dict(self) -> dict:
        return {
            "terms": [
                {"frequency": k.astype(int).tolist(), "amplitude": a.tolist(), "phase": float(p)}
                for k, a, p in zip(self.frequencies, self.amplitudes, self.phases)
            ],
            "amplitude_bound": self.amplitude_bound,
        }

    @cached_property
    def fingerprint(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]
