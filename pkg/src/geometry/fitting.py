"""对数-对数回归: v ≈ c · d^β"""

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike


@dataclass(frozen=True)
class PowerLawFit:
    constant: float
    exponent: float
    samples: int
    violations: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "constant": self.constant,
            "exponent": self.exponent,
            "samples": self.samples,
            "violations": list(self.violations),
        }


def fit_power_law(distances: ArrayLike, values: ArrayLike, floor: float = 1e-300) -> PowerLawFit:
    """最小二乘拟合 log v = log c + β log d

    违例样本指 v 超过 2 c d^β 的下标；值为零的样本不参与拟合。
    """
    d = np.asarray(distances, dtype=float)
    v = np.asarray(values, dtype=float)
    mask = (d > floor) & (v > floor)
    if np.count_nonzero(mask) < 2:
        return PowerLawFit(constant=0.0, exponent=0.0, samples=int(np.count_nonzero(mask)))
    slope, intercept = np.polyfit(np.log(d[mask]), np.log(v[mask]), 1)
    constant = float(np.exp(intercept))
    bound = 2.0 * constant * np.power(np.maximum(d, floor), slope)
    violations = [int(i) for i in np.flatnonzero(mask & (v > bound))]
    return PowerLawFit(constant=constant, exponent=float(slope), samples=int(np.count_nonzero(mask)), violations=violations)
