"""共享测试夹具：模型族、余圈与小规模配置"""

import numpy as np
import pytest

from src.cocycle import ConstantCocycle, NormalizedCocycle, PullbackCocycle, UnstableDerivativeCocycle
from src.config import Config
from src.dynamics import dissipative, linear_model, small_conjugacy, stable_shear, volume_preserving_shear
from src.experiment import ExperimentConfig, fixed_point
from src.geometry import rotation2
from src.orbits import find_periodic_orbits
from src.parry import parry_loops

# 默认自同构的参考常数
STABLE_EIGENVALUE = 0.6823278
UNSTABLE_MODULUS = 1.2106078
ALPHA = 0.8260314
LOG_MU = 0.3822451


@pytest.fixture(scope="session")
def linear():
    return linear_model()


@pytest.fixture(scope="session")
def dissipative_map():
    return dissipative()


@pytest.fixture(scope="session")
def shear_map():
    return stable_shear()


@pytest.fixture(scope="session")
def volume_map():
    return volume_preserving_shear()


@pytest.fixture(scope="session")
def conjugacy():
    return small_conjugacy()


@pytest.fixture(scope="session")
def du_cocycle(dissipative_map):
    return UnstableDerivativeCocycle(model=dissipative_map)


@pytest.fixture(scope="session")
def oracle_pair(dissipative_map, conjugacy):
    a = NormalizedCocycle(base=UnstableDerivativeCocycle(model=dissipative_map))
    b = NormalizedCocycle(base=PullbackCocycle(model=dissipative_map, conjugacy=conjugacy))
    return a, b


@pytest.fixture(scope="session")
def rotation_cocycle():
    return ConstantCocycle(matrix=rotation2(0.9))


@pytest.fixture(scope="session")
def dissipative_orbits(dissipative_map):
    return find_periodic_orbits(dissipative_map, 3)


@pytest.fixture(scope="session")
def dissipative_fixed_point(dissipative_map):
    return fixed_point(dissipative_map)


@pytest.fixture(scope="session")
def dissipative_loops(dissipative_map, dissipative_fixed_point):
    return parry_loops(dissipative_map, dissipative_fixed_point, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture
def experiment_config():
    """桌面规模的默认实验配置"""
    return ExperimentConfig.from_config(Config())
