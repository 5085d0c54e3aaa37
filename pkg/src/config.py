"""配置文件加载器"""

import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ValidationError, field_validator, model_validator

from .errors import ConfigError

load_dotenv(Path(__file__).parent.parent / ".env")


class PerturbationTermSettings(BaseModel):
    """三角扰动项: amplitude * sin(2π<frequency, x> + phase)"""

    frequency: List[int]
    amplitude: List[float]
    phase: float = 0.0

    @field_validator("frequency", "amplitude")
    @classmethod
    def _three_components(cls, value: list) -> list:
        if len(value) != 3:
            raise ValueError("frequency/amplitude must have 3 components")
        return value


class MapSettings(BaseModel):
    """动力系统 f 的配置"""

    # 默认线性部分: 伴随矩阵 (末行 1,0,1) 的逆
    matrix: List[List[int]] = [[0, -1, 1], [1, 0, 0], [0, 1, 0]]
    perturbation: List[PerturbationTermSettings] = []
    amplitude_bound: float = 0.25
    inverse_tolerance: float = 1e-12

    @field_validator("matrix")
    @classmethod
    def _square3(cls, value: List[List[int]]) -> List[List[int]]:
        if len(value) != 3 or any(len(row) != 3 for row in value):
            raise ValueError("matrix must be 3x3")
        return value


class ConjugacySettings(BaseModel):
    """共轭映射 h(x) = x + 周期位移（用于构造 g = h f h^-1）"""

    enabled: bool = False
    terms: List[PerturbationTermSettings] = []
    amplitude_bound: float = 0.1


class MatrixTermSettings(BaseModel):
    """矩阵值三角项: coefficient * sin(2π<frequency, x> + phase)"""

    frequency: List[int]
    coefficient: List[List[float]]
    phase: float = 0.0


class CocycleSettings(BaseModel):
    """2x2 线性余圈配置"""

    kind: Literal[
        "unstable_derivative", "constant", "coboundary", "trig_custom", "pullback"
    ] = "unstable_derivative"
    matrix: List[List[float]] = [[1.0, 0.0], [0.0, 1.0]]
    middle: List[List[float]] = [[0.5, -1.0], [0.75, 0.5]]
    terms: List[MatrixTermSettings] = []
    normalize: bool = True
    eta: float = 0.5


class NumericsSettings(BaseModel):
    """分裂、坐标卡、叶片认证的数值参数"""

    warmup: int = 48
    splitting_budget: int = 96
    splitting_tolerance: float = 1e-10
    frame_rotation: float = 0.0
    chart_radius: float = 0.05
    chart_degree: int = 7
    chart_tolerance: float = 1e-9
    chart_depth: int = 260
    seed_threshold: float = 1e-12
    holonomy_radius: float = 0.25
    membership_tolerance: float = 1e-6
    sample_size: int = 64


class HolonomySettings(BaseModel):
    tolerance: float = 1e-9
    max_steps: int = 200
    eta: float = 0.5
    bunching_horizon: int = 24
    bunching_samples: int = 16
    bunching_threshold: float = 0.98


class OrbitSettings(BaseModel):
    max_period: int = 4
    newton_tolerance: float = 1e-13
    hausdorff_tolerance: float = 1e-8
    srb_tolerance: float = 1e-6
    matching_tolerance: float = 1e-7
    continuation_steps: int = 8
    closing_epsilon: float = 0.05


class ParrySettings(BaseModel):
    """Parry 表示与二分法的参数"""

    generator_budget: int = 4
    lattice_radius: int = 2
    min_distance: float = 1e-3
    horizons: List[int] = [16, 32, 48, 64, 80]
    trivial_tolerance: float = 1e-5
    transversality: float = 1e-3
    common_line_tolerance: float = 1e-6
    trace_tolerance: float = 1e-5
    path_tolerance: float = 1e-4
    residual_tolerance: float = 1e-4
    crossval_factor: float = 10.0


class ExperimentSettings(BaseModel):
    """单次 run 的实验描述"""

    kind: Literal[
        "splitting",
        "orbits",
        "closing",
        "holonomy",
        "pch",
        "quadrilateral",
        "parry",
        "trace-match",
        "dichotomy",
        "conjugacy",
    ] = "orbits"
    seed: int = 7
    max_period: int = 3
    samples: int = 8
    grid_size: int = 3
    segments: int = 1
    horizon: int = 24
    words: List[List[int]] = [[1], [2], [1, 2]]
    cocycle: CocycleSettings = CocycleSettings()
    cocycle_b: Optional[CocycleSettings] = None

    @model_validator(mode="after")
    def _two_cocycles(self) -> "ExperimentSettings":
        if self.kind in ("trace-match", "dichotomy", "conjugacy") and self.cocycle_b is None:
            raise ValueError(f"experiment kind '{self.kind}' requires cocycle_b")
        return self


class RuntimeSettings(BaseModel):
    jobs: int = 1
    tol_scale: float = 1.0
    progress: bool = True


class PathsSettings(BaseModel):
    cache_dir: str = "./cache"
    output_dir: str = "./output"
    logs_dir: str = "./cache/logs"
    templates_dir: str = "./templates"


class LoggingSettings(BaseModel):
    level: str = "INFO"
    format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class Config(BaseModel):
    map: MapSettings = MapSettings()
    conjugacy: ConjugacySettings = ConjugacySettings()
    numerics: NumericsSettings = NumericsSettings()
    holonomy: HolonomySettings = HolonomySettings()
    orbits: OrbitSettings = OrbitSettings()
    parry: ParrySettings = ParrySettings()
    experiment: ExperimentSettings = ExperimentSettings()
    runtime: RuntimeSettings = RuntimeSettings()
    paths: PathsSettings = PathsSettings()
    logging: LoggingSettings = LoggingSettings()


def load_config(config_path: Optional[Path] = None) -> Config:
    """加载配置文件"""
    if config_path is None:
        config_path = Path(__file__).parent.parent / "config.yaml"

    config_data: Dict[str, Any] = {}

    if config_path.exists():
        try:
            with open(config_path, "r", encoding="utf-8") as f:
                config_data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"配置文件解析失败: {e}", path=str(config_path)) from e
    elif config_path.name != "config.yaml":
        raise ConfigError(f"配置文件不存在: {config_path}", path=str(config_path))

    try:
        config = Config(**config_data)
    except ValidationError as e:
        raise ConfigError(f"配置校验失败: {e}", path=str(config_path)) from e

    # 环境变量覆盖缓存目录和日志级别
    cache_dir = os.getenv("RIGIDITY_CACHE_DIR")
    if cache_dir:
        config.paths.cache_dir = cache_dir

    log_level = os.getenv("RIGIDITY_LOG_LEVEL")
    if log_level:
        config.logging.level = log_level.upper()

    return config


def get_config() -> Config:
    """获取全局配置"""
    return load_config()
