"""实验配置与运行清单"""

import hashlib
import json
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import yaml
from pydantic import BaseModel, ValidationError

from .. import __version__
from ..config import (
    Config,
    ConjugacySettings,
    ExperimentSettings,
    HolonomySettings,
    MapSettings,
    NumericsSettings,
    OrbitSettings,
    ParrySettings,
)
from ..errors import ConfigError

ACCEPTANCE_TOLERANCES = {
    "orbits": ("hausdorff_tolerance", "srb_tolerance", "matching_tolerance"),
    "parry": ("trace_tolerance", "path_tolerance", "residual_tolerance"),
}


class ExperimentConfig(BaseModel):
    """一次 run 所需的全部数值配置；摘要只由这些字段决定"""

    map: MapSettings = MapSettings()
    conjugacy: ConjugacySettings = ConjugacySettings()
    numerics: NumericsSettings = NumericsSettings()
    holonomy: HolonomySettings = HolonomySettings()
    orbits: OrbitSettings = OrbitSettings()
    parry: ParrySettings = ParrySettings()
    experiment: ExperimentSettings = ExperimentSettings()

    @classmethod
    def from_config(cls, config: Config) -> "ExperimentConfig":
        return cls(**{name: getattr(config, name) for name in cls.model_fields})

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    def with_seed(self, seed: int) -> "ExperimentConfig":
        data = self.model_dump()
        data["experiment"]["seed"] = int(seed)
        return ExperimentConfig(**data)

    def with_tol_scale(self, scale: float) -> "ExperimentConfig":
        """按比例放宽（或收紧）验收容差；迭代收敛容差不变"""
        if scale == 1.0:
            return self
        data = self.model_dump()
        for section, keys in ACCEPTANCE_TOLERANCES.items():
            for key in keys:
                data[section][key] *= float(scale)
        return ExperimentConfig(**data)


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def load_experiment(path: Optional[Path], base: Config) -> ExperimentConfig:
    """实验 YAML 覆盖在全局配置之上"""
    defaults = ExperimentConfig.from_config(base)
    if path is None:
        return defaults
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"实验配置不存在: {path}", path=str(path))
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"实验配置解析失败: {e}", path=str(path)) from e
    if not isinstance(data, dict):
        raise ConfigError("experiment file must be a mapping", path=str(path))
    unknown = sorted(set(data) - set(ExperimentConfig.model_fields))
    if unknown:
        raise ConfigError(f"unknown experiment sections: {unknown}", path=str(path))
    try:
        return ExperimentConfig(**_merge(defaults.model_dump(), data))
    except ValidationError as e:
        raise ConfigError(f"实验配置校验失败: {e}", path=str(path)) from e


class StageRecord(BaseModel):
    name: str
    status: Literal["ok", "failed", "cached"] = "ok"
    seconds: float = 0.0
    error: Optional[str] = None


class RunManifest(BaseModel):
    config_digest: str
    kind: str
    version: str = __version__
    seed: int = 7
    started_at: str = ""
    wall_clock: float = 0.0
    stages: List[StageRecord] = []
    cache_hits: int = 0
    cache_misses: int = 0
    artifacts: List[str] = []

    @property
    def status(self) -> str:
        return "failed" if any(s.status == "failed" for s in self.stages) else "ok"
