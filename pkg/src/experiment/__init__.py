"""实验编排: 配置、阶段、缓存、产物与验收套件"""

from .builders import build_cocycle, build_conjugacy, build_model, build_partner, fixed_point
from .cache import CacheEntry, ResultCache
from .logs import setup_logging
from .models import ExperimentConfig, RunManifest, StageRecord, load_experiment
from .pipeline import run
from .reports import render
from .stages import STAGES, RunContext
from .suites import SUITES, Check, SuiteContext, SuiteResult, verify
from .writers import render_csv, render_json, write_csv, write_json

__all__ = [
    "CacheEntry",
    "Check",
    "ExperimentConfig",
    "ResultCache",
    "RunContext",
    "RunManifest",
    "STAGES",
    "SUITES",
    "StageRecord",
    "SuiteContext",
    "SuiteResult",
    "build_cocycle",
    "build_conjugacy",
    "build_model",
    "build_partner",
    "fixed_point",
    "load_experiment",
    "render",
    "render_csv",
    "render_json",
    "run",
    "setup_logging",
    "verify",
    "write_csv",
    "write_json",
]
