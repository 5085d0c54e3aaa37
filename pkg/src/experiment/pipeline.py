"""run: 配置 → 阶段 → 产物与清单"""

import logging
import time
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator, Optional

from .. import errors
from ..errors import ToleranceViolation
from ..structure import clear_chart_cache, clear_splitting_cache
from .cache import ResultCache
from .models import ExperimentConfig, RunManifest, StageRecord
from .reports import render
from .stages import STAGES, RunContext
from .writers import to_jsonable, write_csv, write_json

logger = logging.getLogger(__name__)


class StageRunner:
    """记录每个阶段的耗时与状态"""

    def __init__(self, manifest: RunManifest):
        self.manifest = manifest

    @contextmanager
    def stage(self, name: str) -> Iterator[StageRecord]:
        record = StageRecord(name=name)
        start = time.perf_counter()
        try:
            yield record
        except Exception as e:
            record.status = "failed"
            record.error = f"{type(e).__name__}: {e}"
            raise
        finally:
            record.seconds = time.perf_counter() - start
            self.manifest.stages.append(record)
            logger.info(f"stage {name}: {record.status} in {record.seconds:.2f}s")


def write_artifacts(payload: dict, out_dir: Path, digest: str) -> list[str]:
    written = []
    for name, table in sorted(payload.get("tables", {}).items()):
        write_csv(out_dir / name, table["header"], table["rows"], digest)
        written.append(name)
    for name, document in sorted(payload.get("documents", {}).items()):
        write_json(out_dir / name, document, digest)
        written.append(name)
    return written


def _raise_violation(violation: dict) -> None:
    cls = getattr(errors, violation["type"], ToleranceViolation)
    if not (isinstance(cls, type) and issubclass(cls, ToleranceViolation)):
        cls = ToleranceViolation
    raise cls(violation["message"], **violation.get("details", {}))


def run(
    config: ExperimentConfig,
    out_dir: Path,
    cache: Optional[ResultCache] = None,
    jobs: int = 1,
    templates_dir: Optional[Path] = None,
) -> RunManifest:
    """执行一个实验；失败时仍写出带阶段状态的 manifest.json 再抛出"""
    kind = config.experiment.kind
    digest = config.digest
    out_dir = Path(out_dir)
    manifest = RunManifest(
        config_digest=digest,
        kind=kind,
        seed=config.experiment.seed,
        started_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )
    runner = StageRunner(manifest)
    wall = time.perf_counter()
    payload: dict = {}
    try:
        with runner.stage("setup"):
            # 进程内缓存按模型指纹分键；每次 run 从空缓存开始
            clear_splitting_cache()
            clear_chart_cache()
            ctx = RunContext(config, jobs)
        payload = cache.get(kind, digest) if cache else None
        if payload is not None:
            manifest.stages.append(StageRecord(name=kind, status="cached"))
        else:
            with runner.stage(kind):
                payload = to_jsonable(STAGES[kind](ctx))
            if cache:
                cache.put(kind, digest, payload)
        with runner.stage("write"):
            manifest.artifacts = write_artifacts(payload, out_dir, digest)
    finally:
        manifest.wall_clock = time.perf_counter() - wall
        if cache:
            manifest.cache_hits, manifest.cache_misses = cache.hits, cache.misses
        _finish(manifest, payload, out_dir, templates_dir)

    if "violation" in payload:
        _raise_violation(payload["violation"])
    return manifest


def _finish(manifest: RunManifest, payload: dict, out_dir: Path, templates_dir: Optional[Path]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "manifest.json").write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
    report = render(
        "run_report.md.j2",
        templates_dir,
        manifest=manifest,
        status=manifest.status,
        summary=(payload or {}).get("summary", {}),
        violation=(payload or {}).get("violation"),
    )
    (out_dir / "report.md").write_text(report, encoding="utf-8")
