"""阶段结果缓存: <cache_dir>/<stage>-<sha256>.json"""

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

from tenacity import (
    before_sleep_log,
    retry,
    retry_if_exception_type,
    stop_after_attempt,
    wait_exponential,
)

logger = logging.getLogger(__name__)

io_retry = retry(
    stop=stop_after_attempt(3),
    wait=wait_exponential(multiplier=0.2, min=0.2, max=2),
    retry=retry_if_exception_type(OSError),
    before_sleep=before_sleep_log(logger, logging.WARNING),
    reraise=True,
)


@dataclass(frozen=True)
class CacheEntry:
    name: str
    size: int


class ResultCache:
    """以 (配置摘要, 阶段) 为键的 JSON 缓存"""

    def __init__(self, cache_dir: Path, enabled: bool = True):
        self.cache_dir = Path(cache_dir)
        self.enabled = enabled
        self.hits = 0
        self.misses = 0

    def _path(self, stage: str, digest: str) -> Path:
        key = hashlib.sha256(f"{digest}|{stage}".encode()).hexdigest()
        return self.cache_dir / f"{stage}-{key}.json"

    @io_retry
    def _read(self, path: Path) -> Any:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)

    @io_retry
    def _write(self, path: Path, payload: Any) -> None:
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as f:
            json.dump(payload, f, sort_keys=True, ensure_ascii=False)
        tmp.replace(path)

    def get(self, stage: str, digest: str) -> Optional[Any]:
        if not self.enabled:
            return None
        path = self._path(stage, digest)
        if not path.exists():
            self.misses += 1
            return None
        try:
            payload = self._read(path)
        except json.JSONDecodeError as e:
            logger.warning(f"corrupted cache entry {path.name} removed: {e}")
            path.unlink(missing_ok=True)
            self.misses += 1
            return None
        self.hits += 1
        logger.info(f"Cache hit: {stage}")
        return payload

    def put(self, stage: str, digest: str, payload: Any) -> None:
        if self.enabled:
            self._write(self._path(stage, digest), payload)

    def inspect(self) -> list[CacheEntry]:
        if not self.cache_dir.exists():
            return []
        return [CacheEntry(p.name, p.stat().st_size) for p in sorted(self.cache_dir.glob("*.json"))]

    def clear(self, prefix: str = "") -> int:
        """删除文件名以 prefix 开头的条目，返回删除数"""
        removed = 0
        for entry in self.inspect():
            if entry.name.startswith(prefix):
                (self.cache_dir / entry.name).unlink(missing_ok=True)
                removed += 1
        logger.info(f"removed {removed} cache entries with prefix '{prefix}'")
        return removed
