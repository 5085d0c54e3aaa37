"""日志配置（只在 CLI 中调用一次）"""

import logging
from pathlib import Path
from typing import Optional

from ..config import LoggingSettings


def setup_logging(settings: LoggingSettings, quiet: bool = False, logs_dir: Optional[Path] = None) -> None:
    level = logging.WARNING if quiet else getattr(logging, settings.level.upper(), logging.INFO)
    handlers: list[logging.Handler] = [logging.StreamHandler()]
    if logs_dir is not None:
        logs_dir.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(logs_dir / "rigidity-lab.log", encoding="utf-8"))
    logging.basicConfig(level=level, format=settings.format, handlers=handlers, force=True)
