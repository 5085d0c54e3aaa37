"""Markdown 报告（jinja2 模板位于 templates/）"""

from pathlib import Path
from typing import Any, Optional

from jinja2 import Environment, FileSystemLoader, StrictUndefined

from .. import TEMPLATES_DIR


def _get_template_env(templates_dir: Optional[Path] = None) -> Environment:
    """templates_dir 不存在时退回包自带的模板目录"""
    directory = Path(templates_dir).expanduser().resolve() if templates_dir else TEMPLATES_DIR
    if not directory.exists():
        directory = TEMPLATES_DIR
    return Environment(loader=FileSystemLoader(str(directory)), keep_trailing_newline=True, undefined=StrictUndefined)


def render(template: str, templates_dir: Optional[Path] = None, **context: Any) -> str:
    return _get_template_env(templates_dir).get_template(template).render(**context)
