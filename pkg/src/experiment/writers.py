"""CSV / JSON 产物，全部带 manifest 摘要"""

import csv
import io
import json
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .cache import io_retry


def _cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % float(value)
    if value is None:
        return ""
    if isinstance(value, (list, tuple, np.ndarray)):
        return " ".join(_cell(v) for v in np.asarray(value, dtype=object).ravel())
    return str(value)


def to_jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]], digest: str) -> str:
    """首行是摘要注释，其余按 RFC 4180 转义"""
    buffer = io.StringIO()
    buffer.write(f"# digest: {digest}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows([_cell(v) for v in row] for row in rows)
    return buffer.getvalue()


def render_json(payload: dict, digest: str) -> str:
    document = dict(to_jsonable(payload))
    document["manifest_digest"] = digest
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


@io_retry
def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]], digest: str) -> Path:
    _write_text(path, render_csv(header, rows, digest))
    return path


def write_json(path: Path, payload: dict, digest: str) -> Path:
    _write_text(path, render_json(payload, digest))
    return path
