"""独立任务的线程池扇出与进度条"""

import sys
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Iterable, Optional, TypeVar

from tqdm import tqdm

T = TypeVar("T")
R = TypeVar("R")

_progress_enabled = True
_default_jobs = 1


def configure(jobs: Optional[int] = None, progress: Optional[bool] = None) -> None:
    """CLI 按 --jobs / --quiet 设置全局默认值"""
    global _default_jobs, _progress_enabled
    if jobs is not None:
        _default_jobs = max(1, int(jobs))
    if progress is not None:
        _progress_enabled = bool(progress)


def progress_disabled() -> bool:
    return not (_progress_enabled and sys.stdout.isatty())


def parallel_map(
    fn: Callable[[T], R],
    items: Iterable[T],
    jobs: Optional[int] = None,
    desc: Optional[str] = None,
) -> list[R]:
    """按输入顺序返回 fn(item)；jobs > 1 时用 ThreadPoolExecutor"""
    items = list(items)
    workers = _default_jobs if jobs is None else max(1, int(jobs))
    bar = tqdm(total=len(items), desc=desc, disable=progress_disabled(), leave=False)
    try:
        if workers == 1 or len(items) <= 1:
            results = []
            for item in items:
                results.append(fn(item))
                bar.update(1)
            return results

        results: list = [None] * len(items)
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = {executor.submit(fn, item): i for i, item in enumerate(items)}
            for future in as_completed(futures):
                results[futures[future]] = future.result()
                bar.update(1)
        return results
    finally:
        bar.close()
