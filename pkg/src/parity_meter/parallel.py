"""Deterministic, bounded worker pool for batch computations.

The environment variable ``PARITY_METER_THREADS`` caps the number of worker
threads: ``0`` (the default) means "use the CPU count", any positive integer
is used verbatim.  Results are always assembled in input order, so the output
of :func:`ordered_map` never depends on scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

from .errors import ConfigError

ENV_VAR = "PARITY_METER_THREADS"

__all__ = ["ENV_VAR", "thread_cap", "ordered_map"]


def thread_cap():
    """Resolve the worker-thread cap from the environment."""
    raw = os.environ.get(ENV_VAR, "0").strip()
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(
            f"{ENV_VAR} must be a non-negative integer, got {raw!r}"
        ) from None
    if n < 0:
        raise ConfigError(f"{ENV_VAR} must be a non-negative integer, got {raw!r}")
    if n == 0:
        return os.cpu_count() or 1
    return n


def ordered_map(fn, items):
    """Map *fn* over *items*, preserving order, with at most ``thread_cap()`` workers."""
    items = list(items)
    workers = min(thread_cap(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
