import csv
import json
import logging
import math
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any

import numpy as np
from django.conf import settings

logger = logging.getLogger(__name__)

# Enough digits to round-trip any IEEE double.
_SIGNIFICANT_DIGITS = 17


def make_rng(seed: int | None = None, stream: int | None = None) -> np.random.Generator:
    """
    Build the explicit random source handed to every sampling routine.

    No module keeps global random state; callers pass the generator down
    so that an identical seed gives identical reports. `stream` picks an
    independent generator for one task of a run, so tasks can run in any
    order or concurrently.
    """
    if seed is None:
        seed = settings.PSHLAB_DEFAULT_SEED
    if stream is None:
        return np.random.default_rng(seed)
    return np.random.default_rng([seed, stream])


def format_float(value: float) -> str:
    """Format a float with 17 significant digits ('.' decimal separator)."""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.{_SIGNIFICANT_DIGITS}g}"


def to_jsonable(value: Any) -> Any:
    """
    Convert numpy scalars/arrays, tuples and non-finite floats into plain
    JSON values. Non-finite floats become the strings used by `format_float`
    so reports stay valid JSON.
    """
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return format_float(value)
        return value
    return value


def dump_json(payload: Any) -> str:
    """Deterministic JSON text: sorted keys, fixed indent, trailing newline."""
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2) + "\n"


def write_csv(
    path: Path, header: Sequence[str], rows: Iterable[Sequence[float]]
) -> Path:
    """Write a UTF-8, LF-terminated CSV with a header row."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [format_float(v) if isinstance(v, (float, np.floating)) else v for v in row]
            )
    logger.debug("Wrote %s", path)
    return path


def csv_text(header: Sequence[str], rows: Iterable[Sequence[float]]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(
            ",".join(
                format_float(v) if isinstance(v, (float, np.floating)) else str(v)
                for v in row
            )
        )
    return "\n".join(lines) + "\n"


def ordered_map[T, R](
    fn: Callable[[T], R], items: Sequence[T], threads: int | None = None
) -> list[R]:
    """
    Map `fn` over `items` with at most PSHLAB_THREADS workers.

    Results come back in input order whatever the completion order, so
    downstream reductions are deterministic.
    """
    if threads is None:
        threads = settings.PSHLAB_THREADS
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
