import logging
import time
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field, replace
from typing import Any

from pshlab.util import to_jsonable
from pshlab_harness.config import ExperimentConfig
from pshlab_harness.exceptions import HarnessError

logger = logging.getLogger(__name__)

# Violations kept per check; the rest are only counted.
MAX_VIOLATIONS = 20


@dataclass(frozen=True)
class CheckRecord:
    name: str
    verdict: bool
    measured: Mapping[str, Any] = field(default_factory=dict)
    bound: Mapping[str, Any] = field(default_factory=dict)
    fitted_constants: Mapping[str, Any] = field(default_factory=dict)
    inputs: Mapping[str, Any] = field(default_factory=dict)
    violations: tuple[Any, ...] = ()
    runtime_ms: float = 0.0

    @classmethod
    def from_record(
        cls,
        name: str,
        record: Mapping[str, Any],
        bound: Mapping[str, Any] | None = None,
    ) -> "CheckRecord":
        """Wrap an operation record; its own bound entries come before the caller's."""
        violations = list(record.get("violations", []))
        measured = dict(record.get("measured", {}))
        measured["violation_count"] = len(violations)
        return cls(
            name=name,
            verdict=bool(record["verdict"]),
            measured=measured,
            bound={**record.get("bound", {}), **(bound or {})},
            fitted_constants=dict(record.get("fitted_constants", {})),
            inputs=dict(record.get("inputs", {})),
            violations=tuple(violations[:MAX_VIOLATIONS]),
        )

    def as_record(self, timings: bool = False) -> dict[str, Any]:
        record: dict[str, Any] = {
            "name": self.name,
            "verdict": "pass" if self.verdict else "fail",
            "inputs": dict(self.inputs),
            "measured": dict(self.measured),
            "bound": dict(self.bound),
            "fitted_constants": dict(self.fitted_constants),
            "violations": list(self.violations),
        }
        if timings:
            record["runtime_ms"] = self.runtime_ms
        return record


def timed(name: str, fn: Callable[[], CheckRecord]) -> CheckRecord:
    """Run one check and stamp its wall time."""
    started = time.perf_counter()
    record = fn()
    elapsed = 1000.0 * (time.perf_counter() - started)
    logger.debug("Check %s took %.1f ms", name, elapsed)
    return replace(record, runtime_ms=elapsed)


@dataclass(frozen=True)
class Series:
    """A CSV series: written as <name>.csv next to the report."""

    name: str
    header: tuple[str, ...]
    rows: tuple[tuple[Any, ...], ...]


@dataclass(frozen=True)
class OperationResult:
    checks: tuple[CheckRecord, ...]
    series: tuple[Series, ...] = ()


@dataclass(frozen=True)
class RunReport:
    config: ExperimentConfig
    checks: tuple[CheckRecord, ...]
    series: tuple[Series, ...] = ()

    @property
    def verdict(self) -> bool:
        return all(check.verdict for check in self.checks)

    @property
    def failed(self) -> list[str]:
        return [check.name for check in self.checks if not check.verdict]

    def timings(self) -> dict[str, float]:
        return {check.name: check.runtime_ms for check in self.checks}

    def as_record(self, timings: bool = False) -> dict[str, Any]:
        """
        The report document. Wall times change from run to run, so they are
        left out unless asked for; without them the record depends only on
        the config and its seed.
        """
        return to_jsonable(
            {
                "config": self.config.as_record(),
                "operation": str(self.config.operation),
                "checks": [check.as_record(timings) for check in self.checks],
                "series": [s.name for s in self.series],
                "verdict": "pass" if self.verdict else "fail",
            }
        )


def merge_checks(groups: Sequence[Sequence[CheckRecord]]) -> tuple[CheckRecord, ...]:
    """Flatten per-task checks into one tuple ordered by check name."""
    checks = [check for group in groups for check in group]
    names = [check.name for check in checks]
    duplicates = sorted({name for name in names if names.count(name) > 1})
    if duplicates:
        raise HarnessError(f"duplicate check names: {', '.join(duplicates)}")
    return tuple(sorted(checks, key=lambda check: check.name))
