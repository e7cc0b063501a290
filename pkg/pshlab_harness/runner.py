"""
Dispatch a validated config to its operation and write the run's files.

A run directory holds report.json, one CSV per series and timings.json.
report.json and the CSVs depend only on the config; the wall times live in
timings.json.
"""

import logging
import time
from collections.abc import Callable
from dataclasses import replace
from pathlib import Path

from pshlab.util import dump_json, write_csv
from pshlab_harness import operations
from pshlab_harness.acceptance import run_acceptance
from pshlab_harness.config import ExperimentConfig, FigureName, Operation
from pshlab_harness.figures import emit_figure_data, figure_check
from pshlab_harness.reports import OperationResult, RunReport

logger = logging.getLogger(__name__)

REPORT_FILE = "report.json"
TIMINGS_FILE = "timings.json"


def figure_op(config: ExperimentConfig) -> OperationResult:
    series = emit_figure_data(FigureName(config["figures.which"]), config)
    return OperationResult((figure_check(series),), (series,))


def acceptance_op(config: ExperimentConfig) -> OperationResult:
    return OperationResult(run_acceptance(config))


OPERATIONS: dict[Operation, Callable[[ExperimentConfig], OperationResult]] = {
    Operation.ACCEPTANCE: acceptance_op,
    Operation.VERIFY_ATLAS: operations.verify_domain,
    Operation.SEGMENT_CHECK: operations.segment_check,
    Operation.TRANSLATION_CHECK: operations.translation_check,
    Operation.GAIN_TABLE: operations.gain_table_op,
    Operation.BUILD_APPROXIMANT: operations.build_approximant_op,
    Operation.CHECK_APPROXIMANT: operations.check_approximant_op,
    Operation.BUILD_EXHAUSTION: operations.build_exhaustion_op,
    Operation.EVALUATE_EXHAUSTION: operations.evaluate_exhaustion,
    Operation.CHECK_BOUNDS: operations.check_bounds_op,
    Operation.CHECK_LEVI_FLOOR: operations.check_levi_op,
    Operation.TRACE: operations.trace_op,
    Operation.EMIT_FIGURE_DATA: figure_op,
}


def write_report(report: RunReport, directory: Path | None = None) -> Path:
    """Write report.json, timings.json and the series CSVs; returns the directory."""
    directory = report.config.output_dir if directory is None else directory
    directory.mkdir(parents=True, exist_ok=True)
    (directory / REPORT_FILE).write_text(dump_json(report.as_record()), encoding="utf-8")
    (directory / TIMINGS_FILE).write_text(dump_json(report.timings()), encoding="utf-8")
    for series in report.series:
        write_csv(directory / f"{series.name}.csv", series.header, series.rows)
    logger.info("Wrote %s and %d series to %s", REPORT_FILE, len(report.series), directory)
    return directory


def run(config: ExperimentConfig, write: bool = True) -> RunReport:
    operation = config.operation
    logger.info("Running %s (seed %d)", operation, config.seed)
    started = time.perf_counter()
    result = OPERATIONS[operation](config)
    elapsed = 1000.0 * (time.perf_counter() - started)
    # Checks not timed individually carry the operation's wall time.
    checks = tuple(
        check if check.runtime_ms else replace(check, runtime_ms=elapsed)
        for check in result.checks
    )
    report = RunReport(config, checks, result.series)
    if report.verdict:
        logger.info("%s passed: %d check(s) in %.0f ms", operation, len(checks), elapsed)
    else:
        logger.warning("%s failed: %s", operation, ", ".join(report.failed))
    if write:
        write_report(report)
    return report
