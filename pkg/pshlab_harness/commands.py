"""
Shared plumbing for the experiment management commands.

Every command reads the same flags, folds them into an ExperimentConfig,
runs one operation and prints the report. Library failures and a failing
verdict both end in CommandError, so the exit status is non-zero exactly
when something did not pass.
"""

import logging
from typing import Any

from django.core.management.base import BaseCommand, CommandError, CommandParser

from pshlab.exceptions import PshlabException
from pshlab.util import csv_text, dump_json
from pshlab_harness.config import (
    ExperimentConfig,
    Operation,
    OutputFormat,
    load_config,
    parse_override,
)
from pshlab_harness.models import RunRecord
from pshlab_harness.reports import RunReport
from pshlab_harness.runner import run

logger = logging.getLogger(__name__)

CHECK_HEADER = ("name", "verdict")


class ExperimentCommand(BaseCommand):
    """Base for commands that run one operation from a config."""

    def add_arguments(self, parser: CommandParser) -> None:
        parser.add_argument(
            "--config",
            help="JSON or YAML experiment config (default: every knob at its default).",
        )
        parser.add_argument(
            "--seed", type=int, help="Random seed (default: PSHLAB_DEFAULT_SEED)."
        )
        parser.add_argument("--out", help="Output directory (default: PSHLAB_OUTPUT_DIR).")
        parser.add_argument(
            "--format",
            choices=[f.value for f in OutputFormat],
            help="What to print: the JSON report or the CSV series (default: json).",
        )
        parser.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="Override one config key; may be repeated (default: none).",
        )
        parser.add_argument(
            "--record",
            action="store_true",
            help="Save the run to the database (default: off).",
        )

    def operation(self, options: dict[str, Any]) -> Operation:
        raise NotImplementedError

    def overrides(self, options: dict[str, Any]) -> dict[str, Any]:
        """Config keys set by the command's own arguments."""
        return {}

    def build_config(self, options: dict[str, Any]) -> ExperimentConfig:
        config = load_config(options["config"])
        changes: dict[str, Any] = dict(parse_override(item) for item in options["set"])
        changes.update(
            {
                "operation": self.operation(options).value,
                "numeric.seed": options["seed"],
                "output.dir": options["out"],
                "output.format": options["format"],
                **self.overrides(options),
            }
        )
        return config.with_overrides(changes)

    def render(self, report: RunReport) -> str:
        if report.config.output_format is OutputFormat.JSON:
            return dump_json(report.as_record())
        if not report.series:
            rows = [(c.name, "pass" if c.verdict else "fail") for c in report.checks]
            return csv_text(CHECK_HEADER, rows)
        return "\n".join(csv_text(s.header, s.rows) for s in report.series)

    def handle(self, *args: Any, **options: Any) -> None:
        try:
            config = self.build_config(options)
            report = run(config)
        except PshlabException as e:
            logger.warning("%s: %s", type(e).__name__, e)
            raise CommandError(f"{type(e).__name__}: {e}") from e

        self.stdout.write(self.render(report), ending="")
        if options["record"]:
            record = RunRecord.from_report(report)
            self.stdout.write(f"Recorded run {record.pk}")

        if not report.verdict:
            raise CommandError(f"Failed checks: {', '.join(report.failed)}")
        self.stderr.write(
            self.style.SUCCESS(
                f"{report.config.operation}: {len(report.checks)} check(s) passed,"
                f" output in {report.config.output_dir}"
            )
        )
