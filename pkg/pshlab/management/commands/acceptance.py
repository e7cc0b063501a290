"""
Usage:
    uv run manage.py acceptance
    uv run manage.py acceptance --only 1 2 9 --reduced
"""

from typing import Any

from django.core.management.base import CommandParser

from pshlab_harness.commands import ExperimentCommand
from pshlab_harness.config import ACCEPTANCE_CRITERIA, Operation


class Command(ExperimentCommand):
    help = "Runs the acceptance suite and exits non-zero if any check fails"

    def add_arguments(self, parser: CommandParser) -> None:
        parser.add_argument(
            "--only",
            type=int,
            nargs="+",
            choices=ACCEPTANCE_CRITERIA,
            metavar="N",
            help="Criteria to run, 1 to 9 (default: all).",
        )
        parser.add_argument(
            "--reduced",
            action="store_true",
            default=None,
            help="Use reduced sample counts (default: off).",
        )
        super().add_arguments(parser)

    def operation(self, options: dict[str, Any]) -> Operation:
        return Operation.ACCEPTANCE

    def overrides(self, options: dict[str, Any]) -> dict[str, Any]:
        return {"acceptance.only": options["only"], "acceptance.reduced": options["reduced"]}
