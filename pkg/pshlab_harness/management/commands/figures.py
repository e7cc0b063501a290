"""
Usage:
    uv run manage.py figures cusp_fig1 --format csv
    uv run manage.py figures exhaustion_profile --out runs/profile
"""

from typing import Any

from django.core.management.base import CommandParser

from pshlab_harness.commands import ExperimentCommand
from pshlab_harness.config import FigureName, Operation


class Command(ExperimentCommand):
    help = "Emits the CSV data behind one figure"

    def add_arguments(self, parser: CommandParser) -> None:
        parser.add_argument("which", choices=[f.value for f in FigureName])
        super().add_arguments(parser)

    def operation(self, options: dict[str, Any]) -> Operation:
        return Operation.EMIT_FIGURE_DATA

    def overrides(self, options: dict[str, Any]) -> dict[str, Any]:
        return {"figures.which": options["which"]}
