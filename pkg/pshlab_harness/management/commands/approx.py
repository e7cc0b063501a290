"""
Usage:
    uv run manage.py approx build --domain unit_ball --field re_z1 --nu 0.01
    uv run manage.py approx check --domain cone --field abs_sq --format csv
"""

from typing import Any

from django.core.management.base import CommandParser

from pshlab_harness.commands import ExperimentCommand
from pshlab_harness.config import Operation

VERBS = {"build": Operation.BUILD_APPROXIMANT, "check": Operation.CHECK_APPROXIMANT}


class Command(ExperimentCommand):
    help = "Builds the max-of-translates approximant of a test field and checks its error"

    def add_arguments(self, parser: CommandParser) -> None:
        parser.add_argument("verb", choices=list(VERBS))
        parser.add_argument("--domain", help="Catalog domain name (default: loglip_cusp).")
        parser.add_argument("--field", help="Test field label (default: abs_sq).")
        parser.add_argument("--nu", type=float, help="Translation size nu (default: 0.001).")
        super().add_arguments(parser)

    def operation(self, options: dict[str, Any]) -> Operation:
        return VERBS[options["verb"]]

    def overrides(self, options: dict[str, Any]) -> dict[str, Any]:
        return {
            "domain.name": options["domain"],
            "field.name": options["field"],
            "numeric.nu": options["nu"],
        }
