"""
Usage:
    uv run manage.py exhaustion build --samples 2000
    uv run manage.py exhaustion eval --set 'numeric.points=[[0.0, 0.0, 0.0, 0.5]]'
    uv run manage.py exhaustion check-bounds --record
    uv run manage.py exhaustion check-levi --set numeric.levi_step=1e-5
    uv run manage.py exhaustion trace --set numeric.depth=1e-4
"""

from typing import Any

from django.core.management.base import CommandParser

from pshlab_harness.commands import ExperimentCommand
from pshlab_harness.config import Operation

VERBS = {
    "build": Operation.BUILD_EXHAUSTION,
    "eval": Operation.EVALUATE_EXHAUSTION,
    "check-bounds": Operation.CHECK_BOUNDS,
    "check-levi": Operation.CHECK_LEVI_FLOOR,
    "trace": Operation.TRACE,
}


class Command(ExperimentCommand):
    help = "Builds the bounded exhaustion w = sup w_eps and checks its bounds"

    def add_arguments(self, parser: CommandParser) -> None:
        parser.add_argument("verb", choices=list(VERBS))
        parser.add_argument("--domain", help="Catalog domain name (default: loglip_cusp).")
        parser.add_argument(
            "--samples", type=int, help="Interior samples for the bounds (default: 2000)."
        )
        super().add_arguments(parser)

    def operation(self, options: dict[str, Any]) -> Operation:
        return VERBS[options["verb"]]

    def overrides(self, options: dict[str, Any]) -> dict[str, Any]:
        return {"domain.name": options["domain"], "numeric.samples": options["samples"]}
