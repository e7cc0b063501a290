"""
Usage:
    uv run manage.py domain verify --domain polydisc
    uv run manage.py domain segment-check --domain cone --set domain.params.C=2
    uv run manage.py domain translation-check --domain loglip_cusp --patch 0
"""

from typing import Any

from django.core.management.base import CommandParser

from pshlab_harness.commands import ExperimentCommand
from pshlab_harness.config import Operation

VERBS = {
    "verify": Operation.VERIFY_ATLAS,
    "segment-check": Operation.SEGMENT_CHECK,
    "translation-check": Operation.TRANSLATION_CHECK,
}


class Command(ExperimentCommand):
    help = "Checks a catalog domain: atlas, segment property or translation estimate"

    def add_arguments(self, parser: CommandParser) -> None:
        parser.add_argument("verb", choices=list(VERBS))
        parser.add_argument("--domain", help="Catalog domain name (default: loglip_cusp).")
        parser.add_argument(
            "--patch", type=int, help="Atlas patch for translation-check (default: 0)."
        )
        super().add_arguments(parser)

    def operation(self, options: dict[str, Any]) -> Operation:
        return VERBS[options["verb"]]

    def overrides(self, options: dict[str, Any]) -> dict[str, Any]:
        return {"domain.name": options["domain"], "numeric.patch": options["patch"]}
