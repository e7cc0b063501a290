"""
Usage:
    uv run manage.py special_fn table --form loglip --format csv
"""

from typing import Any

from django.core.management.base import CommandParser

from pshlab_harness.commands import ExperimentCommand
from pshlab_harness.config import Operation
from pshlab_special.gain import GainForm


class Command(ExperimentCommand):
    help = "Tabulates (eps, f(eps), omega(eps)) for a translation-gain function"

    def add_arguments(self, parser: CommandParser) -> None:
        parser.add_argument("verb", choices=["table"])
        parser.add_argument(
            "--form", choices=[f.value for f in GainForm], help="Gain form (default: loglip)."
        )
        parser.add_argument("--C", dest="C", type=float, help="Constant C (default: 1).")
        parser.add_argument(
            "--C-tilde", dest="C_tilde", type=float, help="Constant C_tilde (default: 1)."
        )
        parser.add_argument("--gamma", type=float, help="Hoelder exponent (default: 0.5).")
        parser.add_argument(
            "--decades", type=int, help="Decades of eps below the validity bound (default: 10)."
        )
        super().add_arguments(parser)

    def operation(self, options: dict[str, Any]) -> Operation:
        return Operation.GAIN_TABLE

    def overrides(self, options: dict[str, Any]) -> dict[str, Any]:
        return {
            "gain.form": options["form"],
            "gain.C": options["C"],
            "gain.C_tilde": options["C_tilde"],
            "gain.gamma": options["gamma"],
            "gain.decades": options["decades"],
        }
