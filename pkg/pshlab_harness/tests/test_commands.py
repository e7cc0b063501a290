"""
Tests for the experiment management commands.

Covers:
- special_fn table: CSV on stdout
- figures: cusp data and the output directory
- error paths: unknown domain, bad overrides, failing verdicts
- --record: RunRecord rows
"""

import json
import tempfile
from io import StringIO
from pathlib import Path
from unittest import mock

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import TestCase

from pshlab_harness.config import Operation
from pshlab_harness.models import RunRecord
from pshlab_harness.reports import CheckRecord, OperationResult
from pshlab_harness.runner import OPERATIONS


class CommandTestCase(TestCase):
    def setUp(self) -> None:
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.out = Path(self.tmp.name)

    def call(self, *args: str) -> str:
        stdout = StringIO()
        call_command(*args, "--out", str(self.out), stdout=stdout, stderr=StringIO())
        return stdout.getvalue()


class SpecialFnCommandTests(CommandTestCase):
    """Tests for `special_fn table`."""

    def test_csv_table(self) -> None:
        """--format csv prints the (eps, f, omega) rows."""
        output = self.call("special_fn", "table", "--form", "loglip", "--format", "csv")
        lines = output.splitlines()
        self.assertEqual(lines[0], "eps,f_eps,omega_eps")
        self.assertTrue(lines[1].startswith("0.10000000000000001,"))
        self.assertTrue((self.out / "gain_table.csv").exists())

    def test_json_report(self) -> None:
        """The default format prints the report document."""
        document = json.loads(self.call("special_fn", "table", "--form", "hoelder"))
        self.assertEqual(document["verdict"], "pass")
        self.assertEqual(document["config"]["gain.form"], "hoelder")


class FiguresCommandTests(CommandTestCase):
    """Tests for `figures`."""

    def test_cusp_figure(self) -> None:
        """cusp_fig1 writes its CSV next to the report."""
        self.call("figures", "cusp_fig1")
        rows = (self.out / "cusp_fig1.csv").read_text(encoding="utf-8").splitlines()
        self.assertEqual(rows[0], "x,cusp_profile")
        self.assertEqual(len(rows), 2002)


class CommandErrorTests(CommandTestCase):
    """Tests for the non-zero exit paths."""

    def test_unknown_domain(self) -> None:
        """A ConfigError becomes a CommandError naming it."""
        with self.assertRaisesMessage(CommandError, "ConfigError"):
            self.call("domain", "verify", "--domain", "torus")

    def test_bad_override(self) -> None:
        """--set needs KEY=VALUE."""
        with self.assertRaises(CommandError):
            self.call("domain", "verify", "--set", "numeric.seed")

    def test_failing_verdict(self) -> None:
        """A failing check exits non-zero and names the check."""
        failing = OperationResult((CheckRecord("gain_table", False),))
        with mock.patch.dict(OPERATIONS, {Operation.GAIN_TABLE: lambda config: failing}):
            with self.assertRaisesMessage(CommandError, "gain_table"):
                self.call("special_fn", "table")


class RecordTests(CommandTestCase):
    """Tests for --record."""

    def test_record_saved(self) -> None:
        """A recorded run stores its config, report and verdict."""
        self.call("special_fn", "table", "--seed", "3", "--record")
        record = RunRecord.objects.get()
        self.assertEqual(record.command, "gain_table")
        self.assertEqual(record.seed, 3)
        self.assertTrue(record.passed)
        self.assertEqual(record.report["verdict"], "pass")
        self.assertEqual(record.config["numeric.seed"], 3)
        self.assertIn("gain_table", str(record))

    def test_not_saved_by_default(self) -> None:
        """Without --record nothing touches the database."""
        self.call("special_fn", "table")
        self.assertFalse(RunRecord.objects.exists())
