"""
Tests for whole runs, from a config file to the files on disk.

Covers:
- a YAML config driving a segment check through the runner
- a failing domain (the Hartogs triangle) failing the run
- two runs of one config writing byte-identical reports
- the report document carrying the config echo
"""

import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from pshlab_harness.config import load_config, parse_config
from pshlab_harness.runner import REPORT_FILE, run


class SegmentRunFlowTest(SimpleTestCase):
    """
    A segment check configured from a YAML file, run twice into separate
    directories.
    """

    tmp: tempfile.TemporaryDirectory[str]
    root: Path

    @classmethod
    def setUpClass(cls) -> None:
        super().setUpClass()
        cls.tmp = tempfile.TemporaryDirectory()
        cls.root = Path(cls.tmp.name)
        (cls.root / "cone.yaml").write_text(
            "operation: segment_check\n"
            "domain.name: cone\n"
            "numeric.boundary_samples: 64\n"
            "numeric.seed: 5\n",
            encoding="utf-8",
        )

    @classmethod
    def tearDownClass(cls) -> None:
        cls.tmp.cleanup()
        super().tearDownClass()

    def run_into(self, name: str) -> Path:
        config = load_config(self.root / "cone.yaml").with_overrides(
            {"output.dir": str(self.root / name)}
        )
        report = run(config)
        self.assertTrue(report.verdict, report.failed)
        return self.root / name / REPORT_FILE

    def test_reports_byte_identical(self) -> None:
        """Two runs of one config write the same report.json bytes."""
        first = self.run_into("first").read_bytes()
        second = self.run_into("second").read_bytes()
        # The output directory is part of the config echo.
        self.assertEqual(first.replace(b"first", b"second"), second)

    def test_config_echo(self) -> None:
        """The report repeats every knob of the validated config."""
        report = run(load_config(self.root / "cone.yaml"), write=False)
        document = report.as_record()
        self.assertEqual(document["config"]["domain.name"], "cone")
        self.assertEqual(document["config"]["numeric.seed"], 5)
        self.assertIn("numeric.nu", document["config"])
        self.assertEqual([c["name"] for c in document["checks"]], ["segment_check"])


class HartogsRunFlowTest(SimpleTestCase):
    """A domain without the segment property fails its run."""

    def test_segment_check_fails(self) -> None:
        """The probe at the origin fails, and so does the run."""
        config = parse_config({"operation": "segment_check", "domain.name": "hartogs"})
        report = run(config, write=False)
        self.assertFalse(report.verdict)
        self.assertEqual(report.failed, ["segment_check"])
        self.assertGreater(report.checks[0].measured["violation_count"], 0)
