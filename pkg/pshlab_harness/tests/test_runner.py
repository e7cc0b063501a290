"""
Tests for the runner and figure data.

Covers:
- run: dispatch, gain table CSV at 17 significant digits, byte-identical reruns
- write_report: report.json, timings.json and series CSVs
- emit_figure_data / figure_check: the cusp profile figure
"""

import csv
import io
import json
import math
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from pshlab.util import csv_text, dump_json
from pshlab_harness.config import FigureName, Operation, parse_config
from pshlab_harness.figures import emit_figure_data, figure_check
from pshlab_harness.reports import Series
from pshlab_harness.runner import OPERATIONS, REPORT_FILE, TIMINGS_FILE, run, write_report
from pshlab_special.cusp import cusp_profile
from pshlab_special.lambert import INV_E


class DispatchTests(SimpleTestCase):
    """Tests for the operation table."""

    def test_every_operation_dispatches(self) -> None:
        """Each operation name has a handler."""
        self.assertEqual(set(OPERATIONS), set(Operation))


class GainTableRunTests(SimpleTestCase):
    """Tests for a gain_table run."""

    @classmethod
    def setUpClass(cls) -> None:
        super().setUpClass()
        cls.config = parse_config({"operation": "gain_table", "gain.form": "loglip"})
        cls.report = run(cls.config, write=False)

    def test_passes(self) -> None:
        """0 < f(eps) <= eps on every row."""
        self.assertTrue(self.report.verdict)

    def test_csv_digits(self) -> None:
        """Floats are written with 17 significant digits and read back exactly."""
        series = self.report.series[0]
        text = csv_text(series.header, series.rows)
        rows = list(csv.reader(io.StringIO(text)))
        self.assertEqual(rows[0], ["eps", "f_eps", "omega_eps"])
        self.assertEqual(rows[1][0], "0.10000000000000001")
        for written, row in zip(rows[1:], series.rows):
            self.assertEqual([float(x) for x in written], [float(x) for x in row])

    def test_rerun_byte_identical(self) -> None:
        """The same config gives the same report bytes."""
        again = run(self.config, write=False)
        self.assertEqual(dump_json(self.report.as_record()), dump_json(again.as_record()))


class WriteReportTests(SimpleTestCase):
    """Tests for write_report."""

    def test_files_written(self) -> None:
        """report.json, timings.json and one CSV per series land in the output directory."""
        with tempfile.TemporaryDirectory() as tmp:
            config = parse_config({"operation": "gain_table", "output.dir": tmp})
            report = run(config)
            directory = Path(tmp)
            document = json.loads((directory / REPORT_FILE).read_text(encoding="utf-8"))
            self.assertEqual(document["verdict"], "pass")
            self.assertEqual(document["operation"], "gain_table")
            timings = json.loads((directory / TIMINGS_FILE).read_text(encoding="utf-8"))
            self.assertEqual(set(timings), {c.name for c in report.checks})
            raw = (directory / "gain_table.csv").read_bytes()
            self.assertNotIn(b"\r\n", raw)
            self.assertTrue(raw.startswith(b"eps,f_eps,omega_eps\n"))

    def test_explicit_directory(self) -> None:
        """A directory argument overrides output.dir."""
        with tempfile.TemporaryDirectory() as tmp:
            report = run(parse_config({"operation": "gain_table"}), write=False)
            target = write_report(report, Path(tmp) / "nested")
            self.assertTrue((target / REPORT_FILE).exists())


class CuspFigureTests(SimpleTestCase):
    """Tests for the cusp_fig1 series."""

    @classmethod
    def setUpClass(cls) -> None:
        super().setUpClass()
        cls.series = emit_figure_data(FigureName.CUSP_FIG1)

    def test_shape(self) -> None:
        """2001 rows on [-1/2, 1/2]."""
        self.assertEqual(len(self.series.rows), 2001)
        self.assertEqual(self.series.rows[0][0], -0.5)
        self.assertEqual(self.series.rows[-1][0], 0.5)

    def test_tip(self) -> None:
        """The profile tends to 1 at the tip."""
        middle = min(range(len(self.series.rows)), key=lambda i: abs(self.series.rows[i][0]))
        self.assertAlmostEqual(self.series.rows[middle][1], 1.0, places=12)
        self.assertLess(self.series.rows[middle + 1][1] - 1.0, 0.01)

    def test_value_at_inverse_e(self) -> None:
        """W0(e) = 1 gives 1 + 1/e at x = 1/e."""
        self.assertAlmostEqual(cusp_profile(INV_E), 1.0 + INV_E, places=12)
        x, y = min(self.series.rows, key=lambda row: abs(row[0] - INV_E))
        self.assertAlmostEqual(y, cusp_profile(x), places=15)
        self.assertAlmostEqual(y, 1.0 + INV_E, delta=1e-3)

    def test_figure_check(self) -> None:
        """The emitted data passes its own shape check."""
        self.assertTrue(figure_check(self.series).verdict)

    def test_empty_series_fails(self) -> None:
        """No rows is a failed figure."""
        self.assertFalse(figure_check(Series("cusp_fig1", ("x", "y"), ())).verdict)

    def test_non_finite_fails(self) -> None:
        """NaN rows fail the check."""
        series = Series("cusp_fig1", ("x", "y"), ((0.0, math.nan),))
        self.assertFalse(figure_check(series).verdict)
