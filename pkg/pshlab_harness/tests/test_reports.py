"""
Tests for report records.

Covers:
- CheckRecord.from_record / as_record: verdict strings, violation cap
- merge_checks: ordering by name, duplicate names
- RunReport: aggregate verdict, wall times kept out of the document
"""

from django.test import SimpleTestCase

from pshlab_harness.config import parse_config
from pshlab_harness.exceptions import HarnessError
from pshlab_harness.reports import (
    MAX_VIOLATIONS,
    CheckRecord,
    RunReport,
    merge_checks,
    timed,
)


def _record(verdict: bool, violations: int = 0) -> dict[str, object]:
    return {
        "op": "segment_check",
        "inputs": {"domain": "cone"},
        "verdict": verdict,
        "fitted_constants": {"c_fit": 0.5},
        "measured": {"tested": 10},
        "violations": [{"index": i} for i in range(violations)],
    }


class CheckRecordTests(SimpleTestCase):
    """Tests for CheckRecord."""

    def test_from_record(self) -> None:
        """Operation records keep their fields and count their violations."""
        check = CheckRecord.from_record("segment", _record(False, 3), bound={"max": 1})
        self.assertFalse(check.verdict)
        self.assertEqual(check.measured["violation_count"], 3)
        self.assertEqual(check.fitted_constants, {"c_fit": 0.5})
        self.assertEqual(check.bound, {"max": 1})

    def test_record_bound_merged(self) -> None:
        """Bound entries of the operation record are kept next to the caller's."""
        record = {**_record(True), "bound": {"gap": 0.5}}
        check = CheckRecord.from_record("ray", record, bound={"runtime_ms": 10})
        self.assertEqual(check.bound, {"gap": 0.5, "runtime_ms": 10})

    def test_violations_capped(self) -> None:
        """Only the first MAX_VIOLATIONS witnesses are kept."""
        check = CheckRecord.from_record("segment", _record(False, MAX_VIOLATIONS + 5))
        self.assertEqual(len(check.violations), MAX_VIOLATIONS)
        self.assertEqual(check.measured["violation_count"], MAX_VIOLATIONS + 5)

    def test_as_record_verdict_strings(self) -> None:
        """Verdicts serialize as pass/fail; runtime only on request."""
        check = CheckRecord("a", True, runtime_ms=12.5)
        self.assertEqual(check.as_record()["verdict"], "pass")
        self.assertNotIn("runtime_ms", check.as_record())
        self.assertEqual(check.as_record(timings=True)["runtime_ms"], 12.5)
        self.assertEqual(CheckRecord("b", False).as_record()["verdict"], "fail")

    def test_timed_stamps_runtime(self) -> None:
        """timed leaves the record alone apart from runtime_ms."""
        check = timed("a", lambda: CheckRecord("a", True, measured={"x": 1}))
        self.assertGreaterEqual(check.runtime_ms, 0.0)
        self.assertEqual(check.measured, {"x": 1})


class MergeTests(SimpleTestCase):
    """Tests for merge_checks."""

    def test_ordered_by_name(self) -> None:
        """Group order does not matter; names decide."""
        first = merge_checks([[CheckRecord("b", True)], [CheckRecord("a", True)]])
        second = merge_checks([[CheckRecord("a", True)], [CheckRecord("b", True)]])
        self.assertEqual([c.name for c in first], ["a", "b"])
        self.assertEqual(first, second)

    def test_duplicate_names(self) -> None:
        """Two checks with one name are a harness error."""
        with self.assertRaises(HarnessError):
            merge_checks([[CheckRecord("a", True)], [CheckRecord("a", False)]])


class RunReportTests(SimpleTestCase):
    """Tests for RunReport."""

    def test_aggregate_verdict(self) -> None:
        """One failing check fails the run."""
        config = parse_config({})
        report = RunReport(config, (CheckRecord("a", True), CheckRecord("b", False)))
        self.assertFalse(report.verdict)
        self.assertEqual(report.failed, ["b"])
        self.assertEqual(report.as_record()["verdict"], "fail")

    def test_document_independent_of_wall_time(self) -> None:
        """Runs differing only in wall time give the same document."""
        config = parse_config({})
        fast = RunReport(config, (CheckRecord("a", True, runtime_ms=1.0),))
        slow = RunReport(config, (CheckRecord("a", True, runtime_ms=900.0),))
        self.assertEqual(fast.as_record(), slow.as_record())
        self.assertEqual(slow.timings(), {"a": 900.0})
