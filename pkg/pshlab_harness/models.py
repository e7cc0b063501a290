from typing import Any

from django.db import models
from django.db.models import CharField, DateTimeField, JSONField, PositiveBigIntegerField

from pshlab_harness.reports import RunReport


class RunRecord(models.Model):
    """
    A run saved with `--record`: the full config and the report document, so
    a past result can be compared with a rerun of the same config.
    """

    command = CharField(max_length=255, help_text="Operation the run executed.")
    seed = PositiveBigIntegerField(help_text="Value of numeric.seed for the run.")
    config = JSONField(help_text="Validated config, every knob included.")
    report = JSONField(help_text="The report document as written to report.json.")
    verdict = CharField(
        max_length=4,
        choices=[("pass", "pass"), ("fail", "fail")],
        help_text="Overall verdict of the run.",
    )
    created_at = DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ["-created_at"]

    def __str__(self) -> str:
        return f"{self.command} (seed {self.seed}) - {self.verdict} - {self.created_at}"

    @classmethod
    def from_report(cls, report: RunReport, **kwargs: Any) -> "RunRecord":
        record = report.as_record()
        return cls.objects.create(
            command=record["operation"],
            seed=report.config.seed,
            config=record["config"],
            report=record,
            verdict=record["verdict"],
            **kwargs,
        )

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"
