# Generated by Django 5.2.1 on 2026-10-17 09:12

from django.db import migrations, models


class Migration(migrations.Migration):
    initial = True

    dependencies: list[tuple[str, str]] = []

    operations = [
        migrations.CreateModel(
            name="RunRecord",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                (
                    "command",
                    models.CharField(
                        help_text="Operation the run executed.", max_length=255
                    ),
                ),
                (
                    "seed",
                    models.PositiveBigIntegerField(
                        help_text="Value of numeric.seed for the run."
                    ),
                ),
                (
                    "config",
                    models.JSONField(help_text="Validated config, every knob included."),
                ),
                (
                    "report",
                    models.JSONField(
                        help_text="The report document as written to report.json."
                    ),
                ),
                (
                    "verdict",
                    models.CharField(
                        choices=[("pass", "pass"), ("fail", "fail")],
                        help_text="Overall verdict of the run.",
                        max_length=4,
                    ),
                ),
                ("created_at", models.DateTimeField(auto_now_add=True)),
            ],
            options={
                "ordering": ["-created_at"],
            },
        ),
    ]
