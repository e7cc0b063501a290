from django.apps import AppConfig


class PshlabHarnessConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "pshlab_harness"
    verbose_name = "Experiment harness"
