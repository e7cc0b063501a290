from django.apps import AppConfig


class PshlabExhaustionConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "pshlab_exhaustion"
    verbose_name = "Bounded exhaustion"
