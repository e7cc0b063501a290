from django.apps import AppConfig


class PshlabSpecialConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "pshlab_special"
    verbose_name = "Special functions"
