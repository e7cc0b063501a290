from django.apps import AppConfig


class PshlabPshConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "pshlab_psh"
    verbose_name = "Plurisubharmonic checks"
