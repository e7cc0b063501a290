from django.apps import AppConfig


class PshlabMergelyanConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "pshlab_mergelyan"
    verbose_name = "Mergelyan approximation"
