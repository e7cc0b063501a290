from django.apps import AppConfig


class PshlabDomainsConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "pshlab_domains"
    verbose_name = "Domain geometry"
