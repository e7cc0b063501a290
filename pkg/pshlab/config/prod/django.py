import sentry_sdk
from environ import ImproperlyConfigured

from ..base import *  # noqa: F403
from ..env import env

DEBUG = False

# Batch hosts keep run records on a shared volume.
DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": env("PSHLAB_DB_PATH", default=str(BASE_DIR / "db.sqlite3")),  # noqa: F405
    }
}

if not SENTRY_DSN:  # noqa: F405
    raise ImproperlyConfigured("SENTRY_DSN is not set for the prod settings.")

sentry_sdk.init(
    dsn=SENTRY_DSN,  # noqa: F405
    send_default_pii=False,
    environment="production",
)
