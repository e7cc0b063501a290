from pshlab.config.env import env

from ..base import *  # noqa: F403

# CI runs the suite on a throwaway database and a single worker so
# report bytes do not depend on the runner's core count.
DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": env("DB_NAME", default=":memory:"),
    }
}

PSHLAB_THREADS = 1
