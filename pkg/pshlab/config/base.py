"""
Django settings for the pshlab project.

Generated by 'django-admin startproject' using Django 5.2.

For more information on this file, see
https://docs.djangoproject.com/en/5.2/topics/settings/

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

import sys
from pathlib import Path
from typing import cast

import django_stubs_ext

from pshlab.config.env import env

# Make Django classes that django-stubs types as generic subscriptable at
# runtime so annotations can use them.
django_stubs_ext.monkeypatch()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent.parent

# Keep expected failure logs from tests from flooding `manage.py test` output
IS_RUNNING_MANAGE_PY_TESTS = len(sys.argv) > 1 and sys.argv[1] == "test"

# There are no sessions or signed cookies; the key only satisfies Django's checks.
SECRET_KEY = env("DJANGO_SECRET_KEY", default="pshlab-local-only")

DEBUG = False

ALLOWED_HOSTS: list[str] = []

#
# pshlab settings
#
# Worker cap for the acceptance runner and per-point evaluation.
PSHLAB_THREADS: int = env.int("PSHLAB_THREADS", default=1)
PSHLAB_DEFAULT_SEED: int = env.int("PSHLAB_DEFAULT_SEED", default=20240101)
# Boundary samples used to validate that atlas balls cover the boundary.
PSHLAB_COVER_SAMPLES: int = env.int("PSHLAB_COVER_SAMPLES", default=10_000)
# The c in B(x_j, r_j/c) for translation estimates and eps0 = eps_w/c.
PSHLAB_SEGMENT_C: float = env.float("PSHLAB_SEGMENT_C", default=2.0)
PSHLAB_PSH_TOLERANCE: float = env.float("PSHLAB_PSH_TOLERANCE", default=1e-9)
PSHLAB_MOLLIFIER_NODES_LOG2: int = env.int("PSHLAB_MOLLIFIER_NODES_LOG2", default=12)
PSHLAB_OUTPUT_DIR = Path(env("PSHLAB_OUTPUT_DIR", default=str(BASE_DIR / "runs")))

# Application definition

INSTALLED_APPS = [
    "django.contrib.contenttypes",
    "pshlab",
    "pshlab_special",
    "pshlab_domains",
    "pshlab_psh",
    "pshlab_mergelyan",
    "pshlab_exhaustion",
    "pshlab_harness",
]

# Database
# https://docs.djangoproject.com/en/5.2/ref/settings/#databases

DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": BASE_DIR / "db.sqlite3",
    }
}

# Internationalization
# https://docs.djangoproject.com/en/5.2/topics/i18n/

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True

# Default primary key field type
# https://docs.djangoproject.com/en/5.2/ref/settings/#default-auto-field

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

_LOG_LEVEL = env("DJANGO_LOG_LEVEL", default="INFO").upper()

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {
            "format": "{asctime} {levelname} {name}: {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "plain",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": "WARNING",
    },
    "loggers": {
        "django": {
            "handlers": ["console"],
            "level": _LOG_LEVEL,
            "propagate": False,
        },
        "pshlab": {
            "handlers": ["console"],
            "level": _LOG_LEVEL,
            "propagate": False,
        },
    },
}

for _app_logger in (
    "pshlab_special",
    "pshlab_domains",
    "pshlab_psh",
    "pshlab_mergelyan",
    "pshlab_exhaustion",
    "pshlab_harness",
):
    cast(dict[str, dict[str, object]], LOGGING["loggers"])[_app_logger] = {
        "handlers": ["console"],
        "level": _LOG_LEVEL,
        "propagate": False,
    }

# Keep expected failure paths from flooding `manage.py test` output
if IS_RUNNING_MANAGE_PY_TESTS:
    logging_configuration_loggers = cast(
        dict[str, dict[str, object]],
        LOGGING["loggers"],
    )
    for _name, _config in logging_configuration_loggers.items():
        if _name.startswith("pshlab"):
            _config["level"] = "WARNING"

SENTRY_DSN: str = env("SENTRY_DSN", default="")
