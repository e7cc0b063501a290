"""
Single `Env` instance shared by settings and `manage.py`.

Settings follow a base-plus-variant layout (`base.py`, then one
`<variant>/django.py` per environment) so that per-environment integrations
such as Sentry stay out of the shared config.
"""

from pathlib import Path

from environ import Env

env = Env()

# Load .env file if available. CI and prod set variables directly, so the
# file is optional.
env_file = Path(__file__).resolve().parent.parent.parent / ".env"
if env_file.exists():
    env.read_env(env_file, parse_comments=True)
