"""
Standalone settings used by the ``topic-growth`` console script.

Projects that add ``topic_growth`` to ``INSTALLED_APPS`` use their own settings
instead; only the ``TOPIC_GROWTH`` dict is read by the app.
"""
import os

SECRET_KEY = os.environ.get("TOPIC_GROWTH_SECRET_KEY", "topic-growth-cli-has-no-secrets")

DEBUG = False

USE_TZ = True

INSTALLED_APPS = [
    "django.contrib.contenttypes",
    "rest_framework",
    "topic_growth",
]

DATABASES = {}

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "console": {"format": "%(asctime)s %(levelname)-8s %(name)s %(message)s"},
    },
    "handlers": {
        "console": {"class": "logging.StreamHandler", "formatter": "console"},
    },
    "loggers": {
        "topic_growth": {
            "handlers": ["console"],
            "level": os.environ.get("TOPIC_GROWTH_LOG_LEVEL", "INFO"),
        },
    },
}

TOPIC_GROWTH = {
    "WORKERS": int(os.environ.get("TOPIC_GROWTH_WORKERS", "1")),
}
