SECRET_KEY = "so-secret-i-cant-believe-you-are-looking-at-this"

USE_TZ = True

DATABASES = {}

INSTALLED_APPS = [
    "django.contrib.contenttypes",
    "rest_framework",
    "topic_growth",
]

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "handlers": {
        "console": {"class": "logging.StreamHandler"},
    },
    "loggers": {
        "topic_growth": {"handlers": ["console"], "level": "WARNING"},
    },
}

TOPIC_GROWTH = {
    "WORKERS": 1,
    "SVG_GENERATOR": "topic-growth tests",
}
