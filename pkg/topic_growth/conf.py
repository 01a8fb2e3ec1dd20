from django.conf import settings

from . import __version__

DEFAULTS = {
    "WORKERS": 1,
    "SVG_GENERATOR": f"topic-growth {__version__}",
}


def get_setting(name):
    """
    Look up a ``TOPIC_GROWTH`` setting, falling back to the package default.
    """
    overrides = getattr(settings, "TOPIC_GROWTH", {})
    if name in overrides:
        return overrides[name]
    return DEFAULTS[name]
