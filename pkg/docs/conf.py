# Configuration file for the Sphinx documentation builder.
import os
import sys

import django

sys.path.insert(0, os.path.abspath(".."))
os.environ.setdefault("DJANGO_SETTINGS_MODULE", "topic_growth.settings")
django.setup()

from topic_growth import __version__  # noqa: E402

project = "topic-growth"
copyright = "2023, ISPnext B.V."
author = "ISPnext B.V."
release = __version__

extensions = ["sphinx.ext.autodoc", "sphinx.ext.todo"]

templates_path = ["_templates"]
exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]

html_theme = "sphinx_rtd_theme"
