import logging
import math
from collections import OrderedDict
from pathlib import Path

from rest_framework import renderers
from rest_framework.exceptions import ParseError
from rest_framework.parsers import JSONParser

from .exceptions import ConfigError

logger = logging.getLogger(__name__)


class ArtifactJSONRenderer(renderers.JSONRenderer):
    """
    Render pipeline artifacts for disk: keys sorted at every depth, two-space
    indent, a trailing newline and ``null`` for non-finite floats, so that the
    same data always gives the same bytes.

    When the renderer context carries ``meta``, the document is wrapped as
    ``{"meta": ..., "data": ...}``.
    """

    response_meta_key = "meta"
    response_data_key = "data"
    indent = 2

    def _render_artifact(self, data, renderer_context):
        meta = renderer_context.get("meta")
        if meta is None:
            return data
        render_data = OrderedDict()
        render_data[self.response_meta_key] = meta
        render_data[self.response_data_key] = data
        return render_data

    def render(self, data, accepted_media_type=None, renderer_context=None):
        renderer_context = {"indent": self.indent, **(renderer_context or {})}
        render_data = canonical(self._render_artifact(data, renderer_context))
        return super().render(render_data, accepted_media_type, renderer_context) + b"\n"


def canonical(value):
    if isinstance(value, dict):
        return OrderedDict((str(key), canonical(value[key])) for key in sorted(value, key=str))
    if isinstance(value, (list, tuple)):
        return [canonical(item) for item in value]
    if hasattr(value, "tolist"):
        return canonical(value.tolist())
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_json(path, data, meta=None):
    context = {} if meta is None else {"meta": meta}
    Path(path).write_bytes(ArtifactJSONRenderer().render(data, renderer_context=context))


def read_json(path):
    path = Path(path)
    try:
        with path.open("rb") as stream:
            return JSONParser().parse(stream)
    except FileNotFoundError:
        raise ConfigError({"path": f"{path}: no such file"})
    except ParseError as exc:
        raise ConfigError({"path": f"{path}: {exc.detail}"})
