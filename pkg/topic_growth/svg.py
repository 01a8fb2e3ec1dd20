"""
A small deterministic SVG writer for the report figures.

Charts are panels with their own data ranges and optional log-10 axes; a
:class:`Figure` lays panels out on a grid. The output depends only on the data
and the generator line, which is written as an XML comment right after the
prolog.
"""
import math
from typing import List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

from .conf import get_setting

PROLOG = '<?xml version="1.0" encoding="UTF-8" standalone="no"?>\n'
GENERATOR_COMMENT = "<!-- generator: {} -->\n"

STROKE = "#333333"
FILL = "#4c72b0"
BAND = "#c6d4ea"


def _num(value: float) -> str:
    return f"{value:.2f}"


def data_range(values: Sequence[float], log: bool = False, include_zero: bool = False) -> Tuple[float, float]:
    """
    A plotting range covering ``values``; for log axes only positive values
    count.
    """
    values = [v for v in values if math.isfinite(v) and (v > 0 or not log)]
    if include_zero and not log:
        values.append(0.0)
    if not values:
        return (1.0, 10.0) if log else (0.0, 1.0)
    low, high = min(values), max(values)
    if log:
        return low / 1.5, high * 1.5
    if low == high:
        return low - 0.5, high + 0.5
    pad = (high - low) * 0.05
    return low - (0 if include_zero and low == 0 else pad), high + pad


class Chart:
    def __init__(
        self,
        title: str,
        x_range: Tuple[float, float],
        y_range: Tuple[float, float],
        x_log: bool = False,
        y_log: bool = False,
        x_label: str = "",
        y_label: str = "",
        width: int = 300,
        height: int = 220,
        margin: int = 40,
    ):
        self.title = title
        self.x_range = x_range
        self.y_range = y_range
        self.x_log = x_log
        self.y_log = y_log
        self.x_label = x_label
        self.y_label = y_label
        self.width = width
        self.height = height
        self.margin = margin
        self.elements: List[str] = []

    def _scale(self, value: float, bounds: Tuple[float, float], log: bool, size: float) -> Optional[float]:
        low, high = bounds
        if log:
            if value <= 0:
                return None
            value, low, high = math.log10(value), math.log10(low), math.log10(high)
        return (value - low) / (high - low) * size

    def x(self, value: float) -> Optional[float]:
        offset = self._scale(value, self.x_range, self.x_log, self.width - 2 * self.margin)
        return None if offset is None else self.margin + offset

    def y(self, value: float) -> Optional[float]:
        offset = self._scale(value, self.y_range, self.y_log, self.height - 2 * self.margin)
        return None if offset is None else self.height - self.margin - offset

    def bars(self, edges: Sequence[float], heights: Sequence[float], fill: str = FILL):
        baseline = self.y(self.y_range[0])
        for left, right, height in zip(edges[:-1], edges[1:], heights):
            top = self.y(height)
            if top is None or height <= 0:
                continue
            x1, x2 = self.x(left), self.x(right)
            self.elements.append(
                f'<rect x="{_num(x1)}" y="{_num(top)}" width="{_num(x2 - x1)}" height="{_num(baseline - top)}" '
                f'fill="{fill}"/>'
            )

    def points(self, xs: Sequence[float], ys: Sequence[float], fill: str = FILL, radius: float = 1.5):
        for x, y in zip(xs, ys):
            px, py = self.x(x), self.y(y)
            if px is None or py is None:
                continue
            self.elements.append(
                f'<circle cx="{_num(px)}" cy="{_num(py)}" r="{radius}" fill="{fill}" fill-opacity="0.5"/>'
            )

    def polyline(self, xs: Sequence[float], ys: Sequence[float], stroke: str = FILL):
        coordinates = [(self.x(x), self.y(y)) for x, y in zip(xs, ys)]
        coordinates = [(px, py) for px, py in coordinates if px is not None and py is not None]
        if len(coordinates) < 2:
            return
        points = " ".join(f"{_num(px)},{_num(py)}" for px, py in coordinates)
        self.elements.append(f'<polyline points="{points}" fill="none" stroke="{stroke}" stroke-width="1.5"/>')

    def band(self, xs: Sequence[float], lower: Sequence[float], upper: Sequence[float], fill: str = BAND):
        outline = [(self.x(x), self.y(y)) for x, y in zip(xs, upper)]
        outline += [(self.x(x), self.y(y)) for x, y in reversed(list(zip(xs, lower)))]
        if any(px is None or py is None for px, py in outline) or len(outline) < 3:
            return
        points = " ".join(f"{_num(px)},{_num(py)}" for px, py in outline)
        self.elements.append(f'<polygon points="{points}" fill="{fill}" stroke="none"/>')

    def hline(self, value: float, stroke: str = STROKE):
        y = self.y(value)
        if y is None or not self.margin <= y <= self.height - self.margin:
            return
        self.elements.append(
            f'<line x1="{self.margin}" y1="{_num(y)}" x2="{self.width - self.margin}" y2="{_num(y)}" '
            f'stroke="{stroke}" stroke-dasharray="4 3"/>'
        )

    def _axis_text(self, value: float) -> str:
        return f"{value:.3g}"

    def _text(self, x, y, content: str, size: int, anchor: str = "start", extra: str = "") -> str:
        return f'<text x="{x}" y="{y}" font-size="{size}" text-anchor="{anchor}"{extra}>{escape(content)}</text>'

    def render(self) -> str:
        left, right = self.margin, self.width - self.margin
        top, bottom = self.margin, self.height - self.margin
        middle_x, middle_y = f"{self.width / 2:.1f}", f"{self.height / 2:.1f}"
        x_label = ("log " if self.x_log else "") + self.x_label
        y_label = ("log " if self.y_log else "") + self.y_label
        parts = [
            self._text(middle_x, top - 12, self.title, 12, "middle"),
            *self.elements,
            f'<rect x="{left}" y="{top}" width="{right - left}" height="{bottom - top}" '
            f'fill="none" stroke="{STROKE}"/>',
            self._text(left, bottom + 14, self._axis_text(self.x_range[0]), 9),
            self._text(right, bottom + 14, self._axis_text(self.x_range[1]), 9, "end"),
            self._text(left - 4, bottom, self._axis_text(self.y_range[0]), 9, "end"),
            self._text(left - 4, top + 8, self._axis_text(self.y_range[1]), 9, "end"),
            self._text(middle_x, bottom + 28, x_label, 10, "middle"),
            self._text(12, middle_y, y_label, 10, "middle", f' transform="rotate(-90 12 {middle_y})"'),
        ]
        return "\n".join(parts)


class Figure:
    def __init__(self, title: str, columns: int = 3):
        self.title = title
        self.columns = columns
        self.charts: List[Chart] = []

    def add(self, chart: Chart) -> Chart:
        self.charts.append(chart)
        return chart

    def render(self, generator: Optional[str] = None) -> str:
        generator = get_setting("SVG_GENERATOR") if generator is None else generator
        cell_width = max((chart.width for chart in self.charts), default=300)
        cell_height = max((chart.height for chart in self.charts), default=220)
        columns = max(1, min(self.columns, len(self.charts)))
        rows = math.ceil(len(self.charts) / columns) if self.charts else 0
        width, height = cell_width * columns, cell_height * rows + 30
        parts = [
            PROLOG,
            GENERATOR_COMMENT.format(escape(generator)),
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}" font-family="sans-serif">\n',
            f'<rect width="{width}" height="{height}" fill="#ffffff"/>\n',
            f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(self.title)}</text>\n',
        ]
        for position, chart in enumerate(self.charts):
            row, column = divmod(position, columns)
            parts.append(f'<g transform="translate({column * cell_width},{row * cell_height + 30})">\n')
            parts.append(chart.render())
            parts.append("\n</g>\n")
        parts.append("</svg>\n")
        return "".join(parts)

    def save(self, path, generator: Optional[str] = None):
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(self.render(generator))
