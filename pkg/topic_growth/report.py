"""
Per-discipline report tables and figures.

Table 1 counts publications, included publications and topics per discipline;
Table 2 averages the regression variables per publication. Figure 1 holds
capped histograms of every variable, Figure 2 log-log scatters of citations
against every covariate and Figure 3 the per-quantile posterior means with
their credible bands. Every figure is written as CSV series plus an SVG
rendering of them.
"""
import logging
from collections import Counter, OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from .hurdle_stats import COEFFICIENTS, VARIABLES, QuantileFit, RegressionRow, quantile_table
from .svg import Chart, Figure, data_range

logger = logging.getLogger(__name__)

# x-axis caps of the variable histograms
FIGURE1_CAPS = OrderedDict(
    [
        ("citations", 2000),
        ("growth_ratio", 10),
        ("num_authors", 30),
        ("num_references", 300),
        ("jif", 30),
    ]
)
FIGURE1_BINS = 50

TABLE1_COLUMNS = ["discipline", "label", "n_publications", "n_included", "n_topics"]
TABLE2_VARIABLES = ("citations", "num_authors", "num_references", "growth_ratio", "jif")
TABLE2_COLUMNS = ["discipline", "label", "n"] + list(TABLE2_VARIABLES)


@dataclass(frozen=True)
class DisciplineCounts:
    discipline: int
    n_publications: int
    n_included: int
    n_topics: int
    label: str = ""


@dataclass(frozen=True, eq=False)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    n_above_cap: int = 0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"bin_start": self.edges[:-1], "bin_end": self.edges[1:], "count": self.counts})


def discipline_counts(
    discipline: int, n_publications: int, rows: Sequence[RegressionRow], label: str = ""
) -> DisciplineCounts:
    return DisciplineCounts(
        discipline=discipline,
        n_publications=n_publications,
        n_included=len(rows),
        n_topics=len({row.topic_id for row in rows}),
        label=label,
    )


def emit_discipline_counts(counts: Iterable[DisciplineCounts]) -> pd.DataFrame:
    rows = [
        (item.discipline, item.label, item.n_publications, item.n_included, item.n_topics)
        for item in sorted(counts, key=lambda item: item.discipline)
    ]
    return pd.DataFrame(rows, columns=TABLE1_COLUMNS)


def row_values(rows: Sequence[RegressionRow], variable: str) -> np.ndarray:
    return np.array([getattr(row, variable) for row in rows], dtype=float)


def emit_discipline_summary(
    rows_by_discipline: Mapping[int, Sequence[RegressionRow]], labels: Optional[Mapping[int, str]] = None
) -> pd.DataFrame:
    """
    Per-publication means of every regression variable, one line per
    discipline, rounded to one decimal.
    """
    labels = labels or {}
    lines = []
    for discipline, rows in sorted(rows_by_discipline.items()):
        if not rows:
            logger.info("Discipline %s has no rows to average", discipline)
            means = ["NA"] * len(TABLE2_VARIABLES)
        else:
            means = [f"{row_values(rows, variable).mean():.1f}" for variable in TABLE2_VARIABLES]
        lines.append([discipline, labels.get(discipline, ""), len(rows), *means])
    return pd.DataFrame(lines, columns=TABLE2_COLUMNS)


def histogram(values, cap: float, bins: int = FIGURE1_BINS) -> Histogram:
    """
    Equal-width bins over ``[0, cap]``; values above the cap are counted but
    not binned.
    """
    values = np.asarray(values, dtype=float)
    counts, edges = np.histogram(values[values <= cap], bins=bins, range=(0, cap))
    return Histogram(edges=edges, counts=counts, n_above_cap=int((values > cap).sum()))


def _write_csv(frame: pd.DataFrame, path: Path) -> Path:
    frame.to_csv(path, sep=",", index=False, lineterminator="\n")
    return path


def figure1(discipline: int, rows: Sequence[RegressionRow], out_dir: Path, label: str = "") -> Dict[str, Path]:
    paths = {}
    figure = Figure(f"Distributions, discipline {discipline} {label}".strip())
    for variable, cap in FIGURE1_CAPS.items():
        result = histogram(row_values(rows, variable), cap)
        if result.n_above_cap:
            logger.debug("Figure 1, %s: %d value(s) above the cap of %s", variable, result.n_above_cap, cap)
        paths[f"figure1_{variable}"] = _write_csv(result.to_frame(), out_dir / f"figure1_{discipline}_{variable}.csv")
        chart = figure.add(
            Chart(
                variable,
                (0, cap),
                data_range(result.counts.tolist(), log=True),
                y_log=True,
                x_label=variable,
                y_label="publications",
            )
        )
        chart.bars(result.edges.tolist(), result.counts.tolist())
    paths["figure1"] = out_dir / f"figure1_{discipline}.svg"
    figure.save(paths["figure1"])
    return paths


def figure2(discipline: int, rows: Sequence[RegressionRow], out_dir: Path, label: str = "") -> Dict[str, Path]:
    citations = row_values(rows, "citations")
    frame = pd.DataFrame(
        [
            (row.pub_id, variable, getattr(row, variable), row.citations)
            for variable in VARIABLES
            for row in rows
        ],
        columns=["pub_id", "variable", "value", "citations"],
    )
    paths = {"figure2_data": _write_csv(frame, out_dir / f"figure2_{discipline}.csv")}
    figure = Figure(f"Citations against covariates, discipline {discipline} {label}".strip(), columns=2)
    for variable in VARIABLES:
        values = row_values(rows, variable)
        chart = figure.add(
            Chart(
                variable,
                data_range(values.tolist(), log=True),
                data_range(citations.tolist(), log=True),
                x_log=True,
                y_log=True,
                x_label=variable,
                y_label="citations",
            )
        )
        chart.points(values.tolist(), citations.tolist())
    paths["figure2"] = out_dir / f"figure2_{discipline}.svg"
    figure.save(paths["figure2"])
    return paths


def figure3(
    discipline: int, quantile_fits: Sequence[QuantileFit], out_dir: Path, label: str = "", warnings=None
) -> Dict[str, Path]:
    table = quantile_table(quantile_fits)
    if table.empty:
        logger.warning("Discipline %s: no converged quantile fits, Figure 3 omitted", discipline)
        if warnings is not None:
            warnings["figure3_omitted"] += 1
        return {}
    paths = {"figure3_data": _write_csv(table, out_dir / f"figure3_{discipline}.csv")}
    figure = Figure(f"Quantile regression estimates, discipline {discipline} {label}".strip())
    for name in COEFFICIENTS:
        series = table[table["variable"] == name]
        quantiles = series["quantile"].tolist()
        lower, mean, upper = series["lower"].tolist(), series["mean"].tolist(), series["upper"].tolist()
        chart = figure.add(
            Chart(
                name,
                data_range(quantiles),
                data_range(lower + upper + [0.0]),
                x_label="quantile",
                y_label="estimate",
            )
        )
        chart.band(quantiles, lower, upper)
        chart.polyline(quantiles, mean)
        chart.points(quantiles, mean, radius=2.5)
        chart.hline(0.0)
    paths["figure3"] = out_dir / f"figure3_{discipline}.svg"
    figure.save(paths["figure3"])
    return paths


def emit_figures(
    discipline: int,
    rows: Sequence[RegressionRow],
    quantile_fits: Sequence[QuantileFit],
    out_dir,
    label: str = "",
    warnings: Optional[Counter] = None,
) -> Dict[str, Path]:
    out_dir = Path(out_dir)
    paths = {}
    paths.update(figure1(discipline, rows, out_dir, label))
    paths.update(figure2(discipline, rows, out_dir, label))
    paths.update(figure3(discipline, quantile_fits, out_dir, label, warnings))
    logger.info("Discipline %s: wrote %d figure file(s)", discipline, len(paths))
    return paths
