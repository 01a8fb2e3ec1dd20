"""
Topic publication time series and growth ratios.

The plain ratio compares the publication count ``dt`` years after ``t`` with
the count at ``t``; the smoothed ratio compares the means of two windows of
``window`` years ending at ``t + dt`` and at ``t``. Means are kept as exact
fractions so that the "window sum > 15" and "mean > 5" filters agree exactly.
"""
import logging
from collections import Counter
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence

import pandas as pd

from .corpus import Publication, read_table
from .exceptions import ConfigError, CorpusError, UndefinedRatioError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GrowthConfig:
    t: int = 2015
    dt: int = 3
    window: int = 3
    min_mean: float = 5
    # None counts every document type
    count_doc_types: Optional[FrozenSet[str]] = None

    def __post_init__(self):
        errors = {}
        if self.dt < 1:
            errors["dt"] = "dt must be positive"
        if self.window < 1:
            errors["window"] = "window must be positive"
        if self.min_mean < 0:
            errors["min_mean"] = "min_mean must not be negative"
        if errors:
            raise ConfigError(errors)

    @property
    def years(self) -> range:
        return range(self.t - self.window + 1, self.t + self.dt + 1)


@dataclass(frozen=True)
class TopicSeries:
    topic_id: int
    counts: Mapping[int, int]


@dataclass(frozen=True)
class GrowthRecord:
    topic_id: int
    base_total: int
    later_total: int
    window: int = 3
    eligible: bool = False
    missing_years: int = 0

    @property
    def mean_base(self) -> Fraction:
        return Fraction(self.base_total, self.window)

    @property
    def mean_later(self) -> Fraction:
        return Fraction(self.later_total, self.window)

    @property
    def ratio(self) -> Optional[Fraction]:
        if self.base_total == 0:
            return None
        return Fraction(self.later_total, self.base_total)

    @property
    def ratio_value(self) -> float:
        ratio = self.ratio
        return float("nan") if ratio is None else float(ratio)


def topic_series(
    assignment: Mapping[int, int],
    pubs: Iterable[Publication],
    years: Sequence[int],
    doc_types: Optional[FrozenSet[str]] = None,
) -> Dict[int, TopicSeries]:
    """
    Count the publications of every topic per requested year. Every topic that
    has a publication in the requested years gets a count for each year.
    """
    years = list(years)
    wanted = set(years)
    counts: Dict[int, Counter] = {}
    for pub in pubs:
        if pub.year not in wanted or (doc_types is not None and pub.doc_type not in doc_types):
            continue
        topic = assignment.get(pub.pub_id)
        if topic is None:
            continue
        counts.setdefault(topic, Counter())[pub.year] += 1
    return {
        topic: TopicSeries(topic_id=topic, counts={year: topic_counts.get(year, 0) for year in years})
        for topic, topic_counts in sorted(counts.items())
    }


def _count(series: TopicSeries, year: int) -> int:
    if year not in series.counts:
        logger.warning("Topic %s has no count for %d, using 0", series.topic_id, year)
        return 0
    return series.counts[year]


def growth_ratio(series: TopicSeries, t: int, dt: int) -> Fraction:
    base = _count(series, t)
    if base == 0:
        raise UndefinedRatioError(f"topic {series.topic_id} has no publications in {t}")
    return Fraction(_count(series, t + dt), base)


def smoothed_growth_ratio(series: TopicSeries, t: int, dt: int, window: int = 3) -> GrowthRecord:
    base_years = range(t - window + 1, t + 1)
    later_years = range(t + dt - window + 1, t + dt + 1)
    missing = sum(1 for year in list(base_years) + list(later_years) if year not in series.counts)
    record = GrowthRecord(
        topic_id=series.topic_id,
        base_total=sum(_count(series, year) for year in base_years),
        later_total=sum(_count(series, year) for year in later_years),
        window=window,
        missing_years=missing,
    )
    if record.base_total == 0:
        raise UndefinedRatioError(
            f"topic {series.topic_id} has no publications in {base_years.start}-{base_years.stop - 1}"
        )
    return record


def filter_topics(records: Iterable[GrowthRecord], min_mean: float = 5) -> List[GrowthRecord]:
    threshold = Fraction(min_mean)
    return [
        replace(record, eligible=record.mean_base > threshold and record.mean_later > threshold) for record in records
    ]


def compute_growth(
    assignment: Mapping[int, int],
    pubs: Iterable[Publication],
    config: GrowthConfig,
    excluded_topics: FrozenSet[int] = frozenset(),
    warnings: Optional[Counter] = None,
) -> List[GrowthRecord]:
    """
    Smoothed growth records for every topic, flagged for eligibility.

    Topics without publications in the base window keep an undefined ratio and
    are never eligible; ``excluded_topics`` (orphan classes) are never eligible
    either.
    """
    series = topic_series(assignment, pubs, config.years, config.count_doc_types)
    records = []
    undefined = 0
    for topic, topic_series_ in series.items():
        try:
            records.append(smoothed_growth_ratio(topic_series_, config.t, config.dt, config.window))
        except UndefinedRatioError:
            undefined += 1
            later = range(config.t + config.dt - config.window + 1, config.t + config.dt + 1)
            records.append(
                GrowthRecord(
                    topic_id=topic,
                    base_total=0,
                    later_total=sum(topic_series_.counts[year] for year in later),
                    window=config.window,
                )
            )
    records = filter_topics(records, config.min_mean)
    records = [replace(record, eligible=False) if record.topic_id in excluded_topics else record for record in records]

    if undefined:
        logger.warning("%d topic(s) without publications in the base window", undefined)
    if warnings is not None:
        warnings["topics_without_base"] += undefined
    logger.info(
        "Growth ratios for %d topics, %d eligible", len(records), sum(1 for record in records if record.eligible)
    )
    return records


GROWTH_COLUMNS = ["topic_id", "mean_base", "mean_later", "ratio", "eligible", "base_total", "later_total", "window"]


def write_growth(records: Sequence[GrowthRecord], path):
    rows = [
        (
            record.topic_id,
            float(record.mean_base),
            float(record.mean_later),
            record.ratio_value,
            int(record.eligible),
            record.base_total,
            record.later_total,
            record.window,
        )
        for record in records
    ]
    pd.DataFrame(rows, columns=GROWTH_COLUMNS).to_csv(path, sep="\t", index=False, lineterminator="\n")


def read_growth(path) -> List[GrowthRecord]:
    frame = read_table(path, GROWTH_COLUMNS)
    try:
        return [
            GrowthRecord(
                topic_id=int(row.topic_id),
                base_total=int(row.base_total),
                later_total=int(row.later_total),
                window=int(row.window),
                eligible=bool(row.eligible),
            )
            for row in frame.itertuples(index=False)
        ]
    except (TypeError, ValueError) as exc:
        raise CorpusError(f"{path}: {exc}")
