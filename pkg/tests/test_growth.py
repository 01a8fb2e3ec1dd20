from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from topic_growth.exceptions import ConfigError, UndefinedRatioError
from topic_growth.growth import (
    GrowthConfig,
    GrowthRecord,
    TopicSeries,
    compute_growth,
    filter_topics,
    growth_ratio,
    read_growth,
    smoothed_growth_ratio,
    topic_series,
    write_growth,
)

YEARS = range(2013, 2019)


def series_of(counts, topic_id=0):
    return TopicSeries(topic_id=topic_id, counts=dict(zip(YEARS, counts)))


@pytest.fixture
def growing_topic():
    return series_of([10, 12, 14, 18, 20, 22])


def test_growth_ratio():
    assert growth_ratio(series_of([0, 0, 10, 0, 0, 25]), 2015, 3) == Fraction(5, 2)


def test_growth_ratio_constant():
    assert growth_ratio(series_of([12] * 6), 2015, 3) == 1


def test_growth_ratio_without_base():
    with pytest.raises(UndefinedRatioError):
        growth_ratio(series_of([5, 5, 0, 5, 5, 5]), 2015, 3)


def test_smoothed_growth_ratio(growing_topic):
    record = smoothed_growth_ratio(growing_topic, 2015, 3)

    assert (record.mean_base, record.mean_later) == (12, 20)
    assert record.ratio == Fraction(5, 3)
    assert record.ratio_value == pytest.approx(1.6667, abs=1e-4)
    assert record.missing_years == 0


def test_smoothed_growth_ratio_constant():
    assert smoothed_growth_ratio(series_of([7] * 6), 2015, 3).ratio == 1


def test_smoothed_growth_ratio_without_base():
    with pytest.raises(UndefinedRatioError):
        smoothed_growth_ratio(series_of([0, 0, 0, 4, 4, 4]), 2015, 3)


def test_smoothed_growth_ratio_missing_years(caplog):
    series = TopicSeries(topic_id=3, counts={2013: 6, 2014: 6, 2016: 9, 2017: 9, 2018: 9})

    record = smoothed_growth_ratio(series, 2015, 3)

    assert record.base_total == 12
    assert record.missing_years == 1
    assert "no count for 2015" in caplog.text


def test_smoothed_growth_ratio_scale_equivariance():
    rng = np.random.default_rng(3)
    for _ in range(100):
        counts = rng.integers(1, 50, 6).tolist()
        scale = int(rng.integers(2, 10))

        plain = smoothed_growth_ratio(series_of(counts), 2015, 3)
        scaled = smoothed_growth_ratio(series_of([count * scale for count in counts]), 2015, 3)

        assert plain.ratio == scaled.ratio


def test_filter_topics_threshold_is_strict():
    records = [
        GrowthRecord(topic_id=0, base_total=15, later_total=30),
        GrowthRecord(topic_id=1, base_total=16, later_total=16),
        GrowthRecord(topic_id=2, base_total=30, later_total=15),
    ]

    assert [record.eligible for record in filter_topics(records)] == [False, True, False]


def test_window_sum_and_mean_filters_agree():
    rng = np.random.default_rng(2015)
    for _ in range(1000):
        counts = rng.integers(0, 12, 6).tolist()
        base, later = sum(counts[:3]), sum(counts[3:])
        record = GrowthRecord(topic_id=0, base_total=base, later_total=later)

        [filtered] = filter_topics([record], min_mean=5)

        assert filtered.eligible == (base > 15 and later > 15)


def test_topic_series_counts_every_year(make_publication):
    pubs = [make_publication(1, 2013), make_publication(2, 2013), make_publication(3, 2016), make_publication(4, 2020)]

    series = topic_series({1: 0, 2: 0, 3: 0, 4: 0}, pubs, YEARS)

    assert series[0].counts == {2013: 2, 2014: 0, 2015: 0, 2016: 1, 2017: 0, 2018: 0}


def test_topic_series_doc_types(make_publication):
    pubs = [make_publication(1, 2015, "article"), make_publication(2, 2015, "other")]

    series = topic_series({1: 0, 2: 0}, pubs, YEARS, doc_types=frozenset({"article"}))

    assert series[0].counts[2015] == 1


def test_compute_growth(make_publication):
    pubs = []
    assignment = {}
    # topic 0 grows from 6 to 10 a year, topic 1 is an orphan class, topic 2 starts in 2016
    plan = {0: [6, 6, 6, 10, 10, 10], 1: [6, 6, 6, 6, 6, 6], 2: [0, 0, 0, 8, 8, 8]}
    for topic, counts in plan.items():
        for year, count in zip(YEARS, counts):
            for _ in range(count):
                pub_id = len(pubs) + 1
                pubs.append(make_publication(pub_id, year))
                assignment[pub_id] = topic
    warnings = Counter()

    records = compute_growth(assignment, pubs, GrowthConfig(), excluded_topics=frozenset({1}), warnings=warnings)

    by_topic = {record.topic_id: record for record in records}
    assert by_topic[0].ratio == Fraction(5, 3)
    assert by_topic[0].eligible
    assert by_topic[1].ratio == 1
    assert not by_topic[1].eligible
    assert by_topic[2].ratio is None
    assert by_topic[2].later_total == 24
    assert not by_topic[2].eligible
    assert warnings["topics_without_base"] == 1


@pytest.mark.parametrize("kwargs", [{"dt": 0}, {"window": 0}, {"min_mean": -1}])
def test_growth_config_validation(kwargs):
    with pytest.raises(ConfigError):
        GrowthConfig(**kwargs)


def test_growth_round_trip(tmp_path):
    records = [
        GrowthRecord(topic_id=0, base_total=36, later_total=60, eligible=True),
        GrowthRecord(topic_id=1, base_total=0, later_total=24),
    ]

    write_growth(records, tmp_path / "growth.tsv")
    loaded = read_growth(tmp_path / "growth.tsv")

    assert loaded == records
    assert (tmp_path / "growth.tsv").read_text().splitlines()[2].split("\t")[3] == ""
