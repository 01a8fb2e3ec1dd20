"""
Synthetic corpora with planted topics, growth schedules and citation-generating
coefficients.

Every topic belongs to a discipline and publishes a fixed number of
publications per year. Each publication's expected citation count is
``exp(β₀ + β_growth·r + β_authors·a + β_refs·k + β_jif·j)`` with ``r`` its
topic's planted growth ratio; the realized count is negative binomial and every
citation is placed on a concrete citing publication of the same or a later
year, preferably from the same topic.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from .corpus import ARTICLE, OTHER, REVIEW, CitationEdge, Publication, tokenize, write_citations, write_publications
from .exceptions import ConfigError, ScheduleError
from .hurdle_stats import DEFAULT_HURDLE, RegressionRow
from .label import DEFAULT_LEXICON
from .renderers import read_json, write_json

logger = logging.getLogger(__name__)

_CONSONANTS = "bdfgklmnprstvz"
_VOWELS = "aeiou"


@dataclass(frozen=True)
class SynthConfig:
    n_topics: int = 12
    topics_per_discipline: int = 3
    years: Tuple[int, int] = (2013, 2021)
    t: int = 2015
    dt: int = 3
    window: int = 3
    base_count: int = 60
    # per-topic target growth ratios; empty spreads them evenly over ratio_range
    growth_ratios: Tuple[float, ...] = ()
    ratio_range: Tuple[float, float] = (0.5, 2.0)
    # explicit topic -> {year: count} schedules, overriding the target ratio
    schedules: Mapping[int, Mapping[int, int]] = field(default_factory=dict)
    p_within: float = 0.95
    p_within_discipline: float = 0.8
    # (intercept, growth_ratio, num_authors, num_references, jif)
    beta: Tuple[float, ...] = (0.5, 0.5, 0.05, 0.01, 0.15)
    dispersion: float = 2.0
    author_p: float = 0.3
    ref_mean: float = 40.0
    ref_dispersion: float = 5.0
    n_journals: int = 50
    jif_mu: float = 0.8
    jif_sigma: float = 0.6
    p_review: float = 0.1
    p_other: float = 0.05
    n_shared_terms: int = 40
    seed: int = 0

    def __post_init__(self):
        errors = {}
        if self.n_topics < 0:
            errors["n_topics"] = "number of topics must not be negative"
        if self.topics_per_discipline < 1:
            errors["topics_per_discipline"] = "a discipline needs at least one topic"
        if self.years[0] > self.years[1]:
            errors["years"] = "first year is after last year"
        for name in ("p_within", "p_within_discipline", "author_p", "p_review", "p_other"):
            if not 0 <= getattr(self, name) <= 1:
                errors[name] = "probability must lie in [0, 1]"
        if self.p_review + self.p_other > 1:
            errors["p_other"] = "document type probabilities exceed 1"
        if self.author_p == 0:
            errors["author_p"] = "author probability must be positive"
        if len(self.beta) != 5:
            errors["beta"] = "five coefficients are required"
        if self.dispersion <= 0 or self.ref_dispersion <= 0:
            errors["dispersion"] = "dispersion must be positive"
        if self.growth_ratios and len(self.growth_ratios) != self.n_topics:
            errors["growth_ratios"] = "one growth ratio per topic is required"
        if self.base_count < 0 or self.n_journals < 1 or self.n_shared_terms < 2:
            errors["base_count"] = "counts must be positive"
        if errors:
            raise ConfigError(errors)

    @property
    def n_disciplines(self) -> int:
        return math.ceil(self.n_topics / self.topics_per_discipline)

    def target_ratio(self, topic: int) -> float:
        if self.growth_ratios:
            return self.growth_ratios[topic]
        if self.n_topics == 1:
            return self.ratio_range[0]
        low, high = self.ratio_range
        return low + (high - low) * topic / (self.n_topics - 1)


@dataclass(frozen=True)
class PlantedTruth:
    topics: Dict[int, int]
    disciplines: Dict[int, int]
    schedules: Dict[int, Dict[int, int]]
    growth_ratios: Dict[int, Optional[Fraction]]
    dominant_terms: Dict[int, str]
    beta: Tuple[float, ...]
    dispersion: float
    seed: int
    capped_citations: int = 0

    def to_data(self) -> Dict:
        return {
            "seed": self.seed,
            "beta": list(self.beta),
            "dispersion": self.dispersion,
            "capped_citations": self.capped_citations,
            "topics": {str(pub): topic for pub, topic in self.topics.items()},
            "disciplines": {str(topic): discipline for topic, discipline in self.disciplines.items()},
            "schedules": {
                str(topic): {str(year): count for year, count in schedule.items()}
                for topic, schedule in self.schedules.items()
            },
            "growth_ratios": {
                str(topic): None if ratio is None else str(ratio) for topic, ratio in self.growth_ratios.items()
            },
            "dominant_terms": {str(topic): term for topic, term in self.dominant_terms.items()},
        }


@dataclass(frozen=True)
class SyntheticCorpus:
    publications: List[Publication]
    citations: List[CitationEdge]
    truth: PlantedTruth


def planned_schedule(base_count: int, ratio: float, years: Tuple[int, int], t: int, dt: int, window: int):
    """
    Yearly counts whose smoothed growth ratio at ``t`` over ``dt`` years is
    ``round(window·base·ratio) / (window·base)``: ``base_count`` every year up
    to ``t``, the later window's total spread as evenly as possible over its
    years after ``t``, and the last count repeated afterwards.
    """
    if base_count < 0 or ratio < 0:
        raise ScheduleError(f"negative base count {base_count} or ratio {ratio}")
    later_years = [year for year in range(t + dt - window + 1, t + dt + 1) if year > t]
    later_total = round(window * base_count * ratio) - base_count * (window - len(later_years))
    if later_total < 0:
        overlap = window - len(later_years)
        raise ScheduleError(f"ratio {ratio} is unreachable when the windows overlap by {overlap} years")

    schedule = {}
    per_year, remainder = divmod(later_total, len(later_years)) if later_years else (0, 0)
    for year in range(years[0], years[1] + 1):
        if year <= t:
            schedule[year] = base_count
        elif year in later_years:
            position = later_years.index(year)
            schedule[year] = per_year + (1 if position >= len(later_years) - remainder else 0)
        elif year < later_years[0]:
            schedule[year] = base_count
        else:
            schedule[year] = schedule.get(year - 1, per_year)
    return schedule


def topic_schedules(config: SynthConfig) -> Dict[int, Dict[int, int]]:
    schedules = {}
    for topic in range(config.n_topics):
        if topic in config.schedules:
            schedule = {int(year): int(count) for year, count in config.schedules[topic].items()}
            negative = {year: count for year, count in schedule.items() if count < 0}
            if negative:
                raise ScheduleError(f"topic {topic} has negative counts {negative}")
        else:
            schedule = planned_schedule(
                config.base_count, config.target_ratio(topic), config.years, config.t, config.dt, config.window
            )
        schedules[topic] = schedule
    return schedules


def schedule_ratio(schedule: Mapping[int, int], t: int, dt: int, window: int) -> Optional[Fraction]:
    base = sum(schedule.get(year, 0) for year in range(t - window + 1, t + 1))
    later = sum(schedule.get(year, 0) for year in range(t + dt - window + 1, t + dt + 1))
    return Fraction(later, base) if base else None


def pseudo_words(n: int, rng: np.random.Generator, syllables: int = 3) -> List[str]:
    """
    Distinct pronounceable nonsense words that the tagging lexicon treats as
    nouns.
    """
    words: List[str] = []
    seen = set(DEFAULT_LEXICON)
    while len(words) < n:
        consonants = rng.integers(len(_CONSONANTS), size=syllables)
        vowels = rng.integers(len(_VOWELS), size=syllables)
        word = "".join(_CONSONANTS[c] + _VOWELS[v] for c, v in zip(consonants, vowels))
        if word not in seen:
            seen.add(word)
            words.append(word)
    return words


def _choose(rng: np.random.Generator, pool: np.ndarray, k: int) -> Tuple[np.ndarray, int]:
    if k <= 0 or not len(pool):
        return pool[:0], max(k, 0)
    taken = min(k, len(pool))
    return rng.choice(pool, size=taken, replace=False), k - taken


def generate_corpus(config: SynthConfig) -> SyntheticCorpus:
    rng = np.random.default_rng(config.seed)
    schedules = topic_schedules(config)
    disciplines = {topic: topic // config.topics_per_discipline for topic in range(config.n_topics)}
    words = pseudo_words(config.n_topics + config.n_disciplines + config.n_shared_terms, rng)
    dominant = dict(enumerate(words[: config.n_topics]))
    discipline_terms = words[config.n_topics : config.n_topics + config.n_disciplines]
    shared_terms = words[config.n_topics + config.n_disciplines :]
    journal_jif = np.round(rng.lognormal(config.jif_mu, config.jif_sigma, config.n_journals), 3)
    ratios = {
        topic: schedule_ratio(schedule, config.t, config.dt, config.window) for topic, schedule in schedules.items()
    }

    publications = []
    topic_of = []
    doc_types = np.array([ARTICLE, REVIEW, OTHER])
    doc_probabilities = [1 - config.p_review - config.p_other, config.p_review, config.p_other]
    ref_p = config.ref_dispersion / (config.ref_dispersion + config.ref_mean)
    for topic in range(config.n_topics):
        for year in range(config.years[0], config.years[1] + 1):
            k = schedules[topic].get(year, 0)
            if not k:
                continue
            authors = rng.geometric(config.author_p, k)
            references = rng.negative_binomial(config.ref_dispersion, ref_p, k)
            journals = rng.integers(config.n_journals, size=k)
            kinds = rng.choice(3, size=k, p=doc_probabilities)
            shared = rng.integers(len(shared_terms), size=(k, 2))
            for i in range(k):
                title = (
                    f"{dominant[topic]} of {discipline_terms[disciplines[topic]]} "
                    f"with {shared_terms[shared[i, 0]]} and {shared_terms[shared[i, 1]]}"
                )
                publications.append(
                    Publication(
                        pub_id=len(publications) + 1,
                        year=year,
                        doc_type=str(doc_types[kinds[i]]),
                        journal_id=int(journals[i]) + 1,
                        jif=float(journal_jif[journals[i]]),
                        n_authors=int(authors[i]),
                        n_references=int(references[i]),
                        title_tokens=tokenize(title),
                    )
                )
                topic_of.append(topic)

    topic_of = np.array(topic_of, dtype=np.int64)
    citations, capped = _place_citations(publications, topic_of, disciplines, ratios, config, rng)
    if capped:
        logger.warning("%d planted citation(s) had no citing publication left to come from", capped)
    logger.info("Generated %d publications and %d citations", len(publications), len(citations))

    truth = PlantedTruth(
        topics={pub.pub_id: topic for pub, topic in zip(publications, topic_of.tolist())},
        disciplines=disciplines,
        schedules=schedules,
        growth_ratios=ratios,
        dominant_terms=dominant,
        beta=tuple(config.beta),
        dispersion=config.dispersion,
        seed=config.seed,
        capped_citations=capped,
    )
    return SyntheticCorpus(publications=publications, citations=citations, truth=truth)


def _place_citations(publications, topic_of, disciplines, ratios, config, rng):
    n = len(publications)
    if not n:
        return [], 0
    years = np.array([pub.year for pub in publications], dtype=np.int64)
    discipline_of = np.array([disciplines[topic] for topic in topic_of.tolist()], dtype=np.int64)
    ratio_of = np.array([float(ratios[topic] or 0) for topic in topic_of.tolist()])
    covariates = np.column_stack(
        [
            np.ones(n),
            ratio_of,
            [pub.n_authors for pub in publications],
            [pub.n_references for pub in publications],
            [pub.jif for pub in publications],
        ]
    )
    expected = np.exp(covariates @ np.asarray(config.beta, dtype=float))
    counts = rng.negative_binomial(config.dispersion, config.dispersion / (config.dispersion + expected))

    index = np.arange(n)
    citations = []
    capped = 0
    for cited in range(n):
        later = years > years[cited]
        same_topic = later & (topic_of == topic_of[cited])
        same_discipline = later & (discipline_of == discipline_of[cited]) & ~same_topic
        elsewhere = later & (discipline_of != discipline_of[cited])

        k = int(counts[cited])
        k_topic = rng.binomial(k, config.p_within)
        k_discipline = rng.binomial(k - k_topic, config.p_within_discipline)
        chosen = []
        for pool, wanted in (
            (same_topic, k_topic),
            (same_discipline, k_discipline),
            (elsewhere, k - k_topic - k_discipline),
        ):
            picked, short = _choose(rng, index[pool], wanted)
            chosen.extend(picked.tolist())
            capped += short
        for citing in sorted(chosen):
            citations.append(
                CitationEdge(
                    citing=publications[citing].pub_id,
                    cited=publications[cited].pub_id,
                    citing_year=publications[citing].year,
                )
            )
    citations.sort(key=lambda edge: (edge.citing, edge.cited))
    return citations, capped


def write_corpus(corpus: SyntheticCorpus, directory) -> Dict[str, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "publications": directory / "publications.tsv",
        "citations": directory / "citations.tsv",
        "truth": directory / "truth.json",
    }
    write_publications(corpus.publications, paths["publications"])
    write_citations(corpus.citations, paths["citations"])
    write_json(paths["truth"], corpus.truth.to_data())
    return paths


def read_truth_topics(path) -> Dict[int, int]:
    return {int(pub): int(topic) for pub, topic in read_json(path)["topics"].items()}


def generate_hurdle_rows(
    n: int,
    beta: Tuple[float, ...],
    seed: int = 0,
    hurdle: int = DEFAULT_HURDLE,
    ratio_range: Tuple[float, float] = (0.5, 2.0),
) -> List[RegressionRow]:
    """
    Regression rows whose chance of clearing the hurdle follows a logit model
    with coefficients ``beta`` (intercept first). Counts below the hurdle are
    uniform over ``0..hurdle``; counts above it are ``hurdle + 1`` plus a
    geometric excess.
    """
    rng = np.random.default_rng(seed)
    growth = rng.uniform(*ratio_range, n)
    authors = rng.geometric(0.3, n)
    references = rng.negative_binomial(5, 5 / 45, n)
    jif = np.round(rng.lognormal(0.8, 0.6, n), 3)
    X = np.column_stack([np.ones(n), growth, authors, references, jif])
    above = rng.random(n) < 1 / (1 + np.exp(-X @ np.asarray(beta, dtype=float)))
    citations = np.where(above, hurdle + rng.geometric(0.1, n), rng.integers(0, hurdle + 1, n))
    return [
        RegressionRow(
            citations=int(citations[i]),
            growth_ratio=float(growth[i]),
            num_authors=int(authors[i]),
            num_references=int(references[i]),
            jif=float(jif[i]),
            pub_id=i + 1,
        )
        for i in range(n)
    ]
