"""
Class labels from title terms ranked by their term-frequency-to-specificity
score.
"""
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import pandas as pd
from nltk.stem.porter import PorterStemmer

from .cluster import Partition
from .corpus import Publication, read_table, tokenize
from .exceptions import ConfigError

logger = logging.getLogger(__name__)

NOUN = "NOUN"
ADJ = "ADJ"
OTHER = "OTHER"

# Function words and frequent non-nominal title words. Tokens missing from the
# lexicon are treated as nouns.
DEFAULT_LEXICON = {
    **{
        word: OTHER
        for word in (
            "a an the of in on for to from with without by at as and or but not nor via into onto over under "
            "between among within across through during after before about against versus vs is are was were be "
            "been being do does did can could may might should would will its their our this that these those "
            "using based toward towards than then how what when where which who why whether new"
        ).split()
    },
    **{
        word: ADJ
        for word in (
            "cognitive clinical social economic political chemical physical biological molecular cellular "
            "genetic environmental global local higher high low large small public human novel early late "
            "international national regional urban rural digital mechanical electrical electronic computational "
            "theoretical experimental empirical systematic comparative quantitative qualitative structural "
            "functional thermal optical magnetic infectious chronic acute medical educational"
        ).split()
    },
}

TERM_FIELDS = ("title", "keywords")


@dataclass(frozen=True)
class LabelConfig:
    alpha: float = 0.67
    top_k: int = 3
    pos_lexicon: Mapping[str, str] = field(default_factory=lambda: dict(DEFAULT_LEXICON))
    fields: Tuple[str, ...] = ("title",)
    # per-level alpha overrides, keyed by level name
    level_alpha: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        errors = {}
        if not 0 <= self.alpha <= 1 or any(not 0 <= value <= 1 for value in self.level_alpha.values()):
            errors["alpha"] = "alpha must lie in [0, 1]"
        if self.top_k < 1:
            errors["top_k"] = "top_k must be positive"
        unknown = set(self.fields) - set(TERM_FIELDS)
        if unknown:
            errors["fields"] = f"unknown term fields {sorted(unknown)}"
        if errors:
            raise ConfigError(errors)

    def alpha_for(self, level: Optional[str]) -> float:
        return self.level_alpha.get(level, self.alpha)


@dataclass(frozen=True)
class TermStats:
    term: str
    class_freq: int
    corpus_freq: int
    specificity: float
    score: float


def extract_terms(title_tokens: Sequence[str], lexicon: Optional[Mapping[str, str]] = None) -> Counter:
    """
    Every run of adjectives and nouns contributes each of its contiguous
    sub-sequences that ends with a noun.
    """
    lexicon = DEFAULT_LEXICON if lexicon is None else lexicon
    terms = Counter()
    run: List[Tuple[str, str]] = []
    for token in list(title_tokens) + [None]:
        tag = lexicon.get(token, NOUN) if token is not None else OTHER
        if tag in (NOUN, ADJ):
            run.append((token, tag))
            continue
        for end, (_, end_tag) in enumerate(run):
            if end_tag != NOUN:
                continue
            for start in range(end + 1):
                terms[" ".join(word for word, _ in run[start : end + 1])] += 1
        run = []
    return terms


def publication_terms(pub: Publication, config: LabelConfig) -> Counter:
    terms = Counter()
    if "title" in config.fields:
        terms.update(extract_terms(pub.title_tokens, config.pos_lexicon))
    if "keywords" in config.fields:
        for keyword in pub.keywords:
            terms.update(extract_terms(tokenize(keyword), config.pos_lexicon))
    return terms


def class_term_counts(
    partition: Partition, pubs: Iterable[Publication], config: LabelConfig
) -> Dict[int, Counter]:
    assignment = partition.assignment
    counts: Dict[int, Counter] = {}
    for pub in pubs:
        class_id = assignment.get(pub.pub_id)
        if class_id is None:
            continue
        counts.setdefault(class_id, Counter()).update(publication_terms(pub, config))
    return counts


def tfs_score(class_freq: int, specificity: float, alpha: float) -> float:
    return class_freq**alpha * specificity ** (1 - alpha)


def tfs_rank(
    term_counts: Mapping[int, Counter], config: LabelConfig, level: Optional[str] = None
) -> Dict[int, List[TermStats]]:
    """
    Rank every class's terms by ``class_freq^α · specificity^(1−α)`` where
    specificity is the share of the term's occurrences that fall in the class.
    Ties are broken alphabetically.
    """
    alpha = config.alpha_for(level)
    corpus = Counter()
    for counts in term_counts.values():
        corpus.update(counts)

    ranked = {}
    for class_id, counts in term_counts.items():
        stats = []
        for term, class_freq in counts.items():
            specificity = class_freq / corpus[term]
            stats.append(
                TermStats(
                    term=term,
                    class_freq=class_freq,
                    corpus_freq=corpus[term],
                    specificity=specificity,
                    score=tfs_score(class_freq, specificity, alpha),
                )
            )
        stats.sort(key=lambda item: (-item.score, item.term))
        ranked[class_id] = stats
    return ranked


_stemmer = PorterStemmer()


def normalized_term(term: str) -> str:
    return " ".join(_stemmer.stem(word) for word in term.split())


def label_class(class_id: int, ranked: Sequence[TermStats], config: LabelConfig) -> str:
    """
    Join the ``top_k`` best ranked terms with "; ", skipping terms that
    normalize to one already chosen (plural/singular variants).
    """
    chosen = []
    seen = set()
    for stats in ranked:
        key = normalized_term(stats.term)
        if key in seen:
            continue
        seen.add(key)
        chosen.append(stats.term)
        if len(chosen) == config.top_k:
            break
    if not chosen:
        return f"unlabeled-{class_id}"
    return "; ".join(chosen)


def label_partition(
    partition: Partition, pubs: Iterable[Publication], config: LabelConfig, level: Optional[str] = None
) -> Dict[int, str]:
    ranked = tfs_rank(class_term_counts(partition, pubs, config), config, level=level)
    labels = {
        class_id: label_class(class_id, ranked.get(class_id, []), config) for class_id in range(partition.n_classes)
    }
    unlabeled = sum(1 for label in labels.values() if label.startswith("unlabeled-"))
    if unlabeled:
        logger.warning("%d %s class(es) have no terms to label them with", unlabeled, level or "")
    return labels


LABEL_COLUMNS = ["class_id", "level", "label"]


def write_labels(labels: Mapping[str, Mapping[int, str]], path):
    rows = [
        (class_id, level, label)
        for level, level_labels in labels.items()
        for class_id, label in sorted(level_labels.items())
    ]
    pd.DataFrame(rows, columns=LABEL_COLUMNS).to_csv(path, sep="\t", index=False, lineterminator="\n")


def read_labels(path) -> Dict[str, Dict[int, str]]:
    frame = read_table(
        path, LABEL_COLUMNS, dtype={"class_id": int, "level": str, "label": str}, keep_default_na=False
    )
    frame = frame[LABEL_COLUMNS]
    labels: Dict[str, Dict[int, str]] = {}
    for class_id, level, label in frame.itertuples(index=False):
        labels.setdefault(level, {})[class_id] = label
    return labels
