"""
Publication and citation tables: loading, validation, filtering and citation
counting.

Both tables are tab-separated UTF-8 files with a header row. Publications are
validated row by row through :class:`PublicationSerializer`; citation edges are
validated column-wise since extracts routinely hold millions of rows.
"""
import csv
import datetime
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from rest_framework import serializers

import numpy as np
import pandas as pd

from .exceptions import ConfigError, CorpusError

logger = logging.getLogger(__name__)

ARTICLE = "article"
REVIEW = "review"
OTHER = "other"
DOC_TYPES = (ARTICLE, REVIEW, OTHER)

PUBLICATION_COLUMNS = (
    "pub_id",
    "year",
    "doc_type",
    "journal_id",
    "jif",
    "n_authors",
    "n_references",
    "title",
)
OPTIONAL_PUBLICATION_COLUMNS = ("keywords",)
CITATION_COLUMNS = ("citing", "cited", "citing_year")
OPTIONAL_CITATION_COLUMNS = ("citing_date",)

# field name -> column name
DEFAULT_SCHEMA = {name: name for name in PUBLICATION_COLUMNS + OPTIONAL_PUBLICATION_COLUMNS}

TOKEN_RE = re.compile(r"[^\W_]+")


def tokenize(text: str) -> Tuple[str, ...]:
    return tuple(TOKEN_RE.findall(text.lower()))


@dataclass(frozen=True)
class Publication:
    pub_id: int
    year: int
    doc_type: str
    journal_id: int
    jif: float
    n_authors: int
    n_references: int
    title_tokens: Tuple[str, ...] = ()
    keywords: Tuple[str, ...] = ()
    citation_count: int = 0


@dataclass(frozen=True)
class CitationEdge:
    citing: int
    cited: int
    citing_year: int
    citing_date: Optional[datetime.date] = None


@dataclass(frozen=True)
class CorpusFilter:
    focal_year: Optional[int] = 2015
    doc_types: FrozenSet[str] = frozenset({ARTICLE, REVIEW})
    window: Tuple[int, int] = (2015, 2021)
    cutoff_date: Optional[datetime.date] = None

    def __post_init__(self):
        errors = {}
        start, end = self.window
        if start > end:
            errors["window"] = f"window start {start} is after window end {end}"
        elif self.focal_year is not None and not start <= self.focal_year <= end:
            errors["focal_year"] = f"focal year {self.focal_year} lies outside the window {start}-{end}"
        unknown = set(self.doc_types) - set(DOC_TYPES)
        if unknown:
            errors["doc_types"] = f"unknown document types {sorted(unknown)}"
        if errors:
            raise ConfigError(errors)


class TokensField(serializers.Field):
    """
    A free-text column stored as its normalized token sequence.
    """

    def to_internal_value(self, data):
        if not isinstance(data, str):
            self.fail("invalid")
        return tokenize(data)

    def to_representation(self, value):
        return " ".join(value)

    default_error_messages = {"invalid": "Expected text."}


class PhrasesField(serializers.Field):
    """
    Semicolon separated phrases, each normalized to space-joined tokens.
    """

    default_error_messages = {"invalid": "Expected text."}

    def to_internal_value(self, data):
        if not isinstance(data, str):
            self.fail("invalid")
        phrases = (" ".join(tokenize(part)) for part in data.split(";"))
        return tuple(phrase for phrase in phrases if phrase)

    def to_representation(self, value):
        return "; ".join(value)


class PublicationSerializer(serializers.Serializer):
    pub_id = serializers.IntegerField()
    year = serializers.IntegerField(min_value=1000, max_value=9999)
    doc_type = serializers.ChoiceField(choices=DOC_TYPES)
    journal_id = serializers.IntegerField()
    jif = serializers.FloatField(min_value=0)
    n_authors = serializers.IntegerField(min_value=1)
    n_references = serializers.IntegerField(min_value=0)
    title = TokensField(source="title_tokens", default=())
    keywords = PhrasesField(default=())

    def validate_jif(self, value):
        if not math.isfinite(value):
            raise serializers.ValidationError("Impact factor must be finite.")
        return value

    def create(self, validated_data):
        return Publication(**validated_data)


PARSER_LINE_RE = re.compile(r"line (\d+)")


def _undecodable_line(path: Path) -> Optional[int]:
    with path.open("rb") as stream:
        for number, raw in enumerate(stream, start=1):
            try:
                raw.decode("utf-8")
            except UnicodeDecodeError:
                return number
    return None


def read_table(path, required: Sequence[str] = (), **options) -> pd.DataFrame:
    """
    Read a tab-separated UTF-8 table with a header row.

    Unreadable files, malformed rows and missing columns are raised as
    :class:`CorpusError` carrying the offending line where one is known.
    """
    path = Path(path)
    if not path.is_file():
        raise CorpusError(f"{path}: no such file")
    try:
        frame = pd.read_csv(path, sep="\t", encoding="utf-8", **options)
    except pd.errors.EmptyDataError:
        raise CorpusError(f"{path}: missing header row")
    except pd.errors.ParserError as exc:
        match = PARSER_LINE_RE.search(str(exc))
        line = int(match.group(1)) if match else None
        raise CorpusError(f"{path}: malformed row", [(line, "row", str(exc).split(". ")[-1])])
    except UnicodeDecodeError as exc:
        raise CorpusError(f"{path}: not valid UTF-8", [(_undecodable_line(path), "row", exc.reason)])
    except ValueError as exc:
        raise CorpusError(f"{path}: {exc}")
    missing = [column for column in required if column not in frame.columns]
    if missing:
        raise CorpusError(
            f"{path}: missing mandatory column(s)",
            [(None, column, "column not found in header") for column in missing],
        )
    return frame


def _read_table(path, required: Sequence[str]) -> pd.DataFrame:
    return read_table(path, required, dtype=str, keep_default_na=False, quoting=csv.QUOTE_NONE)


def load_publications(path, schema: Optional[Dict[str, str]] = None) -> List[Publication]:
    """
    Load and validate ``publications.tsv``.

    ``schema`` maps publication field names to column names for files that do
    not use the default header. Every malformed row is reported, with its line
    number, in a single :class:`CorpusError`.
    """
    schema = {**DEFAULT_SCHEMA, **(schema or {})}
    required = [schema[name] for name in PUBLICATION_COLUMNS]
    frame = _read_table(path, required)
    frame = frame.rename(columns={column: name for name, column in schema.items()})
    fields = [name for name in PUBLICATION_COLUMNS + OPTIONAL_PUBLICATION_COLUMNS if name in frame.columns]

    publications = []
    problems = []
    seen = set()
    for offset, record in enumerate(frame[fields].to_dict(orient="records")):
        line = offset + 2
        serializer = PublicationSerializer(data=record)
        if not serializer.is_valid():
            for field_name, messages in serializer.errors.items():
                problems.extend((line, field_name, str(message)) for message in messages)
            continue
        publication = serializer.save()
        if publication.pub_id in seen:
            problems.append((line, "pub_id", f"duplicate publication id {publication.pub_id}"))
            continue
        seen.add(publication.pub_id)
        publications.append(publication)

    if problems:
        raise CorpusError(f"{path}: {len(problems)} invalid value(s)", problems)
    publications.sort(key=lambda pub: pub.pub_id)
    logger.info("Loaded %d publications from %s", len(publications), path)
    return publications


def load_citations(path, warnings: Optional[Counter] = None) -> List[CitationEdge]:
    """
    Load ``citations.tsv``.

    Duplicate ``(citing, cited)`` rows collapse to one edge and self-citations
    are dropped; both are counted in ``warnings``.
    """
    frame = _read_table(path, CITATION_COLUMNS)
    numeric = {column: pd.to_numeric(frame[column], errors="coerce") for column in CITATION_COLUMNS}

    problems = []
    for column, values in numeric.items():
        bad = values.isna() | (values % 1 != 0)
        for offset in np.flatnonzero(bad.to_numpy()):
            problems.append((int(offset) + 2, column, f"invalid integer {frame[column].iloc[offset]!r}"))

    dates = [None] * len(frame)
    if "citing_date" in frame.columns:
        for offset, raw in enumerate(frame["citing_date"]):
            if not raw:
                continue
            try:
                dates[offset] = datetime.date.fromisoformat(raw)
            except ValueError:
                problems.append((offset + 2, "citing_date", f"invalid date {raw!r}"))

    if problems:
        problems.sort()
        raise CorpusError(f"{path}: {len(problems)} invalid value(s)", problems)

    citing = numeric["citing"].to_numpy(dtype=np.int64)
    cited = numeric["cited"].to_numpy(dtype=np.int64)
    years = numeric["citing_year"].to_numpy(dtype=np.int64)

    edges = {}
    n_self = n_duplicate = 0
    for a, b, year, date in zip(citing.tolist(), cited.tolist(), years.tolist(), dates):
        if a == b:
            n_self += 1
            continue
        if (a, b) in edges:
            n_duplicate += 1
            continue
        edges[(a, b)] = CitationEdge(citing=a, cited=b, citing_year=year, citing_date=date)

    if n_self:
        logger.warning("Dropped %d self-citation row(s) from %s", n_self, path)
    if n_duplicate:
        logger.warning("Collapsed %d duplicate citation row(s) from %s", n_duplicate, path)
    if warnings is not None:
        warnings["self_citations"] += n_self
        warnings["duplicate_citations"] += n_duplicate

    logger.info("Loaded %d citation edges from %s", len(edges), path)
    return [edges[key] for key in sorted(edges)]


def filter_corpus(pubs: Iterable[Publication], corpus_filter: CorpusFilter) -> List[Publication]:
    return [
        pub
        for pub in pubs
        if (corpus_filter.focal_year is None or pub.year == corpus_filter.focal_year)
        and pub.doc_type in corpus_filter.doc_types
    ]


def _in_window(edge: CitationEdge, window: Tuple[int, int], cutoff_date: Optional[datetime.date]) -> bool:
    start, end = window
    if not start <= edge.citing_year <= end:
        return False
    if cutoff_date is not None and edge.citing_date is not None and edge.citing_date > cutoff_date:
        return False
    return True


def count_citations(
    pubs: Iterable[Publication],
    edges: Iterable[CitationEdge],
    window: Tuple[int, int],
    cutoff_date: Optional[datetime.date] = None,
    warnings: Optional[Counter] = None,
) -> List[Publication]:
    """
    Attach to every publication the number of citations received from citing
    publications whose year (and, when known, date) falls inside the window.
    """
    pubs = list(pubs)
    known = {pub.pub_id for pub in pubs}
    counts = Counter()
    dangling = 0
    for edge in edges:
        if not _in_window(edge, window, cutoff_date):
            continue
        if edge.cited not in known:
            dangling += 1
            continue
        counts[edge.cited] += 1

    if dangling:
        logger.warning("Ignored %d in-window citation(s) to unknown publications", dangling)
    if warnings is not None:
        warnings["dangling_citations"] += dangling
    return [replace(pub, citation_count=counts.get(pub.pub_id, 0)) for pub in pubs]


def write_publications(pubs: Sequence[Publication], path, schema: Optional[Dict[str, str]] = None):
    schema = {**DEFAULT_SCHEMA, **(schema or {})}
    fields = list(PUBLICATION_COLUMNS)
    if any(pub.keywords for pub in pubs):
        fields.append("keywords")
    data = PublicationSerializer(pubs, many=True).data
    frame = pd.DataFrame(list(data), columns=list(PublicationSerializer().fields))
    frame = frame[fields].rename(columns=schema)
    frame.to_csv(path, sep="\t", index=False, quoting=csv.QUOTE_NONE, encoding="utf-8", lineterminator="\n")


def write_citations(edges: Sequence[CitationEdge], path):
    rows = [(edge.citing, edge.cited, edge.citing_year) for edge in edges]
    frame = pd.DataFrame(rows, columns=list(CITATION_COLUMNS))
    if any(edge.citing_date is not None for edge in edges):
        frame["citing_date"] = [edge.citing_date.isoformat() if edge.citing_date else "" for edge in edges]
    frame.to_csv(path, sep="\t", index=False, encoding="utf-8", lineterminator="\n")
