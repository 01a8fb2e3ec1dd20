import datetime
from collections import Counter

import pytest

from topic_growth.corpus import (
    CitationEdge,
    CorpusFilter,
    count_citations,
    filter_corpus,
    load_citations,
    load_publications,
    write_citations,
    write_publications,
)
from topic_growth.exceptions import ConfigError, CorpusError

from .conftest import CITATION_HEADER, PUBLICATION_HEADER

ROWS = [
    (1, 2015, "article", 10, 2.5, 3, 40, "Cognitive neuroscience of memory"),
    (2, 2015, "review", 11, 0.0, 1, 0, "Graphene oxide membranes"),
    (3, 2014, "other", 10, 2.5, 12, 55, ""),
]


def test_load_publications(write_tsv):
    path = write_tsv("publications.tsv", PUBLICATION_HEADER, ROWS)

    pubs = load_publications(path)

    assert [pub.pub_id for pub in pubs] == [1, 2, 3]
    first = pubs[0]
    assert (first.year, first.doc_type, first.journal_id, first.jif) == (2015, "article", 10, 2.5)
    assert (first.n_authors, first.n_references) == (3, 40)
    assert first.title_tokens == ("cognitive", "neuroscience", "of", "memory")
    assert first.citation_count == 0
    assert pubs[2].title_tokens == ()


def test_load_publications_header_only(write_tsv):
    path = write_tsv("publications.tsv", PUBLICATION_HEADER)

    assert load_publications(path) == []


def test_load_publications_reports_every_bad_row(write_tsv):
    rows = [
        (1, 2015, "article", 10, 2.5, 0, 40, "a"),
        (2, 2015, "article", 10, "high", 1, 40, "b"),
        (3, 2015, "article", 10, 2.5, 1, 40, "c"),
    ]
    path = write_tsv("publications.tsv", PUBLICATION_HEADER, rows)

    with pytest.raises(CorpusError) as excinfo:
        load_publications(path)

    problems = {(line, field) for line, field, _ in excinfo.value.problems}
    assert problems == {(2, "n_authors"), (3, "jif")}


def test_load_publications_duplicate_id(write_tsv):
    path = write_tsv("publications.tsv", PUBLICATION_HEADER, [ROWS[0], ROWS[0]])

    with pytest.raises(CorpusError) as excinfo:
        load_publications(path)

    assert excinfo.value.problems[0][:2] == (3, "pub_id")


def test_load_publications_missing_column(write_tsv):
    path = write_tsv("publications.tsv", PUBLICATION_HEADER[:-1], [row[:-1] for row in ROWS])

    with pytest.raises(CorpusError) as excinfo:
        load_publications(path)

    assert excinfo.value.problems == [(None, "title", "column not found in header")]


def test_load_publications_missing_file(tmp_path):
    with pytest.raises(CorpusError, match="no such file"):
        load_publications(tmp_path / "nope.tsv")


def test_load_publications_extra_field(write_tsv):
    path = write_tsv("publications.tsv", PUBLICATION_HEADER, [ROWS[0], ROWS[1] + ("stray",)])

    with pytest.raises(CorpusError, match="malformed row") as excinfo:
        load_publications(path)

    assert excinfo.value.problems[0][:2] == (3, "row")


def test_load_citations_invalid_utf8(tmp_path):
    path = tmp_path / "citations.tsv"
    path.write_bytes("\t".join(CITATION_HEADER).encode() + b"\n2\t1\t2016\n3\t1\t20\xff16\n")

    with pytest.raises(CorpusError, match="not valid UTF-8") as excinfo:
        load_citations(path)

    assert excinfo.value.problems[0][:2] == (3, "row")


def test_load_publications_custom_schema(write_tsv):
    header = ["id", "py", "dt", "journal_id", "jif", "n_authors", "n_references", "ti"]
    path = write_tsv("publications.tsv", header, ROWS[:1])

    pubs = load_publications(path, schema={"pub_id": "id", "year": "py", "doc_type": "dt", "title": "ti"})

    assert pubs[0].pub_id == 1
    assert pubs[0].year == 2015


def test_load_publications_keywords(write_tsv):
    path = write_tsv(
        "publications.tsv", PUBLICATION_HEADER + ["keywords"], [ROWS[0] + ("Working memory; fMRI;",)]
    )

    pubs = load_publications(path)

    assert pubs[0].keywords == ("working memory", "fmri")


def test_load_citations_collapses_duplicates_and_self_citations(write_tsv):
    rows = [(2, 1, 2016), (2, 1, 2016), (3, 3, 2016), (3, 1, 2017)]
    path = write_tsv("citations.tsv", CITATION_HEADER, rows)
    warnings = Counter()

    edges = load_citations(path, warnings=warnings)

    assert [(edge.citing, edge.cited) for edge in edges] == [(2, 1), (3, 1)]
    assert warnings["duplicate_citations"] == 1
    assert warnings["self_citations"] == 1


def test_load_citations_invalid_values(write_tsv):
    path = write_tsv("citations.tsv", CITATION_HEADER, [(2, "x", 2016), (2, 1, 2016.5)])

    with pytest.raises(CorpusError) as excinfo:
        load_citations(path)

    assert [(line, field) for line, field, _ in excinfo.value.problems] == [(2, "cited"), (3, "citing_year")]


def test_load_citations_dates(write_tsv):
    path = write_tsv("citations.tsv", CITATION_HEADER + ["citing_date"], [(2, 1, 2021, "2021-03-01"), (3, 1, 2020, "")])

    edges = load_citations(path)

    assert edges[0].citing_date == datetime.date(2021, 3, 1)
    assert edges[1].citing_date is None


def test_filter_corpus(make_publication):
    pubs = [
        make_publication(1, 2015, "article"),
        make_publication(2, 2015, "review"),
        make_publication(3, 2014, "article"),
        make_publication(4, 2015, "other"),
    ]

    kept = filter_corpus(pubs, CorpusFilter())

    assert [pub.pub_id for pub in kept] == [1, 2]
    assert filter_corpus(kept, CorpusFilter()) == kept


def test_filter_corpus_identity(make_publication):
    pubs = [make_publication(1, 2013, "other"), make_publication(2, 2019, "article")]
    everything = CorpusFilter(focal_year=None, doc_types=frozenset({"article", "review", "other"}))

    assert filter_corpus(pubs, everything) == pubs


def test_filter_corpus_without_focal_year_publications(make_publication):
    assert filter_corpus([make_publication(1, 2012)], CorpusFilter()) == []


@pytest.mark.parametrize(
    "kwargs,field",
    [
        ({"window": (2021, 2015)}, "window"),
        ({"focal_year": 2014}, "focal_year"),
        ({"doc_types": frozenset({"letter"})}, "doc_types"),
    ],
)
def test_corpus_filter_validation(kwargs, field):
    with pytest.raises(ConfigError) as excinfo:
        CorpusFilter(**kwargs)

    assert field in excinfo.value.errors


def test_count_citations_window(make_publication):
    pubs = [make_publication(1), make_publication(2, 2016), make_publication(3, 2020), make_publication(4, 2022)]
    edges = [
        CitationEdge(citing=2, cited=1, citing_year=2016),
        CitationEdge(citing=3, cited=1, citing_year=2020),
        CitationEdge(citing=4, cited=1, citing_year=2022),
    ]

    counted = count_citations(pubs, edges, (2015, 2021))

    assert [pub.citation_count for pub in counted] == [2, 0, 0, 0]


def test_count_citations_hand_graph(make_publication):
    pubs = [make_publication(pub_id) for pub_id in range(1, 6)]
    pairs = [(2, 1), (3, 1), (4, 1), (3, 2), (5, 2), (5, 4), (9, 4)]
    edges = [CitationEdge(citing=a, cited=b, citing_year=2016) for a, b in pairs]
    edges.append(CitationEdge(citing=2, cited=42, citing_year=2016))
    warnings = Counter()

    counted = count_citations(pubs, edges, (2015, 2021), warnings=warnings)

    assert {pub.pub_id: pub.citation_count for pub in counted} == {1: 3, 2: 2, 3: 0, 4: 2, 5: 0}
    assert sum(pub.citation_count for pub in counted) == len(edges) - 1
    assert warnings["dangling_citations"] == 1


def test_count_citations_cutoff_date(make_publication):
    pubs = [make_publication(1)]
    edges = [
        CitationEdge(citing=2, cited=1, citing_year=2021, citing_date=datetime.date(2021, 3, 3)),
        CitationEdge(citing=3, cited=1, citing_year=2021, citing_date=datetime.date(2021, 3, 4)),
        CitationEdge(citing=4, cited=1, citing_year=2021),
    ]

    counted = count_citations(pubs, edges, (2015, 2021), cutoff_date=datetime.date(2021, 3, 3))

    assert counted[0].citation_count == 2


def test_corpus_round_trip(write_tsv, tmp_path):
    pubs = load_publications(write_tsv("publications.tsv", PUBLICATION_HEADER, ROWS))
    edges = load_citations(write_tsv("citations.tsv", CITATION_HEADER, [(2, 1, 2016), (3, 1, 2017)]))

    write_publications(pubs, tmp_path / "again.tsv")
    write_citations(edges, tmp_path / "again_citations.tsv")

    assert load_publications(tmp_path / "again.tsv") == pubs
    assert load_citations(tmp_path / "again_citations.tsv") == edges
