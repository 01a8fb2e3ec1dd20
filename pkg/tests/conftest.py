import json
from pathlib import Path

import pytest

from topic_growth.citegraph import make_graph
from topic_growth.corpus import Publication, tokenize

DATA_DIR = Path(__file__).parent / "data"

PUBLICATION_HEADER = ["pub_id", "year", "doc_type", "journal_id", "jif", "n_authors", "n_references", "title"]
CITATION_HEADER = ["citing", "cited", "citing_year"]


@pytest.fixture
def data_dir():
    return DATA_DIR


@pytest.fixture
def write_tsv(tmp_path):
    def write(name, header, rows=()):
        path = tmp_path / name
        lines = ["\t".join(header)] + ["\t".join(str(value) for value in row) for row in rows]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return write


@pytest.fixture
def write_config(tmp_path):
    def write(data, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return write


@pytest.fixture
def make_publication():
    def make(pub_id, year=2015, doc_type="article", title="", **kwargs):
        values = {"journal_id": 1, "jif": 1.5, "n_authors": 3, "n_references": 20}
        values.update(kwargs)
        return Publication(pub_id=pub_id, year=year, doc_type=doc_type, title_tokens=tokenize(title), **values)

    return make


@pytest.fixture
def two_triangles():
    """
    Nodes 1-3 and 4-6 form two unit-weight triangles without links between
    them.
    """
    return make_graph([1, 2, 3, 4, 5, 6], [0, 0, 1, 3, 3, 4], [1, 2, 2, 4, 5, 5], [1.0] * 6)


@pytest.fixture
def barbell():
    """
    Two triangles joined by the single link 3-4.
    """
    return make_graph([1, 2, 3, 4, 5, 6], [0, 0, 1, 2, 3, 3, 4], [1, 2, 2, 3, 4, 5, 5], [1.0] * 7)
