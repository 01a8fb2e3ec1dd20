import io
import json

from django.core.management import CommandError, call_command

import numpy as np
import pytest

from topic_growth.__main__ import main
from topic_growth.citegraph import make_graph
from topic_growth.cluster import ClassificationHierarchy, ClusterConfig, Partition, build_hierarchy
from topic_growth.config import FitConfig, HierarchyConfig, RunConfig
from topic_growth.exceptions import ConfigError, CorpusError, StageError
from topic_growth.pipeline import Pipeline, select_disciplines
from topic_growth.serializers import load_config
from topic_growth.synth import SynthConfig

from .conftest import CITATION_HEADER, PUBLICATION_HEADER

SYNTHETIC_RUN = {
    "synth": {
        "n_topics": 4,
        "topics_per_discipline": 4,
        "base_count": 100,
        "beta": [-0.5, 1.5, 0.05, 0.01, 0.15],
    },
    "cluster": {"resolution": 5e-4, "min_class_size": 20},
    "hierarchy": {"coarser_resolutions": [1e-7, 5e-8, 1e-8]},
    "mcmc": {"ndraw": 2000, "thin": 2, "burnin_kept": 250, "quantiles": [0.25, 0.5, 0.75]},
}

ARTIFACTS = [
    "publications.tsv",
    "citations.tsv",
    "truth.json",
    "classification.tsv",
    "cluster.json",
    "labels.tsv",
    "growth.tsv",
    "rows_0.tsv",
    "fits.json",
    "logistic_0.tsv",
    "quantile_0.tsv",
    "table1.tsv",
    "table2.tsv",
    "figure1_0.svg",
    "figure2_0.svg",
    "figure3_0.svg",
    "run.json",
    "timings.log",
]


@pytest.fixture(scope="module")
def synthetic_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    config_path = out / "config.json"
    config_path.write_text(json.dumps(SYNTHETIC_RUN))
    config = load_config(config_path).with_out(out)
    metadata = Pipeline(config).run(synthetic=True)
    return config, metadata


@pytest.fixture
def empty_corpus(write_tsv, write_config):
    write_tsv("publications.tsv", PUBLICATION_HEADER)
    write_tsv("citations.tsv", CITATION_HEADER)
    return write_config({"publications": "publications.tsv", "citations": "citations.tsv", "out": "out"})


@pytest.mark.slow
def test_run_writes_every_artifact(synthetic_run):
    config, metadata = synthetic_run

    for name in ARTIFACTS:
        assert (config.out / name).is_file(), name
    assert metadata["disciplines"] == [0]
    assert metadata["cluster"]["adjusted_rand_index"] >= 0.95
    assert metadata["cluster"]["levels"][0]["n_classes"] == 4
    assert json.loads((config.out / "run.json").read_text())["seeds"]["cluster"] == 0


@pytest.mark.slow
def test_run_finds_positive_growth_effect(synthetic_run):
    config, _ = synthetic_run

    [fits] = Pipeline(config).fits

    logistic = fits.logistic
    growth = list(logistic.names).index("growth_ratio")
    assert logistic.estimate[growth] > 0
    assert logistic.p[growth] < 0.001
    converged = [fit for fit in fits.quantiles if fit.converged]
    assert converged
    assert all(fit.coefficient("growth_ratio") > 0 for fit in converged)


@pytest.mark.slow
def test_report_reruns_from_artifacts(synthetic_run):
    config, _ = synthetic_run
    before = (config.out / "table2.tsv").read_bytes()

    paths = Pipeline(config).report()

    assert paths["table2"].read_bytes() == before
    assert "figure3_0" in paths


@pytest.mark.slow
def test_run_is_deterministic(synthetic_run):
    config, _ = synthetic_run
    first = {path.name: path.read_bytes() for path in config.out.iterdir() if path.name != "timings.log"}

    Pipeline(config).run(synthetic=True)

    second = {path.name: path.read_bytes() for path in config.out.iterdir() if path.name != "timings.log"}
    assert second.keys() == first.keys()
    for name, content in first.items():
        assert second[name] == content, name


def test_run_on_empty_corpus(empty_corpus):
    with pytest.raises(StageError, match=r"^\[cluster\] empty corpus"):
        Pipeline(load_config(empty_corpus)).run()


def test_ingest_requires_paths(tmp_path):
    with pytest.raises(StageError) as excinfo:
        Pipeline(RunConfig(out=tmp_path)).ingest()

    assert excinfo.value.stage == "ingest"


def test_report_requires_fits(tmp_path):
    with pytest.raises(StageError) as excinfo:
        Pipeline(RunConfig(out=tmp_path)).report()

    assert excinfo.value.stage == "fit"


def test_synth_stage_points_config_at_corpus(tmp_path):
    config = RunConfig(out=tmp_path, synth=SynthConfig(n_topics=2, base_count=5))
    pipeline = Pipeline(config)

    corpus = pipeline.synth()
    pubs, _ = pipeline.corpus

    assert pipeline.config.publications == tmp_path / "publications.tsv"
    assert len(pubs) == len(corpus.publications)


@pytest.fixture
def triangle_hierarchy(two_triangles):
    return build_hierarchy(two_triangles, [0.1, 0.01, 0.001, 0.0001], ClusterConfig(min_class_size=1))


@pytest.mark.parametrize(
    "fit,expected",
    [
        (FitConfig(n_disciplines=1), [0]),
        (FitConfig(n_disciplines=8), [0, 1]),
        (FitConfig(selection="per_area", per_area=1), [0, 1]),
        (FitConfig(selection="explicit", disciplines=(1,)), [1]),
    ],
)
def test_select_disciplines(triangle_hierarchy, make_publication, fit, expected):
    focal = [make_publication(pub_id) for pub_id in range(1, 6)]

    assert select_disciplines(triangle_hierarchy, focal, RunConfig(fit=fit)) == expected


def test_select_unknown_discipline(triangle_hierarchy, make_publication):
    config = RunConfig(fit=FitConfig(selection="explicit", disciplines=(5,)))

    with pytest.raises(ConfigError):
        select_disciplines(triangle_hierarchy, [make_publication(1)], config)


def test_select_per_area_without_area_level(make_publication):
    graph = make_graph([1, 2], [0], [1], [1.0])
    hierarchy = build_hierarchy(graph, [0.1, 0.01, 0.001], ClusterConfig(min_class_size=1))
    config = RunConfig(fit=FitConfig(selection="per_area"))

    with pytest.raises(ConfigError):
        select_disciplines(hierarchy, [make_publication(1)], config)


def test_select_per_area_uses_configured_area_level(make_publication):
    node_ids = np.arange(1, 5)
    memberships = ([0, 1, 2, 3], [0, 1, 2, 3], [0, 0, 1, 1], [0, 0, 0, 0])
    levels = [Partition(node_ids=node_ids, membership=np.array(membership)) for membership in memberships]
    hierarchy = ClassificationHierarchy(names=["topic", "specialty", "discipline", "area"], levels=levels, parents=[])
    config = RunConfig(
        hierarchy=HierarchyConfig(discipline_level="topic", area_level="discipline"),
        fit=FitConfig(selection="per_area", per_area=1),
    )
    focal = [make_publication(pub_id) for pub_id in range(1, 5)]

    assert select_disciplines(hierarchy, focal, config) == [0, 2]


@pytest.fixture
def ingested(write_tsv, tmp_path):
    publications = write_tsv("publications.tsv", PUBLICATION_HEADER)
    citations = write_tsv("citations.tsv", CITATION_HEADER)
    out = tmp_path / "out"
    out.mkdir()
    (out / "cluster.json").write_text(json.dumps({"levels": [{"orphans": []}]}))
    (out / "classification.tsv").write_text("pub_id\ttopic_id\n1\t0\n")
    return RunConfig(publications=publications, citations=citations, out=out)


def test_truncated_cluster_summary_is_a_label_stage_error(ingested):
    (ingested.out / "cluster.json").write_text('{"levels": [')

    with pytest.raises(StageError, match=r"^\[label\] .*cluster\.json") as excinfo:
        Pipeline(ingested).label()

    assert isinstance(excinfo.value.cause, CorpusError)


def test_classification_without_pub_id_is_a_label_stage_error(ingested):
    (ingested.out / "classification.tsv").write_text("topic_id\n0\n")

    with pytest.raises(StageError, match=r"^\[label\] .*pub_id"):
        Pipeline(ingested).label()


def test_unreadable_growth_table_is_a_fit_stage_error(ingested):
    (ingested.out / "growth.tsv").write_text(
        "topic_id\tmean_base\tmean_later\tratio\teligible\tbase_total\tlater_total\twindow\n0\t1\t1\t1\t0\t\t3\t3\n"
    )

    with pytest.raises(StageError, match=r"^\[fit\] .*growth\.tsv"):
        Pipeline(ingested).fit()


def test_invalid_fits_file_is_a_report_stage_error(ingested):
    (ingested.out / "fits.json").write_text(json.dumps({"disciplines": "none"}))

    with pytest.raises(StageError, match=r"^\[report\] .*fits\.json"):
        Pipeline(ingested).report()


def test_command_synth(write_config, tmp_path):
    path = write_config({"synth": {"n_topics": 2, "base_count": 5}})
    stdout = io.StringIO()

    call_command("topicgrowth", "synth", "--config", str(path), "--out", str(tmp_path / "out"), stdout=stdout)

    assert (tmp_path / "out" / "publications.tsv").is_file()
    assert "synth: done" in stdout.getvalue()


def test_command_seed_override(write_config, tmp_path):
    path = write_config({"synth": {"n_topics": 2, "base_count": 5}})
    for seed, name in ((1, "a"), (1, "b"), (2, "c")):
        args = ["synth", "--config", str(path), "--seed", str(seed), "--out", str(tmp_path / name)]
        call_command("topicgrowth", *args, stdout=io.StringIO())

    citations = {name: (tmp_path / name / "citations.tsv").read_bytes() for name in "abc"}
    assert citations["a"] == citations["b"]
    assert citations["a"] != citations["c"]


def test_command_reports_stage_errors(empty_corpus):
    with pytest.raises(CommandError, match=r"\[cluster\] empty corpus") as excinfo:
        call_command("topicgrowth", "run", "--config", str(empty_corpus), stdout=io.StringIO())

    assert excinfo.value.returncode == 1


def test_command_reports_config_errors(write_config):
    path = write_config({"cluster": {"resolution": "high"}})

    with pytest.raises(CommandError, match=r"^\[config\]"):
        call_command("topicgrowth", "ingest", "--config", str(path))


def test_console_script_exit_code(empty_corpus, capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["run", "--config", str(empty_corpus)])

    assert excinfo.value.code == 1
    assert "[cluster] empty corpus" in capsys.readouterr().err
