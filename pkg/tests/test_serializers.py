import datetime
import json

import numpy as np
import pytest

from topic_growth.config import RunConfig
from topic_growth.exceptions import ConfigError
from topic_growth.hurdle_stats import COEFFICIENTS, DisciplineFits, LogisticFit, McmcConfig, QuantileFit
from topic_growth.label import ADJ, OTHER
from topic_growth.renderers import ArtifactJSONRenderer, read_json, write_json
from topic_growth.serializers import FitsSerializer, RunConfigSerializer, load_config


def test_load_config_without_path():
    assert load_config() == RunConfig()


def test_load_config_empty_document(write_config):
    config = load_config(write_config({}))

    assert config.cluster.resolution == 0.000125
    assert config.cluster.min_class_size == 50
    assert config.label.alpha == 0.67
    assert config.growth.min_mean == 5
    assert config.mcmc.ndraw == 10000
    assert config.fit.hurdle == 3


def test_load_config_overrides(write_config):
    path = write_config(
        {
            "cluster": {"resolution": 0.001, "min_class_size": 20},
            "hierarchy": {"coarser_resolutions": [1e-4, 1e-5]},
            "mcmc": {"ndraw": 200, "thin": 2, "burnin_kept": 10, "quantiles": [0.25, 0.75]},
            "corpus": {"cutoff_date": "2021-03-03", "doc_types": ["article"]},
            "fit": {"selection": "explicit", "disciplines": [2, 0]},
        }
    )

    config = load_config(path)

    assert config.cluster.resolution == 0.001
    assert config.cluster.iterations == 100
    assert config.resolutions == (0.001, 1e-4, 1e-5)
    assert config.mcmc.kept == 100
    assert config.mcmc.quantiles == (0.25, 0.75)
    assert config.corpus.cutoff_date == datetime.date(2021, 3, 3)
    assert config.corpus.doc_types == frozenset({"article"})
    assert config.fit.disciplines == (2, 0)


def test_load_config_relative_paths(write_config, tmp_path):
    path = write_config({"publications": "data/publications.tsv", "citations": "/srv/citations.tsv", "out": "run"})

    config = load_config(path)

    assert config.publications == tmp_path / "data" / "publications.tsv"
    assert str(config.citations) == "/srv/citations.tsv"
    assert config.out == tmp_path / "run"


def test_load_config_seed(write_config):
    config = load_config(write_config({"seed": 7, "cluster": {"seed": 1}}))

    assert (config.cluster.seed, config.mcmc.seed, config.synth.seed) == (7, 7, 7)


def test_with_seed_and_out():
    config = RunConfig().with_seed(3).with_out("elsewhere")

    assert config.seed == 3
    assert config.cluster.seed == 3
    assert str(config.out) == "elsewhere"


def test_load_config_label_section(write_config):
    config = load_config(
        write_config({"label": {"lexicon": {"memory": "ADJ"}, "term_fields": ["title", "keywords"], "top_k": 2}})
    )

    assert config.label.pos_lexicon["memory"] == ADJ
    assert config.label.pos_lexicon["of"] == OTHER
    assert config.label.fields == ("title", "keywords")
    assert config.label.top_k == 2


def test_load_config_synth_schedules(write_config):
    config = load_config(write_config({"synth": {"n_topics": 1, "schedules": {"0": {"2015": 12, "2018": 20}}}}))

    assert config.synth.schedules == {0: {2015: 12, 2018: 20}}


@pytest.mark.parametrize(
    "data,section,field",
    [
        ({"cluster": {"resolution": "high"}}, "cluster", "resolution"),
        ({"mcmc": {"ndraw": 100, "thin": 3}}, "mcmc", "thin"),
        ({"label": {"alpha": 2}}, "label", "alpha"),
        ({"label": {"lexicon": {"memory": "VERB"}}}, "label", "lexicon"),
        ({"fit": {"selection": "random"}}, "fit", "selection"),
        ({"corpus": {"window": [2015]}}, "corpus", "window"),
        ({"synth": {"schedules": {"zero": {"2015": 1}}}}, "synth", "schedules"),
    ],
)
def test_load_config_errors(write_config, data, section, field):
    with pytest.raises(ConfigError) as excinfo:
        load_config(write_config(data))

    assert field in excinfo.value.errors[section]


def test_load_config_coarser_resolution_above_topic_resolution(write_config):
    with pytest.raises(ConfigError) as excinfo:
        load_config(write_config({"cluster": {"resolution": 1e-5}}))

    assert "hierarchy" in str(excinfo.value.errors)


def test_load_config_invalid_json(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("{not json")

    with pytest.raises(ConfigError):
        load_config(path)


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="no such file"):
        load_config(tmp_path / "config.json")


def test_run_config_serializer_representation():
    data = RunConfigSerializer(RunConfig()).data

    assert data["cluster"]["resolution"] == 0.000125
    assert data["corpus"]["doc_types"] == ["article", "review"]
    assert data["label"]["lexicon"] == {}
    assert data["mcmc"]["kept"] == 1000


def test_renderer_is_canonical(tmp_path):
    write_json(tmp_path / "a.json", {"b": [1.5, float("nan")], "a": {"z": 1, "y": np.arange(2)}})

    text = (tmp_path / "a.json").read_text()

    assert text.endswith("}\n")
    assert list(json.loads(text)) == ["a", "b"]
    assert json.loads(text) == {"a": {"y": [0, 1], "z": 1}, "b": [1.5, None]}
    assert "NaN" not in text


def test_renderer_is_deterministic():
    data = {"x": 1, "w": [3, 2], "v": {"2": 0.1, "10": 0.2}}
    reordered = {"v": {"10": 0.2, "2": 0.1}, "w": [3, 2], "x": 1}

    assert ArtifactJSONRenderer().render(data) == ArtifactJSONRenderer().render(reordered)


def test_renderer_wraps_meta(tmp_path):
    write_json(tmp_path / "run.json", [1, 2], meta={"seed": 0})

    assert read_json(tmp_path / "run.json") == {"meta": {"seed": 0}, "data": [1, 2]}


def test_read_json_errors(tmp_path):
    (tmp_path / "broken.json").write_text("[1,")

    with pytest.raises(ConfigError):
        read_json(tmp_path / "broken.json")
    with pytest.raises(ConfigError):
        read_json(tmp_path / "missing.json")


def test_fits_round_trip(tmp_path):
    mcmc = McmcConfig(ndraw=200, thin=2, burnin_kept=10, quantiles=(0.5,))
    fits = [
        DisciplineFits(
            discipline=0,
            label="graphene; oxide",
            n_publications=120,
            logistic=LogisticFit(n=100, names=COEFFICIENTS, estimate=np.arange(5.0), se=np.ones(5)),
            quantiles=[
                QuantileFit(
                    quantile=0.5,
                    names=COEFFICIENTS,
                    mean=np.zeros(5),
                    lower=-np.ones(5),
                    upper=np.ones(5),
                    n_kept_draws=90,
                    converged=True,
                    n=60,
                    seed=11,
                )
            ],
        ),
        DisciplineFits(
            discipline=1,
            logistic=LogisticFit(n=40, names=COEFFICIENTS, separated=True, converged=False),
        ),
        DisciplineFits(discipline=2, skipped="all 12 publication(s) fall on one side of the hurdle"),
    ]
    write_json(tmp_path / "fits.json", FitsSerializer({"hurdle": 3, "mcmc": mcmc, "disciplines": fits}).data)

    serializer = FitsSerializer(data=read_json(tmp_path / "fits.json"))
    assert serializer.is_valid(), serializer.errors
    loaded = serializer.save()

    assert loaded["mcmc"] == mcmc
    first, separated, skipped = loaded["disciplines"]
    assert first.label == "graphene; oxide"
    assert first.logistic.estimate.tolist() == [0, 1, 2, 3, 4]
    assert first.quantiles[0].upper.tolist() == [1] * 5
    assert first.quantiles[0].seed == 11
    assert separated.logistic.separated and separated.logistic.estimate is None
    assert skipped.logistic is None
    assert skipped.skipped.startswith("all 12")
