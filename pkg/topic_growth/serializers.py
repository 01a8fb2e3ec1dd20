"""
Serializers for run configuration and fitted models.

Configuration sections validate into the frozen config dataclasses of the
modules they configure; keys left out fall back to the dataclass defaults. Fit
serializers write and read ``fits.json``.
"""
from pathlib import Path

from rest_framework import serializers

import numpy as np

from .cluster import ClusterConfig
from .config import SELECTIONS, FitConfig, HierarchyConfig, RunConfig
from .corpus import DOC_TYPES, CorpusFilter
from .exceptions import ConfigError
from .growth import GrowthConfig
from .hurdle_stats import DisciplineFits, LogisticFit, McmcConfig, QuantileFit
from .label import ADJ, DEFAULT_LEXICON, NOUN, OTHER, TERM_FIELDS, LabelConfig
from .renderers import read_json
from .synth import SynthConfig


class PathField(serializers.CharField):
    """
    A filesystem path; relative paths resolve against ``base_dir`` from the
    serializer context.
    """

    def to_internal_value(self, data):
        path = Path(super().to_internal_value(data))
        base_dir = self.context.get("base_dir")
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        return path

    def to_representation(self, value):
        return str(value)


class TupleField(serializers.ListField):
    def to_internal_value(self, data):
        return tuple(super().to_internal_value(data))


class SetField(serializers.ListField):
    def to_internal_value(self, data):
        return frozenset(super().to_internal_value(data))

    def to_representation(self, data):
        return sorted(super().to_representation(data))


class LexiconField(serializers.DictField):
    """
    Part-of-speech overrides on top of the built-in lexicon. Only entries that
    differ from the built-in lexicon are represented.
    """

    child = serializers.ChoiceField(choices=(NOUN, ADJ, OTHER))

    def to_internal_value(self, data):
        return {**DEFAULT_LEXICON, **super().to_internal_value(data)}

    def to_representation(self, value):
        overrides = {word: tag for word, tag in value.items() if DEFAULT_LEXICON.get(word) != tag}
        return super().to_representation(overrides)


class DataclassSerializer(serializers.Serializer):
    """
    Validate into ``dataclass``. Invariants checked by the dataclass itself
    are reported as validation errors of this serializer.
    """

    dataclass = None

    def build(self, attrs):
        return self.dataclass(**attrs)

    def validate(self, attrs):
        try:
            self.build(attrs)
        except ConfigError as exc:
            raise serializers.ValidationError(exc.errors)
        return attrs

    def create(self, validated_data):
        return self.build(validated_data)


class CorpusFilterSerializer(DataclassSerializer):
    dataclass = CorpusFilter

    focal_year = serializers.IntegerField(required=False, allow_null=True)
    doc_types = SetField(child=serializers.ChoiceField(choices=DOC_TYPES), required=False)
    window = TupleField(child=serializers.IntegerField(), min_length=2, max_length=2, required=False)
    cutoff_date = serializers.DateField(required=False, allow_null=True)


class ClusterConfigSerializer(DataclassSerializer):
    dataclass = ClusterConfig

    resolution = serializers.FloatField(required=False)
    iterations = serializers.IntegerField(required=False)
    seed = serializers.IntegerField(required=False)
    min_class_size = serializers.IntegerField(required=False)
    n_starts = serializers.IntegerField(required=False)


class HierarchyConfigSerializer(DataclassSerializer):
    dataclass = HierarchyConfig

    coarser_resolutions = TupleField(child=serializers.FloatField(), required=False)
    normalization = serializers.CharField(required=False)
    discipline_level = serializers.CharField(required=False)
    area_level = serializers.CharField(required=False)
    write_graph = serializers.BooleanField(required=False)


class LabelConfigSerializer(DataclassSerializer):
    dataclass = LabelConfig

    alpha = serializers.FloatField(required=False)
    top_k = serializers.IntegerField(required=False)
    lexicon = LexiconField(source="pos_lexicon", required=False)
    term_fields = TupleField(child=serializers.ChoiceField(choices=TERM_FIELDS), source="fields", required=False)
    level_alpha = serializers.DictField(child=serializers.FloatField(), required=False)


class GrowthConfigSerializer(DataclassSerializer):
    dataclass = GrowthConfig

    t = serializers.IntegerField(required=False)
    dt = serializers.IntegerField(required=False)
    window = serializers.IntegerField(required=False)
    min_mean = serializers.FloatField(required=False)
    count_doc_types = SetField(child=serializers.ChoiceField(choices=DOC_TYPES), required=False, allow_null=True)


class McmcConfigSerializer(DataclassSerializer):
    dataclass = McmcConfig

    ndraw = serializers.IntegerField(required=False)
    thin = serializers.IntegerField(required=False)
    burnin_kept = serializers.IntegerField(required=False)
    kept = serializers.IntegerField(read_only=True)
    quantiles = TupleField(child=serializers.FloatField(), required=False)
    seed = serializers.IntegerField(required=False)
    prior_precision = serializers.FloatField(required=False)
    sigma_shape = serializers.FloatField(required=False)
    sigma_scale = serializers.FloatField(required=False)
    acf_lag = serializers.IntegerField(required=False)
    acf_threshold = serializers.FloatField(required=False)
    min_variance = serializers.FloatField(required=False)


class FitConfigSerializer(DataclassSerializer):
    dataclass = FitConfig

    hurdle = serializers.IntegerField(required=False)
    selection = serializers.ChoiceField(choices=SELECTIONS, required=False)
    disciplines = TupleField(child=serializers.IntegerField(), required=False)
    n_disciplines = serializers.IntegerField(required=False)
    per_area = serializers.IntegerField(required=False)
    workers = serializers.IntegerField(required=False, allow_null=True)


class SynthConfigSerializer(DataclassSerializer):
    dataclass = SynthConfig

    n_topics = serializers.IntegerField(required=False)
    topics_per_discipline = serializers.IntegerField(required=False)
    years = TupleField(child=serializers.IntegerField(), min_length=2, max_length=2, required=False)
    t = serializers.IntegerField(required=False)
    dt = serializers.IntegerField(required=False)
    window = serializers.IntegerField(required=False)
    base_count = serializers.IntegerField(required=False)
    growth_ratios = TupleField(child=serializers.FloatField(min_value=0), required=False)
    ratio_range = TupleField(child=serializers.FloatField(min_value=0), min_length=2, max_length=2, required=False)
    schedules = serializers.DictField(
        child=serializers.DictField(child=serializers.IntegerField()), required=False
    )
    p_within = serializers.FloatField(required=False)
    p_within_discipline = serializers.FloatField(required=False)
    beta = TupleField(child=serializers.FloatField(), required=False)
    dispersion = serializers.FloatField(required=False)
    author_p = serializers.FloatField(required=False)
    ref_mean = serializers.FloatField(required=False)
    ref_dispersion = serializers.FloatField(required=False)
    n_journals = serializers.IntegerField(required=False)
    jif_mu = serializers.FloatField(required=False)
    jif_sigma = serializers.FloatField(required=False)
    p_review = serializers.FloatField(required=False)
    p_other = serializers.FloatField(required=False)
    n_shared_terms = serializers.IntegerField(required=False)
    seed = serializers.IntegerField(required=False)

    def build(self, attrs):
        attrs = dict(attrs)
        if "schedules" in attrs:
            try:
                attrs["schedules"] = {
                    int(topic): {int(year): count for year, count in schedule.items()}
                    for topic, schedule in attrs["schedules"].items()
                }
            except ValueError:
                raise ConfigError({"schedules": "topic and year keys must be integers"})
        return super().build(attrs)


SECTIONS = {
    "corpus": CorpusFilterSerializer,
    "cluster": ClusterConfigSerializer,
    "hierarchy": HierarchyConfigSerializer,
    "label": LabelConfigSerializer,
    "growth": GrowthConfigSerializer,
    "mcmc": McmcConfigSerializer,
    "fit": FitConfigSerializer,
    "synth": SynthConfigSerializer,
}


class RunConfigSerializer(DataclassSerializer):
    dataclass = RunConfig

    publications = PathField(required=False, allow_null=True)
    citations = PathField(required=False, allow_null=True)
    truth = PathField(required=False, allow_null=True)
    out = PathField(required=False)
    seed = serializers.IntegerField(required=False, allow_null=True)
    corpus = CorpusFilterSerializer(required=False)
    cluster = ClusterConfigSerializer(required=False)
    hierarchy = HierarchyConfigSerializer(required=False)
    label = LabelConfigSerializer(required=False)
    growth = GrowthConfigSerializer(required=False)
    mcmc = McmcConfigSerializer(required=False)
    fit = FitConfigSerializer(required=False)
    synth = SynthConfigSerializer(required=False)

    def build(self, attrs):
        attrs = dict(attrs)
        for name, serializer_class in SECTIONS.items():
            if name in attrs:
                attrs[name] = serializer_class().build(attrs[name])
        config = super().build(attrs)
        if config.seed is not None:
            config = config.with_seed(config.seed)
        return config


def load_config(path=None) -> RunConfig:
    """
    Read and validate a JSON run configuration. Without a path every default
    applies.
    """
    if path is None:
        return RunConfig()
    path = Path(path)
    serializer = RunConfigSerializer(data=read_json(path), context={"base_dir": path.parent})
    if not serializer.is_valid():
        raise ConfigError(serializer.errors)
    return serializer.save()


class LogisticFitSerializer(serializers.Serializer):
    n = serializers.IntegerField()
    names = TupleField(child=serializers.CharField())
    estimate = serializers.ListField(child=serializers.FloatField(), allow_null=True, required=False)
    se = serializers.ListField(child=serializers.FloatField(), allow_null=True, required=False)
    separated = serializers.BooleanField(default=False)
    converged = serializers.BooleanField(default=True)
    hurdle = serializers.IntegerField()

    def create(self, validated_data):
        data = dict(validated_data)
        for name in ("estimate", "se"):
            if data.get(name) is not None:
                data[name] = np.array(data[name], dtype=float)
        return LogisticFit(**data)


class QuantileFitSerializer(serializers.Serializer):
    quantile = serializers.FloatField()
    names = TupleField(child=serializers.CharField())
    mean = serializers.ListField(child=serializers.FloatField())
    lower = serializers.ListField(child=serializers.FloatField())
    upper = serializers.ListField(child=serializers.FloatField())
    n_kept_draws = serializers.IntegerField()
    converged = serializers.BooleanField()
    n = serializers.IntegerField()
    seed = serializers.IntegerField()

    def create(self, validated_data):
        data = dict(validated_data)
        for name in ("mean", "lower", "upper"):
            data[name] = np.array(data[name], dtype=float)
        return QuantileFit(**data)


class DisciplineFitsSerializer(serializers.Serializer):
    discipline = serializers.IntegerField()
    label = serializers.CharField(allow_blank=True, default="")
    n_publications = serializers.IntegerField(default=0)
    logistic = LogisticFitSerializer(allow_null=True, required=False)
    quantiles = QuantileFitSerializer(many=True, default=list)
    skipped = serializers.CharField(allow_null=True, allow_blank=True, required=False)

    def create(self, validated_data):
        data = dict(validated_data)
        if data.get("logistic") is not None:
            data["logistic"] = LogisticFitSerializer().create(data["logistic"])
        data["quantiles"] = [QuantileFitSerializer().create(item) for item in data.get("quantiles", [])]
        return DisciplineFits(**data)


class FitsSerializer(serializers.Serializer):
    hurdle = serializers.IntegerField()
    mcmc = McmcConfigSerializer()
    disciplines = DisciplineFitsSerializer(many=True)

    def create(self, validated_data):
        return {
            "hurdle": validated_data["hurdle"],
            "mcmc": McmcConfigSerializer().build(validated_data["mcmc"]),
            "disciplines": [DisciplineFitsSerializer().create(item) for item in validated_data["disciplines"]],
        }
