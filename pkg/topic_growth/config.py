from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Tuple

from .citegraph import ALL_LINKS, NORMALIZATIONS
from .cluster import ClusterConfig
from .corpus import CorpusFilter
from .exceptions import ConfigError
from .growth import GrowthConfig
from .hurdle_stats import DEFAULT_HURDLE, McmcConfig
from .label import LabelConfig
from .synth import SynthConfig

# specialty, discipline and area resolutions below the topic resolution
DEFAULT_COARSER_RESOLUTIONS = (2.5e-5, 5e-6, 1e-6)

SELECT_EXPLICIT = "explicit"
SELECT_SIZE = "size"
SELECT_PER_AREA = "per_area"
SELECTIONS = (SELECT_EXPLICIT, SELECT_SIZE, SELECT_PER_AREA)


@dataclass(frozen=True)
class HierarchyConfig:
    coarser_resolutions: Tuple[float, ...] = DEFAULT_COARSER_RESOLUTIONS
    normalization: str = ALL_LINKS
    discipline_level: str = "discipline"
    area_level: str = "area"
    write_graph: bool = False

    def __post_init__(self):
        errors = {}
        resolutions = self.coarser_resolutions
        if any(value <= 0 for value in resolutions):
            errors["coarser_resolutions"] = "resolutions must be positive"
        elif any(coarser >= finer for finer, coarser in zip(resolutions, resolutions[1:])):
            errors["coarser_resolutions"] = "resolutions must be strictly decreasing"
        if self.normalization not in NORMALIZATIONS:
            errors["normalization"] = f"unknown normalization {self.normalization!r}"
        if errors:
            raise ConfigError(errors)


@dataclass(frozen=True)
class FitConfig:
    hurdle: int = DEFAULT_HURDLE
    selection: str = SELECT_SIZE
    disciplines: Tuple[int, ...] = ()
    n_disciplines: int = 8
    per_area: int = 2
    # None defers to the TOPIC_GROWTH["WORKERS"] setting
    workers: Optional[int] = None

    def __post_init__(self):
        errors = {}
        if self.selection not in SELECTIONS:
            errors["selection"] = f"unknown selection {self.selection!r}"
        elif self.selection == SELECT_EXPLICIT and not self.disciplines:
            errors["disciplines"] = "explicit selection needs discipline ids"
        if self.hurdle < 0:
            errors["hurdle"] = "hurdle must not be negative"
        if self.n_disciplines < 1 or self.per_area < 1:
            errors["n_disciplines"] = "at least one discipline must be selected"
        if self.workers is not None and self.workers < 1:
            errors["workers"] = "at least one worker is required"
        if errors:
            raise ConfigError(errors)


@dataclass(frozen=True)
class RunConfig:
    publications: Optional[Path] = None
    citations: Optional[Path] = None
    # truth.json of a synthetic corpus, for recovery scores
    truth: Optional[Path] = None
    out: Path = Path("out")
    seed: Optional[int] = None
    corpus: CorpusFilter = field(default_factory=CorpusFilter)
    cluster: ClusterConfig = field(default_factory=ClusterConfig)
    hierarchy: HierarchyConfig = field(default_factory=HierarchyConfig)
    label: LabelConfig = field(default_factory=LabelConfig)
    growth: GrowthConfig = field(default_factory=GrowthConfig)
    mcmc: McmcConfig = field(default_factory=McmcConfig)
    fit: FitConfig = field(default_factory=FitConfig)
    synth: SynthConfig = field(default_factory=SynthConfig)

    def __post_init__(self):
        if self.hierarchy.coarser_resolutions and self.hierarchy.coarser_resolutions[0] >= self.cluster.resolution:
            raise ConfigError({"hierarchy": "coarser resolutions must lie below the topic resolution"})

    @property
    def resolutions(self) -> Tuple[float, ...]:
        return (self.cluster.resolution,) + tuple(self.hierarchy.coarser_resolutions)

    def with_seed(self, seed: int) -> "RunConfig":
        return replace(
            self,
            seed=seed,
            cluster=replace(self.cluster, seed=seed),
            mcmc=replace(self.mcmc, seed=seed),
            synth=replace(self.synth, seed=seed),
        )

    def with_out(self, out) -> "RunConfig":
        return replace(self, out=Path(out))
