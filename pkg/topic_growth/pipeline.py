"""
End-to-end orchestration: ingest → cluster → label → growth → fit → report.

Every stage writes its artifacts to the output directory and reads the
artifacts of earlier stages back from there when they are not in memory, so
stages can also be run one at a time.
"""
import logging
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import replace
from importlib import metadata
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

from . import __version__
from .citegraph import build_network, normalize_links, write_graph
from .cluster import (
    ClassificationHierarchy,
    adjusted_rand_index,
    build_hierarchy,
    read_classification,
    write_classification,
)
from .conf import get_setting
from .config import SELECT_EXPLICIT, SELECT_PER_AREA, RunConfig
from .corpus import CitationEdge, Publication, count_citations, filter_corpus, load_citations, load_publications
from .exceptions import ConfigError, CorpusError, DegenerateOutcomeError, DesignError, Error, StageError
from .growth import GrowthRecord, compute_growth, read_growth, write_growth
from .hurdle_stats import (
    DisciplineFits,
    RegressionRow,
    assemble_rows,
    derive_seed,
    fit_logistic,
    fit_quantile,
    quantile_key,
    read_rows,
    split_hurdle,
    summarize_fits,
    write_rows,
)
from .label import label_partition, read_labels, write_labels
from .renderers import read_json, write_json
from .report import discipline_counts, emit_discipline_counts, emit_discipline_summary, emit_figures
from .serializers import FitsSerializer, McmcConfigSerializer, RunConfigSerializer
from .synth import SyntheticCorpus, generate_corpus, read_truth_topics, write_corpus

logger = logging.getLogger(__name__)

STAGES = ("ingest", "cluster", "label", "growth", "fit", "report")

VERSIONED_DISTRIBUTIONS = (
    "django",
    "djangorestframework",
    "numpy",
    "scipy",
    "pandas",
    "python-igraph",
    "leidenalg",
    "statsmodels",
    "scikit-learn",
    "nltk",
)


def package_versions() -> Dict[str, Optional[str]]:
    versions = {"topic-growth": __version__}
    for name in VERSIONED_DISTRIBUTIONS:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = None
    return versions


def write_table(frame: pd.DataFrame, path: Path):
    frame.to_csv(path, sep="\t", index=False, lineterminator="\n")


def select_disciplines(
    hierarchy: ClassificationHierarchy,
    focal: Sequence[Publication],
    config: RunConfig,
) -> List[int]:
    """
    Disciplines to fit: an explicit id list, the largest ones by number of
    focal publications, or the largest ones within every area.
    """
    fit = config.fit
    discipline_of = hierarchy.assignment(config.hierarchy.discipline_level)
    sizes = Counter(discipline_of[pub.pub_id] for pub in focal if pub.pub_id in discipline_of)
    ranked = sorted(sizes, key=lambda discipline: (-sizes[discipline], discipline))

    if fit.selection == SELECT_EXPLICIT:
        known = set(discipline_of.values())
        unknown = [discipline for discipline in fit.disciplines if discipline not in known]
        if unknown:
            raise ConfigError({"disciplines": f"unknown discipline id(s) {unknown}"})
        return sorted(set(fit.disciplines))

    if fit.selection == SELECT_PER_AREA:
        if config.hierarchy.area_level not in hierarchy.names:
            raise ConfigError({"selection": f"the hierarchy has no {config.hierarchy.area_level!r} level"})
        own = hierarchy.level(config.hierarchy.discipline_level).membership
        area = hierarchy.level(config.hierarchy.area_level).membership
        area_of = dict(zip(own.tolist(), area.tolist()))
        chosen = []
        taken = Counter()
        for discipline in ranked:
            area = area_of[discipline]
            if taken[area] < fit.per_area:
                taken[area] += 1
                chosen.append(discipline)
        return sorted(chosen)

    return sorted(ranked[: fit.n_disciplines])


def _fit_logistic_job(rows, hurdle):
    try:
        return fit_logistic(rows, hurdle), None
    except (DegenerateOutcomeError, DesignError) as exc:
        return None, str(exc)


def _fit_quantile_job(rows, q, mcmc, seed):
    try:
        return fit_quantile(rows, q, mcmc, seed=seed), None
    except DesignError as exc:
        return None, str(exc)


def _call(job):
    function, args = job
    return function(*args)


class Pipeline:
    def __init__(self, config: RunConfig):
        self.config = config
        self.out = Path(config.out)
        self.warnings = Counter()
        self.timings: List[Tuple[str, float]] = []
        self.summary: Dict = {}
        self._corpus: Optional[Tuple[List[Publication], List[CitationEdge]]] = None
        self._hierarchy: Optional[ClassificationHierarchy] = None
        self._labels: Optional[Dict[str, Dict[int, str]]] = None
        self._growth: Optional[List[GrowthRecord]] = None
        self._rows: Optional[Dict[int, List[RegressionRow]]] = None
        self._fits: Optional[List[DisciplineFits]] = None

    def path(self, name: str) -> Path:
        return self.out / name

    @contextmanager
    def stage(self, name: str):
        self.out.mkdir(parents=True, exist_ok=True)
        logger.info("Stage %s started", name)
        start = time.perf_counter()
        try:
            yield
        except StageError:
            raise
        except (Error, OSError) as exc:
            raise StageError(name, exc) from exc
        finally:
            self.timings.append((name, time.perf_counter() - start))
        logger.info("Stage %s finished", name)

    def _artifact(self, stage: str, name: str) -> Path:
        path = self.path(name)
        if not path.is_file():
            raise StageError(stage, CorpusError(f"{path} not found, run the {stage} stage first"))
        return path

    def _read_artifact_json(self, stage: str, name: str):
        path = self._artifact(stage, name)
        try:
            return read_json(path)
        except ConfigError as exc:
            raise CorpusError(f"{path}: not a valid JSON artifact ({exc.errors['path']})")

    # stages

    def synth(self) -> SyntheticCorpus:
        """
        Generate a synthetic corpus into the output directory and point the
        run at it.
        """
        with self.stage("synth"):
            corpus = generate_corpus(self.config.synth)
            paths = write_corpus(corpus, self.out)
        self.config = replace(
            self.config, publications=paths["publications"], citations=paths["citations"], truth=paths["truth"]
        )
        self._corpus = None
        return corpus

    def ingest(self) -> Tuple[List[Publication], List[CitationEdge]]:
        with self.stage("ingest"):
            if self.config.publications is None or self.config.citations is None:
                raise ConfigError({"publications": "publication and citation paths are required"})
            pubs = load_publications(self.config.publications)
            edges = load_citations(self.config.citations, warnings=self.warnings)
        self._corpus = (pubs, edges)
        self.summary["corpus"] = {"publications": len(pubs), "citations": len(edges)}
        return self._corpus

    @property
    def corpus(self) -> Tuple[List[Publication], List[CitationEdge]]:
        if self._corpus is None:
            self.ingest()
        return self._corpus

    def cluster(self) -> ClassificationHierarchy:
        pubs, edges = self.corpus
        with self.stage("cluster"):
            if not pubs:
                raise CorpusError("empty corpus")
            graph = normalize_links(build_network(pubs, edges, self.warnings), self.config.hierarchy.normalization)
            if self.config.hierarchy.write_graph:
                write_graph(graph, self.path("graph.tsv"))
            hierarchy = build_hierarchy(graph, self.config.resolutions, self.config.cluster)
            write_classification(hierarchy, self.path("classification.tsv"))

            summary = {
                "n_nodes": graph.n_nodes,
                "n_links": graph.n_links,
                "normalization": graph.normalization,
                "levels": [
                    {
                        "name": name,
                        "resolution": resolution,
                        "n_classes": partition.n_classes,
                        "quality": quality,
                        "orphans": sorted(partition.orphans),
                    }
                    for name, partition, resolution, quality in zip(
                        hierarchy.names, hierarchy.levels, hierarchy.resolutions, hierarchy.qualities
                    )
                ],
            }
            if self.config.truth is not None:
                summary["adjusted_rand_index"] = adjusted_rand_index(
                    hierarchy.levels[0], read_truth_topics(self.config.truth)
                )
            write_json(self.path("cluster.json"), summary)
        self._hierarchy = hierarchy
        self.summary["cluster"] = summary
        return hierarchy

    @property
    def hierarchy(self) -> ClassificationHierarchy:
        if self._hierarchy is None:
            summary = self._read_artifact_json("cluster", "cluster.json")
            try:
                orphans = summary["levels"][0]["orphans"]
            except (KeyError, IndexError, TypeError):
                raise CorpusError(f"{self.path('cluster.json')}: no topic level summary")
            classification = self._artifact("cluster", "classification.tsv")
            self._hierarchy = read_classification(classification, topic_orphans=orphans)
            self.summary["cluster"] = summary
        return self._hierarchy

    def label(self) -> Dict[str, Dict[int, str]]:
        pubs, _ = self.corpus
        with self.stage("label"):
            hierarchy = self.hierarchy
            labels = {
                name: label_partition(partition, pubs, self.config.label, level=name)
                for name, partition in zip(hierarchy.names, hierarchy.levels)
            }
            write_labels(labels, self.path("labels.tsv"))
        self._labels = labels
        return labels

    @property
    def labels(self) -> Dict[str, Dict[int, str]]:
        if self._labels is None:
            path = self.path("labels.tsv")
            self._labels = read_labels(path) if path.is_file() else {}
        return self._labels

    def growth(self) -> List[GrowthRecord]:
        pubs, _ = self.corpus
        config = self.config.growth
        with self.stage("growth"):
            hierarchy = self.hierarchy
            years = {pub.year for pub in pubs}
            missing = [year for year in config.years if year not in years]
            if len(missing) == len(config.years):
                span = f"{config.years.start}-{config.years.stop - 1}"
                raise ConfigError({"growth": f"the corpus has no publications in {span}"})
            if missing:
                logger.warning("The corpus has no publications in %s", missing)
                self.warnings["growth_years_without_publications"] += len(missing)
            records = compute_growth(
                hierarchy.assignment(0),
                pubs,
                config,
                excluded_topics=hierarchy.levels[0].orphans,
                warnings=self.warnings,
            )
            write_growth(records, self.path("growth.tsv"))
        self._growth = records
        return records

    @property
    def growth_records(self) -> List[GrowthRecord]:
        if self._growth is None:
            self._growth = read_growth(self._artifact("growth", "growth.tsv"))
        return self._growth

    def fit(self) -> List[DisciplineFits]:
        pubs, edges = self.corpus
        config = self.config
        with self.stage("fit"):
            hierarchy = self.hierarchy
            growth = self.growth_records
            level = config.hierarchy.discipline_level
            if level not in hierarchy.names:
                raise ConfigError({"discipline_level": f"the hierarchy has no {level!r} level"})
            counted = count_citations(
                pubs, edges, config.corpus.window, config.corpus.cutoff_date, warnings=self.warnings
            )
            focal = filter_corpus(counted, config.corpus)
            disciplines = select_disciplines(hierarchy, focal, config)
            topic_of = hierarchy.assignment(0)
            discipline_of = hierarchy.assignment(config.hierarchy.discipline_level)
            labels = self.labels.get(config.hierarchy.discipline_level, {})

            rows = {}
            for discipline in disciplines:
                rows[discipline] = assemble_rows(focal, growth, topic_of, discipline_of, discipline, self.warnings)
                write_rows(rows[discipline], self.path(f"rows_{discipline}.tsv"))

            fits = self._fit_disciplines(rows)
            fits = [
                DisciplineFits(
                    discipline=item.discipline,
                    logistic=item.logistic,
                    quantiles=item.quantiles,
                    label=labels.get(item.discipline, ""),
                    n_publications=sum(1 for pub in focal if discipline_of.get(pub.pub_id) == item.discipline),
                    skipped=item.skipped,
                )
                for item in fits
            ]
            for item in fits:
                logistic_frame, quantile_frame = summarize_fits(item.logistic, item.quantiles)
                if logistic_frame is not None:
                    write_table(logistic_frame, self.path(f"logistic_{item.discipline}.tsv"))
                write_table(quantile_frame, self.path(f"quantile_{item.discipline}.tsv"))
            data = FitsSerializer({"hurdle": config.fit.hurdle, "mcmc": config.mcmc, "disciplines": fits}).data
            write_json(self.path("fits.json"), data)
        self._rows = rows
        self._fits = fits
        return fits

    def _fit_disciplines(self, rows: Dict[int, List[RegressionRow]]) -> List[DisciplineFits]:
        config = self.config
        jobs = []
        for discipline, discipline_rows in rows.items():
            jobs.append((_fit_logistic_job, (discipline_rows, config.fit.hurdle)))
            high = split_hurdle(discipline_rows, config.fit.hurdle).high
            for q in config.mcmc.quantiles:
                seed = derive_seed(config.mcmc.seed, discipline, quantile_key(q))
                jobs.append((_fit_quantile_job, (high, q, config.mcmc, seed)))

        workers = config.fit.workers or get_setting("WORKERS")
        if workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=workers) as executor:
                results = list(executor.map(_call, jobs))
        else:
            results = [_call(job) for job in jobs]

        fits = []
        position = 0
        for discipline in rows:
            logistic, reason = results[position]
            position += 1
            if reason:
                logger.warning("Discipline %s: logistic model skipped: %s", discipline, reason)
                self.warnings["logistic_skipped"] += 1
            quantiles = []
            for q in config.mcmc.quantiles:
                fit, quantile_reason = results[position]
                position += 1
                if fit is None:
                    logger.warning("Discipline %s: quantile %.2f skipped: %s", discipline, q, quantile_reason)
                    self.warnings["quantile_skipped"] += 1
                    continue
                if not fit.converged:
                    self.warnings["quantile_not_converged"] += 1
                quantiles.append(fit)
            fits.append(DisciplineFits(discipline=discipline, logistic=logistic, quantiles=quantiles, skipped=reason))
        return fits

    @property
    def fits(self) -> List[DisciplineFits]:
        if self._fits is None:
            serializer = FitsSerializer(data=self._read_artifact_json("fit", "fits.json"))
            if not serializer.is_valid():
                raise CorpusError(f"{self.path('fits.json')}: invalid fits ({serializer.errors})")
            self._fits = serializer.save()["disciplines"]
        return self._fits

    @property
    def rows(self) -> Dict[int, List[RegressionRow]]:
        if self._rows is None:
            self._rows = {
                item.discipline: read_rows(self._artifact("fit", f"rows_{item.discipline}.tsv")) for item in self.fits
            }
        return self._rows

    def report(self) -> Dict[str, Path]:
        with self.stage("report"):
            fits = self.fits
            rows = self.rows
            labels = {item.discipline: item.label for item in fits}
            counts = [
                discipline_counts(item.discipline, item.n_publications, rows[item.discipline], item.label)
                for item in fits
            ]
            write_table(emit_discipline_counts(counts), self.path("table1.tsv"))
            write_table(emit_discipline_summary(rows, labels), self.path("table2.tsv"))
            paths = {"table1": self.path("table1.tsv"), "table2": self.path("table2.tsv")}
            for item in fits:
                figures = emit_figures(
                    item.discipline, rows[item.discipline], item.quantiles, self.out, item.label, self.warnings
                )
                paths.update({f"{name}_{item.discipline}": path for name, path in figures.items()})
        return paths

    def run(self, synthetic: bool = False) -> Dict:
        if synthetic:
            self.synth()
        self.ingest()
        self.cluster()
        self.label()
        self.growth()
        self.fit()
        self.report()
        run_metadata = self.metadata()
        write_json(self.path("run.json"), run_metadata)
        self.write_timings()
        return run_metadata

    def metadata(self) -> Dict:
        fits = self.fits
        return {
            "version": __version__,
            "versions": package_versions(),
            "config": RunConfigSerializer(self.config).data,
            "seeds": {
                "cluster": self.config.cluster.seed,
                "mcmc": self.config.mcmc.seed,
                "fits": {
                    str(item.discipline): {str(fit.quantile): fit.seed for fit in item.quantiles} for item in fits
                },
            },
            "mcmc": McmcConfigSerializer(self.config.mcmc).data,
            "convergence": {
                str(item.discipline): {str(fit.quantile): fit.converged for fit in item.quantiles} for item in fits
            },
            "logistic": {
                str(item.discipline): None
                if item.logistic is None
                else {"separated": item.logistic.separated, "converged": item.logistic.converged}
                for item in fits
            },
            "skipped": {str(item.discipline): item.skipped for item in fits if item.skipped},
            "disciplines": [item.discipline for item in fits],
            "cluster": self.summary.get("cluster"),
            "corpus": self.summary.get("corpus"),
            "warnings": dict(sorted(self.warnings.items())),
        }

    def write_timings(self):
        with open(self.path("timings.log"), "w", encoding="utf-8") as handle:
            for name, seconds in self.timings:
                handle.write(f"{name}\t{seconds:.3f}\n")


def run_pipeline(config: RunConfig, synthetic: bool = False) -> Dict:
    return Pipeline(config).run(synthetic=synthetic)
