"""
Constant Potts model clustering of the normalized citation network and the
topic → specialty → discipline → area hierarchy built on top of it.
"""
import heapq
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Union

import igraph as ig
import leidenalg as la
import numpy as np
import pandas as pd
import scipy.sparse as sp
from sklearn.metrics import adjusted_rand_score

from .citegraph import WeightedCitationGraph, make_graph
from .corpus import read_table
from .exceptions import ConfigError, CorpusError, PartitionError

logger = logging.getLogger(__name__)

LEVEL_NAMES = ("topic", "specialty", "discipline", "area")

# the RNG behind leidenalg takes a C int
_MAX_SEED = 2**31 - 1


@dataclass(frozen=True)
class ClusterConfig:
    resolution: float = 0.000125
    iterations: int = 100
    seed: int = 0
    min_class_size: int = 50
    n_starts: int = 1

    def __post_init__(self):
        errors = {}
        if not self.resolution > 0:
            errors["resolution"] = "resolution must be positive"
        if self.iterations < 1:
            errors["iterations"] = "at least one iteration is required"
        if self.min_class_size < 1:
            errors["min_class_size"] = "minimum class size must be positive"
        if self.n_starts < 1:
            errors["n_starts"] = "at least one start is required"
        if errors:
            raise ConfigError(errors)


def canonical_membership(membership: np.ndarray, node_sizes: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Relabel classes densely: largest class first, ties by lowest member index.
    """
    membership = np.asarray(membership, dtype=np.int64)
    if not len(membership):
        return membership
    labels, first, inverse = np.unique(membership, return_index=True, return_inverse=True)
    sizes = np.bincount(inverse, weights=node_sizes)
    order = np.lexsort((first, -sizes))
    new_label = np.empty(len(labels), dtype=np.int64)
    new_label[order] = np.arange(len(labels))
    return new_label[inverse.reshape(-1)]


@dataclass(frozen=True, eq=False)
class Partition:
    node_ids: np.ndarray
    membership: np.ndarray
    orphans: FrozenSet[int] = frozenset()

    @property
    def n_classes(self) -> int:
        return int(self.membership.max()) + 1 if len(self.membership) else 0

    @property
    def assignment(self) -> Dict[int, int]:
        return dict(zip(self.node_ids.tolist(), self.membership.tolist()))

    def class_sizes(self, node_sizes: Optional[np.ndarray] = None) -> np.ndarray:
        return np.bincount(self.membership, weights=node_sizes, minlength=self.n_classes)

    def members(self, class_id: int) -> np.ndarray:
        return self.node_ids[self.membership == class_id]

    @classmethod
    def from_assignment(cls, assignment: Mapping[int, int], node_ids: Optional[Sequence[int]] = None):
        if node_ids is None:
            node_ids = sorted(assignment)
        node_ids = np.asarray(node_ids, dtype=np.int64)
        missing = [node for node in node_ids.tolist() if node not in assignment]
        if missing:
            raise PartitionError(f"{len(missing)} node(s) without a class, e.g. {missing[:5]}")
        membership = np.array([assignment[node] for node in node_ids.tolist()], dtype=np.int64)
        return cls(node_ids=node_ids, membership=canonical_membership(membership))

    @classmethod
    def singletons(cls, node_ids):
        node_ids = np.asarray(node_ids, dtype=np.int64)
        return cls(node_ids=node_ids, membership=np.arange(len(node_ids), dtype=np.int64))


def _aligned_membership(graph: WeightedCitationGraph, partition: Union[Partition, Mapping[int, int]]) -> np.ndarray:
    if isinstance(partition, Partition):
        if np.array_equal(partition.node_ids, graph.node_ids):
            return partition.membership
        partition = partition.assignment
    missing = [node for node in graph.node_ids.tolist() if node not in partition]
    if missing:
        raise PartitionError(f"partition does not cover {len(missing)} node(s), e.g. {missing[:5]}")
    return np.array([partition[node] for node in graph.node_ids.tolist()], dtype=np.int64)


def cpm_quality(
    graph: WeightedCitationGraph, partition: Union[Partition, Mapping[int, int]], resolution: float
) -> float:
    """
    Σ_c [W_c − γ·n_c(n_c − 1)/2], with W_c the link weight inside class c
    (including the self mass of aggregated nodes) and n_c its size.
    """
    membership = _aligned_membership(graph, partition)
    if not len(membership):
        return 0.0
    _, membership = np.unique(membership, return_inverse=True)
    membership = membership.reshape(-1)
    n_classes = int(membership.max()) + 1
    inside = membership[graph.source] == membership[graph.target]
    internal = np.bincount(membership[graph.source[inside]], weights=graph.weight[inside], minlength=n_classes)
    internal += np.bincount(membership, weights=graph.self_mass, minlength=n_classes)
    sizes = np.bincount(membership, weights=graph.node_sizes, minlength=n_classes)
    return float(np.sum(internal - resolution * sizes * (sizes - 1) / 2))


@dataclass(frozen=True)
class LeidenRun:
    partition: Partition
    quality: float
    quality_trace: List[float] = field(default_factory=list)
    seed: int = 0


def _to_igraph(graph: WeightedCitationGraph) -> ig.Graph:
    network = ig.Graph(n=graph.n_nodes, edges=list(zip(graph.source.tolist(), graph.target.tolist())), directed=False)
    network.es["weight"] = graph.weight.tolist()
    return network


def run_leiden(graph: WeightedCitationGraph, config: ClusterConfig) -> LeidenRun:
    """
    Optimise CPM with the Leiden algorithm, keeping the best of
    ``config.n_starts`` seeded starts.

    Each start runs at most ``config.iterations`` outer iterations (local
    moving, refinement, aggregation) and stops early once an iteration no
    longer improves the partition. Self mass of aggregated nodes is constant
    for every partition and is therefore left out of the optimisation.
    """
    if graph.n_nodes == 0:
        empty = Partition(node_ids=graph.node_ids, membership=np.empty(0, dtype=np.int64))
        return LeidenRun(partition=empty, quality=0.0, seed=config.seed)

    network = _to_igraph(graph)
    best = None
    for start in range(config.n_starts):
        seed = (config.seed + start) % _MAX_SEED
        partition = la.CPMVertexPartition(
            network,
            weights="weight",
            node_sizes=graph.node_sizes.tolist(),
            resolution_parameter=config.resolution,
        )
        optimiser = la.Optimiser()
        optimiser.set_rng_seed(seed)
        trace = [partition.quality()]
        for iteration in range(config.iterations):
            improvement = optimiser.optimise_partition(partition, n_iterations=1)
            trace.append(partition.quality())
            if improvement <= 0:
                logger.debug("Leiden start %d stable after %d iteration(s)", start, iteration + 1)
                break
        membership = canonical_membership(np.array(partition.membership), graph.node_sizes)
        result = Partition(node_ids=graph.node_ids, membership=membership)
        quality = cpm_quality(graph, result, config.resolution)
        if best is None or quality > best.quality:
            best = LeidenRun(partition=result, quality=quality, quality_trace=trace, seed=seed)

    logger.info(
        "Leiden/CPM at resolution %g: %d classes over %d nodes, quality %.6g",
        config.resolution,
        best.partition.n_classes,
        graph.n_nodes,
        best.quality,
    )
    return best


def leiden_cpm(graph: WeightedCitationGraph, config: ClusterConfig) -> Partition:
    return run_leiden(graph, config).partition


def reclassify_small(graph: WeightedCitationGraph, partition: Partition, min_size: int) -> Partition:
    """
    Dissolve classes smaller than ``min_size``, smallest first.

    Every member of a dissolved class joins the other class it has the largest
    link weight to. Members without any such link follow the class that the
    dissolved class as a whole is most strongly linked to. A small class with no
    external links at all is kept as an orphan.
    """
    membership = _aligned_membership(graph, partition).copy()
    n_classes = int(membership.max()) + 1 if len(membership) else 0
    sizes = np.bincount(membership, weights=graph.node_sizes, minlength=n_classes)
    adjacency = graph.adjacency()
    alive = np.ones(n_classes, dtype=bool)
    orphans = set(partition.orphans)

    heap = [(sizes[c], c) for c in range(n_classes) if sizes[c] < min_size and c not in orphans]
    heapq.heapify(heap)
    dissolved = 0
    while heap:
        size, class_id = heapq.heappop(heap)
        if not alive[class_id] or class_id in orphans or size != sizes[class_id] or size >= min_size:
            continue
        members = np.flatnonzero(membership == class_id)
        block = adjacency[members].tocoo()
        neighbour_class = membership[block.col]
        outside = neighbour_class != class_id
        if not outside.any():
            orphans.add(class_id)
            logger.debug("Class %d (size %d) has no external links, kept as orphan", class_id, size)
            continue
        # members × classes weight table, restricted to links leaving the class
        weights = sp.csr_matrix(
            (block.data[outside], (block.row[outside], neighbour_class[outside])),
            shape=(len(members), n_classes),
        )
        fallback = int(np.asarray(weights.sum(axis=0)).ravel().argmax())
        for row, node in enumerate(members):
            member_weights = weights.getrow(row)
            # ties resolve to the lowest class id
            target = int(member_weights.toarray().argmax()) if member_weights.nnz else fallback
            membership[node] = target
            sizes[target] += graph.node_sizes[node]
            if sizes[target] < min_size and target not in orphans:
                heapq.heappush(heap, (sizes[target], target))
        sizes[class_id] = 0
        alive[class_id] = False
        dissolved += 1

    if orphans:
        logger.warning("%d small class(es) without external links kept as orphans", len(orphans))
    logger.info("Reclassified %d class(es) below %d members", dissolved, min_size)

    relabelled = canonical_membership(membership, graph.node_sizes)
    mapping = dict(zip(membership.tolist(), relabelled.tolist()))
    return Partition(
        node_ids=graph.node_ids,
        membership=relabelled,
        orphans=frozenset(mapping[c] for c in orphans if c in mapping),
    )


def aggregate_network(graph: WeightedCitationGraph, partition: Partition) -> WeightedCitationGraph:
    """
    Collapse every class to one node. Links between classes add up; links
    inside a class become the class node's self mass.
    """
    membership = _aligned_membership(graph, partition)
    n_classes = int(membership.max()) + 1 if len(membership) else 0
    a = membership[graph.source]
    b = membership[graph.target]
    inside = a == b
    self_mass = np.bincount(membership, weights=graph.self_mass, minlength=n_classes)
    self_mass += np.bincount(a[inside], weights=graph.weight[inside], minlength=n_classes)
    low = np.minimum(a[~inside], b[~inside])
    high = np.maximum(a[~inside], b[~inside])
    between = sp.coo_matrix((graph.weight[~inside], (low, high)), shape=(n_classes, n_classes)).tocsr().tocoo()
    return make_graph(
        np.arange(n_classes),
        between.row,
        between.col,
        between.data,
        node_sizes=np.bincount(membership, weights=graph.node_sizes, minlength=n_classes),
        self_mass=self_mass,
        normalization="aggregated",
    )


@dataclass(frozen=True, eq=False)
class ClassificationHierarchy:
    names: Sequence[str]
    # publication-level partitions, finest first
    levels: List[Partition]
    # parents[i][c] is the level i+1 class containing level i class c
    parents: List[np.ndarray]
    resolutions: Sequence[float] = ()
    qualities: Sequence[float] = ()

    @property
    def node_ids(self) -> np.ndarray:
        return self.levels[0].node_ids

    def index(self, level: Union[int, str]) -> int:
        if isinstance(level, str):
            return list(self.names).index(level)
        return level

    def level(self, level: Union[int, str]) -> Partition:
        return self.levels[self.index(level)]

    def assignment(self, level: Union[int, str]) -> Dict[int, int]:
        return self.level(level).assignment


def level_names(n_levels: int) -> List[str]:
    return [LEVEL_NAMES[i] if i < len(LEVEL_NAMES) else f"level{i}" for i in range(n_levels)]


def build_hierarchy(
    graph: WeightedCitationGraph, resolutions: Sequence[float], config: ClusterConfig
) -> ClassificationHierarchy:
    """
    Cluster the publication graph into topics, then repeatedly cluster the
    aggregated class network at the next (smaller) resolution.

    Aggregated nodes carry the publication counts of their classes, so each
    coarser level optimises the same publication-level CPM restricted to
    partitions that nest the level below.
    """
    resolutions = list(resolutions)
    if not resolutions:
        raise ConfigError({"resolutions": "at least one resolution is required"})
    if any(coarser >= finer for finer, coarser in zip(resolutions, resolutions[1:])):
        raise ConfigError({"resolutions": "resolutions must be strictly decreasing"})

    run = run_leiden(graph, replace(config, resolution=resolutions[0]))
    topics = reclassify_small(graph, run.partition, config.min_class_size)
    levels = [topics]
    parents = []
    qualities = [cpm_quality(graph, topics, resolutions[0])]

    class_graph, current = graph, topics
    for depth, resolution in enumerate(resolutions[1:], start=1):
        class_graph = aggregate_network(class_graph, current)
        run = run_leiden(class_graph, replace(config, resolution=resolution, seed=config.seed + depth))
        current = run.partition
        parents.append(current.membership)
        levels.append(Partition(node_ids=graph.node_ids, membership=current.membership[levels[-1].membership]))
        qualities.append(run.quality)

    names = level_names(len(levels))
    for name, partition in zip(names, levels):
        logger.info("Level %s: %d classes", name, partition.n_classes)
    return ClassificationHierarchy(
        names=names, levels=levels, parents=parents, resolutions=resolutions, qualities=qualities
    )


def adjusted_rand_index(partition: Partition, reference: Mapping[int, int]) -> float:
    """
    Chance-corrected agreement with a reference assignment over the nodes both
    cover.
    """
    shared = [node for node in partition.node_ids.tolist() if node in reference]
    predicted = partition.assignment
    return float(adjusted_rand_score([reference[node] for node in shared], [predicted[node] for node in shared]))


def write_classification(hierarchy: ClassificationHierarchy, path):
    columns = {"pub_id": hierarchy.node_ids}
    for name, partition in zip(hierarchy.names, hierarchy.levels):
        columns[f"{name}_id"] = partition.membership
    pd.DataFrame(columns).to_csv(path, sep="\t", index=False, lineterminator="\n")


def read_classification(path, topic_orphans: Sequence[int] = ()) -> ClassificationHierarchy:
    frame = read_table(path, ["pub_id"])
    level_columns = [column for column in frame.columns if column.endswith("_id") and column != "pub_id"]
    if not level_columns:
        raise CorpusError(f"{path}: no class id columns")
    levels = []
    parents = []
    try:
        frame = frame.sort_values("pub_id")
        node_ids = frame["pub_id"].to_numpy(dtype=np.int64)
        for position, column in enumerate(level_columns):
            orphans = frozenset(topic_orphans) if position == 0 else frozenset()
            membership = frame[column].to_numpy(dtype=np.int64)
            levels.append(Partition(node_ids=node_ids, membership=membership, orphans=orphans))
        for finer, coarser in zip(levels, levels[1:]):
            parent = np.zeros(finer.n_classes, dtype=np.int64)
            parent[finer.membership] = coarser.membership
            parents.append(parent)
    except (TypeError, ValueError, IndexError) as exc:
        raise CorpusError(f"{path}: {exc}")
    names = [column[: -len("_id")] for column in level_columns]
    return ClassificationHierarchy(names=names, levels=levels, parents=parents)
