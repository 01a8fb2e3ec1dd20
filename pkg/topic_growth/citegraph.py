"""
Direct-citation network with fractional link normalization.

The clustering graph is undirected: every citing/cited pair becomes one link
between the two publications, canonically ordered so that the lower node index
comes first. The directed citations are kept alongside (``arcs``) because the
out-links normalization needs them.
"""
import logging
from collections import Counter
from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, Tuple

import numpy as np
import pandas as pd
import scipy.sparse as sp

from .corpus import CitationEdge, Publication
from .exceptions import ConfigError

logger = logging.getLogger(__name__)

ALL_LINKS = "all_links"
OUT_LINKS = "out_links"
NORMALIZATIONS = (ALL_LINKS, OUT_LINKS)


@dataclass(frozen=True, eq=False)
class WeightedCitationGraph:
    node_ids: np.ndarray
    source: np.ndarray
    target: np.ndarray
    weight: np.ndarray
    # directed (citing index, cited index) pairs, shape (n_arcs, 2)
    arcs: np.ndarray
    # class sizes for aggregated graphs, ones for publication graphs
    node_sizes: np.ndarray
    # intra-class weight carried by an aggregated node
    self_mass: np.ndarray
    # per-link share attributed from the source side and from the target side
    attribution: Optional[np.ndarray] = None
    normalization: Optional[str] = None

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_links(self) -> int:
        return len(self.source)

    @property
    def links(self) -> List[Tuple[int, int, float]]:
        return list(
            zip(
                self.node_ids[self.source].tolist(),
                self.node_ids[self.target].tolist(),
                self.weight.tolist(),
            )
        )

    def degrees(self) -> np.ndarray:
        return np.bincount(self.source, minlength=self.n_nodes) + np.bincount(self.target, minlength=self.n_nodes)

    def adjacency(self) -> sp.csr_matrix:
        """
        Symmetric sparse adjacency matrix of the link weights.
        """
        rows = np.concatenate([self.source, self.target])
        cols = np.concatenate([self.target, self.source])
        data = np.concatenate([self.weight, self.weight])
        return sp.csr_matrix((data, (rows, cols)), shape=(self.n_nodes, self.n_nodes))


def make_graph(node_ids, source, target, weight, node_sizes=None, self_mass=None, arcs=None, **kwargs):
    n_nodes = len(node_ids)
    return WeightedCitationGraph(
        node_ids=np.asarray(node_ids, dtype=np.int64),
        source=np.asarray(source, dtype=np.int64),
        target=np.asarray(target, dtype=np.int64),
        weight=np.asarray(weight, dtype=float),
        arcs=np.empty((0, 2), dtype=np.int64) if arcs is None else np.asarray(arcs, dtype=np.int64).reshape(-1, 2),
        node_sizes=np.ones(n_nodes, dtype=np.int64) if node_sizes is None else np.asarray(node_sizes, dtype=np.int64),
        self_mass=np.zeros(n_nodes) if self_mass is None else np.asarray(self_mass, dtype=float),
        **kwargs,
    )


def build_network(
    pubs: Iterable[Publication], edges: Iterable[CitationEdge], warnings: Optional[Counter] = None
) -> WeightedCitationGraph:
    """
    One unit-weight link per distinct pair of publications connected by a
    citation. Citations with an endpoint outside the corpus are dropped.
    """
    node_ids = np.array(sorted({pub.pub_id for pub in pubs}), dtype=np.int64)
    pairs = np.array([(edge.citing, edge.cited) for edge in edges], dtype=np.int64).reshape(-1, 2)

    citing = np.searchsorted(node_ids, pairs[:, 0])
    cited = np.searchsorted(node_ids, pairs[:, 1])
    inside = (citing < len(node_ids)) & (cited < len(node_ids))
    inside[inside] &= (node_ids[citing[inside]] == pairs[inside, 0]) & (node_ids[cited[inside]] == pairs[inside, 1])
    inside &= citing != cited
    dropped = int((~inside).sum())
    if dropped:
        logger.warning("Dropped %d citation(s) with an endpoint outside the corpus", dropped)
    if warnings is not None:
        warnings["out_of_corpus_citations"] += dropped

    arcs = np.unique(np.column_stack([citing[inside], cited[inside]]), axis=0)
    undirected = np.unique(np.sort(arcs, axis=1), axis=0)
    logger.info("Built citation network: %d nodes, %d links", len(node_ids), len(undirected))
    return make_graph(
        node_ids,
        undirected[:, 0],
        undirected[:, 1],
        np.ones(len(undirected)),
        arcs=arcs,
    )


def _link_positions(graph: WeightedCitationGraph, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    keys = graph.source * graph.n_nodes + graph.target
    return np.searchsorted(keys, a * graph.n_nodes + b)


def normalize_links(graph: WeightedCitationGraph, mode: str = ALL_LINKS) -> WeightedCitationGraph:
    """
    Fractionally normalize the links of a publication graph.

    With ``all_links`` every publication spreads a unit of weight evenly over
    all its links (in- and out-links); with ``out_links`` only over the
    publications it cites. The clustering weight of a link is the sum of the
    shares attributed from both of its ends. Weights are always recomputed from
    the link structure, never from earlier weights.
    """
    if mode not in NORMALIZATIONS:
        raise ConfigError({"normalization": f"unknown normalization {mode!r}"})

    attribution = np.zeros((graph.n_links, 2))
    if mode == ALL_LINKS:
        degrees = graph.degrees()
        if graph.n_links:
            attribution[:, 0] = 1.0 / degrees[graph.source]
            attribution[:, 1] = 1.0 / degrees[graph.target]
    else:
        out_degrees = np.bincount(graph.arcs[:, 0], minlength=graph.n_nodes)
        if len(graph.arcs):
            share = 1.0 / out_degrees[graph.arcs[:, 0]]
            forward = graph.arcs[:, 0] < graph.arcs[:, 1]
            low = np.minimum(graph.arcs[:, 0], graph.arcs[:, 1])
            high = np.maximum(graph.arcs[:, 0], graph.arcs[:, 1])
            positions = _link_positions(graph, low, high)
            # forward arcs are emitted by the link's source, backward ones by its target
            np.add.at(attribution[:, 0], positions[forward], share[forward])
            np.add.at(attribution[:, 1], positions[~forward], share[~forward])

    return replace(graph, weight=attribution.sum(axis=1), attribution=attribution, normalization=mode)


def node_attribution_sums(graph: WeightedCitationGraph) -> np.ndarray:
    """
    Total weight attributed from each node's side; 1 for every node that
    distributes weight under the graph's normalization.
    """
    if graph.attribution is None:
        raise ConfigError({"normalization": "graph has not been normalized"})
    return np.bincount(graph.source, graph.attribution[:, 0], minlength=graph.n_nodes) + np.bincount(
        graph.target, graph.attribution[:, 1], minlength=graph.n_nodes
    )


def write_graph(graph: WeightedCitationGraph, path):
    frame = pd.DataFrame(
        {
            "node_a": graph.node_ids[graph.source],
            "node_b": graph.node_ids[graph.target],
            "weight": graph.weight,
        }
    )
    frame.to_csv(path, sep="\t", index=False, lineterminator="\n")
