"""
CluStream-style online micro-clustering baseline.

Each micro-cluster keeps cluster features: the linear sum of its member
vectors, the sum of their squared norms, the squared norm of the linear
sum, the count and the first two moments of the timestamps. A document joins
its nearest micro-cluster when it lies within that cluster's maximal
boundary (boundary_factor x RMS radius); otherwise it founds a new one. At
capacity the stalest micro-cluster is dropped if it fell out of the
horizon, else the two closest are merged.

Documents are represented by their tokens-over-title-and-body subvector.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

from ..core.errors import ConfigError
from ..core.types import DocRepresentation, Document, SparseVector, sparse_dot, sparse_index

logger = logging.getLogger(__name__)

VECTOR_INDEX = sparse_index("tokens", "both")
EPSILON = 1e-9


@dataclass
class ClustreamConfig:
    """
    Attributes:
        max_clusters: micro-cluster capacity
        boundary_factor: multiple of the RMS radius accepted as inside
        initial_radius: boundary of a lone micro-cluster with no neighbour
        horizon_hours: micro-clusters whose relevance stamp is older than this may be dropped
    """
    max_clusters: int = 100
    boundary_factor: float = 2.0
    initial_radius: float = 1.0
    horizon_hours: float = 720.0

    def validate(self) -> "ClustreamConfig":
        if self.max_clusters < 1:
            raise ConfigError(f"max_clusters must be >= 1, got {self.max_clusters}")
        if not self.boundary_factor > 0:
            raise ConfigError(f"boundary_factor must be > 0, got {self.boundary_factor}")
        if not self.initial_radius > 0:
            raise ConfigError(f"initial_radius must be > 0, got {self.initial_radius}")
        return self


@dataclass
class MicroCluster:
    id: int
    linear_sum: SparseVector = field(default_factory=dict)
    squared_sum: float = 0.0
    linear_sq_norm: float = 0.0
    n: int = 0
    ts_sum: float = 0.0
    ts_sq_sum: float = 0.0

    def insert(self, vector: SparseVector, timestamp: float) -> None:
        self.linear_sq_norm += 2.0 * sparse_dot(self.linear_sum, vector) + sparse_dot(vector, vector)
        for term, weight in vector.items():
            self.linear_sum[term] = self.linear_sum.get(term, 0.0) + weight
        self.squared_sum += sparse_dot(vector, vector)
        self.n += 1
        self.ts_sum += timestamp
        self.ts_sq_sum += timestamp * timestamp

    def absorb(self, other: "MicroCluster") -> None:
        self.linear_sq_norm += 2.0 * sparse_dot(self.linear_sum, other.linear_sum) + other.linear_sq_norm
        for term, weight in other.linear_sum.items():
            self.linear_sum[term] = self.linear_sum.get(term, 0.0) + weight
        self.squared_sum += other.squared_sum
        self.n += other.n
        self.ts_sum += other.ts_sum
        self.ts_sq_sum += other.ts_sq_sum

    def distance(self, vector: SparseVector) -> float:
        """Euclidean distance from a vector to the centroid."""
        squared = (sparse_dot(vector, vector) - 2.0 * sparse_dot(vector, self.linear_sum) / self.n
                   + self.linear_sq_norm / (self.n * self.n))
        return math.sqrt(max(squared, 0.0))

    def centroid_distance(self, other: "MicroCluster") -> float:
        squared = (self.linear_sq_norm / (self.n * self.n) + other.linear_sq_norm / (other.n * other.n)
                   - 2.0 * sparse_dot(self.linear_sum, other.linear_sum) / (self.n * other.n))
        return math.sqrt(max(squared, 0.0))

    def rms_radius(self) -> float:
        return math.sqrt(max(self.squared_sum / self.n - self.linear_sq_norm / (self.n * self.n), 0.0))

    def relevance_stamp(self) -> float:
        """Mean plus one standard deviation of member timestamps."""
        mean = self.ts_sum / self.n
        variance = max(self.ts_sq_sum / self.n - mean * mean, 0.0)
        return mean + math.sqrt(variance)


class ClustreamBaseline:
    """Online micro-clustering over one language's documents."""

    def __init__(self, config: Optional[ClustreamConfig] = None):
        self.config = (config or ClustreamConfig()).validate()
        self.clusters: Dict[int, MicroCluster] = {}
        self.assignments: Dict[str, int] = {}
        self._parent: Dict[int, int] = {}
        self._next_id = 1

    def _find(self, cluster_id: int) -> int:
        root = cluster_id
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[cluster_id] != root:
            self._parent[cluster_id], cluster_id = root, self._parent[cluster_id]
        return root

    def _boundary(self, cluster: MicroCluster) -> float:
        if cluster.n > 1:
            return self.config.boundary_factor * cluster.rms_radius()
        others = [other.centroid_distance(cluster) for other in self.clusters.values() if other.id != cluster.id]
        return min([self.config.initial_radius] + others)

    def partial_fit(self, doc_id: str, rep: DocRepresentation) -> int:
        """Place one document; returns its micro-cluster id."""
        vector = rep.mono_subvectors[VECTOR_INDEX]
        nearest: Optional[Tuple[float, int]] = None
        for cluster_id in sorted(self.clusters):
            distance = self.clusters[cluster_id].distance(vector)
            if nearest is None or distance < nearest[0]:
                nearest = (distance, cluster_id)

        if nearest is not None and nearest[0] <= self._boundary(self.clusters[nearest[1]]) + EPSILON:
            cluster = self.clusters[nearest[1]]
        else:
            cluster = MicroCluster(id=self._next_id)
            self._next_id += 1
            self.clusters[cluster.id] = cluster
            self._parent[cluster.id] = cluster.id
        cluster.insert(vector, rep.timestamp)
        self.assignments[doc_id] = cluster.id

        if len(self.clusters) > self.config.max_clusters:
            self._make_room(rep.timestamp, keep=cluster.id)
        return cluster.id

    def _make_room(self, now: float, keep: int) -> None:
        stale = [c for c in self.clusters.values()
                 if c.id != keep and c.relevance_stamp() < now - self.config.horizon_hours]
        if stale:
            victim = min(stale, key=lambda c: (c.relevance_stamp(), c.id))
            del self.clusters[victim.id]
            logger.debug("dropped stale micro-cluster %d", victim.id)
            return

        ids = sorted(self.clusters)
        best = None
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                distance = self.clusters[a].centroid_distance(self.clusters[b])
                if best is None or distance < best[0]:
                    best = (distance, a, b)
        _, a, b = best
        self.clusters[a].absorb(self.clusters.pop(b))
        self._parent[b] = a
        logger.debug("merged micro-cluster %d into %d", b, a)

    def labels(self) -> Dict[str, int]:
        """Document -> cluster label, following merges."""
        return {doc_id: self._find(cluster_id) for doc_id, cluster_id in self.assignments.items()}


def clustream_baseline(stream: Iterable[Tuple[Document, DocRepresentation]],
                       config: Optional[ClustreamConfig] = None) -> Dict[str, Tuple[str, int]]:
    """
    Run one baseline per language over a stream.

    Returns:
        document id -> (language, cluster label)
    """
    baselines: Dict[str, ClustreamBaseline] = {}
    for doc, rep in stream:
        baseline = baselines.get(doc.language)
        if baseline is None:
            baseline = baselines[doc.language] = ClustreamBaseline(config)
        baseline.partial_fit(doc.id, rep)
    return {
        doc_id: (language, label)
        for language, baseline in sorted(baselines.items())
        for doc_id, label in baseline.labels().items()
    }
