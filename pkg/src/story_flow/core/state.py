"""
Clustering state: monolingual clusters per language, crosslingual clusters
grouping at most one monolingual cluster per language, and the indexes that
tie documents and clusters together.

Centroids are kept as running sums plus a member count, so inserting a
document costs O(nonzeros) and the mean is exact up to float rounding.
Document-to-cluster assignments are append-only.
"""

import heapq
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np

from .types import (
    N_DENSE, N_SPARSE, N_SUBVECTORS, DocRepresentation, Language, SparseVector, sparse_dot,
)

logger = logging.getLogger(__name__)

ClusterKey = Tuple[Language, int]


@dataclass
class MonolingualCluster:
    """A story cluster in one language."""
    id: int
    language: Language
    embedding_dim: int
    member_ids: List[str] = field(default_factory=list)
    mono_sums: List[SparseVector] = field(default_factory=lambda: [{} for _ in range(N_SPARSE)])
    cross_sums: np.ndarray = None
    ts_newest: float = -math.inf
    ts_oldest: float = math.inf
    ts_sum: float = 0.0
    # squared L2 norms of mono_sums, kept in step with every insertion
    sq_norms: List[float] = field(default_factory=lambda: [0.0] * N_SPARSE)

    def __post_init__(self):
        if self.cross_sums is None:
            self.cross_sums = np.zeros((N_DENSE, self.embedding_dim), dtype=float)

    @property
    def key(self) -> ClusterKey:
        return (self.language, self.id)

    @property
    def count(self) -> int:
        return len(self.member_ids)

    @property
    def ts_average(self) -> float:
        return self.ts_sum / self.count

    def add(self, doc_id: str, rep: DocRepresentation, top_k: Optional[int] = None) -> None:
        """Fold one document into the running sums."""
        for index, vector in enumerate(rep.mono_subvectors):
            if not vector:
                continue
            total = self.mono_sums[index]
            self.sq_norms[index] += 2.0 * sparse_dot(total, vector) + sum(w * w for w in vector.values())
            for term, weight in vector.items():
                total[term] = total.get(term, 0.0) + weight
            if top_k is not None and len(total) > top_k:
                self._prune(index, top_k)
        self.cross_sums += np.vstack(rep.cross_subvectors)
        self.member_ids.append(doc_id)
        self.ts_newest = max(self.ts_newest, rep.timestamp)
        self.ts_oldest = min(self.ts_oldest, rep.timestamp)
        self.ts_sum += rep.timestamp

    def _prune(self, index: int, top_k: int) -> None:
        # lossy: the dropped mass no longer contributes to the centroid
        total = self.mono_sums[index]
        kept = heapq.nsmallest(top_k, total.items(), key=lambda item: (-item[1], item[0]))
        self.mono_sums[index] = dict(kept)
        self.sq_norms[index] = sum(weight * weight for _, weight in kept)

    def sum_norm(self, index: int) -> float:
        return math.sqrt(max(self.sq_norms[index], 0.0))

    def centroid(self, subvector_index: int):
        """Mean of member subvectors: 9 sparse indices, then 3 dense."""
        if not 0 <= subvector_index < N_SUBVECTORS:
            raise IndexError(f"subvector index {subvector_index} out of range [0, {N_SUBVECTORS})")
        if subvector_index < N_SPARSE:
            count = self.count
            return {term: weight / count for term, weight in self.mono_sums[subvector_index].items()}
        return self.cross_sums[subvector_index - N_SPARSE] / self.count

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.id,
            "language": self.language,
            "members": list(self.member_ids),
            "count": self.count,
            "mono_sums": [dict(sorted(total.items())) for total in self.mono_sums],
            "cross_sums": self.cross_sums.tolist(),
            "ts_newest": self.ts_newest,
            "ts_oldest": self.ts_oldest,
            "ts_sum": self.ts_sum,
        }


@dataclass
class CrosslingualCluster:
    """A group of monolingual clusters, at most one per language."""
    id: int
    members: Dict[Language, int] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"id": self.id, "members": dict(sorted(self.members.items()))}


class ClusteringState:
    """
    All mutable clustering state.

    Single writer: insertion is strictly sequential. Readers (snapshots,
    metrics) must not run while a document is being ingested.
    """

    def __init__(self, embedding_dim: Optional[int] = None, centroid_top_k: Optional[int] = None):
        self.embedding_dim = embedding_dim
        self.centroid_top_k = centroid_top_k
        self.mono: Dict[Language, Dict[int, MonolingualCluster]] = {}
        self.cross: Dict[int, CrosslingualCluster] = {}
        self.home: Dict[ClusterKey, int] = {}
        self.doc_index: Dict[str, ClusterKey] = {}
        self._next_mono: Dict[Language, int] = {}
        self._next_cross = 1

    # Monolingual side

    def languages(self) -> List[Language]:
        return sorted(self.mono)

    def clusters(self, language: Language) -> List[MonolingualCluster]:
        """Clusters of a language in ascending id order."""
        return list(self.mono.get(language, {}).values())

    def iter_clusters(self) -> Iterator[MonolingualCluster]:
        for language in self.languages():
            yield from self.mono[language].values()

    def cluster(self, key: ClusterKey) -> MonolingualCluster:
        language, cluster_id = key
        return self.mono[language][cluster_id]

    def has_document(self, doc_id: str) -> bool:
        return doc_id in self.doc_index

    def create_cluster(self, language: Language, doc_id: str, rep: DocRepresentation) -> MonolingualCluster:
        """Open a new cluster; ids are allocated monotonically and never reused."""
        if self.embedding_dim is None:
            self.embedding_dim = rep.embedding_dim
        cluster_id = self._next_mono.get(language, 1)
        self._next_mono[language] = cluster_id + 1
        cluster = MonolingualCluster(id=cluster_id, language=language, embedding_dim=self.embedding_dim)
        self.mono.setdefault(language, {})[cluster_id] = cluster
        self.add_document(cluster, doc_id, rep)
        logger.debug("opened monolingual cluster %s/%d for %s", language, cluster_id, doc_id)
        return cluster

    def add_document(self, cluster: MonolingualCluster, doc_id: str, rep: DocRepresentation) -> None:
        cluster.add(doc_id, rep, self.centroid_top_k)
        self.doc_index[doc_id] = cluster.key

    # Crosslingual side

    def create_crosslingual(self, cluster: MonolingualCluster) -> CrosslingualCluster:
        cross_id = self._next_cross
        self._next_cross += 1
        group = CrosslingualCluster(id=cross_id)
        self.cross[cross_id] = group
        self.attach(cluster, cross_id)
        logger.debug("opened crosslingual cluster %d for %s/%d", cross_id, *cluster.key)
        return group

    def attach(self, cluster: MonolingualCluster, cross_id: int) -> None:
        group = self.cross[cross_id]
        if cluster.language in group.members:
            raise ValueError(f"crosslingual cluster {cross_id} already holds language {cluster.language!r}")
        if cluster.key in self.home:
            raise ValueError(f"cluster {cluster.key} is already attached to {self.home[cluster.key]}")
        group.members[cluster.language] = cluster.id
        self.home[cluster.key] = cross_id

    def detach(self, cluster: MonolingualCluster) -> Optional[int]:
        """Remove a cluster from its crosslingual home; the home may be left empty."""
        cross_id = self.home.pop(cluster.key, None)
        if cross_id is not None:
            del self.cross[cross_id].members[cluster.language]
        return cross_id

    def drop_if_empty(self, cross_id: Optional[int]) -> None:
        if cross_id is not None and cross_id in self.cross and not self.cross[cross_id].members:
            del self.cross[cross_id]

    def home_of(self, cluster: MonolingualCluster) -> Optional[int]:
        return self.home.get(cluster.key)

    def members(self, cross_id: int) -> List[MonolingualCluster]:
        group = self.cross[cross_id]
        return [self.mono[language][cluster_id] for language, cluster_id in sorted(group.members.items())]

    def crosslingual_ids(self) -> List[int]:
        return sorted(self.cross)

    # Audit

    def invariant_violations(self) -> List[str]:
        """Check the structural invariants; returns a list of problems."""
        errors = []
        for cluster in self.iter_clusters():
            if cluster.count < 1:
                errors.append(f"cluster {cluster.key} is empty")
            if cluster.key not in self.home:
                errors.append(f"cluster {cluster.key} has no crosslingual home")
            elif self.cross[self.home[cluster.key]].members.get(cluster.language) != cluster.id:
                errors.append(f"cluster {cluster.key} home {self.home[cluster.key]} does not list it")
            if not cluster.ts_oldest <= cluster.ts_average + 1e-9 or not cluster.ts_average <= cluster.ts_newest + 1e-9:
                errors.append(f"cluster {cluster.key} timestamp aggregates out of order")
        for cross_id, group in self.cross.items():
            if not group.members:
                errors.append(f"crosslingual cluster {cross_id} is empty")
            for language, cluster_id in group.members.items():
                if self.home.get((language, cluster_id)) != cross_id:
                    errors.append(f"crosslingual cluster {cross_id} lists {language}/{cluster_id} which lives elsewhere")
        for doc_id, key in self.doc_index.items():
            language, cluster_id = key
            if cluster_id not in self.mono.get(language, {}):
                errors.append(f"document {doc_id} points at missing cluster {key}")
        return errors

    def snapshot(self) -> Dict[str, Any]:
        return {
            "embedding_dim": self.embedding_dim,
            "monolingual": [cluster.to_dict() for cluster in self.iter_clusters()],
            "crosslingual": [self.cross[cross_id].to_dict() for cross_id in self.crosslingual_ids()],
        }
