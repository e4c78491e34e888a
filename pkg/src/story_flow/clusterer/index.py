"""
Inverted term -> cluster index.

Only clusters sharing at least one term with a document can have a non-zero
sparse cosine with it. The "both" subvector of each feature class covers the
title and body terms, so indexing those three subvectors is enough.
"""

from collections import defaultdict
from typing import Dict, List, Set, Tuple

from ..core.types import FEATURE_CLASSES, DocRepresentation, Language, sparse_index

_INDEXED = tuple(sparse_index(feature_class, "both") for feature_class in FEATURE_CLASSES)


class ClusterIndex:
    """Postings of (subvector, term) keys to cluster ids, per language."""

    def __init__(self):
        self.postings: Dict[Language, Dict[Tuple[int, str], Set[int]]] = defaultdict(lambda: defaultdict(set))

    def add(self, language: Language, cluster_id: int, rep: DocRepresentation) -> None:
        table = self.postings[language]
        for index in _INDEXED:
            for term in rep.mono_subvectors[index]:
                table[(index, term)].add(cluster_id)

    def candidates(self, language: Language, rep: DocRepresentation) -> List[int]:
        """Cluster ids sharing a term with the document, ascending."""
        table = self.postings.get(language)
        if not table:
            return []
        found: Set[int] = set()
        for index in _INDEXED:
            for term in rep.mono_subvectors[index]:
                posting = table.get((index, term))
                if posting:
                    found |= posting
        return sorted(found)

    @classmethod
    def from_state(cls, state) -> "ClusterIndex":
        """Index the existing clusters of a state from their centroid sums."""
        index = cls()
        for cluster in state.iter_clusters():
            table = index.postings[cluster.language]
            for subvector in _INDEXED:
                for term in cluster.mono_sums[subvector]:
                    table[(subvector, term)].add(cluster.id)
        return index
