"""
Pairwise clustering metrics.

A pair of elements is a true positive when both partitions put it in one
cluster. Counts come from the contingency table of the two labelings,
tp = sum over cells of C(n_ij, 2), instead of enumerating pairs.
"""

from collections import Counter
from dataclasses import asdict, dataclass
from typing import Any, Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from sklearn.metrics.cluster import contingency_matrix

from ..core.errors import PartitionMismatchError
from ..core.types import Assignment, Document


@dataclass
class PairwiseMetrics:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _pairs(counts: np.ndarray) -> int:
    counts = counts.astype(np.int64)
    return int(np.sum(counts * (counts - 1) // 2))


def _codes(labels: Sequence[Hashable]) -> np.ndarray:
    index: Dict[Hashable, int] = {}
    return np.array([index.setdefault(label, len(index)) for label in labels], dtype=np.int64)


def metrics_from_counts(tp: int, fp: int, fn: int) -> PairwiseMetrics:
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return PairwiseMetrics(precision, recall, f1, tp, fp, fn)


def pairwise_metrics(predicted: Mapping[Hashable, Hashable], gold: Mapping[Hashable, Hashable]) -> PairwiseMetrics:
    """
    Pairwise precision, recall and F1 of a predicted partition.

    Args:
        predicted: element id -> predicted cluster label
        gold: element id -> gold cluster label

    Raises:
        PartitionMismatchError: the two partitions cover different ids
    """
    if predicted.keys() != gold.keys():
        missing = sorted(map(str, gold.keys() - predicted.keys()))[:5]
        extra = sorted(map(str, predicted.keys() - gold.keys()))[:5]
        raise PartitionMismatchError(f"partitions differ: missing {missing}, unexpected {extra}")
    if len(gold) < 2:
        return metrics_from_counts(0, 0, 0)

    ids = list(gold)
    table = contingency_matrix(_codes([gold[i] for i in ids]), _codes([predicted[i] for i in ids]), sparse=True)
    tp = _pairs(table.data)
    gold_pairs = _pairs(np.asarray(table.sum(axis=1)).ravel())
    predicted_pairs = _pairs(np.asarray(table.sum(axis=0)).ravel())
    return metrics_from_counts(tp, predicted_pairs - tp, gold_pairs - tp)


def partition_labels(clusters: Iterable[Iterable[Hashable]]) -> Dict[Hashable, int]:
    """Turn a list of clusters into an element -> cluster index map."""
    labels: Dict[Hashable, int] = {}
    for label, members in enumerate(clusters):
        for element in members:
            labels[element] = label
    return labels


def majority_gold(cluster_docs: Mapping[Hashable, List[Hashable]],
                  gold: Mapping[Hashable, Hashable]) -> Dict[Hashable, Optional[Hashable]]:
    """
    Map each predicted cluster to the most frequent gold label of its documents.

    Ties go to the smallest label by string order; clusters with no labeled
    document map to None.
    """
    mapping: Dict[Hashable, Optional[Hashable]] = {}
    for cluster, docs in cluster_docs.items():
        votes = Counter(gold[doc] for doc in docs if gold.get(doc) is not None)
        if not votes:
            mapping[cluster] = None
            continue
        top = max(votes.values())
        mapping[cluster] = min((label for label, count in votes.items() if count == top), key=str)
    return mapping


def crosslingual_metrics(predicted_links: Mapping[Hashable, Hashable],
                         gold_links: Mapping[Hashable, Hashable]) -> PairwiseMetrics:
    """Pairwise metrics where the elements are monolingual clusters."""
    return pairwise_metrics(predicted_links, gold_links)


def crosslingual_metrics_for(assignments: Sequence[Assignment], docs: Iterable[Document]) -> PairwiseMetrics:
    """
    Crosslingual metrics of a clustering run against labeled documents.

    Each predicted monolingual cluster stands for the gold monolingual
    cluster most of its documents belong to, and inherits that cluster's
    gold crosslingual label. Clusters without one are gold singletons.
    """
    docs = list(docs)
    gold_mono = {doc.id: (doc.language, doc.gold_mono_label) for doc in docs if doc.gold_mono_label is not None}
    gold_cross: Dict[Tuple[str, str], Hashable] = {}
    for doc in docs:
        if doc.gold_mono_label is not None and doc.gold_cross_label is not None:
            gold_cross.setdefault((doc.language, doc.gold_mono_label), doc.gold_cross_label)

    cluster_docs: Dict[Tuple[str, int], List[str]] = {}
    predicted_links: Dict[Tuple[str, int], Hashable] = {}
    for assignment in assignments:
        key = (assignment.language, assignment.mono_cluster)
        cluster_docs.setdefault(key, []).append(assignment.doc_id)
        predicted_links[key] = assignment.cross_cluster

    gold_links: Dict[Tuple[str, int], Hashable] = {}
    for key, gold_cluster in majority_gold(cluster_docs, gold_mono).items():
        link = gold_cross.get(gold_cluster) if gold_cluster is not None else None
        gold_links[key] = ("linked", link) if link is not None else ("singleton", key)
    return crosslingual_metrics(predicted_links, gold_links)


def monolingual_metrics_for(assignments: Sequence[Assignment], docs: Iterable[Document],
                            language: Optional[str] = None) -> PairwiseMetrics:
    """Document-level metrics over labeled documents, optionally for one language."""
    gold = {
        doc.id: (doc.language, doc.gold_mono_label) for doc in docs
        if doc.gold_mono_label is not None and (language is None or doc.language == language)
    }
    predicted = {
        a.doc_id: (a.language, a.mono_cluster) for a in assignments if a.doc_id in gold
    }
    return pairwise_metrics(predicted, gold)
