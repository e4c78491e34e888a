"""
Domain types shared by every story-flow module.

A document is featurized into a fixed grid of subvectors: nine sparse TF-IDF
subvectors (feature class x section) and three dense embedding subvectors (one
per section). The order of both grids is fixed:

    sparse index = class_index * 3 + section_index
        classes:  tokens, lemmas, entities
        sections: both, title, body
    dense index  = section_index

so sparse index 0 is tokens over title+body.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .errors import InputError

FEATURE_CLASSES: Tuple[str, ...] = ("tokens", "lemmas", "entities")
SECTIONS: Tuple[str, ...] = ("both", "title", "body")

SPARSE_LAYOUT: Tuple[Tuple[str, str], ...] = tuple(
    (feature_class, section) for feature_class in FEATURE_CLASSES for section in SECTIONS
)
N_SPARSE = len(SPARSE_LAYOUT)
N_DENSE = len(SECTIONS)
N_SUBVECTORS = N_SPARSE + N_DENSE
N_TIME_FEATURES = 3
N_MONO_FEATURES = N_SPARSE + N_TIME_FEATURES
N_CROSS_FEATURES = N_DENSE + N_TIME_FEATURES

# Sparse subvectors map term -> weight; zero weights are never stored.
SparseVector = Dict[str, float]
DenseVector = np.ndarray
Language = str


def sparse_index(feature_class: str, section: str) -> int:
    """Position of a (feature class, section) pair in the sparse grid."""
    return FEATURE_CLASSES.index(feature_class) * len(SECTIONS) + SECTIONS.index(section)


def language_code(code: str) -> Language:
    """Normalize a language identifier; codes compare case-insensitively."""
    if code is None:
        raise InputError("language code is missing")
    normalized = str(code).strip().lower()
    if not normalized:
        raise InputError("language code is empty")
    return normalized


def sparse_norm(vector: SparseVector) -> float:
    return math.sqrt(sum(weight * weight for weight in vector.values()))


def sparse_dot(a: SparseVector, b: SparseVector) -> float:
    if len(a) > len(b):
        a, b = b, a
    return sum(weight * b[term] for term, weight in a.items() if term in b)


def sparse_cosine(a: SparseVector, b: SparseVector) -> float:
    """Cosine similarity; any zero vector scores 0."""
    norm_a = sparse_norm(a)
    norm_b = sparse_norm(b)
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return sparse_dot(a, b) / (norm_a * norm_b)


def sparse_normalize(vector: SparseVector) -> SparseVector:
    norm = sparse_norm(vector)
    if norm == 0.0:
        return {}
    return {term: weight / norm for term, weight in vector.items() if weight != 0.0}


def dense_normalize(vector: DenseVector) -> DenseVector:
    norm = float(np.linalg.norm(vector))
    if norm == 0.0:
        return np.zeros_like(vector, dtype=float)
    return vector / norm


@dataclass
class Document:
    """One stream item."""
    id: str
    language: Language
    title: str
    body: str
    timestamp: float  # hours since 1970-01-01
    gold_mono_label: Optional[str] = None
    gold_cross_label: Optional[str] = None

    def __post_init__(self):
        if not self.id:
            raise InputError("document id is empty")
        self.language = language_code(self.language)
        self.title = self.title or ""
        self.body = self.body or ""
        if not self.title and not self.body:
            raise InputError(f"document {self.id!r} has neither title nor body")
        self.timestamp = float(self.timestamp)
        if not math.isfinite(self.timestamp):
            raise InputError(f"document {self.id!r} has a non-finite timestamp")

    def to_dict(self) -> Dict[str, Any]:
        record = {
            "id": self.id,
            "language": self.language,
            "title": self.title,
            "body": self.body,
            "timestamp": self.timestamp,
        }
        if self.gold_mono_label is not None:
            record["gold_mono"] = self.gold_mono_label
        if self.gold_cross_label is not None:
            record["gold_cross"] = self.gold_cross_label
        return record


@dataclass
class DocRepresentation:
    """Featurized document: 9 sparse + 3 dense subvectors and a timestamp."""
    mono_subvectors: List[SparseVector]
    cross_subvectors: List[DenseVector]
    timestamp: float

    def __post_init__(self):
        if len(self.mono_subvectors) != N_SPARSE:
            raise ValueError(f"expected {N_SPARSE} sparse subvectors, got {len(self.mono_subvectors)}")
        if len(self.cross_subvectors) != N_DENSE:
            raise ValueError(f"expected {N_DENSE} dense subvectors, got {len(self.cross_subvectors)}")

    @property
    def embedding_dim(self) -> int:
        return int(self.cross_subvectors[0].shape[0])

    def subvector(self, index: int):
        if not 0 <= index < N_SUBVECTORS:
            raise IndexError(f"subvector index {index} out of range [0, {N_SUBVECTORS})")
        if index < N_SPARSE:
            return self.mono_subvectors[index]
        return self.cross_subvectors[index - N_SPARSE]


@dataclass
class Assignment:
    """Where one document landed."""
    doc_id: str
    language: Language
    mono_cluster: int
    cross_cluster: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.doc_id,
            "language": self.language,
            "mono_cluster": self.mono_cluster,
            "cross_cluster": self.cross_cluster,
        }


@dataclass
class DecisionTrace:
    """Audit record for one ingest step."""
    doc_id: str
    language: Language
    candidates: List[Tuple[int, float]] = field(default_factory=list)  # top-5 (cluster id, score)
    best_score: Optional[float] = None
    decision: str = "new"
    mono_cluster: int = 0
    cross_cluster: int = 0
    topples: List[Dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.doc_id,
            "language": self.language,
            "candidates": [[cluster_id, score] for cluster_id, score in self.candidates],
            "best_score": self.best_score,
            "decision": self.decision,
            "mono_cluster": self.mono_cluster,
            "cross_cluster": self.cross_cluster,
            "topples": self.topples,
        }
