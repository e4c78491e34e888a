"""
Featurizer engine for story-flow.

Turns a Document into a DocRepresentation:

- nine sparse TF-IDF subvectors, one per (feature class, section), each
  L2-normalized unless all-zero;
- three dense subvectors, one per section, each the TF-IDF-weighted sum of
  the embeddings of in-vocabulary tokens, L2-normalized unless all-zero.

The "both" section counts title and body terms together.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from .embeddings import EmbeddingTable
from .idf import IdfTable
from ..annotators.base import Annotation, Annotator
from ..annotators.identity import IdentityAnnotator
from ..core.errors import ConfigError
from ..core.types import (
    FEATURE_CLASSES, SECTIONS, DocRepresentation, Document, Language, SparseVector,
    dense_normalize, sparse_normalize,
)

logger = logging.getLogger(__name__)

TF_SCHEMES = ("raw", "log", "binary")


@dataclass
class FeaturizerConfig:
    """Term-frequency scheme applied before IDF weighting."""
    tf_scheme: str = "raw"

    def validate(self) -> "FeaturizerConfig":
        if self.tf_scheme not in TF_SCHEMES:
            raise ConfigError(f"tf_scheme must be one of {', '.join(TF_SCHEMES)}, got {self.tf_scheme!r}")
        return self

    def tf(self, count: int) -> float:
        if self.tf_scheme == "log":
            return 1.0 + math.log(count)
        if self.tf_scheme == "binary":
            return 1.0
        return float(count)


class Featurizer:
    """
    Builds document representations from shared read-only tables.

    Safe to share across threads once constructed.
    """

    def __init__(self, idf: IdfTable, embeddings: Optional[EmbeddingTable] = None,
                 annotator: Optional[Annotator] = None, config: Optional[FeaturizerConfig] = None):
        self.idf = idf
        self.embeddings = embeddings if embeddings is not None else EmbeddingTable.empty()
        self.annotator = annotator or IdentityAnnotator()
        self.config = (config or FeaturizerConfig()).validate()
        logger.debug("featurizer: tf scheme %s, annotator %s, embedding dim %d",
                     self.config.tf_scheme, self.annotator.describe(), self.embeddings.dim)

    @property
    def embedding_dim(self) -> int:
        return self.embeddings.dim

    def represent(self, doc: Document) -> DocRepresentation:
        if not self.idf.has_language(doc.language):
            raise ConfigError(f"no IDF table loaded for language {doc.language!r}")

        annotations = self._annotate(doc)
        mono: List[SparseVector] = []
        for feature_class in FEATURE_CLASSES:
            for section in SECTIONS:
                counts = self._counts(annotations, feature_class, section)
                mono.append(self._tfidf(doc.language, feature_class, counts))

        cross = [
            self._dense(doc.language, self._counts(annotations, "tokens", section))
            for section in SECTIONS
        ]
        return DocRepresentation(mono_subvectors=mono, cross_subvectors=cross, timestamp=doc.timestamp)

    def _annotate(self, doc: Document) -> Dict[str, Annotation]:
        return {
            "title": self.annotator.annotate(doc.title),
            "body": self.annotator.annotate(doc.body),
        }

    @staticmethod
    def _counts(annotations: Dict[str, Annotation], feature_class: str, section: str) -> Counter:
        if section == "both":
            return (Counter(annotations["title"].stream(feature_class))
                    + Counter(annotations["body"].stream(feature_class)))
        return Counter(annotations[section].stream(feature_class))

    def _tfidf(self, language: Language, feature_class: str, counts: Counter) -> SparseVector:
        vector = {
            term: self.config.tf(count) * self.idf.idf(language, feature_class, term)
            for term, count in counts.items()
        }
        return sparse_normalize(vector)

    def _dense(self, language: Language, counts: Counter) -> np.ndarray:
        dim = self.embeddings.dim
        terms = list(counts)
        rows = self.embeddings.rows(terms)
        known = [(term, row) for term, row in zip(terms, rows) if row is not None]
        if not known:
            return np.zeros(dim, dtype=float)
        weights = np.array([
            self.config.tf(counts[term]) * self.idf.idf(language, "tokens", term) for term, _ in known
        ])
        vector = weights @ self.embeddings.matrix[[row for _, row in known]]
        return dense_normalize(vector)


def represent(doc: Document, idf: IdfTable, embeddings: Optional[EmbeddingTable] = None,
              annotator: Optional[Annotator] = None) -> DocRepresentation:
    """
    Convenience function to featurize one document.

    Args:
        doc: The document
        idf: IDF table holding the document's language
        embeddings: Crosslingual embeddings (empty table if omitted)
        annotator: Annotator (tokens-only fallback if omitted)

    Returns:
        The document representation
    """
    return Featurizer(idf, embeddings, annotator).represent(doc)
