"""
Merge classifier.

Instead of a fixed threshold, a linear classifier decides whether a
document joins its best cluster, looking at the maximum of each of the 12
features over the current pool of clusters.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np
from sklearn.svm import LinearSVC

from .ranking import replay_pool
from ..core.errors import ConfigError, DegenerateTrainingDataError
from ..core.types import N_MONO_FEATURES, DocRepresentation, Document
from ..similarity.models import ModelSet

logger = logging.getLogger(__name__)


@dataclass
class MergeModel:
    """Linear join/new decision: join iff weights . maxima + bias > 0."""
    weights: np.ndarray
    bias: float = 0.0

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.bias = float(self.bias)
        if self.weights.shape != (N_MONO_FEATURES,):
            raise ConfigError(f"merge model needs {N_MONO_FEATURES} weights, got {self.weights.shape}")
        if not (np.all(np.isfinite(self.weights)) and np.isfinite(self.bias)):
            raise ConfigError("merge model weights must be finite")

    def decision(self, maxima: np.ndarray) -> float:
        return float(np.dot(self.weights, maxima) + self.bias)

    @classmethod
    def constant(cls, join: bool) -> "MergeModel":
        return cls(np.zeros(N_MONO_FEATURES), 1.0 if join else -1.0)

    def to_dict(self) -> Dict[str, Any]:
        return {"weights": self.weights.tolist(), "bias": self.bias}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MergeModel":
        try:
            return cls(data["weights"], data.get("bias", 0.0))
        except KeyError as e:
            raise ConfigError(f"merge model record is missing {e}") from e


def generate_merge_data(stream: Iterable[Tuple[Document, DocRepresentation]],
                        models: ModelSet) -> Tuple[np.ndarray, np.ndarray]:
    """
    Replay a labeled stream and collect (feature maxima, join label) rows.

    The ranker's argmax picks the cluster; the gold labels decide whether the
    document joins it (its story is already in the pool) or starts a new one.
    Documents arriving at an empty pool emit nothing.
    """
    rows: List[np.ndarray] = []
    labels: List[int] = []
    for doc, rep, candidates, story_in_pool in replay_pool(stream, models):
        if not candidates:
            continue
        rows.append(np.max(np.vstack([features for _, features, _ in candidates]), axis=0))
        labels.append(1 if story_in_pool else 0)
    if not rows:
        return np.zeros((0, N_MONO_FEATURES)), np.zeros(0, dtype=int)
    return np.vstack(rows), np.array(labels, dtype=int)


def fit_merge(features: np.ndarray, labels: np.ndarray, regularization: float = 1.0,
              seed: int = 0) -> MergeModel:
    """
    Fit an L2-regularized linear SVM on (maxima, label) rows.

    Single-class data yields a constant model for that class.

    Raises:
        DegenerateTrainingDataError: no rows at all
    """
    if len(labels) == 0:
        raise DegenerateTrainingDataError("no merge examples: every document arrived at an empty pool")
    classes = np.unique(labels)
    if len(classes) == 1:
        join = bool(classes[0] == 1)
        logger.warning("merge training data has only %s examples; using a constant model",
                       "join" if join else "new")
        return MergeModel.constant(join)
    classifier = LinearSVC(C=regularization, loss="squared_hinge", dual=False, random_state=seed)
    classifier.fit(features, labels)
    return MergeModel(classifier.coef_[0], classifier.intercept_[0])


def train_merge(stream: Iterable[Tuple[Document, DocRepresentation]], models: Optional[ModelSet] = None,
                regularization: float = 1.0, seed: int = 0) -> MergeModel:
    """Replay a labeled stream with the given ranker and fit the merge classifier."""
    features, labels = generate_merge_data(stream, models or ModelSet())
    model = fit_merge(features, labels, regularization, seed)
    if len(labels):
        accuracy = float(np.mean((features @ model.weights + model.bias > 0).astype(int) == labels))
        logger.info("merge model: %d examples, training accuracy %.4f", len(labels), accuracy)
    return model


