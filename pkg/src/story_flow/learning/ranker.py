"""
Pairwise linear ranker.

Every (positive, negative) pair of a query becomes a difference vector; a
linear SVM without intercept on those differences learns weights that rank
positives above negatives. Each query's pairs share a total weight of 1, so
queries with many candidates do not dominate. The regularization constant
is picked by cross-validated pairwise accuracy over queries.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from sklearn.model_selection import KFold
from sklearn.svm import LinearSVC

from .ranking import RankingExample, ranking_accuracy
from ..core.errors import DegenerateTrainingDataError

logger = logging.getLogger(__name__)

DEFAULT_REGULARIZATION_GRID: Tuple[float, ...] = (0.01, 0.1, 1.0, 10.0)


@dataclass
class RankerFit:
    """Learned weights and how they were selected."""
    weights: np.ndarray
    regularization: float
    cv_accuracy: Optional[float] = None


def unique_queries(examples: Sequence[RankingExample]) -> List[RankingExample]:
    """Drop repeated query ids, keeping the first occurrence."""
    seen = set()
    unique = []
    for example in examples:
        if example.query_id in seen:
            continue
        seen.add(example.query_id)
        unique.append(example)
    return unique


def pairwise_dataset(examples: Sequence[RankingExample]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Difference vectors in both orientations with labels and sample weights.

    Returns:
        (X, y, sample_weight); each query contributes total weight 1
    """
    rows, labels, weights = [], [], []
    for example in examples:
        differences = example.pair_differences()
        if not len(differences):
            continue
        share = 0.5 / len(differences)
        rows.extend([differences, -differences])
        labels.extend([np.ones(len(differences)), -np.ones(len(differences))])
        weights.extend([np.full(len(differences), share)] * 2)
    if not rows:
        return np.zeros((0, 0)), np.zeros(0), np.zeros(0)
    return np.vstack(rows), np.concatenate(labels), np.concatenate(weights)


def fit_pairwise(examples: Sequence[RankingExample], regularization: float, seed: int = 0) -> np.ndarray:
    X, y, sample_weight = pairwise_dataset(examples)
    if not len(y):
        raise DegenerateTrainingDataError("no query has both a positive and a negative candidate")
    svm = LinearSVC(C=regularization, loss="hinge", dual=True, fit_intercept=False,
                    random_state=seed, max_iter=20000)
    svm.fit(X, y, sample_weight=sample_weight)
    return svm.coef_[0].copy()


def train_ranker(examples: Sequence[RankingExample], regularization: Optional[float] = None,
                 folds: int = 5, grid: Sequence[float] = DEFAULT_REGULARIZATION_GRID,
                 seed: int = 0) -> RankerFit:
    """
    Learn linear ranking weights.

    Args:
        examples: ranking queries; repeated query ids count once
        regularization: fixed C; when None it is chosen from `grid` by K-fold CV
        folds: number of cross-validation folds over queries
        grid: candidate C values (ties go to the earlier value)
        seed: seed for fold shuffling and the solver

    Raises:
        DegenerateTrainingDataError: no rankable pairs
    """
    queries = [example for example in unique_queries(examples) if len(example.pair_differences())]
    if not queries:
        raise DegenerateTrainingDataError("no query has both a positive and a negative candidate")

    cv_accuracy = None
    if regularization is None:
        regularization, cv_accuracy = select_regularization(queries, folds, grid, seed)

    weights = fit_pairwise(queries, regularization, seed)
    logger.info("ranker: %d queries, C=%g, training pairwise accuracy %.4f",
                len(queries), regularization, ranking_accuracy(weights, queries))
    return RankerFit(weights=weights, regularization=regularization, cv_accuracy=cv_accuracy)


def select_regularization(queries: Sequence[RankingExample], folds: int, grid: Sequence[float],
                          seed: int = 0) -> Tuple[float, Optional[float]]:
    """Best C by mean held-out pairwise accuracy; the first grid value when CV is impossible."""
    grid = list(grid)
    folds = min(folds, len(queries))
    if folds < 2 or len(grid) == 1:
        return grid[0], None

    splitter = KFold(n_splits=folds, shuffle=True, random_state=seed)
    splits = list(splitter.split(np.arange(len(queries))))
    best_c, best_accuracy = grid[0], -1.0
    for c in grid:
        scores = []
        for train_idx, test_idx in splits:
            train = [queries[i] for i in train_idx]
            test = [queries[i] for i in test_idx]
            weights = fit_pairwise(train, c, seed)
            scores.append(ranking_accuracy(weights, test))
        accuracy = float(np.mean(scores))
        logger.debug("ranker CV: C=%g accuracy %.4f", c, accuracy)
        if accuracy > best_accuracy:
            best_c, best_accuracy = c, accuracy
    return best_c, best_accuracy
