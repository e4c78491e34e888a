"""
Similarity functions.

Monolingual (document to cluster) scores weigh nine sparse cosines and three
timestamp features; crosslingual (cluster to cluster) scores weigh three
dense cosines and three timestamp features. The cosine of a zero vector is 0.
Cluster centroids are compared through their running sums, which is exact
since cosine ignores positive scaling.
"""

import math
from typing import Optional, Sequence

import numpy as np

from .models import CrossSimilarityModel, SimilarityModel
from ..core.errors import ConfigError, InputError
from ..core.state import MonolingualCluster
from ..core.types import (
    N_CROSS_FEATURES, N_DENSE, N_MONO_FEATURES, N_SPARSE, DocRepresentation, Language,
    sparse_dot, sparse_norm,
)

CROSS_MODES = ("sum", "pivot")


def time_feature(delta_hours: float, mu: float = 0.0, sigma: float = 72.0) -> float:
    """Gaussian kernel exp(-(t - mu)^2 / (2 sigma^2)), in (0, 1]."""
    if not sigma > 0:
        raise ConfigError(f"sigma must be > 0 hours, got {sigma}")
    return math.exp(-((delta_hours - mu) ** 2) / (2.0 * sigma * sigma))


def gamma(item, cluster: MonolingualCluster, mu: float = 0.0, sigma: float = 72.0) -> np.ndarray:
    """
    Timestamp features of a document against a cluster.

    Args:
        item: anything with a `timestamp` in hours (Document or DocRepresentation)
        cluster: non-empty cluster

    Returns:
        (newest, average, oldest) Gaussian features
    """
    t = item.timestamp
    return np.array([
        time_feature(t - cluster.ts_newest, mu, sigma),
        time_feature(t - cluster.ts_average, mu, sigma),
        time_feature(t - cluster.ts_oldest, mu, sigma),
    ])


def monolingual_features(rep: DocRepresentation, cluster: MonolingualCluster,
                         mu: float = 0.0, sigma: float = 72.0) -> np.ndarray:
    """The 12 features of a document against a cluster: 9 cosines then 3 timestamps."""
    features = np.zeros(N_MONO_FEATURES)
    for index in range(N_SPARSE):
        vector = rep.mono_subvectors[index]
        if not vector:
            continue
        sum_norm = cluster.sum_norm(index)
        doc_norm = sparse_norm(vector)
        if sum_norm == 0.0 or doc_norm == 0.0:
            continue
        features[index] = sparse_dot(vector, cluster.mono_sums[index]) / (doc_norm * sum_norm)
    features[N_SPARSE:] = gamma(rep, cluster, mu, sigma)
    return features


def gamma0(rep: DocRepresentation, cluster: MonolingualCluster, model: SimilarityModel,
           language: Optional[Language] = None) -> float:
    """
    Weighted document-to-cluster similarity.

    Raises:
        InputError: language is given and differs from the cluster's
    """
    if language is not None and language != cluster.language:
        raise InputError(f"cannot score a {language!r} document against a {cluster.language!r} cluster")
    return float(monolingual_features(rep, cluster, model.mu, model.sigma) @ model.weights)


def _row_cosines(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)
    dots = np.einsum("ij,ij->i", a, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(norms > 0.0, dots / np.where(norms > 0.0, norms, 1.0), 0.0)


def cross_features(c1: MonolingualCluster, c2: MonolingualCluster,
                   mu: float = 0.0, sigma: float = 72.0) -> np.ndarray:
    """
    The 6 features of a cluster pair: 3 dense cosines then 3 timestamps.

    Timestamp features compare like aggregates (newest with newest, average
    with average, oldest with oldest), so the pair score is symmetric when
    mu = 0.
    """
    features = np.zeros(N_CROSS_FEATURES)
    features[:N_DENSE] = _row_cosines(c1.cross_sums, c2.cross_sums)
    features[N_DENSE:] = [
        time_feature(c1.ts_newest - c2.ts_newest, mu, sigma),
        time_feature(c1.ts_average - c2.ts_average, mu, sigma),
        time_feature(c1.ts_oldest - c2.ts_oldest, mu, sigma),
    ]
    return features


def gamma1_pair(c1: MonolingualCluster, c2: MonolingualCluster, model: CrossSimilarityModel) -> float:
    return float(cross_features(c1, c2, model.mu, model.sigma) @ model.weights)


def scored_members(members: Sequence[MonolingualCluster], mode: str = "sum",
                   pivot: Optional[Language] = None) -> Sequence[MonolingualCluster]:
    """Members a crosslingual score is computed against: the pivot member if present, else all."""
    if mode not in CROSS_MODES:
        raise ConfigError(f"cross mode must be one of {', '.join(CROSS_MODES)}, got {mode!r}")
    if mode == "pivot":
        for member in members:
            if member.language == pivot:
                return [member]
    return members


def group_features(c: MonolingualCluster, members: Sequence[MonolingualCluster],
                   model: CrossSimilarityModel, mode: str = "sum",
                   pivot: Optional[Language] = None) -> np.ndarray:
    """Pair features of c summed over the scored members of a crosslingual cluster."""
    total = np.zeros(N_CROSS_FEATURES)
    for member in scored_members(members, mode, pivot):
        total += cross_features(c, member, model.mu, model.sigma)
    return total


def gamma1_to_crosslingual(c: MonolingualCluster, members: Sequence[MonolingualCluster],
                           model: CrossSimilarityModel, mode: str = "sum",
                           pivot: Optional[Language] = None) -> float:
    """
    Similarity of a monolingual cluster to a crosslingual cluster.

    Sum mode adds the pair scores over all members. Pivot mode uses only the
    pivot-language member and falls back to the sum when there is none. An
    empty member list scores 0.
    """
    return float(sum(gamma1_pair(c, member, model) for member in scored_members(members, mode, pivot)))
