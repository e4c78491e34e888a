"""
Ranking data for learning the similarity weights.

A labeled training stream is replayed through a simplified online
clusterer. For every document the current pool of clusters is split into
positives (clusters holding a document of the same gold story) and up to
20 negatives (the best-matching other clusters). Each candidate carries the
full feature vector, so a linear ranker can learn how to weigh them.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

import numpy as np

from ..clusterer.engine import Candidate, pick_best, score_candidates
from ..core.errors import ConfigError, InputError
from ..core.state import ClusteringState, MonolingualCluster
from ..core.types import (
    N_MONO_FEATURES, N_SPARSE, DocRepresentation, Document, Language,
)
from ..similarity.metrics import CROSS_MODES, group_features
from ..similarity.models import CrossSimilarityModel, ModelSet, SimilarityModel

logger = logging.getLogger(__name__)

POSITIVE_MODES = ("system", "gold")

# Cumulative feature columns of the ablation rows
FEATURE_GROUPS: Dict[str, Tuple[int, ...]] = {
    "tokens": (0, 1, 2),
    "+lemmas": tuple(range(6)),
    "+entities": tuple(range(N_SPARSE)),
    "+timestamps": tuple(range(N_MONO_FEATURES)),
}


@dataclass
class RankingConfig:
    """
    Settings of the ranking-data replay.

    Attributes:
        max_negatives: negatives kept per query, best-matching first
        positives: "system" replays the first-subvector clusterer and takes
            positives from its clusters; "gold" uses the gold clusters as the pool
        replay_tau: first-subvector cosine above which a document joins in "system" mode
        mu, sigma: Gaussian timestamp parameters for the emitted features
    """
    max_negatives: int = 20
    positives: str = "system"
    replay_tau: float = 0.5
    mu: float = 0.0
    sigma: float = 72.0

    def validate(self) -> "RankingConfig":
        if self.positives not in POSITIVE_MODES:
            raise ConfigError(f"positives must be one of {', '.join(POSITIVE_MODES)}, got {self.positives!r}")
        if self.max_negatives < 0:
            raise ConfigError(f"max_negatives must be >= 0, got {self.max_negatives}")
        if not self.sigma > 0:
            raise ConfigError(f"sigma must be > 0 hours, got {self.sigma}")
        return self


@dataclass
class RankingExample:
    """One query: a document (or cluster) and its scored candidates."""
    query_id: str
    features: np.ndarray  # (candidates, arity)
    relevance: np.ndarray  # 1 positive, 0 negative
    candidate_ids: List = field(default_factory=list)
    language: Optional[Language] = None

    @property
    def arity(self) -> int:
        return int(self.features.shape[1])

    def positives(self) -> np.ndarray:
        return self.features[self.relevance == 1]

    def negatives(self) -> np.ndarray:
        return self.features[self.relevance == 0]

    def pair_differences(self) -> np.ndarray:
        """positive - negative for every (positive, negative) pair."""
        pos, neg = self.positives(), self.negatives()
        if not len(pos) or not len(neg):
            return np.zeros((0, self.arity))
        return (pos[:, None, :] - neg[None, :, :]).reshape(-1, self.arity)


def label_of(doc: Document) -> str:
    if doc.gold_mono_label is None:
        raise InputError(f"document {doc.id!r} has no gold monolingual label")
    return doc.gold_mono_label


class _Pool:
    """Replay state: clusters plus the gold stories each one holds."""

    def __init__(self):
        self.state = ClusteringState(centroid_top_k=None)
        self.stories: Dict[Tuple[Language, int], Set[str]] = {}
        self.seen: Dict[Language, Set[str]] = {}
        self.gold_cluster: Dict[Tuple[Language, str], int] = {}

    def has_story(self, language: Language, story: str) -> bool:
        return story in self.seen.get(language, set())

    def add(self, doc: Document, rep: DocRepresentation, story: str, cluster_id: Optional[int]) -> int:
        if cluster_id is None:
            cluster = self.state.create_cluster(doc.language, doc.id, rep)
        else:
            cluster = self.state.mono[doc.language][cluster_id]
            self.state.add_document(cluster, doc.id, rep)
        self.stories.setdefault(cluster.key, set()).add(story)
        self.seen.setdefault(doc.language, set()).add(story)
        self.gold_cluster.setdefault((doc.language, story), cluster.id)
        return cluster.id


def replay_pool(stream: Iterable[Tuple[Document, DocRepresentation]],
                models: ModelSet) -> Iterator[Tuple[Document, DocRepresentation, List[Candidate], bool]]:
    """
    Replay a labeled stream, ranking with the models and deciding with the labels.

    Yields, before each document is added:
        (document, representation, scored candidates, story already in pool)
    """
    pool = _Pool()
    for doc, rep in stream:
        story = label_of(doc)
        candidates = score_candidates(pool.state, rep, doc.language, models.monolingual_for(doc.language))
        in_pool = pool.has_story(doc.language, story)
        yield doc, rep, candidates, in_pool
        best_id, _ = pick_best(candidates)
        pool.add(doc, rep, story, best_id if in_pool else None)


def generate_ranking_data(stream: Iterable[Tuple[Document, DocRepresentation]],
                          config: Optional[RankingConfig] = None) -> List[RankingExample]:
    """
    Emit one ranking query per document that has a positive in the pool.

    The pool is maintained with the first subvector (tokens over title and
    body) only, and negatives are ranked by it too. Emitted features are the
    full 12-dimensional vectors.

    Raises:
        InputError: a document has no gold monolingual label
    """
    config = (config or RankingConfig()).validate()
    first_only = SimilarityModel(q0=np.eye(N_SPARSE)[0], q1=np.zeros(3), mu=config.mu, sigma=config.sigma)
    pool = _Pool()
    examples: List[RankingExample] = []

    for doc, rep in stream:
        story = label_of(doc)
        scored = score_candidates(pool.state, rep, doc.language, first_only)
        positives = [c for c in scored if story in pool.stories[(doc.language, c[0])]]
        negatives = [c for c in scored if story not in pool.stories[(doc.language, c[0])]]
        negatives.sort(key=lambda c: (-c[2], c[0]))
        negatives = negatives[:config.max_negatives]

        if positives:
            chosen = positives + negatives
            examples.append(RankingExample(
                query_id=doc.id,
                features=np.vstack([features for _, features, _ in chosen]),
                relevance=np.array([1] * len(positives) + [0] * len(negatives), dtype=int),
                candidate_ids=[cluster_id for cluster_id, _, _ in chosen],
                language=doc.language,
            ))

        if config.positives == "gold":
            target = pool.gold_cluster.get((doc.language, story))
        else:
            best_id, best_score = pick_best(scored)
            target = best_id if best_score is not None and best_score > config.replay_tau else None
        pool.add(doc, rep, story, target)

    logger.info("generated %d ranking queries", len(examples))
    return examples


def _gold_clusters(stream: Iterable[Tuple[Document, DocRepresentation]]):
    clusters: Dict[Tuple[Language, str], MonolingualCluster] = {}
    links: Dict[Tuple[Language, str], str] = {}
    order: List[Tuple[Language, str]] = []
    for doc, rep in stream:
        key = (doc.language, label_of(doc))
        cluster = clusters.get(key)
        if cluster is None:
            cluster = MonolingualCluster(id=len(order) + 1, language=doc.language, embedding_dim=rep.embedding_dim)
            clusters[key] = cluster
            order.append(key)
        cluster.add(doc.id, rep)
        if doc.gold_cross_label is not None:
            links.setdefault(key, doc.gold_cross_label)
    return clusters, links, order


def generate_crosslingual_ranking_data(stream: Iterable[Tuple[Document, DocRepresentation]],
                                       model: Optional[CrossSimilarityModel] = None,
                                       config: Optional[RankingConfig] = None, mode: str = "sum",
                                       pivot: Optional[Language] = "en") -> List[RankingExample]:
    """
    Cluster-granularity ranking data for the crosslingual model.

    Gold monolingual clusters are taken in order of first arrival. Each one
    is a query against the gold crosslingual groups built so far that lack
    its language: its own group is the positive, the best other groups by
    dense both-section cosine are negatives. Features are the 6 pair
    features summed over the scored members of each group.
    """
    if mode not in CROSS_MODES:
        raise ConfigError(f"cross mode must be one of {', '.join(CROSS_MODES)}, got {mode!r}")
    config = (config or RankingConfig()).validate()
    model = model or CrossSimilarityModel(mu=config.mu, sigma=config.sigma)
    clusters, links, order = _gold_clusters(stream)
    groups: Dict[str, List[MonolingualCluster]] = {}
    examples: List[RankingExample] = []

    for key in order:
        link = links.get(key)
        if link is None:
            continue
        c = clusters[key]
        own = groups.get(link)
        if own and all(member.language != c.language for member in own):
            candidates = []
            for label, members in sorted(groups.items()):
                if any(member.language == c.language for member in members):
                    continue
                features = group_features(c, members, model, mode, pivot)
                candidates.append((label, features))
            positive = [item for item in candidates if item[0] == link]
            negatives = [item for item in candidates if item[0] != link]
            negatives.sort(key=lambda item: (-item[1][0], item[0]))
            chosen = positive + negatives[:config.max_negatives]
            examples.append(RankingExample(
                query_id=f"{key[0]}/{key[1]}",
                features=np.vstack([features for _, features in chosen]),
                relevance=np.array([1] + [0] * (len(chosen) - 1), dtype=int),
                candidate_ids=[label for label, _ in chosen],
                language=c.language,
            ))
        groups.setdefault(link, []).append(c)

    logger.info("generated %d crosslingual ranking queries", len(examples))
    return examples


def mask_features(examples: Sequence[RankingExample], keep: Sequence[int]) -> List[RankingExample]:
    """Copies of the examples with every column outside `keep` zeroed."""
    masked = []
    for example in examples:
        mask = np.zeros(example.arity)
        mask[list(keep)] = 1.0
        masked.append(RankingExample(example.query_id, example.features * mask, example.relevance.copy(),
                                     list(example.candidate_ids), example.language))
    return masked


def ranking_accuracy(weights: np.ndarray, examples: Sequence[RankingExample]) -> float:
    """Fraction of (positive, negative) pairs ranked strictly in the right order."""
    correct = total = 0
    for example in examples:
        differences = example.pair_differences()
        if not len(differences):
            continue
        correct += int(np.sum(differences @ weights > 0.0))
        total += len(differences)
    return correct / total if total else 1.0
