"""
Online clustering engine for story-flow.

Each incoming document is scored against every monolingual cluster of its
language and either joins the best one or founds a new one. The touched
cluster is then (re)placed in the crosslingual space. Assignments of
documents to monolingual clusters are never revised.
"""

import logging
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .config import ClustererConfig
from .domino import domino_topple, rank_crosslingual
from .index import ClusterIndex
from ..core.errors import ConfigError, DuplicateDocumentError
from ..core.state import ClusteringState, MonolingualCluster
from ..core.types import N_MONO_FEATURES, Assignment, DecisionTrace, DocRepresentation, Document, Language
from ..similarity.metrics import monolingual_features
from ..similarity.models import CrossSimilarityModel, ModelSet, SimilarityModel

logger = logging.getLogger(__name__)

TRACE_CANDIDATES = 5

Candidate = Tuple[int, np.ndarray, float]  # (cluster id, 12 features, score)


def score_candidates(state: ClusteringState, rep: DocRepresentation, language: Language,
                     model: SimilarityModel, index: Optional[ClusterIndex] = None) -> List[Candidate]:
    """Features and scores of the document against the language's clusters, ascending id."""
    clusters = state.mono.get(language, {})
    if index is not None:
        ids = index.candidates(language, rep)
    else:
        ids = list(clusters)
    weights = model.weights
    scored = []
    for cluster_id in ids:
        features = monolingual_features(rep, clusters[cluster_id], model.mu, model.sigma)
        scored.append((cluster_id, features, float(features @ weights)))
    return scored


def pick_best(candidates: List[Candidate]) -> Tuple[Optional[int], Optional[float]]:
    """Argmax over ascending-id candidates; equal scores keep the lower id."""
    best_id, best_score = None, None
    for cluster_id, _, score in candidates:
        if best_score is None or score > best_score:
            best_id, best_score = cluster_id, score
    return best_id, best_score


def feature_maxima(candidates: List[Candidate]) -> np.ndarray:
    """Per-feature maximum over the pool; zeros for an empty pool."""
    if not candidates:
        return np.zeros(N_MONO_FEATURES)
    return np.max(np.vstack([features for _, features, _ in candidates]), axis=0)


def best_monolingual(state: ClusteringState, rep: DocRepresentation, language: Language,
                     model: SimilarityModel) -> Tuple[Optional[int], Optional[float]]:
    """
    Best-scoring monolingual cluster of a language.

    Returns:
        (cluster id, score), or (None, None) when the language has no clusters
    """
    return pick_best(score_candidates(state, rep, language, model))


def merge_decision(best_score: Optional[float], maxima: np.ndarray, config: ClustererConfig,
                   merge_model=None) -> bool:
    """
    Join the best cluster (True) or found a new one (False).

    Threshold policy joins iff best_score > tau. Classifier policy joins iff
    the merge model scores the feature maxima above 0. With no candidate
    there is nothing to join.
    """
    if best_score is None:
        return False
    if config.merge_policy == "classifier":
        if merge_model is None:
            raise ConfigError("merge_policy 'classifier' needs a merge model")
        return merge_model.decision(maxima) > 0.0
    return best_score > config.tau


def update_g(state: ClusteringState, touched: MonolingualCluster, model: CrossSimilarityModel,
             config: ClustererConfig, trace: Optional[DecisionTrace] = None) -> int:
    """
    Crosslingual placement of the cluster a document just touched.

    Immutable mode keeps an existing home and otherwise attaches to the best
    crosslingual cluster lacking the cluster's language (or a new one).
    Domino mode detaches the cluster and re-places it with toppling.

    Returns:
        The touched cluster's crosslingual cluster id
    """
    if not config.crosslingual or config.g_update == "immutable":
        home = state.home_of(touched)
        if home is not None:
            return home
        if config.crosslingual:
            for cross_id, _ in rank_crosslingual(state, touched, model, config):
                if touched.language not in state.cross[cross_id].members:
                    state.attach(touched, cross_id)
                    return cross_id
        return state.create_crosslingual(touched).id

    old_home = state.detach(touched)
    fallback = old_home if old_home is not None and not state.cross[old_home].members else None
    topples = domino_topple(state, touched, model, config, fallback)
    if trace is not None:
        trace.topples.extend(topples)
    new_home = state.home_of(touched)
    if old_home != new_home:
        state.drop_if_empty(old_home)
    return new_home


class OnlineClusterer:
    """
    Stateful wrapper running the online algorithm over a stream.

    Holds the clustering state, the models and the settings, and records
    one Assignment per ingested document. Decision traces go to trace_sink
    when one is given and are kept in memory only while keep_traces is set.
    """

    def __init__(self, models: Optional[ModelSet] = None, config: Optional[ClustererConfig] = None,
                 state: Optional[ClusteringState] = None,
                 trace_sink: Optional[Callable[[DecisionTrace], None]] = None, keep_traces: bool = True):
        self.models = models or ModelSet()
        self.config = (config or ClustererConfig()).validate()
        if self.config.merge_policy == "classifier" and self.models.merge is None:
            raise ConfigError("merge_policy 'classifier' needs a merge model")
        self.state = state or ClusteringState(centroid_top_k=self.config.centroid_top_k)
        self.index = ClusterIndex.from_state(self.state) if self.config.candidate_index else None
        self.assignments: List[Assignment] = []
        self.traces: List[DecisionTrace] = []
        self.trace_sink = trace_sink
        self.keep_traces = keep_traces
        self.topple_counts: List[int] = []

    def ingest(self, doc: Document, rep: DocRepresentation) -> Tuple[int, int, DecisionTrace]:
        """
        Assign one document.

        Returns:
            (monolingual cluster id, crosslingual cluster id, decision trace)

        Raises:
            DuplicateDocumentError: the id was ingested before
        """
        state, config = self.state, self.config
        if state.has_document(doc.id):
            raise DuplicateDocumentError(f"document {doc.id!r} was already ingested")

        language = doc.language
        candidates = score_candidates(state, rep, language, self.models.monolingual_for(language), self.index)
        best_id, best_score = pick_best(candidates)
        join = merge_decision(best_score, feature_maxima(candidates), config, self.models.merge)

        if join:
            cluster = state.mono[language][best_id]
            state.add_document(cluster, doc.id, rep)
        else:
            cluster = state.create_cluster(language, doc.id, rep)
        if self.index is not None:
            self.index.add(language, cluster.id, rep)

        top = sorted(candidates, key=lambda item: (-item[2], item[0]))[:TRACE_CANDIDATES]
        trace = DecisionTrace(
            doc_id=doc.id,
            language=language,
            candidates=[(cluster_id, score) for cluster_id, _, score in top],
            best_score=best_score,
            decision="join" if join else "new",
            mono_cluster=cluster.id,
        )
        cross_id = update_g(state, cluster, self.models.crosslingual, config, trace)
        trace.cross_cluster = cross_id

        self.assignments.append(Assignment(doc.id, language, cluster.id, cross_id))
        if self.trace_sink is not None:
            self.trace_sink(trace)
        if self.keep_traces:
            self.traces.append(trace)
        self.topple_counts.append(len(trace.topples))
        return cluster.id, cross_id, trace

    def run(self, items) -> List[Assignment]:
        """Ingest (document, representation) pairs in order."""
        for doc, rep in items:
            self.ingest(doc, rep)
        return self.assignments

    def final_assignments(self) -> List[Assignment]:
        """Assignments with crosslingual ids as they stand now (domino mode may have moved clusters)."""
        state = self.state
        result = []
        for assignment in self.assignments:
            key = state.doc_index[assignment.doc_id]
            result.append(Assignment(assignment.doc_id, assignment.language, key[1], state.home[key]))
        return result

    def mono_labels(self) -> Dict[str, str]:
        return {doc_id: f"{language}/{cluster_id}" for doc_id, (language, cluster_id) in self.state.doc_index.items()}

    def cross_labels(self) -> Dict[str, int]:
        state = self.state
        return {doc_id: state.home[key] for doc_id, key in state.doc_index.items()}


def ingest(state: ClusteringState, doc: Document, rep: DocRepresentation,
           models: Optional[ModelSet] = None, config: Optional[ClustererConfig] = None) -> Tuple[int, int, DecisionTrace]:
    """
    Convenience function to ingest one document into an existing state.

    Args:
        state: The clustering state to update
        doc: The document
        rep: Its representation
        models: Similarity models (untrained defaults if omitted)
        config: Clusterer settings (defaults if omitted)

    Returns:
        (monolingual cluster id, crosslingual cluster id, decision trace)
    """
    return OnlineClusterer(models, config, state).ingest(doc, rep)
