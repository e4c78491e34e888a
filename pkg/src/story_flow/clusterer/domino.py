"""
Crosslingual placement with domino-toppling.

A monolingual cluster looking for a crosslingual home walks the candidates
from the best-scoring down. It settles in the first one lacking its
language. Where its language is taken, it challenges the incumbent and, if
it wins, takes the slot; the displaced incumbent then looks for a home the
same way. A cluster nobody accepts founds a new crosslingual cluster.
"""

import logging
from typing import Any, Dict, List, Optional, Tuple

from .config import ClustererConfig
from ..core.state import ClusteringState, MonolingualCluster
from ..similarity.metrics import gamma1_pair, gamma1_to_crosslingual
from ..similarity.models import CrossSimilarityModel

logger = logging.getLogger(__name__)


def admissible(c: MonolingualCluster, members: List[MonolingualCluster], config: ClustererConfig) -> bool:
    """Whether c may be scored against a crosslingual cluster with these members."""
    if not members:
        return False
    if config.cross_mode != "pivot":
        return True
    if any(member.language == config.pivot for member in members):
        return True
    return c.language == config.pivot or config.pivot_fallback


def rank_crosslingual(state: ClusteringState, c: MonolingualCluster, model: CrossSimilarityModel,
                      config: ClustererConfig) -> List[Tuple[int, float]]:
    """Admissible crosslingual clusters for c, best score first, ties to the lower id."""
    ranked = []
    for cross_id in state.crosslingual_ids():
        members = state.members(cross_id)
        if not admissible(c, members, config):
            continue
        score = gamma1_to_crosslingual(c, members, model, config.cross_mode, config.pivot)
        if config.cross_tau is not None and not score > config.cross_tau:
            continue
        ranked.append((cross_id, score))
    ranked.sort(key=lambda item: (-item[1], item[0]))
    return ranked


def contest_scores(state: ClusteringState, challenger: MonolingualCluster, incumbent: MonolingualCluster,
                   cross_id: int, model: CrossSimilarityModel, config: ClustererConfig) -> Tuple[float, float]:
    """
    Scores of challenger and incumbent for the incumbent's slot.

    "residual" scores both against the crosslingual cluster without the
    incumbent; an empty residual is decided by each contestant's pair score
    against the other. "naive" scores both against the full cluster.
    """
    members = state.members(cross_id)
    mode, pivot = config.cross_mode, config.pivot
    if config.contest == "naive":
        return (gamma1_to_crosslingual(challenger, members, model, mode, pivot),
                gamma1_to_crosslingual(incumbent, members, model, mode, pivot))

    residual = [member for member in members if member.key != incumbent.key]
    if not residual:
        return gamma1_pair(challenger, incumbent, model), gamma1_pair(incumbent, challenger, model)
    return (gamma1_to_crosslingual(challenger, residual, model, mode, pivot),
            gamma1_to_crosslingual(incumbent, residual, model, mode, pivot))


def _settle(state: ClusteringState, c: MonolingualCluster, fallback: Optional[int]) -> int:
    if fallback is not None and fallback in state.cross and not state.cross[fallback].members:
        state.attach(c, fallback)
        return fallback
    return state.create_crosslingual(c).id


def domino_topple(state: ClusteringState, c: MonolingualCluster, model: CrossSimilarityModel,
                  config: ClustererConfig, fallback: Optional[int] = None) -> List[Dict[str, Any]]:
    """
    Place a detached cluster, toppling incumbents as needed.

    Args:
        state: clustering state; c must have no crosslingual home
        c: the cluster to place
        model: crosslingual similarity model
        config: clusterer settings (mode, contest convention, budget)
        fallback: an emptied crosslingual cluster c may return to instead of founding a new one

    Returns:
        One record per displacement, in order
    """
    topples: List[Dict[str, Any]] = []
    current = c

    while True:
        displaced = None
        placed = False
        for cross_id, _ in rank_crosslingual(state, current, model, config):
            incumbent_id = state.cross[cross_id].members.get(current.language)
            if incumbent_id is None:
                state.attach(current, cross_id)
                placed = True
                break
            incumbent = state.mono[current.language][incumbent_id]
            challenger_score, incumbent_score = contest_scores(state, current, incumbent, cross_id, model, config)
            if challenger_score > incumbent_score:
                state.detach(incumbent)
                state.attach(current, cross_id)
                topples.append({
                    "cross_cluster": cross_id,
                    "winner": [current.language, current.id],
                    "displaced": [incumbent.language, incumbent.id],
                    "winner_score": challenger_score,
                    "displaced_score": incumbent_score,
                })
                logger.debug("%s/%d displaced %s/%d from crosslingual cluster %d (%.6g > %.6g)",
                             current.language, current.id, incumbent.language, incumbent.id,
                             cross_id, challenger_score, incumbent_score)
                displaced = incumbent
                placed = True
                break

        if not placed:
            _settle(state, current, fallback if current is c else None)
            return topples
        if displaced is None:
            return topples
        if len(topples) >= config.topple_budget:
            logger.warning("topple budget of %d exhausted; %s/%d founds a new crosslingual cluster",
                           config.topple_budget, displaced.language, displaced.id)
            state.create_crosslingual(displaced)
            return topples
        current = displaced
