import logging
import math
import os
import sys
import time

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../src')))
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from synthetic import featurize, make_recurring_docs, make_story_docs, make_stream

from story_flow.clusterer.config import ClustererConfig
from story_flow.clusterer.domino import admissible, contest_scores, rank_crosslingual
from story_flow.clusterer.engine import OnlineClusterer, best_monolingual, ingest, merge_decision, update_g
from story_flow.clusterer.index import ClusterIndex
from story_flow.core.errors import ConfigError, DuplicateDocumentError
from story_flow.core.state import ClusteringState
from story_flow.core.types import N_DENSE, N_SPARSE, DocRepresentation, Document
from story_flow.evaluation.metrics import crosslingual_metrics_for, monolingual_metrics_for
from story_flow.learning.merge import MergeModel, train_merge
from story_flow.similarity.metrics import gamma1_to_crosslingual
from story_flow.similarity.models import CrossSimilarityModel, ModelSet, SimilarityModel


def item(doc_id, language, term, dense=(0.0, 0.0), timestamp=0.0):
    doc = Document(id=doc_id, language=language, title=term, body="", timestamp=timestamp)
    mono = [{} for _ in range(N_SPARSE)]
    mono[0] = {term: 1.0}
    rep = DocRepresentation(mono, [np.asarray(dense, dtype=float)] * N_DENSE, timestamp)
    return doc, rep


def toppling_stream():
    # de-2 is a better crosslingual match for en-1 than de-1 is
    return [
        item("e1", "en", "alpha", dense=(1.0, 0.0)),
        item("d1", "de", "beta", dense=(0.6, 0.8)),
        item("d2", "de", "gamma", dense=(1.0, 0.0)),
    ]


# Monolingual decisions

def test_first_document_founds_clusters():
    clusterer = OnlineClusterer()
    mono_id, cross_id, trace = clusterer.ingest(*item("a", "en", "alpha"))
    assert (mono_id, cross_id) == (1, 1)
    assert trace.decision == "new"
    assert trace.best_score is None
    assert trace.candidates == []


def test_threshold_is_strict():
    # identical single-term documents at the same time score exactly 1 + 3 time features
    clusterer = OnlineClusterer(config=ClustererConfig(tau=4.0))
    clusterer.ingest(*item("a", "en", "alpha"))
    mono_id, _, trace = clusterer.ingest(*item("b", "en", "alpha"))
    assert trace.best_score == 4.0
    assert mono_id == 2

    clusterer = OnlineClusterer(config=ClustererConfig(tau=3.999))
    clusterer.ingest(*item("a", "en", "alpha"))
    mono_id, _, trace = clusterer.ingest(*item("b", "en", "alpha"))
    assert mono_id == 1
    assert trace.decision == "join"


def test_languages_never_share_monolingual_clusters():
    clusterer = OnlineClusterer(config=ClustererConfig(tau=0.0))
    clusterer.ingest(*item("a", "en", "alpha"))
    mono_id, _, _ = clusterer.ingest(*item("b", "de", "alpha"))
    assert mono_id == 1
    assert clusterer.state.doc_index == {"a": ("en", 1), "b": ("de", 1)}


def test_duplicate_document_is_rejected():
    clusterer = OnlineClusterer()
    clusterer.ingest(*item("a", "en", "alpha"))
    with pytest.raises(DuplicateDocumentError):
        clusterer.ingest(*item("a", "en", "beta"))


def test_merge_classifier_policy():
    with pytest.raises(ConfigError):
        OnlineClusterer(config=ClustererConfig(merge_policy="classifier"))

    models = ModelSet(merge=MergeModel.constant(join=True))
    clusterer = OnlineClusterer(models, ClustererConfig(merge_policy="classifier"))
    clusterer.ingest(*item("a", "en", "alpha"))
    mono_id, _, _ = clusterer.ingest(*item("b", "en", "beta", timestamp=500.0))
    assert mono_id == 1


def test_best_monolingual_ties_keep_lower_id():
    state = ClusteringState()
    assert best_monolingual(state, item("q", "en", "alpha")[1], "en", SimilarityModel()) == (None, None)
    for doc_id in ("a", "b"):
        doc, rep = item(doc_id, "en", "alpha")
        state.create_cluster("en", doc.id, rep)
    state.create_cluster("en", "c", item("c", "en", "beta")[1])
    cluster_id, score = best_monolingual(state, item("q", "en", "alpha")[1], "en", SimilarityModel())
    assert (cluster_id, score) == (1, pytest.approx(4.0))
    assert best_monolingual(state, item("q", "de", "alpha")[1], "de", SimilarityModel()) == (None, None)


def test_update_g_immutable_keeps_home():
    state = ClusteringState()
    first = state.create_cluster("en", "e1", item("e1", "en", "x", dense=(1.0, 0.0))[1])
    second = state.create_cluster("de", "d1", item("d1", "de", "y", dense=(1.0, 0.0))[1])
    config = ClustererConfig()
    model = CrossSimilarityModel()
    assert update_g(state, first, model, config) == 1
    assert update_g(state, second, model, config) == 1
    assert update_g(state, first, model, config) == 1
    assert state.members(1) == [second, first]


def test_merge_decision_without_candidates():
    assert merge_decision(None, np.zeros(12), ClustererConfig()) is False
    assert merge_decision(4.5, np.zeros(12), ClustererConfig()) is True


def test_invalid_settings():
    with pytest.raises(ConfigError):
        ClustererConfig(g_update="sometimes").validate()
    with pytest.raises(ConfigError):
        ClustererConfig(topple_budget=0).validate()
    with pytest.raises(ConfigError):
        ClustererConfig(centroid_top_k=0).validate()


def test_trace_keeps_top_candidates():
    clusterer = OnlineClusterer(config=ClustererConfig(tau=100.0))
    for i in range(7):
        clusterer.ingest(*item(f"d{i}", "en", f"term{i}"))
    trace = clusterer.traces[-1]
    assert len(trace.candidates) == 5
    assert [cluster_id for cluster_id, _ in trace.candidates] == [1, 2, 3, 4, 5]


def test_traces_stream_to_sink():
    seen = []
    clusterer = OnlineClusterer(config=ClustererConfig(g_update="domino"), trace_sink=seen.append, keep_traces=False)
    clusterer.run(toppling_stream())
    assert clusterer.traces == []
    assert [trace.doc_id for trace in seen] == ["e1", "d1", "d2"]
    assert [trace.cross_cluster for trace in seen] == [1, 1, 1]
    assert len(seen[-1].topples) == 1


def test_module_level_ingest_shares_state():
    state = ClusteringState()
    ingest(state, *item("a", "en", "alpha"))
    mono_id, cross_id, _ = ingest(state, *item("b", "en", "alpha"), config=ClustererConfig(tau=3.0))
    assert (mono_id, cross_id) == (1, 1)
    assert state.invariant_violations() == []


# Crosslingual placement

def test_immutable_linking_keeps_the_first_placement():
    clusterer = OnlineClusterer()
    clusterer.run(toppling_stream())
    assert [a.cross_cluster for a in clusterer.final_assignments()] == [1, 1, 2]
    assert clusterer.topple_counts == [0, 0, 0]


def test_domino_displaces_weaker_incumbent():
    clusterer = OnlineClusterer(config=ClustererConfig(g_update="domino"))
    clusterer.run(toppling_stream())

    final = {a.doc_id: a.cross_cluster for a in clusterer.final_assignments()}
    assert final == {"e1": 1, "d1": 2, "d2": 1}
    # assignments record placement at arrival time
    assert [a.cross_cluster for a in clusterer.assignments] == [1, 1, 1]

    topples = clusterer.traces[-1].topples
    assert len(topples) == 1
    assert topples[0]["winner"] == ["de", 2]
    assert topples[0]["displaced"] == ["de", 1]
    assert topples[0]["winner_score"] > topples[0]["displaced_score"]
    assert clusterer.state.invariant_violations() == []


def test_domino_chain():
    def unit(degrees):
        return (math.cos(math.radians(degrees)), math.sin(math.radians(degrees)))

    stream = [
        item("e1", "en", "one", dense=unit(0)),
        item("d1", "de", "eins", dense=unit(30)),
        item("e2", "en", "two", dense=unit(90)),
        item("d2", "de", "zwei", dense=unit(160)),
        # d3 takes d1's slot next to e1; d1 then takes d2's slot next to e2
        item("d3", "de", "drei", dense=unit(0)),
    ]
    clusterer = OnlineClusterer(config=ClustererConfig(g_update="domino"))
    clusterer.run(stream)

    final = {a.doc_id: a.cross_cluster for a in clusterer.final_assignments()}
    assert final == {"e1": 1, "d1": 2, "e2": 2, "d2": 3, "d3": 1}
    assert clusterer.topple_counts == [0, 0, 0, 0, 2]
    topples = clusterer.traces[-1].topples
    assert [(t["cross_cluster"], t["winner"], t["displaced"]) for t in topples] == [
        (1, ["de", 3], ["de", 1]),
        (2, ["de", 1], ["de", 2]),
    ]
    assert clusterer.state.invariant_violations() == []


def test_topple_budget_exhaustion_warns(caplog):
    clusterer = OnlineClusterer(config=ClustererConfig(g_update="domino", topple_budget=1))
    with caplog.at_level(logging.WARNING, logger="story_flow.clusterer.domino"):
        clusterer.run(toppling_stream())
    assert "topple budget" in caplog.text
    assert clusterer.state.invariant_violations() == []
    assert len(clusterer.state.cross) == 2


def test_contest_conventions():
    clusterer = OnlineClusterer(config=ClustererConfig(g_update="domino"))
    clusterer.run(toppling_stream()[:2])
    state = clusterer.state
    challenger = state.create_cluster("de", "d2", toppling_stream()[2][1])
    incumbent = state.mono["de"][1]
    model = CrossSimilarityModel()

    residual = contest_scores(state, challenger, incumbent, 1, model, ClustererConfig(contest="residual"))
    assert residual[0] == pytest.approx(6.0)
    assert residual[1] == pytest.approx(4.8)

    members = state.members(1)
    naive = contest_scores(state, challenger, incumbent, 1, model, ClustererConfig(contest="naive"))
    assert naive[0] == pytest.approx(gamma1_to_crosslingual(challenger, members, model))
    assert naive[1] == pytest.approx(gamma1_to_crosslingual(incumbent, members, model))


def test_pivot_mode_admissibility():
    stream = [item("s1", "es", "uno", dense=(1.0, 0.0)), item("g1", "de", "eins", dense=(1.0, 0.0))]

    clusterer = OnlineClusterer(config=ClustererConfig(cross_mode="pivot", pivot="en"))
    clusterer.run(stream)
    assert [a.cross_cluster for a in clusterer.final_assignments()] == [1, 2]

    clusterer = OnlineClusterer(config=ClustererConfig(cross_mode="pivot", pivot="en", pivot_fallback=True))
    clusterer.run(stream)
    assert [a.cross_cluster for a in clusterer.final_assignments()] == [1, 1]

    state = clusterer.state
    es = state.mono["es"][1]
    assert not admissible(es, [], ClustererConfig())
    assert admissible(es, [state.mono["de"][1]], ClustererConfig())


def test_cross_tau_blocks_weak_links():
    clusterer = OnlineClusterer(config=ClustererConfig(cross_tau=100.0))
    clusterer.run(toppling_stream()[:2])
    assert [a.cross_cluster for a in clusterer.final_assignments()] == [1, 2]
    assert rank_crosslingual(clusterer.state, clusterer.state.mono["de"][1], CrossSimilarityModel(),
                             ClustererConfig(cross_tau=100.0)) == []


def test_crosslingual_linking_can_be_disabled():
    clusterer = OnlineClusterer(config=ClustererConfig(crosslingual=False))
    clusterer.run(toppling_stream())
    assert [a.cross_cluster for a in clusterer.final_assignments()] == [1, 2, 3]


# Whole streams

@pytest.mark.parametrize("settings", [
    {},
    {"g_update": "domino"},
    {"g_update": "domino", "contest": "naive"},
    {"cross_mode": "pivot"},
    {"cross_mode": "pivot", "g_update": "domino"},
    {"candidate_index": True},
])
def test_separable_stream_is_recovered(settings):
    stream = make_stream(n_stories=4, docs_per_language=3)
    clusterer = OnlineClusterer(config=ClustererConfig(**settings))
    clusterer.run(stream)
    docs = [doc for doc, _ in stream]
    assignments = clusterer.final_assignments()

    assert monolingual_metrics_for(assignments, docs).f1 == 1.0
    assert crosslingual_metrics_for(assignments, docs).f1 == 1.0
    assert clusterer.state.invariant_violations() == []
    assert len(clusterer.state.cross) == 4
    assert np.median(clusterer.topple_counts) == 0


@pytest.mark.parametrize("settings", [
    {},
    {"cross_mode": "pivot"},
    {"g_update": "domino"},
])
def test_separable_stream_is_recovered_with_merge_classifier(settings):
    merge = train_merge(make_stream(n_stories=3, docs_per_language=3), regularization=10.0)
    stream = make_stream(n_stories=4, docs_per_language=3)
    clusterer = OnlineClusterer(ModelSet(merge=merge), ClustererConfig(merge_policy="classifier", **settings))
    clusterer.run(stream)
    docs = [doc for doc, _ in stream]
    assignments = clusterer.final_assignments()

    assert monolingual_metrics_for(assignments, docs).f1 == 1.0
    assert crosslingual_metrics_for(assignments, docs).f1 == 1.0
    assert clusterer.state.invariant_violations() == []


@pytest.mark.parametrize("seed", range(5))
def test_random_story_stream_keeps_invariants(seed):
    stream = featurize(make_story_docs(seed), n_stories=8)
    clusterer = OnlineClusterer(config=ClustererConfig(g_update="domino"))
    for doc, rep in stream:
        clusterer.ingest(doc, rep)
        assert clusterer.state.invariant_violations() == [], doc.id
    assert np.median(clusterer.topple_counts) == 0


def test_candidate_index_gives_same_clusters():
    stream = make_stream(n_stories=3, docs_per_language=4)
    plain = OnlineClusterer()
    plain.run(stream)
    indexed = OnlineClusterer(config=ClustererConfig(candidate_index=True))
    indexed.run(stream)
    assert plain.mono_labels() == indexed.mono_labels()


def test_cluster_index_candidates():
    state = ClusteringState()
    index = ClusterIndex()
    for cluster_id, term in ((1, "alpha"), (2, "beta")):
        doc, rep = item(f"d{cluster_id}", "en", term)
        state.create_cluster("en", doc.id, rep)
        index.add("en", cluster_id, rep)
    assert index.candidates("en", item("q", "en", "beta")[1]) == [2]
    assert index.candidates("de", item("q", "de", "beta")[1]) == []
    assert ClusterIndex.from_state(state).candidates("en", item("q", "en", "alpha")[1]) == [1]


def test_centroid_top_k_is_applied():
    clusterer = OnlineClusterer(config=ClustererConfig(tau=0.0, centroid_top_k=2))
    for i in range(4):
        clusterer.ingest(*item(f"d{i}", "en", f"term{i}"))
    assert len(clusterer.state.mono["en"][1].mono_sums[0]) == 2


@pytest.mark.slow
def test_ingest_latency_does_not_grow_with_documents():
    stream = featurize(make_recurring_docs(10200), n_stories=5)
    clusterer = OnlineClusterer()
    timings = []
    for doc, rep in stream:
        start = time.perf_counter()
        clusterer.ingest(doc, rep)
        timings.append(time.perf_counter() - start)

    assert sum(len(clusterer.state.clusters(language)) for language in clusterer.state.languages()) == 15
    early = np.median(timings[900:1100])
    late = np.median(timings[9900:10100])
    assert late <= 3.0 * early


if __name__ == "__main__":
    pytest.main([__file__])
