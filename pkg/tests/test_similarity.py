import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../src')))

from story_flow.core.errors import ConfigError, InputError
from story_flow.core.state import MonolingualCluster
from story_flow.core.types import N_DENSE, N_SPARSE, DocRepresentation, sparse_normalize
from story_flow.similarity.metrics import (
    cross_features, gamma, gamma0, gamma1_pair, gamma1_to_crosslingual, monolingual_features,
    scored_members, time_feature,
)
from story_flow.similarity.models import CrossSimilarityModel, ModelSet, SimilarityModel


def rep(terms, timestamp=0.0, dense=(1.0, 0.0)):
    mono = [{} for _ in range(N_SPARSE)]
    mono[0] = sparse_normalize(dict(terms))
    return DocRepresentation(mono, [np.asarray(dense, dtype=float)] * N_DENSE, timestamp)


def cluster(language, cluster_id, *reps):
    c = MonolingualCluster(id=cluster_id, language=language, embedding_dim=len(reps[0].cross_subvectors[0]))
    for i, r in enumerate(reps):
        c.add(f"{language}{cluster_id}-{i}", r)
    return c


def test_time_feature():
    assert time_feature(0.0) == 1.0
    assert time_feature(72.0) == pytest.approx(math.exp(-0.5))
    assert time_feature(-72.0) == time_feature(72.0)
    assert time_feature(10.0, mu=10.0) == 1.0
    with pytest.raises(ConfigError):
        time_feature(1.0, sigma=0.0)


def test_gamma_uses_newest_average_oldest():
    c = cluster("en", 1, rep({"a": 1}, timestamp=0.0), rep({"a": 1}, timestamp=144.0))
    features = gamma(rep({"a": 1}, timestamp=144.0), c)
    assert features == pytest.approx([1.0, time_feature(72.0), time_feature(144.0)])


def test_identical_document_scores_exactly():
    c = cluster("en", 1, rep({"a": 1.0, "b": 1.0}))
    features = monolingual_features(rep({"a": 1.0, "b": 1.0}), c)
    assert features[0] == pytest.approx(1.0)
    assert np.all(features[1:N_SPARSE] == 0.0)
    assert features[N_SPARSE:] == pytest.approx([1.0, 1.0, 1.0])
    assert gamma0(rep({"a": 1.0, "b": 1.0}), c, SimilarityModel()) == pytest.approx(4.0)


def test_cosine_against_cluster_uses_the_mean():
    c = cluster("en", 1, rep({"a": 1.0}), rep({"b": 1.0}))
    assert monolingual_features(rep({"a": 1.0}), c)[0] == pytest.approx(1 / math.sqrt(2))
    assert monolingual_features(rep({"z": 1.0}), c)[0] == 0.0


def test_gamma0_weights_and_language_check():
    c = cluster("en", 1, rep({"a": 1.0}))
    model = SimilarityModel(q0=np.full(N_SPARSE, 2.0), q1=np.zeros(3))
    assert gamma0(rep({"a": 1.0}), c, model, "en") == pytest.approx(2.0)
    with pytest.raises(InputError):
        gamma0(rep({"a": 1.0}), c, model, "de")


def test_cross_features_are_symmetric():
    en = cluster("en", 1, rep({"a": 1}, timestamp=0.0, dense=(1.0, 0.0)))
    de = cluster("de", 1, rep({"b": 1}, timestamp=30.0, dense=(0.6, 0.8)))
    forward = cross_features(en, de)
    assert forward[:N_DENSE] == pytest.approx([0.6, 0.6, 0.6])
    assert forward[N_DENSE:] == pytest.approx([time_feature(30.0)] * 3)
    assert gamma1_pair(en, de, CrossSimilarityModel()) == pytest.approx(gamma1_pair(de, en, CrossSimilarityModel()))


def test_zero_embeddings_score_zero_cosine():
    en = cluster("en", 1, rep({"a": 1}, dense=(0.0, 0.0)))
    de = cluster("de", 1, rep({"b": 1}, dense=(1.0, 0.0)))
    assert np.all(cross_features(en, de)[:N_DENSE] == 0.0)


def test_gamma1_to_crosslingual_modes():
    model = CrossSimilarityModel(q1=np.zeros(3))
    es = cluster("es", 1, rep({"c": 1}, dense=(1.0, 0.0)))
    en = cluster("en", 1, rep({"a": 1}, dense=(1.0, 0.0)))
    de = cluster("de", 1, rep({"b": 1}, dense=(0.0, 1.0)))

    assert gamma1_to_crosslingual(es, [], model) == 0.0
    assert gamma1_to_crosslingual(es, [de, en], model, "sum") == pytest.approx(3.0)
    assert gamma1_to_crosslingual(es, [de, en], model, "pivot", "en") == pytest.approx(3.0)
    assert gamma1_to_crosslingual(es, [de], model, "pivot", "en") == pytest.approx(0.0)
    assert scored_members([de, en], "pivot", "en") == [en]
    assert scored_members([de], "pivot", "en") == [de]
    with pytest.raises(ConfigError):
        scored_members([de], "mean")


def test_model_validation():
    with pytest.raises(ConfigError):
        SimilarityModel(q0=np.ones(3))
    with pytest.raises(ConfigError):
        CrossSimilarityModel(sigma=-1.0)
    model = SimilarityModel.from_weights(np.arange(12.0), sigma=24.0)
    assert model.q0.tolist() == list(range(9))
    assert model.q1.tolist() == [9.0, 10.0, 11.0]
    assert SimilarityModel.from_dict(model.to_dict()).weights.tolist() == model.weights.tolist()
    assert SimilarityModel().scale() == 12.0
    assert CrossSimilarityModel(q0=np.array([1.0, -1.0, 1.0])).scale() == 5.0


def test_model_set_language_fallback():
    english = SimilarityModel(q0=np.full(N_SPARSE, 2.0))
    models = ModelSet(monolingual={"*": SimilarityModel(), "en": english})
    assert models.monolingual_for("en") is english
    assert models.monolingual_for("de") is models.monolingual["*"]
    with pytest.raises(ConfigError):
        ModelSet(monolingual={"en": english}).monolingual_for("de")


def test_with_sigma():
    models = ModelSet().with_sigma(24.0)
    assert models.monolingual["*"].sigma == 24.0
    assert models.crosslingual.sigma == 24.0
    models = ModelSet().with_sigma(24.0, cross_sigma=96.0)
    assert models.crosslingual.sigma == 96.0
    assert ModelSet().with_sigma(None, cross_sigma=12.0).monolingual["*"].sigma == 72.0


if __name__ == "__main__":
    pytest.main([__file__])
