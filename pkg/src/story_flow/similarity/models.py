"""
Weight vectors for the similarity functions.

A model weighs per-subvector cosines (q0) and the three Gaussian timestamp
features (q1). Untrained models use all-ones weights, mu = 0 and
sigma = 72 hours.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from ..core.errors import ConfigError
from ..core.types import N_DENSE, N_SPARSE, N_TIME_FEATURES, Language

DEFAULT_SIGMA_HOURS = 72.0
DEFAULT_LANGUAGE_KEY = "*"


@dataclass
class _WeightedModel:
    q0: np.ndarray = None
    q1: np.ndarray = None
    mu: float = 0.0
    sigma: float = DEFAULT_SIGMA_HOURS

    n_q0 = 0

    def __post_init__(self):
        self.q0 = np.ones(self.n_q0) if self.q0 is None else np.asarray(self.q0, dtype=float)
        self.q1 = np.ones(N_TIME_FEATURES) if self.q1 is None else np.asarray(self.q1, dtype=float)
        self.mu = float(self.mu)
        self.sigma = float(self.sigma)
        self.validate()

    def validate(self):
        if self.q0.shape != (self.n_q0,):
            raise ConfigError(f"{type(self).__name__}.q0 needs {self.n_q0} weights, got {self.q0.shape}")
        if self.q1.shape != (N_TIME_FEATURES,):
            raise ConfigError(f"{type(self).__name__}.q1 needs {N_TIME_FEATURES} weights, got {self.q1.shape}")
        if not self.sigma > 0:
            raise ConfigError(f"sigma must be > 0 hours, got {self.sigma}")
        if not (np.all(np.isfinite(self.q0)) and np.all(np.isfinite(self.q1))):
            raise ConfigError("model weights must be finite")

    @property
    def weights(self) -> np.ndarray:
        """q0 followed by q1, matching the feature vector layout."""
        return np.concatenate([self.q0, self.q1])

    @classmethod
    def from_weights(cls, weights, mu: float = 0.0, sigma: float = DEFAULT_SIGMA_HOURS):
        weights = np.asarray(weights, dtype=float)
        return cls(q0=weights[:cls.n_q0], q1=weights[cls.n_q0:], mu=mu, sigma=sigma)

    def scale(self) -> float:
        """Largest score the model can produce (all cosines and time features 1)."""
        return float(np.clip(self.weights, 0.0, None).sum())

    def to_dict(self) -> Dict[str, Any]:
        return {"q0": self.q0.tolist(), "q1": self.q1.tolist(), "mu": self.mu, "sigma": self.sigma}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]):
        try:
            return cls(q0=data["q0"], q1=data["q1"], mu=data.get("mu", 0.0),
                       sigma=data.get("sigma", DEFAULT_SIGMA_HOURS))
        except KeyError as e:
            raise ConfigError(f"{cls.__name__} record is missing {e}") from e


class SimilarityModel(_WeightedModel):
    """Document-to-cluster weights: 9 sparse-cosine weights and 3 timestamp weights."""
    n_q0 = N_SPARSE


class CrossSimilarityModel(_WeightedModel):
    """Cluster-to-cluster weights: 3 dense-cosine weights and 3 timestamp weights."""
    n_q0 = N_DENSE


@dataclass
class ModelSet:
    """
    Everything the clusterer scores with.

    Monolingual models are keyed by language; the "*" entry serves languages
    without a model of their own.
    """
    monolingual: Dict[str, SimilarityModel] = field(
        default_factory=lambda: {DEFAULT_LANGUAGE_KEY: SimilarityModel()})
    crosslingual: CrossSimilarityModel = field(default_factory=CrossSimilarityModel)
    merge: Optional[Any] = None  # learning.merge.MergeModel

    def monolingual_for(self, language: Language) -> SimilarityModel:
        model = self.monolingual.get(language) or self.monolingual.get(DEFAULT_LANGUAGE_KEY)
        if model is None:
            raise ConfigError(f"no monolingual similarity model for language {language!r}")
        return model

    def with_sigma(self, sigma: Optional[float] = None, cross_sigma: Optional[float] = None) -> "ModelSet":
        """Copy with sigma overridden; the crosslingual sigma follows sigma unless given."""
        if cross_sigma is None:
            cross_sigma = sigma
        cross = self.crosslingual
        return ModelSet(
            monolingual={
                key: SimilarityModel(m.q0, m.q1, m.mu, m.sigma if sigma is None else sigma)
                for key, m in self.monolingual.items()
            },
            crosslingual=CrossSimilarityModel(cross.q0, cross.q1, cross.mu,
                                              cross.sigma if cross_sigma is None else cross_sigma),
            merge=self.merge,
        )
