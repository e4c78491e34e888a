"""
Threshold tuning.

The clusterer is replayed on a labeled development stream for candidate
thresholds and the one maximizing pairwise F1 is kept. The search first
samples the grid coarsely, then binary-searches the slope around the best
coarse point and finally checks a few neighbours exhaustively.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..clusterer.config import ClustererConfig
from ..clusterer.engine import OnlineClusterer
from ..core.errors import TuningError
from ..core.types import DocRepresentation, Document
from ..evaluation.metrics import crosslingual_metrics_for, pairwise_metrics
from ..similarity.models import ModelSet

logger = logging.getLogger(__name__)

COARSE_POINTS = 16


@dataclass
class TuningConfig:
    """Grid used when none is given: grid_size points from 0 to the model's maximum score."""
    grid_size: int = 201
    refine: int = 2

    def validate(self) -> "TuningConfig":
        if self.grid_size < 1:
            raise TuningError(f"grid_size must be >= 1, got {self.grid_size}")
        if self.refine < 0:
            raise TuningError(f"refine must be >= 0, got {self.refine}")
        return self


@dataclass
class TuningResult:
    value: float
    score: float
    evaluations: Dict[float, float] = field(default_factory=dict)


def search_threshold(objective: Callable[[float], float], grid: Sequence[float],
                     refine: int = 2) -> TuningResult:
    """
    Maximize objective over a sorted grid.

    Raises:
        TuningError: empty grid
    """
    grid = [float(value) for value in grid]
    if not grid:
        raise TuningError("threshold search grid is empty")
    cache: Dict[int, float] = {}

    def f(i: int) -> float:
        if i not in cache:
            cache[i] = float(objective(grid[i]))
            logger.debug("threshold %.6g -> %.6f", grid[i], cache[i])
        return cache[i]

    n = len(grid)
    stride = max(1, math.ceil(n / COARSE_POINTS))
    coarse = list(range(0, n, stride))
    if coarse[-1] != n - 1:
        coarse.append(n - 1)
    seed = max(coarse, key=lambda i: (f(i), -i))

    lo, hi = max(0, seed - stride), min(n - 1, seed + stride)
    while hi - lo > 2:
        mid = (lo + hi) // 2
        if f(mid) < f(mid + 1):
            lo = mid + 1
        else:
            hi = mid

    window = range(max(0, lo - refine), min(n - 1, hi + refine) + 1)
    best = max(window, key=lambda i: (f(i), -i))
    if f(seed) > f(best):
        best = seed
    result = TuningResult(value=grid[best], score=f(best),
                          evaluations={grid[i]: score for i, score in sorted(cache.items())})
    logger.info("threshold search: best %.6g (score %.6f) after %d evaluations",
                result.value, result.score, len(cache))
    return result


def default_grid(models: ModelSet, size: int = 201, crosslingual: bool = False) -> List[float]:
    if crosslingual:
        scale = models.crosslingual.scale()
    else:
        scale = max(model.scale() for model in models.monolingual.values())
    return np.linspace(0.0, scale, size).tolist()


def cluster_stream(stream: Sequence[Tuple[Document, DocRepresentation]], models: ModelSet,
                   config: ClustererConfig) -> OnlineClusterer:
    clusterer = OnlineClusterer(models, config)
    clusterer.run(stream)
    return clusterer


def monolingual_f1(clusterer: OnlineClusterer, stream: Sequence[Tuple[Document, DocRepresentation]]) -> float:
    gold = {doc.id: f"{doc.language}/{doc.gold_mono_label}" for doc, _ in stream}
    predicted = clusterer.mono_labels()
    return pairwise_metrics(predicted, gold).f1


def tune_tau(dev_stream: Sequence[Tuple[Document, DocRepresentation]], models: Optional[ModelSet] = None,
             config: Optional[ClustererConfig] = None, grid: Optional[Sequence[float]] = None,
             tuning: Optional[TuningConfig] = None) -> TuningResult:
    """
    Threshold maximizing monolingual pairwise F1 on a labeled stream.

    Crosslingual linking is switched off while tuning since it does not
    affect monolingual assignments.
    """
    models = models or ModelSet()
    tuning = (tuning or TuningConfig()).validate()
    base = replace(config or ClustererConfig(), merge_policy="threshold", crosslingual=False)
    dev_stream = list(dev_stream)
    if grid is None:
        grid = default_grid(models, tuning.grid_size)

    def objective(tau: float) -> float:
        return monolingual_f1(cluster_stream(dev_stream, models, replace(base, tau=tau)), dev_stream)

    return search_threshold(objective, grid, tuning.refine)


def tune_cross_tau(dev_stream: Sequence[Tuple[Document, DocRepresentation]], models: Optional[ModelSet] = None,
                   config: Optional[ClustererConfig] = None, grid: Optional[Sequence[float]] = None,
                   tuning: Optional[TuningConfig] = None) -> TuningResult:
    """Crosslingual linking threshold maximizing crosslingual pairwise F1."""
    models = models or ModelSet()
    tuning = (tuning or TuningConfig()).validate()
    base = replace(config or ClustererConfig(), crosslingual=True)
    dev_stream = list(dev_stream)
    docs = [doc for doc, _ in dev_stream]
    if grid is None:
        grid = default_grid(models, tuning.grid_size, crosslingual=True)

    def objective(cross_tau: float) -> float:
        clusterer = cluster_stream(dev_stream, models, replace(base, cross_tau=cross_tau))
        return crosslingual_metrics_for(clusterer.final_assignments(), docs).f1

    return search_threshold(objective, grid, tuning.refine)
