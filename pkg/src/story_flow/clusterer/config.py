"""Clusterer settings."""

from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

from ..core.errors import ConfigError
from ..core.types import language_code

MERGE_POLICIES = ("threshold", "classifier")
CROSS_MODES = ("sum", "pivot")
G_UPDATES = ("immutable", "domino")
CONTESTS = ("residual", "naive")


@dataclass
class ClustererConfig:
    """
    Knobs of the online clusterer.

    Attributes:
        tau: a document joins its best cluster only if the score is strictly above tau
        merge_policy: "threshold" (tau) or "classifier" (merge model on feature maxima)
        cross_mode: crosslingual scoring, "sum" over members or via the "pivot" member
        pivot: pivot language for cross_mode="pivot"
        g_update: "immutable" keeps a crosslingual home once set; "domino" re-places and topples
        topple_budget: maximum displacements per crosslingual update
        contest: incumbent scoring in a displacement, "residual" (without itself) or "naive"
        pivot_fallback: in pivot mode, also score candidates lacking a pivot member
        cross_tau: minimum crosslingual score for linking (None links unconditionally)
        candidate_index: prefilter clusters through an inverted term index
        centroid_top_k: cap on the terms kept per sparse centroid sum (None keeps all)
        crosslingual: run crosslingual linking at all
    """
    tau: float = 4.0
    merge_policy: str = "threshold"
    cross_mode: str = "sum"
    pivot: str = "en"
    g_update: str = "immutable"
    topple_budget: int = 1000
    contest: str = "residual"
    pivot_fallback: bool = False
    cross_tau: Optional[float] = None
    candidate_index: bool = False
    centroid_top_k: Optional[int] = 5000
    crosslingual: bool = True

    def validate(self) -> "ClustererConfig":
        if self.merge_policy not in MERGE_POLICIES:
            raise ConfigError(f"merge_policy must be one of {', '.join(MERGE_POLICIES)}, got {self.merge_policy!r}")
        if self.cross_mode not in CROSS_MODES:
            raise ConfigError(f"cross_mode must be one of {', '.join(CROSS_MODES)}, got {self.cross_mode!r}")
        if self.g_update not in G_UPDATES:
            raise ConfigError(f"g_update must be one of {', '.join(G_UPDATES)}, got {self.g_update!r}")
        if self.contest not in CONTESTS:
            raise ConfigError(f"contest must be one of {', '.join(CONTESTS)}, got {self.contest!r}")
        if int(self.topple_budget) < 1:
            raise ConfigError(f"topple_budget must be >= 1, got {self.topple_budget}")
        if self.centroid_top_k is not None and int(self.centroid_top_k) < 1:
            raise ConfigError(f"centroid_top_k must be >= 1, got {self.centroid_top_k}")
        try:
            self.pivot = language_code(self.pivot)
        except Exception as e:
            raise ConfigError(f"invalid pivot language: {e}") from e
        return self

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
