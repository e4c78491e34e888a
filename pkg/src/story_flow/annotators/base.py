"""
Annotator base class for story-flow featurizers.

An annotator turns raw text into the three token streams the featurizer
needs: surface tokens, lemmas aligned with those tokens, and named-entity
mentions. Real lemmatizers and NER models live outside this package; they
plug in by subclassing Annotator.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import List


@dataclass
class Annotation:
    """Token streams extracted from one piece of text."""
    tokens: List[str] = field(default_factory=list)
    lemmas: List[str] = field(default_factory=list)
    entities: List[str] = field(default_factory=list)

    def stream(self, feature_class: str) -> List[str]:
        """Terms for one feature class (tokens, lemmas or entities)."""
        return getattr(self, feature_class)


class Annotator(ABC):
    """
    Abstract base class for annotators.

    Implementations must be deterministic and return tokens in input order.
    """

    @property
    @abstractmethod
    def name(self) -> str:
        """Registry name (e.g., 'none', 'external-command')."""
        pass

    @abstractmethod
    def annotate(self, text: str) -> Annotation:
        """Annotate one text section."""
        pass

    def describe(self) -> str:
        """Stable description used in run fingerprints."""
        return self.name
