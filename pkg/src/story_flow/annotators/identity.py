"""
Fallback annotator: lemma = token and no entities.

With this annotator the lemma subvectors duplicate the token subvectors and
the entity subvectors stay empty, so clustering runs on token features only.
"""

from .base import Annotation, Annotator
from ..featurizer.text import tokenize


class IdentityAnnotator(Annotator):
    """Tokens-only annotator."""

    @property
    def name(self) -> str:
        return "none"

    def annotate(self, text: str) -> Annotation:
        tokens = tokenize(text)
        return Annotation(tokens=tokens, lemmas=list(tokens), entities=[])
