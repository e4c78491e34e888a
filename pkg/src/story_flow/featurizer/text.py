"""Tokenization shared by the featurizer and the annotators."""

from typing import List

import regex

# (?w) switches \b to Unicode default word boundaries; V1 allows splitting on them
BOUNDARY = regex.compile(r"(?V1w)\b")
WORDLIKE = regex.compile(r"\w")


def tokenize(text: str) -> List[str]:
    """Split text on Unicode word boundaries, case-fold, drop punctuation."""
    if not text:
        return []
    return [piece.casefold() for piece in BOUNDARY.split(text) if WORDLIKE.search(piece)]
