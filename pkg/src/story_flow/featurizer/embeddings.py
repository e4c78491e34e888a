"""
Crosslingual word embeddings.

Text format, one word per line:

    word v1 v2 ... vm

with an optional first line "count dim". Lookups are case-folded; when two
lines fold to the same key the first one wins.
"""

import logging
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, TextIO

import numpy as np

from ..core.errors import InputError

logger = logging.getLogger(__name__)


class EmbeddingTable:
    """Word -> dense vector map sharing one vector space across languages."""

    def __init__(self, words: Sequence[str], vectors: np.ndarray):
        vectors = np.asarray(vectors, dtype=float)
        if vectors.ndim != 2 or vectors.shape[0] != len(words):
            raise ValueError("vectors must be a (len(words), dim) matrix")
        self.dim = int(vectors.shape[1])
        self.index: Dict[str, int] = {}
        rows: List[int] = []
        for row, word in enumerate(words):
            key = word.casefold()
            if key in self.index:
                continue
            self.index[key] = len(rows)
            rows.append(row)
        self.matrix = vectors[rows] if rows else np.zeros((0, self.dim))

    @classmethod
    def empty(cls, dim: int = 0) -> "EmbeddingTable":
        """Table with no vocabulary; every dense subvector comes out zero."""
        return cls([], np.zeros((0, dim)))

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Sequence[float]]) -> "EmbeddingTable":
        words = list(mapping)
        if not words:
            return cls.empty()
        return cls(words, np.array([mapping[word] for word in words], dtype=float))

    def __len__(self) -> int:
        return len(self.index)

    def __contains__(self, word: str) -> bool:
        return word.casefold() in self.index

    def lookup(self, word: str) -> Optional[np.ndarray]:
        row = self.index.get(word.casefold())
        if row is None:
            return None
        return self.matrix[row]

    def rows(self, words: Iterable[str]) -> List[Optional[int]]:
        return [self.index.get(word.casefold()) for word in words]

    @classmethod
    def read(cls, stream: TextIO) -> "EmbeddingTable":
        words: List[str] = []
        values: List[List[str]] = []
        dim: Optional[int] = None
        for line_no, line in enumerate(stream, start=1):
            parts = line.rstrip("\n").split(" ")
            parts = [part for part in parts if part]
            if not parts:
                continue
            if line_no == 1 and len(parts) == 2 and all(part.isdigit() for part in parts):
                dim = int(parts[1])
                continue
            if dim is None:
                dim = len(parts) - 1
            if len(parts) - 1 != dim:
                raise InputError(f"expected {dim} values for {parts[0]!r}, got {len(parts) - 1}", line=line_no)
            words.append(parts[0])
            values.append(parts[1:])
        if not words:
            return cls.empty(dim or 0)
        try:
            vectors = np.array(values, dtype=float)
        except ValueError as e:
            raise InputError(f"non-numeric embedding value: {e}") from e
        table = cls(words, vectors)
        logger.info("loaded %d embeddings of dimension %d", len(table), table.dim)
        return table

    @classmethod
    def load(cls, path: str) -> "EmbeddingTable":
        with open(path, "r", encoding="utf-8") as f:
            return cls.read(f)
