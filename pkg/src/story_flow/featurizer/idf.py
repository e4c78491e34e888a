"""
IDF tables.

Weights are kept per language and per feature class, so a token, a lemma and
an entity with the same surface string are distinct dimensions. The smoothed
formula keeps every weight strictly positive:

    idf(t) = ln((1 + N) / (1 + df(t))) + 1

and a term never seen in the corpus gets the maximum, ln(1 + N) + 1.
"""

import csv
import logging
import math
from typing import Dict, Iterable, List, Optional, TextIO

from ..annotators.base import Annotator
from ..annotators.identity import IdentityAnnotator
from ..core.errors import ConfigError, EmptyCorpusError, InputError
from ..core.types import FEATURE_CLASSES, Document, Language, language_code

logger = logging.getLogger(__name__)

IDF_FORMAT = "story-flow-idf"
IDF_FORMAT_VERSION = 1


def smoothed_idf(doc_count: int, document_frequency: int) -> float:
    return math.log((1 + doc_count) / (1 + document_frequency)) + 1.0


class IdfTable:
    """Per-language, per-feature-class term weights."""

    def __init__(self):
        self.weights: Dict[Language, Dict[str, Dict[str, float]]] = {}
        self.doc_counts: Dict[Language, int] = {}

    def languages(self) -> List[Language]:
        return sorted(self.doc_counts)

    def has_language(self, language: Language) -> bool:
        return language in self.doc_counts

    def unseen_weight(self, language: Language) -> float:
        return smoothed_idf(self.doc_counts[language], 0)

    def idf(self, language: Language, feature_class: str, term: str) -> float:
        if language not in self.doc_counts:
            raise ConfigError(f"no IDF table loaded for language {language!r}")
        table = self.weights[language].get(feature_class, {})
        weight = table.get(term)
        if weight is None:
            return self.unseen_weight(language)
        return weight

    def set_language(self, language: Language, doc_count: int,
                     weights: Dict[str, Dict[str, float]]) -> None:
        self.doc_counts[language] = doc_count
        self.weights[language] = {cls: dict(weights.get(cls, {})) for cls in FEATURE_CLASSES}

    def merge(self, other: "IdfTable") -> "IdfTable":
        """Add the other table's languages; a language present in both is replaced."""
        for language in other.languages():
            self.set_language(language, other.doc_counts[language], other.weights[language])
        return self

    def term_count(self, language: Optional[Language] = None) -> int:
        languages = [language] if language else self.languages()
        return sum(len(terms) for lang in languages for terms in self.weights[lang].values())

    # Serialization: tab-separated records, header first, sorted for stable bytes

    def write(self, stream: TextIO) -> None:
        writer = csv.writer(stream, delimiter="\t", lineterminator="\n")
        writer.writerow(["#format", IDF_FORMAT, IDF_FORMAT_VERSION])
        for language in self.languages():
            writer.writerow(["#doc_count", language, self.doc_counts[language]])
        for language in self.languages():
            for feature_class in FEATURE_CLASSES:
                for term, weight in sorted(self.weights[language][feature_class].items()):
                    writer.writerow([language, feature_class, term, repr(weight)])

    @classmethod
    def read(cls, stream: TextIO) -> "IdfTable":
        table = cls()
        counts: Dict[Language, int] = {}
        weights: Dict[Language, Dict[str, Dict[str, float]]] = {}
        reader = csv.reader(stream, delimiter="\t")
        for line_no, row in enumerate(reader, start=1):
            if not row:
                continue
            if line_no == 1:
                if row[:2] != ["#format", IDF_FORMAT]:
                    raise InputError("not an IDF table (missing format header)", line=line_no)
                try:
                    version = int(row[2])
                except (ValueError, IndexError) as e:
                    raise InputError(f"malformed IDF format version: {e}", line=line_no) from e
                if version > IDF_FORMAT_VERSION:
                    raise InputError(f"unsupported IDF format version {row[2]}", line=line_no)
                continue
            try:
                if row[0] == "#doc_count":
                    counts[language_code(row[1])] = int(row[2])
                    continue
                language, feature_class, term, weight = row
                if feature_class not in FEATURE_CLASSES:
                    raise InputError(f"unknown feature class {feature_class!r}", line=line_no)
                weights.setdefault(language, {}).setdefault(feature_class, {})[term] = float(weight)
            except (ValueError, IndexError) as e:
                raise InputError(f"malformed IDF record: {e}", line=line_no) from e
        for language, doc_count in counts.items():
            table.set_language(language, doc_count, weights.get(language, {}))
        return table

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="") as f:
            self.write(f)

    @classmethod
    def load(cls, path: str) -> "IdfTable":
        with open(path, "r", encoding="utf-8", newline="") as f:
            return cls.read(f)


def build_idf(corpus: Iterable[Document], language: Language,
              annotator: Optional[Annotator] = None) -> IdfTable:
    """
    Count document frequencies over one language of a corpus.

    Documents in other languages are skipped. A term counts once per
    document whether it occurs in the title, the body or both.

    Raises:
        EmptyCorpusError: no document of the language was seen
    """
    language = language_code(language)
    annotator = annotator or IdentityAnnotator()
    frequencies: Dict[str, Dict[str, int]] = {cls: {} for cls in FEATURE_CLASSES}
    doc_count = 0

    for doc in corpus:
        if doc.language != language:
            continue
        doc_count += 1
        title = annotator.annotate(doc.title)
        body = annotator.annotate(doc.body)
        for feature_class in FEATURE_CLASSES:
            seen = set(title.stream(feature_class)) | set(body.stream(feature_class))
            counts = frequencies[feature_class]
            for term in seen:
                counts[term] = counts.get(term, 0) + 1

    if doc_count == 0:
        raise EmptyCorpusError(f"corpus has no documents in language {language!r}")

    table = IdfTable()
    table.set_language(language, doc_count, {
        feature_class: {term: smoothed_idf(doc_count, df) for term, df in counts.items()}
        for feature_class, counts in frequencies.items()
    })
    logger.info("built IDF for %s: %d documents, %d terms", language, doc_count, table.term_count(language))
    return table
