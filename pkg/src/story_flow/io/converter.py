"""
Converter from external article collections to the stream format.

Input is a JSON array of article objects or JSONL. Field names are
configurable; three-letter language codes are folded to two letters.
Output records are sorted by timestamp (stable for equal timestamps).
"""

import json
import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Iterator, List

from .stream import parse_record
from ..core.errors import InputError
from ..core.types import Document

logger = logging.getLogger(__name__)

LANGUAGE_FOLDING = {
    "eng": "en",
    "deu": "de",
    "ger": "de",
    "spa": "es",
}


@dataclass
class FieldMap:
    """Source field name for each stream field."""
    id: str = "id"
    language: str = "lang"
    title: str = "title"
    body: str = "text"
    timestamp: str = "date"
    gold_mono: str = "cluster"
    gold_cross: str = "crosslingual_cluster"


def fold_language(code: Any) -> str:
    code = str(code).strip().lower()
    return LANGUAGE_FOLDING.get(code, code)


def convert_records(records: Iterable[Dict[str, Any]], fields: FieldMap = FieldMap()) -> List[Document]:
    """Map external records to documents, ordered by timestamp."""
    docs = []
    for position, record in enumerate(records, start=1):
        if not isinstance(record, dict):
            raise InputError("article is not a JSON object", line=position)
        mapped = {
            "id": record.get(fields.id),
            "language": fold_language(record.get(fields.language, "")) or None,
            "title": record.get(fields.title),
            "body": record.get(fields.body),
            "timestamp": record.get(fields.timestamp),
            "gold_mono": record.get(fields.gold_mono),
            "gold_cross": record.get(fields.gold_cross),
        }
        docs.append(parse_record(mapped, position))
    docs.sort(key=lambda doc: doc.timestamp)
    logger.info("converted %d articles", len(docs))
    return docs


def read_collection(path: str) -> Iterator[Dict[str, Any]]:
    """Articles from a JSON array file or a JSONL file."""
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    stripped = text.lstrip()
    if stripped.startswith("["):
        try:
            records = json.loads(stripped)
        except json.JSONDecodeError as e:
            raise InputError(f"malformed JSON array: {e.msg}", line=e.lineno) from e
        yield from records
        return
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            yield json.loads(line)
        except json.JSONDecodeError as e:
            raise InputError(f"malformed JSON: {e.msg}", line=line_no) from e
