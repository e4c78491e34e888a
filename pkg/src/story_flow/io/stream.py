"""
Document streams as line-delimited JSON.

One record per line:

    {"id": ..., "language": ..., "title": ..., "body": ..., "timestamp": ...,
     "gold_mono": ..., "gold_cross": ...}

Timestamps are hours since 1970-01-01 or ISO-8601 strings, converted to
hours on read. The gold labels are optional.
"""

import json
import logging
import math
from datetime import datetime, timezone
from typing import IO, Any, Dict, Iterable, Iterator, Optional, Set, Union

from ..core.errors import DuplicateDocumentError, InputError, StreamOrderError
from ..core.types import Document

logger = logging.getLogger(__name__)

DEFAULT_SLACK_HOURS = 72.0
REQUIRED_FIELDS = ("id", "language", "timestamp")


def parse_timestamp(value: Any) -> float:
    """Hours since epoch from a number of hours or an ISO-8601 string (naive means UTC)."""
    if isinstance(value, bool):
        raise ValueError(f"invalid timestamp {value!r}")
    if isinstance(value, (int, float)):
        hours = float(value)
    elif isinstance(value, str):
        text = value.strip()
        try:
            hours = float(text)
        except ValueError:
            if text.endswith(("Z", "z")):
                text = text[:-1] + "+00:00"
            moment = datetime.fromisoformat(text)
            if moment.tzinfo is None:
                moment = moment.replace(tzinfo=timezone.utc)
            hours = moment.timestamp() / 3600.0
    else:
        raise ValueError(f"invalid timestamp {value!r}")
    if not math.isfinite(hours):
        raise ValueError(f"non-finite timestamp {value!r}")
    return hours


def _label(value: Any) -> Optional[str]:
    return None if value is None else str(value)


def parse_record(record: Dict[str, Any], line: Optional[int] = None) -> Document:
    """Build a Document from one decoded record."""
    if not isinstance(record, dict):
        raise InputError("record is not a JSON object", line=line)
    missing = [name for name in REQUIRED_FIELDS if record.get(name) in (None, "")]
    if missing:
        raise InputError(f"record is missing {', '.join(missing)}", line=line)
    try:
        timestamp = parse_timestamp(record["timestamp"])
    except ValueError as e:
        raise InputError(str(e), line=line) from e
    try:
        return Document(
            id=str(record["id"]),
            language=record["language"],
            title=str(record.get("title") or ""),
            body=str(record.get("body") or ""),
            timestamp=timestamp,
            gold_mono_label=_label(record.get("gold_mono")),
            gold_cross_label=_label(record.get("gold_cross")),
        )
    except InputError as e:
        raise InputError(str(e), line=line) from e


class StreamReader:
    """
    Iterates documents from a JSONL source, enforcing stream order.

    A timestamp may lag the newest one seen so far by at most `slack_hours`.
    """

    def __init__(self, source: IO[str], slack_hours: float = DEFAULT_SLACK_HOURS,
                 check_duplicates: bool = True):
        self.source = source
        self.slack_hours = slack_hours
        self.check_duplicates = check_duplicates
        self.newest = -math.inf
        self._seen: Set[str] = set()

    def __iter__(self) -> Iterator[Document]:
        for line_no, line in enumerate(self.source, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise InputError(f"malformed JSON: {e.msg}", line=line_no) from e
            doc = parse_record(record, line_no)
            if self.check_duplicates:
                if doc.id in self._seen:
                    raise DuplicateDocumentError(f"duplicate document id {doc.id!r}", line=line_no)
                self._seen.add(doc.id)
            if doc.timestamp < self.newest - self.slack_hours:
                raise StreamOrderError(
                    f"document {doc.id!r} is {self.newest - doc.timestamp:.1f}h older than the newest one "
                    f"(slack {self.slack_hours}h)", line=line_no)
            self.newest = max(self.newest, doc.timestamp)
            yield doc


def read_stream(path: str, slack_hours: Optional[float] = DEFAULT_SLACK_HOURS) -> Iterator[Document]:
    """Lazily read documents from a JSONL file; slack None disables the order check."""
    slack = math.inf if slack_hours is None else slack_hours
    with open(path, "r", encoding="utf-8") as f:
        yield from StreamReader(f, slack)


def read_documents(path: str, slack_hours: Optional[float] = DEFAULT_SLACK_HOURS):
    return list(read_stream(path, slack_hours))


def write_stream(docs: Iterable[Document], target: Union[str, IO[str]]) -> int:
    """Write documents as JSONL; returns the number written."""
    if isinstance(target, str):
        with open(target, "w", encoding="utf-8") as f:
            return write_stream(docs, f)
    count = 0
    for doc in docs:
        target.write(json.dumps(doc.to_dict(), ensure_ascii=False, sort_keys=True) + "\n")
        count += 1
    return count
