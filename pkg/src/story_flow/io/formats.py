"""
Output and model file formats.

Model and snapshot files are JSON objects with a "format" name and a
"format_version". Assignments, traces and ranking examples are written one
record per line. Every writer emits keys in sorted order so identical runs
give identical bytes.
"""

import hashlib
import json
from typing import IO, Any, Dict, Iterable, List, Mapping, Optional, Sequence, Union

from ..core.errors import ConfigError, InputError
from ..core.types import Assignment, DecisionTrace
from ..learning.merge import MergeModel
from ..similarity.models import DEFAULT_LANGUAGE_KEY, CrossSimilarityModel, ModelSet, SimilarityModel

RANKER_FORMAT = "story-flow-ranker"
MERGE_FORMAT = "story-flow-merge"
SNAPSHOT_FORMAT = "story-flow-snapshot"
FORMAT_VERSION = 1


def _dump(record: Any) -> str:
    return json.dumps(record, ensure_ascii=False, sort_keys=True)


def write_json(path: str, record: Dict[str, Any]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps(record, ensure_ascii=False, sort_keys=True, indent=2) + "\n")


def read_json(path: str, expected_format: Optional[str] = None) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            record = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: not valid JSON ({e.msg})") from e
    if expected_format is not None:
        if not isinstance(record, dict) or record.get("format") != expected_format:
            raise ConfigError(f"{path}: expected a {expected_format} file")
        if int(record.get("format_version", 0)) > FORMAT_VERSION:
            raise ConfigError(f"{path}: unsupported format version {record.get('format_version')}")
    return record


def write_lines(records: Iterable[Dict[str, Any]], target: Union[str, IO[str]]) -> int:
    if isinstance(target, str):
        with open(target, "w", encoding="utf-8") as f:
            return write_lines(records, f)
    count = 0
    for record in records:
        target.write(_dump(record) + "\n")
        count += 1
    return count


# Assignments and traces

def write_assignments(assignments: Iterable[Assignment], target: Union[str, IO[str]]) -> int:
    return write_lines((a.to_dict() for a in assignments), target)


def read_assignments(path: str) -> List[Assignment]:
    assignments = []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                assignments.append(Assignment(str(record["id"]), record["language"],
                                              int(record["mono_cluster"]), int(record["cross_cluster"])))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                raise InputError(f"malformed assignment record: {e}", line=line_no) from e
    return assignments


class TraceWriter:
    """Writes decision traces to a JSONL file as the clusterer produces them."""

    def __init__(self, path: str):
        self.path = path
        self.count = 0
        self._file = open(path, "w", encoding="utf-8")

    def __call__(self, trace: DecisionTrace) -> None:
        self._file.write(_dump(trace.to_dict()) + "\n")
        self.count += 1

    def close(self) -> None:
        self._file.close()

    def __enter__(self) -> "TraceWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def write_snapshot(snapshot: Dict[str, Any], path: str) -> None:
    write_json(path, {"format": SNAPSHOT_FORMAT, "format_version": FORMAT_VERSION, **snapshot})


# Models

def ranker_record(models: ModelSet, fingerprint: Optional[str] = None) -> Dict[str, Any]:
    record = {
        "format": RANKER_FORMAT,
        "format_version": FORMAT_VERSION,
        "monolingual": {key: model.to_dict() for key, model in sorted(models.monolingual.items())},
        "crosslingual": models.crosslingual.to_dict(),
    }
    if fingerprint:
        record["fingerprint"] = fingerprint
    return record


def save_ranker(models: ModelSet, path: str, fingerprint: Optional[str] = None) -> None:
    write_json(path, ranker_record(models, fingerprint))


def load_ranker(path: str) -> ModelSet:
    record = read_json(path, RANKER_FORMAT)
    monolingual = {key: SimilarityModel.from_dict(data) for key, data in record.get("monolingual", {}).items()}
    if not monolingual:
        monolingual = {DEFAULT_LANGUAGE_KEY: SimilarityModel()}
    crosslingual = CrossSimilarityModel.from_dict(record["crosslingual"]) if "crosslingual" in record \
        else CrossSimilarityModel()
    return ModelSet(monolingual=monolingual, crosslingual=crosslingual)


def save_merge_model(model: MergeModel, path: str, fingerprint: Optional[str] = None) -> None:
    record = {"format": MERGE_FORMAT, "format_version": FORMAT_VERSION, **model.to_dict()}
    if fingerprint:
        record["fingerprint"] = fingerprint
    write_json(path, record)


def load_merge_model(path: str) -> MergeModel:
    return MergeModel.from_dict(read_json(path, MERGE_FORMAT))


def write_ranking_examples(examples: Sequence, target: Union[str, IO[str]]) -> int:
    """One record per candidate: query id, label, features."""
    return write_lines(
        ({"query": example.query_id, "label": int(label), "features": features.tolist()}
         for example in examples
         for label, features in zip(example.relevance, example.features)),
        target,
    )


# Fingerprints and summaries

def fingerprint(input_paths: Sequence[str], settings: Mapping[str, Any]) -> str:
    """sha256 over the input files' bytes and the sorted settings."""
    digest = hashlib.sha256()
    for path in input_paths:
        if path is None:
            continue
        with open(path, "rb") as f:
            for block in iter(lambda: f.read(1 << 16), b""):
                digest.update(block)
    digest.update(json.dumps(settings, sort_keys=True, default=str).encode("utf-8"))
    return digest.hexdigest()


def summary_path(output_path: str) -> str:
    return f"{output_path}.summary.json"


def write_summary(output_path: str, summary: Dict[str, Any]) -> str:
    path = summary_path(output_path)
    write_json(path, summary)
    return path
