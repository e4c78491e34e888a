import io
import json
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../src')))

from story_flow.core.errors import ConfigError, DuplicateDocumentError, InputError, StreamOrderError
from story_flow.io.converter import convert_records, fold_language
from story_flow.io.formats import (
    fingerprint, load_merge_model, load_ranker, read_json, save_merge_model, save_ranker,
)
from story_flow.io.stream import StreamReader, parse_record, parse_timestamp
from story_flow.learning.merge import MergeModel
from story_flow.similarity.models import CrossSimilarityModel, ModelSet, SimilarityModel


def lines(*records):
    return io.StringIO("".join(json.dumps(record) + "\n" for record in records))


def test_parse_timestamp():
    assert parse_timestamp(36) == 36.0
    assert parse_timestamp("12.5") == 12.5
    assert parse_timestamp("1970-01-02T00:00:00Z") == 24.0
    assert parse_timestamp("1970-01-02T02:00:00+02:00") == 24.0
    assert parse_timestamp("1970-01-01T06:00:00") == 6.0
    with pytest.raises(ValueError):
        parse_timestamp(True)
    with pytest.raises(ValueError):
        parse_timestamp("yesterday")


def test_parse_record_reports_line():
    with pytest.raises(InputError) as excinfo:
        parse_record({"id": "a", "title": "x", "timestamp": 0}, line=7)
    assert "line 7" in str(excinfo.value)
    assert "language" in str(excinfo.value)

    doc = parse_record({"id": 5, "language": "EN", "title": "x", "timestamp": 1, "gold_mono": 3})
    assert (doc.id, doc.language, doc.gold_mono_label, doc.gold_cross_label) == ("5", "en", "3", None)


def test_stream_reader_checks_duplicates_and_order():
    reader = StreamReader(lines(
        {"id": "a", "language": "en", "title": "x", "timestamp": 0},
        {"id": "a", "language": "en", "title": "y", "timestamp": 1},
    ))
    with pytest.raises(DuplicateDocumentError):
        list(reader)

    reader = StreamReader(lines(
        {"id": "a", "language": "en", "title": "x", "timestamp": 100},
        {"id": "b", "language": "en", "title": "y", "timestamp": 40},
        {"id": "c", "language": "en", "title": "z", "timestamp": 20},
    ), slack_hours=72)
    with pytest.raises(StreamOrderError) as excinfo:
        list(reader)
    assert excinfo.value.line == 3


def test_stream_reader_skips_blank_lines():
    source = io.StringIO('\n{"id": "a", "language": "en", "title": "x", "timestamp": 0}\n\n')
    assert [doc.id for doc in StreamReader(source)] == ["a"]


def test_converter_folds_languages_and_sorts():
    assert fold_language("ENG") == "en"
    assert fold_language("ger") == "de"
    assert fold_language("fr") == "fr"
    docs = convert_records([
        {"id": "b", "lang": "spa", "title": "b", "date": 20},
        {"id": "a", "lang": "spa", "title": "a", "date": 10},
    ])
    assert [doc.id for doc in docs] == ["a", "b"]
    assert docs[0].language == "es"
    with pytest.raises(InputError):
        convert_records([["not", "an", "object"]])


def test_model_files(tmp_path):
    models = ModelSet(
        monolingual={"*": SimilarityModel(), "en": SimilarityModel.from_weights(np.linspace(0, 1, 12), sigma=48)},
        crosslingual=CrossSimilarityModel(q0=np.array([1.0, 0.5, 0.25]), mu=1.0),
    )
    path = str(tmp_path / "ranker.json")
    save_ranker(models, path, fingerprint="abc")
    loaded = load_ranker(path)
    assert loaded.monolingual["en"].sigma == 48.0
    assert np.allclose(loaded.monolingual["en"].weights, np.linspace(0, 1, 12))
    assert loaded.crosslingual.mu == 1.0
    assert read_json(path)["fingerprint"] == "abc"

    merge_path = str(tmp_path / "merge.json")
    save_merge_model(MergeModel(np.arange(12.0), -2.0), merge_path)
    assert load_merge_model(merge_path).bias == -2.0
    with pytest.raises(ConfigError):
        load_ranker(merge_path)


def test_fingerprint_covers_content_and_settings(tmp_path):
    data = tmp_path / "data.txt"
    data.write_text("one", encoding="utf-8")
    first = fingerprint([str(data)], {"tau": 1.0})
    assert first == fingerprint([str(data)], {"tau": 1.0})
    assert first != fingerprint([str(data)], {"tau": 2.0})
    data.write_text("two", encoding="utf-8")
    assert first != fingerprint([str(data)], {"tau": 1.0})


if __name__ == "__main__":
    pytest.main([__file__])
