import json
import os
import sys

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../src')))
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from synthetic import make_docs, write_embeddings, write_jsonl

from story_flow.cli.main import EXIT_CONFIG_ERROR, EXIT_INPUT_ERROR, main
from story_flow.io.formats import load_ranker, read_assignments
from story_flow.io.stream import read_documents


@pytest.fixture
def workspace(tmp_path):
    """Labeled stream, embeddings and an IDF table on disk."""
    stream = tmp_path / "stream.jsonl"
    embeddings = tmp_path / "embeddings.txt"
    idf = tmp_path / "idf.tsv"
    write_jsonl(str(stream), make_docs(n_stories=3, docs_per_language=3))
    write_embeddings(str(embeddings))
    assert main(["build-idf", "--input", str(stream), "--output", str(idf)]) == 0
    return tmp_path


def paths(workspace, *names):
    return [str(workspace / name) for name in names]


def test_build_idf_is_reproducible(workspace, capsys):
    stream, first, second = paths(workspace, "stream.jsonl", "idf.tsv", "again.tsv")
    assert main(["build-idf", "--input", stream, "--output", second]) == 0
    with open(first, "rb") as a, open(second, "rb") as b:
        assert a.read() == b.read()
    out = capsys.readouterr().out
    assert "en: 9 documents" in out
    assert f"Written to {second}" in out


def test_build_idf_single_language(workspace):
    stream, output = paths(workspace, "stream.jsonl", "en.tsv")
    assert main(["build-idf", "--input", stream, "--output", output, "--language", "en"]) == 0
    with open(output, encoding="utf-8") as f:
        header = [next(f) for _ in range(2)]
    assert header[1] == "#doc_count\ten\t9\n"


def test_build_idf_on_empty_corpus_writes_nothing(tmp_path, capsys):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("", encoding="utf-8")
    output = tmp_path / "idf.tsv"
    assert main(["build-idf", "--input", str(empty), "--output", str(output)]) == EXIT_INPUT_ERROR
    assert not output.exists()
    assert "Error:" in capsys.readouterr().err


def test_cluster_and_evaluate(workspace, capsys):
    stream, idf, embeddings, output, report = paths(
        workspace, "stream.jsonl", "idf.tsv", "embeddings.txt", "assignments.jsonl", "report.json")
    code = main(["cluster", "--input", stream, "--output", output, "--idf", idf, "--embeddings", embeddings,
                 "--g-update", "domino", "--trace", output + ".trace", "--snapshot", output + ".state"])
    assert code == 0
    assignments = read_assignments(output)
    assert len(assignments) == 27
    with open(output + ".trace", encoding="utf-8") as f:
        traces = [json.loads(line) for line in f]
    assert [trace["id"] for trace in traces] == [a.doc_id for a in assignments]
    assert {trace["decision"] for trace in traces} == {"join", "new"}
    with open(output + ".summary.json", encoding="utf-8") as f:
        summary = json.load(f)
    assert summary["crosslingual_clusters"] == 3
    assert summary["monolingual_clusters"] == {"de": 3, "en": 3, "es": 3}
    assert len(summary["fingerprint"]) == 64
    with open(output + ".state", encoding="utf-8") as f:
        assert json.load(f)["format"] == "story-flow-snapshot"

    assert main(["evaluate", "--input", f"online={output}", "--gold", stream, "--output", report]) == 0
    assert "online" in capsys.readouterr().out
    with open(report, encoding="utf-8") as f:
        systems = json.load(f)["systems"]
    assert systems["online"]["monolingual"]["f1"] == 1.0
    assert systems["online"]["crosslingual"]["f1"] == 1.0


def test_cluster_runs_are_identical(workspace):
    stream, idf, first, second = paths(workspace, "stream.jsonl", "idf.tsv", "a.jsonl", "b.jsonl")
    for output in (first, second):
        assert main(["cluster", "--input", stream, "--output", output, "--idf", idf]) == 0
    with open(first, "rb") as a, open(second, "rb") as b:
        assert a.read() == b.read()
    with open(first + ".summary.json") as a, open(second + ".summary.json") as b:
        assert json.load(a)["fingerprint"] != json.load(b)["fingerprint"]


def test_cluster_empty_stream(workspace):
    idf, empty, output = paths(workspace, "idf.tsv", "empty.jsonl", "out.jsonl")
    open(empty, "w").close()
    assert main(["cluster", "--input", empty, "--output", output, "--idf", idf]) == 0
    assert os.path.getsize(output) == 0
    with open(output + ".summary.json", encoding="utf-8") as f:
        summary = json.load(f)
    assert summary["documents"] == 0
    assert summary["monolingual_clusters"] == {}


def test_cluster_input_errors(workspace):
    idf, bad, output = paths(workspace, "idf.tsv", "bad.jsonl", "out.jsonl")
    with open(bad, "w", encoding="utf-8") as f:
        f.write('{"id": "a", "language": "en", "title": "x", "timestamp": 0}\n{not json\n')
    assert main(["cluster", "--input", bad, "--output", output, "--idf", idf]) == EXIT_INPUT_ERROR

    with open(bad, "w", encoding="utf-8") as f:
        f.write('{"id": "a", "language": "en", "title": "x", "timestamp": 500}\n')
        f.write('{"id": "b", "language": "en", "title": "y", "timestamp": 100}\n')
    assert main(["cluster", "--input", bad, "--output", output, "--idf", idf]) == EXIT_INPUT_ERROR
    assert main(["cluster", "--input", bad, "--output", output, "--idf", idf,
                 "--timestamp-slack", "1000"]) == 0

    stream, bad_idf = paths(workspace, "stream.jsonl", "bad.tsv")
    with open(bad_idf, "w", encoding="utf-8") as f:
        f.write("#format\tstory-flow-idf\tone\n")
    assert main(["cluster", "--input", stream, "--output", output, "--idf", bad_idf]) == EXIT_INPUT_ERROR

    missing = str(workspace / "missing.jsonl")
    assert main(["cluster", "--input", missing, "--output", output, "--idf", idf]) == EXIT_INPUT_ERROR


def test_cluster_config_errors(workspace):
    stream, output = paths(workspace, "stream.jsonl", "out.jsonl")
    en_only = str(workspace / "en.tsv")
    assert main(["build-idf", "--input", stream, "--output", en_only, "--language", "en"]) == 0
    # no IDF for de/es
    assert main(["cluster", "--input", stream, "--output", output, "--idf", en_only]) == EXIT_CONFIG_ERROR
    assert main(["build-idf", "--input", stream, "--output", en_only,
                 "--annotator", "external-command"]) == EXIT_CONFIG_ERROR
    with pytest.raises(SystemExit) as excinfo:
        main(["cluster", "--input", stream, "--output", output])
    assert excinfo.value.code == 2


def test_train_then_cluster_with_learned_models(workspace, capsys):
    stream, idf, embeddings, ranker, merge, examples, output = paths(
        workspace, "stream.jsonl", "idf.tsv", "embeddings.txt", "ranker.json", "merge.json",
        "examples.jsonl", "out.jsonl")
    code = main(["train", "--input", stream, "--output", ranker, "--idf", idf, "--embeddings", embeddings,
                 "--merge-output", merge, "--examples-dump", examples, "--folds", "2"])
    assert code == 0
    models = load_ranker(ranker)
    assert {"*", "en", "de", "es"} <= set(models.monolingual)
    with open(examples, encoding="utf-8") as f:
        record = json.loads(next(f))
    assert len(record["features"]) == 12

    code = main(["cluster", "--input", stream, "--output", output, "--idf", idf, "--embeddings", embeddings,
                 "--ranker", ranker, "--merge-model", merge])
    assert code == 0
    with open(output + ".summary.json", encoding="utf-8") as f:
        assert json.load(f)["config"]["merge_policy"] == "classifier"


def test_feature_ablation_table(workspace, capsys):
    stream, idf, output = paths(workspace, "stream.jsonl", "idf.tsv", "ablation.json")
    assert main(["ablate", "--input", stream, "--idf", idf, "--folds", "2", "--output", output]) == 0
    lines = capsys.readouterr().out.splitlines()
    header = next(i for i, line in enumerate(lines) if line.startswith("features"))
    assert [line.split()[0] for line in lines[header + 1:header + 5]] == ["tokens", "+lemmas", "+entities", "+timestamps"]
    with open(output, encoding="utf-8") as f:
        rows = json.load(f)["ablation"]
    assert rows["+timestamps"]["accuracy"] >= 0.95
    # masked columns get no weight
    assert rows["tokens"]["weights"][3:] == [0.0] * 9


def test_tune_tau(workspace, capsys):
    stream, idf, embeddings, output = paths(workspace, "stream.jsonl", "idf.tsv", "embeddings.txt", "tau.json")
    assert main(["tune-tau", "--input", stream, "--idf", idf, "--embeddings", embeddings,
                 "--grid-size", "25", "--output", output]) == 0
    assert "tau = " in capsys.readouterr().out
    with open(output, encoding="utf-8") as f:
        result = json.load(f)
    assert result["f1"] == 1.0
    assert 0.0 < result["tau"] < 12.0


def test_baseline(workspace):
    stream, idf, output = paths(workspace, "stream.jsonl", "idf.tsv", "baseline.jsonl")
    assert main(["baseline", "--input", stream, "--output", output, "--idf", idf]) == 0
    assignments = read_assignments(output)
    assert len(assignments) == 27
    assert len({a.cross_cluster for a in assignments}) == 9


def test_convert(tmp_path, capsys):
    collection = tmp_path / "articles.json"
    collection.write_text(json.dumps([
        {"id": 1, "lang": "eng", "title": "Storm", "text": "Coast hit", "date": "2020-01-02T00:00:00Z",
         "cluster": "a", "crosslingual_cluster": "x"},
        {"id": 2, "lang": "deu", "title": "Sturm", "text": "", "date": "2020-01-01T12:00:00",
         "cluster": "b", "crosslingual_cluster": "x"},
    ]), encoding="utf-8")
    output = tmp_path / "stream.jsonl"
    assert main(["convert", "--input", str(collection), "--output", str(output)]) == 0
    assert "Converted 2 articles." in capsys.readouterr().out

    docs = read_documents(str(output))
    assert [doc.id for doc in docs] == ["2", "1"]
    assert [doc.language for doc in docs] == ["de", "en"]
    assert docs[1].timestamp - docs[0].timestamp == pytest.approx(12.0)
    assert docs[0].gold_cross_label == "x"


if __name__ == "__main__":
    pytest.main([__file__])
