import argparse
import logging
import os
import sys
from contextlib import ExitStack
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from ..annotators.registry import create_annotator, list_annotators
from ..clusterer.config import CONTESTS, CROSS_MODES, G_UPDATES, ClustererConfig
from ..clusterer.engine import OnlineClusterer
from ..core.errors import ConfigError, DegenerateTrainingDataError, EmptyCorpusError, InputError, StoryFlowError
from ..core.types import Assignment, DocRepresentation, Document
from ..evaluation.clustream import ClustreamConfig, clustream_baseline
from ..evaluation.report import build_report, format_table
from ..featurizer.embeddings import EmbeddingTable
from ..featurizer.engine import TF_SCHEMES, Featurizer, FeaturizerConfig
from ..featurizer.idf import IdfTable, build_idf
from ..io.converter import FieldMap, convert_records, read_collection
from ..io.formats import (
    fingerprint, load_merge_model, load_ranker, read_assignments, save_merge_model, save_ranker,
    TraceWriter, write_assignments, write_json, write_ranking_examples, write_snapshot, write_summary,
)
from ..io.stream import DEFAULT_SLACK_HOURS, read_documents, read_stream, write_stream
from ..learning.merge import train_merge
from ..learning.ranker import DEFAULT_REGULARIZATION_GRID, train_ranker
from ..learning.ranking import (
    FEATURE_GROUPS, RankingConfig, generate_crosslingual_ranking_data, generate_ranking_data, mask_features,
    ranking_accuracy,
)
from ..learning.tuning import TuningConfig, tune_cross_tau, tune_tau
from ..similarity.models import DEFAULT_LANGUAGE_KEY, CrossSimilarityModel, ModelSet, SimilarityModel

logger = logging.getLogger(__name__)

EXIT_INPUT_ERROR = 65
EXIT_CONFIG_ERROR = 78


# Shared loading

def _annotator(args):
    options = {"command": args.annotator_command} if args.annotator == "external-command" else {}
    return create_annotator(args.annotator, **options)


def _featurizer(args) -> Featurizer:
    idf = IdfTable()
    for path in args.idf:
        idf.merge(IdfTable.load(path))
    embeddings = EmbeddingTable.load(args.embeddings) if args.embeddings else None
    return Featurizer(idf, embeddings, _annotator(args), FeaturizerConfig(tf_scheme=args.tf_scheme))


def _models(args) -> ModelSet:
    models = load_ranker(args.ranker) if getattr(args, "ranker", None) else ModelSet()
    if getattr(args, "merge_model", None):
        models.merge = load_merge_model(args.merge_model)
    if args.sigma_hours is not None or args.cross_sigma_hours is not None:
        models = models.with_sigma(args.sigma_hours, args.cross_sigma_hours)
    return models


def _represented(docs, featurizer: Featurizer) -> Iterator[Tuple[Document, DocRepresentation]]:
    for doc in docs:
        yield doc, featurizer.represent(doc)


def _clusterer_config(args, models: ModelSet) -> ClustererConfig:
    return ClustererConfig(
        tau=args.tau,
        merge_policy="classifier" if models.merge is not None else "threshold",
        cross_mode=args.cross_mode,
        pivot=args.pivot,
        g_update=args.g_update,
        topple_budget=args.topple_budget,
        contest=args.contest,
        pivot_fallback=args.pivot_fallback,
        cross_tau=args.cross_tau,
        candidate_index=args.candidate_index,
        centroid_top_k=args.centroid_top_k or None,
    ).validate()


def _settings(args) -> Dict:
    return {key: value for key, value in sorted(vars(args).items()) if key not in ("func", "verbose", "quiet")}


def _inputs(args) -> List[str]:
    paths = []
    for name in ("input", "test", "idf", "embeddings", "ranker", "merge_model", "gold"):
        value = getattr(args, name, None)
        if isinstance(value, list):
            paths.extend(value)
        elif value:
            paths.append(value)
    return paths


# Commands

def cmd_build_idf(args) -> int:
    annotator = _annotator(args)
    if args.language:
        languages = [args.language]
    else:
        languages = sorted({doc.language for doc in read_stream(args.input, None)})
    if not languages:
        raise EmptyCorpusError(f"corpus {args.input} has no documents")

    table = IdfTable()
    for language in languages:
        table.merge(build_idf(read_stream(args.input, None), language, annotator))
        print(f"{language}: {table.doc_counts[language]} documents, {table.term_count(language)} terms")
    table.save(args.output)
    print(f"Written to {args.output}")
    return 0


def cmd_cluster(args) -> int:
    featurizer = _featurizer(args)
    models = _models(args)
    config = _clusterer_config(args, models)
    with ExitStack() as stack:
        sink = stack.enter_context(TraceWriter(args.trace)) if args.trace else None
        clusterer = OnlineClusterer(models, config, trace_sink=sink, keep_traces=False)
        docs = read_stream(args.input, args.timestamp_slack)
        for doc, rep in _represented(docs, featurizer):
            clusterer.ingest(doc, rep)

    assignments = clusterer.final_assignments()
    write_assignments(assignments, args.output)
    if args.snapshot:
        write_snapshot(clusterer.state.snapshot(), args.snapshot)

    state = clusterer.state
    topples = clusterer.topple_counts
    summary = {
        "documents": len(assignments),
        "monolingual_clusters": {language: len(state.clusters(language)) for language in state.languages()},
        "crosslingual_clusters": len(state.cross),
        "topples": {
            "total": int(sum(topples)),
            "updates_with_topples": int(sum(1 for count in topples if count)),
            "median": float(np.median(topples)) if topples else 0.0,
        },
        "config": config.to_dict(),
        "fingerprint": fingerprint(_inputs(args), _settings(args)),
    }
    write_summary(args.output, summary)
    print(f"Clustered {len(assignments)} documents into "
          f"{sum(summary['monolingual_clusters'].values())} monolingual and "
          f"{summary['crosslingual_clusters']} crosslingual clusters.")
    print(f"Written to {args.output}")
    return 0


def cmd_train(args) -> int:
    featurizer = _featurizer(args)
    stream = list(_represented(read_documents(args.input, args.timestamp_slack), featurizer))
    ranking_config = RankingConfig(positives=args.positives, mu=0.0, sigma=args.sigma_hours or 72.0)
    grid = [args.regularization] if args.regularization is not None else DEFAULT_REGULARIZATION_GRID

    examples = generate_ranking_data(stream, ranking_config)
    if args.examples_dump:
        write_ranking_examples(examples, args.examples_dump)

    models = ModelSet(monolingual={})
    fit = train_ranker(examples, folds=args.folds, grid=grid, seed=args.seed)
    models.monolingual[DEFAULT_LANGUAGE_KEY] = SimilarityModel.from_weights(fit.weights, 0.0, ranking_config.sigma)
    print(f"*: {len(examples)} queries, C={fit.regularization:g}")
    for language in sorted({example.language for example in examples}):
        subset = [example for example in examples if example.language == language]
        try:
            fit = train_ranker(subset, folds=args.folds, grid=grid, seed=args.seed)
        except DegenerateTrainingDataError:
            logger.warning("no rankable queries for %s; it falls back to the pooled model", language)
            continue
        models.monolingual[language] = SimilarityModel.from_weights(fit.weights, 0.0, ranking_config.sigma)
        print(f"{language}: {len(subset)} queries, C={fit.regularization:g}")

    cross_examples = generate_crosslingual_ranking_data(
        stream, config=ranking_config, mode=args.cross_mode, pivot=args.pivot)
    try:
        cross_fit = train_ranker(cross_examples, folds=args.folds, grid=grid, seed=args.seed)
        models.crosslingual = CrossSimilarityModel.from_weights(cross_fit.weights, 0.0, ranking_config.sigma)
        print(f"crosslingual: {len(cross_examples)} queries, C={cross_fit.regularization:g}")
    except DegenerateTrainingDataError:
        logger.warning("no crosslingual ranking queries; keeping the untrained crosslingual model")

    digest = fingerprint(_inputs(args), _settings(args))
    save_ranker(models, args.output, digest)
    print(f"Written to {args.output}")

    if args.merge_output:
        merge = train_merge(stream, models, seed=args.seed)
        save_merge_model(merge, args.merge_output, digest)
        print(f"Written to {args.merge_output}")
    return 0


def cmd_ablate(args) -> int:
    featurizer = _featurizer(args)
    ranking_config = RankingConfig(positives=args.positives)
    train = generate_ranking_data(
        _represented(read_documents(args.input, args.timestamp_slack), featurizer), ranking_config)
    test = train
    if args.test:
        test = generate_ranking_data(
            _represented(read_documents(args.test, args.timestamp_slack), featurizer), ranking_config)
    grid = [args.regularization] if args.regularization is not None else DEFAULT_REGULARIZATION_GRID

    rows = {}
    print(f"{'features':<12} {'C':>8} {'accuracy':>9}")
    for name, keep in FEATURE_GROUPS.items():
        fit = train_ranker(mask_features(train, keep), folds=args.folds, grid=grid, seed=args.seed)
        accuracy = ranking_accuracy(fit.weights, mask_features(test, keep))
        rows[name] = {"regularization": fit.regularization, "accuracy": accuracy, "weights": fit.weights.tolist()}
        print(f"{name:<12} {fit.regularization:>8g} {100 * accuracy:>8.1f}%")
    if args.output:
        write_json(args.output, {"ablation": rows, "fingerprint": fingerprint(_inputs(args), _settings(args))})
        print(f"Written to {args.output}")
    return 0


def cmd_tune_tau(args) -> int:
    featurizer = _featurizer(args)
    models = _models(args)
    models.merge = None
    stream = list(_represented(read_documents(args.input, args.timestamp_slack), featurizer))
    config = _clusterer_config(args, models)
    tuning = TuningConfig(grid_size=args.grid_size)

    if args.crosslingual:
        result = tune_cross_tau(stream, models, config, tuning=tuning)
        name = "cross_tau"
    else:
        result = tune_tau(stream, models, config, tuning=tuning)
        name = "tau"
    print(f"{name} = {result.value!r} (F1 {result.score:.4f})")
    if args.output:
        write_json(args.output, {
            name: result.value,
            "f1": result.score,
            "evaluations": [[value, score] for value, score in result.evaluations.items()],
            "fingerprint": fingerprint(_inputs(args), _settings(args)),
        })
        print(f"Written to {args.output}")
    return 0


def _named(entry: str) -> Tuple[str, str]:
    if "=" in entry:
        name, path = entry.split("=", 1)
        return name, path
    return os.path.splitext(os.path.basename(entry))[0], entry


def cmd_evaluate(args) -> int:
    gold = read_documents(args.gold, None)
    reports = {}
    for entry in args.input:
        name, path = _named(entry)
        reports[name] = build_report(read_assignments(path), gold)
    print(format_table(reports), end="")
    if args.output:
        write_json(args.output, {
            "systems": reports,
            "fingerprint": fingerprint([_named(entry)[1] for entry in args.input] + [args.gold], _settings(args)),
        })
        print(f"Written to {args.output}")
    return 0


def cmd_baseline(args) -> int:
    featurizer = _featurizer(args)
    config = ClustreamConfig(max_clusters=args.max_clusters, boundary_factor=args.boundary_factor,
                             initial_radius=args.initial_radius, horizon_hours=args.horizon_hours)
    docs = read_documents(args.input, args.timestamp_slack)
    labels = clustream_baseline(_represented(docs, featurizer), config)

    # No crosslingual linking: every baseline cluster is its own crosslingual cluster
    cross_ids: Dict[Tuple[str, int], int] = {}
    assignments = []
    for doc in docs:
        key = labels[doc.id]
        cross_id = cross_ids.setdefault(key, len(cross_ids) + 1)
        assignments.append(Assignment(doc.id, doc.language, key[1], cross_id))
    write_assignments(assignments, args.output)
    write_summary(args.output, {
        "documents": len(assignments),
        "clusters": len(cross_ids),
        "fingerprint": fingerprint(_inputs(args), _settings(args)),
    })
    print(f"Clustered {len(assignments)} documents into {len(cross_ids)} micro-clusters.")
    print(f"Written to {args.output}")
    return 0


def cmd_convert(args) -> int:
    fields = FieldMap(
        id=args.field_id, language=args.field_language, title=args.field_title, body=args.field_body,
        timestamp=args.field_timestamp, gold_mono=args.field_cluster, gold_cross=args.field_cross,
    )
    docs = convert_records(read_collection(args.input), fields)
    count = write_stream(docs, args.output)
    print(f"Converted {count} articles.")
    print(f"Written to {args.output}")
    return 0


# Parser

def _add_featurizer_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--idf", action="append", required=True,
                        help="IDF table (repeatable, one per language or merged)")
    parser.add_argument("--embeddings", help="crosslingual embedding file")
    parser.add_argument("--tf-scheme", choices=TF_SCHEMES, default="raw")
    _add_annotator_flags(parser)


def _add_annotator_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--annotator", choices=list_annotators(), default="none")
    parser.add_argument("--annotator-command", help="command for --annotator external-command")


def _add_clusterer_flags(parser: argparse.ArgumentParser) -> None:
    defaults = ClustererConfig()
    parser.add_argument("--ranker", help="similarity model file (untrained all-ones weights if omitted)")
    parser.add_argument("--tau", type=float, default=defaults.tau)
    parser.add_argument("--sigma-hours", type=float, help="override sigma of every similarity model")
    parser.add_argument("--cross-sigma-hours", type=float, help="override sigma of the crosslingual model")
    parser.add_argument("--pivot", default=defaults.pivot)
    parser.add_argument("--cross-mode", choices=CROSS_MODES, default=defaults.cross_mode)
    parser.add_argument("--g-update", choices=G_UPDATES, default=defaults.g_update)
    parser.add_argument("--contest", choices=CONTESTS, default=defaults.contest)
    parser.add_argument("--topple-budget", type=int, default=defaults.topple_budget)
    parser.add_argument("--pivot-fallback", action="store_true")
    parser.add_argument("--cross-tau", type=float)
    parser.add_argument("--candidate-index", action="store_true")
    parser.add_argument("--centroid-top-k", type=int, default=defaults.centroid_top_k,
                        help="terms kept per centroid sum; 0 keeps all")
    parser.add_argument("--timestamp-slack", type=float, default=DEFAULT_SLACK_HOURS)
    parser.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="story-flow", description="Online multilingual news story clustering")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    parser.add_argument("-q", "--quiet", action="store_true", help="only log errors")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-idf", help="build an IDF table from a corpus")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--language", help="only this language (default: every language in the corpus)")
    _add_annotator_flags(p)
    p.set_defaults(func=cmd_build_idf)

    p = sub.add_parser("cluster", help="cluster a document stream")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--merge-model", help="merge classifier file (replaces the tau threshold)")
    p.add_argument("--trace", help="write decision traces here")
    p.add_argument("--snapshot", help="write the final clustering state here")
    _add_featurizer_flags(p)
    _add_clusterer_flags(p)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("train", help="train similarity models (and optionally the merge classifier)")
    p.add_argument("--input", required=True, help="labeled training stream")
    p.add_argument("--output", required=True, help="similarity model file to write")
    p.add_argument("--merge-output", help="also train the merge classifier and write it here")
    p.add_argument("--examples-dump", help="write the monolingual ranking examples here")
    p.add_argument("--positives", choices=("system", "gold"), default="system")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--regularization", type=float, help="fixed C instead of cross-validation")
    p.add_argument("--sigma-hours", type=float)
    p.add_argument("--pivot", default="en")
    p.add_argument("--cross-mode", choices=CROSS_MODES, default="sum")
    p.add_argument("--timestamp-slack", type=float, default=DEFAULT_SLACK_HOURS)
    p.add_argument("--seed", type=int, default=0)
    _add_featurizer_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("ablate", help="ranker accuracy as feature groups are added")
    p.add_argument("--input", required=True, help="labeled training stream")
    p.add_argument("--test", help="labeled stream to score on (default: the training stream)")
    p.add_argument("--output", help="write the table as JSON here")
    p.add_argument("--positives", choices=("system", "gold"), default="system")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--regularization", type=float, help="fixed C instead of cross-validation")
    p.add_argument("--timestamp-slack", type=float, default=DEFAULT_SLACK_HOURS)
    p.add_argument("--seed", type=int, default=0)
    _add_featurizer_flags(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("tune-tau", help="tune the clustering threshold on a labeled stream")
    p.add_argument("--input", required=True, help="labeled development stream")
    p.add_argument("--output", help="write the search result here")
    p.add_argument("--crosslingual", action="store_true", help="tune the crosslingual threshold instead")
    p.add_argument("--grid-size", type=int, default=TuningConfig().grid_size)
    _add_featurizer_flags(p)
    _add_clusterer_flags(p)
    p.set_defaults(func=cmd_tune_tau)

    p = sub.add_parser("evaluate", help="pairwise metrics of assignments against gold labels")
    p.add_argument("--input", action="append", required=True, help="assignments file, optionally NAME=PATH (repeatable)")
    p.add_argument("--gold", required=True, help="labeled stream")
    p.add_argument("--output", help="write the JSON report here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("baseline", help="run the micro-clustering baseline")
    defaults = ClustreamConfig()
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--max-clusters", type=int, default=defaults.max_clusters)
    p.add_argument("--boundary-factor", type=float, default=defaults.boundary_factor)
    p.add_argument("--initial-radius", type=float, default=defaults.initial_radius)
    p.add_argument("--horizon-hours", type=float, default=defaults.horizon_hours)
    p.add_argument("--timestamp-slack", type=float, default=DEFAULT_SLACK_HOURS)
    _add_featurizer_flags(p)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("convert", help="convert an article collection to the stream format")
    fields = FieldMap()
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--field-id", default=fields.id)
    p.add_argument("--field-language", default=fields.language)
    p.add_argument("--field-title", default=fields.title)
    p.add_argument("--field-body", default=fields.body)
    p.add_argument("--field-timestamp", default=fields.timestamp)
    p.add_argument("--field-cluster", default=fields.gold_mono)
    p.add_argument("--field-cross", default=fields.gold_cross)
    p.set_defaults(func=cmd_convert)
    return parser


def _configure_logging(args) -> None:
    if args.quiet:
        level = logging.ERROR
    elif args.verbose >= 2:
        level = logging.DEBUG
    elif args.verbose == 1:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args)

    try:
        return args.func(args)
    except InputError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except ConfigError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except OSError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except StoryFlowError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
