"""Metrics reports: machine-readable records and a plain-text comparison table."""

from typing import Any, Dict, Iterable, List, Mapping, Sequence

from .metrics import crosslingual_metrics_for, monolingual_metrics_for
from ..core.types import Assignment, Document


def build_report(assignments: Sequence[Assignment], docs: Iterable[Document]) -> Dict[str, Any]:
    """Per-language, overall and crosslingual pairwise metrics of one run."""
    docs = list(docs)
    languages = sorted({doc.language for doc in docs if doc.gold_mono_label is not None})
    report: Dict[str, Any] = {
        "languages": {
            language: monolingual_metrics_for(assignments, docs, language).to_dict()
            for language in languages
        },
        "monolingual": monolingual_metrics_for(assignments, docs).to_dict(),
    }
    if any(doc.gold_cross_label is not None for doc in docs):
        report["crosslingual"] = crosslingual_metrics_for(assignments, docs).to_dict()
    return report


def format_table(reports: Mapping[str, Dict[str, Any]]) -> str:
    """
    One row per system, F1/P/R columns per language.

    Args:
        reports: system name -> report from build_report
    """
    languages: List[str] = sorted({lang for report in reports.values() for lang in report["languages"]})
    columns = [(lang, report_key) for lang in languages for report_key in ("f1", "precision", "recall")]
    header = ["system"] + [f"{lang} {key[0].upper() if key != 'f1' else 'F1'}" for lang, key in columns]
    has_cross = any("crosslingual" in report for report in reports.values())
    if has_cross:
        header.append("cross F1")

    rows = [header]
    for name, report in reports.items():
        row = [name]
        for lang, key in columns:
            metrics = report["languages"].get(lang)
            row.append(f"{100 * metrics[key]:.1f}" if metrics else "-")
        if has_cross:
            cross = report.get("crosslingual")
            row.append(f"{100 * cross['f1']:.1f}" if cross else "-")
        rows.append(row)

    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip() for row in rows]
    lines.insert(1, "  ".join("-" * width for width in widths))
    return "\n".join(lines) + "\n"
