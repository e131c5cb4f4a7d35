"""Report emission mirroring the benchmark table layout: one table per
(dataset, label) with sample-size rows and strategy/classifier column groups,
best accuracy rendered as a two-decimal percentage."""

from __future__ import annotations

from .classifiers import CLASSIFIERS
from .errors import ReportError
from .evaluate import EvalCell, ExperimentReport, results_csv
from .sampling import STRATEGIES

CLASSIFIER_ABBREV = {"tree": "DT", "bayes": "NB", "knn": "KNN"}

SKIP_MARK = "—"  # em dash placeholder for skipped cells


def format_percent(fraction: float) -> str:
    return f"{fraction * 100.0:.2f}%"


def _ordered(values, canonical):
    present = list(dict.fromkeys(values))
    return [v for v in canonical if v in present] + [v for v in present if v not in canonical]


def emit_report(report: ExperimentReport, format: str = "markdown") -> str:
    """Render the report document; `format` is `markdown` or `csv` (the flat
    results schema). Raises ReportError for an empty report."""
    if report.is_empty():
        raise ReportError("cannot emit an empty report")
    if format == "csv":
        return results_csv(report)
    if format != "markdown":
        raise ReportError(f"unknown report format {format!r}")

    blocks = {}
    for cell in report.cells + report.skipped:
        blocks.setdefault((cell.dataset, cell.label), []).append(cell)

    out: list[str] = ["# Sampling benchmark report", ""]
    note_counter = 0
    for (dataset, label), cells in blocks.items():
        strategies = _ordered((c.strategy for c in cells), STRATEGIES)
        classifiers = _ordered((c.classifier for c in cells), CLASSIFIERS)
        sizes = sorted({c.size for c in cells})
        index = {(c.strategy, c.classifier, c.size): c for c in cells}

        out.append(f"## {dataset} — label: {label}")
        out.append("")
        multi = len(strategies) > 1
        headers = ["Sample Size"]
        for strategy in strategies:
            for classifier in classifiers:
                abbrev = CLASSIFIER_ABBREV.get(classifier, classifier)
                headers.append(f"{strategy} {abbrev}" if multi else abbrev)
        out.append("| " + " | ".join(headers) + " |")
        out.append("|" + "|".join([" ---: "] * len(headers)) + "|")

        footnotes: list[tuple[int, str]] = []
        for size in sizes:
            row = [str(size)]
            for strategy in strategies:
                for classifier in classifiers:
                    cell = index.get((strategy, classifier, size))
                    if cell is None:
                        row.append("")
                    elif isinstance(cell, EvalCell):
                        row.append(format_percent(cell.best))
                    else:
                        note_counter += 1
                        footnotes.append(
                            (note_counter, f"{dataset}/{label}/{strategy}/{classifier}/n={size}: {cell.reason}")
                        )
                        row.append(f"{SKIP_MARK}[^{note_counter}]")
            out.append("| " + " | ".join(row) + " |")
        out.append("")
        for number, note in footnotes:
            out.append(f"[^{number}]: skipped — {note}")
        if footnotes:
            out.append("")
    return "\n".join(out)
