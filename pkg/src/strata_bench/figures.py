"""Accuracy-versus-sample-size figures rendered next to the delimited output.

One PNG per (dataset, label) block, one line per strategy/classifier pair,
written atomically with a headless backend so report runs work anywhere.
"""

from __future__ import annotations

import io
import os
import re

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .errors import ReportError
from .evaluate import ExperimentReport
from .fileio import write_bytes_atomic
from .report import CLASSIFIER_ABBREV

_STRATEGY_COLORS = {"random": "tab:orange", "stratified": "tab:green", "balanced": "tab:blue"}
_CLASSIFIER_MARKERS = {"tree": "o", "bayes": "s", "knn": "^"}


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "-", text).strip("-") or "x"


def render_figures(report: ExperimentReport, out_dir: str, prefix: str = "report") -> list[str]:
    """Write one accuracy-curve PNG per (dataset, label); returns the paths."""
    if not report.cells:
        raise ReportError("cannot render figures for a report with no computed cells")
    blocks: dict[tuple[str, str], list] = {}
    for cell in report.cells:
        blocks.setdefault((cell.dataset, cell.label), []).append(cell)

    written: list[str] = []
    for (dataset, label), cells in blocks.items():
        series: dict[tuple[str, str], list[tuple[int, float]]] = {}
        for cell in cells:
            series.setdefault((cell.strategy, cell.classifier), []).append((cell.size, cell.best))
        fig, ax = plt.subplots(figsize=(7.0, 4.5))
        for (strategy, classifier), points in series.items():
            points.sort()
            xs = [size for size, _ in points]
            ys = [100.0 * best for _, best in points]
            ax.plot(
                xs,
                ys,
                label=f"{strategy} {CLASSIFIER_ABBREV.get(classifier, classifier)}",
                color=_STRATEGY_COLORS.get(strategy),
                marker=_CLASSIFIER_MARKERS.get(classifier, "o"),
                markersize=4,
                linewidth=1.4,
            )
        ax.set_xlabel("sample size")
        ax.set_ylabel("best accuracy (%)")
        ax.set_title(f"{dataset}: label {label}")
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=8)
        fig.tight_layout()
        buffer = io.BytesIO()
        fig.savefig(buffer, format="png", dpi=120)
        plt.close(fig)
        path = os.path.join(out_dir, f"{_slug(prefix)}_{_slug(dataset)}_{_slug(label)}.png")
        write_bytes_atomic(path, buffer.getvalue())
        written.append(path)
    return written
