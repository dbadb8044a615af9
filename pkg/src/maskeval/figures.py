"""Figure rendering for report bundles.

Renders the same data the CSV sections carry: a bar chart of false-negative
proportions per entity type and a heatmap of entity-type disagreements.
Files are written next to the delimited output; rendering is optional and
nothing else depends on it.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .report import ReportBundle


def _plot_false_negatives(bundle: ReportBundle, target: Path) -> Path | None:
    if bundle.errors is None:
        return None
    rows = [(t, row.proportion, row.total)
            for t, row in sorted(bundle.errors.per_entity_type.items())
            if row.total > 0]
    if not rows:
        return None
    labels = [f"{t}\n(n={total})" for t, _, total in rows]
    values = [p for _, p, _ in rows]

    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.bar(range(len(values)), values, color="#4c72b0")
    ax.set_xticks(range(len(values)))
    ax.set_xticklabels(labels, fontsize=8)
    ax.set_ylim(0, 1)
    ax.set_ylabel("proportion of false negatives")
    ax.set_title("Unprotected entities per entity type")
    fig.tight_layout()
    fig.savefig(target, dpi=150)
    plt.close(fig)
    return target


def _plot_type_confusion(bundle: ReportBundle, target: Path) -> Path | None:
    if bundle.agreement is None:
        return None
    confusion = bundle.agreement.disagreements.entity_type_confusion
    if not confusion:
        return None
    labels = sorted({t for pair in confusion for t in pair})
    index = {t: i for i, t in enumerate(labels)}
    matrix = np.zeros((len(labels), len(labels)), dtype=int)
    for (a, b), count in confusion.items():
        matrix[index[a], index[b]] = count
        matrix[index[b], index[a]] = count

    fig, ax = plt.subplots(figsize=(6, 5))
    image = ax.imshow(matrix, cmap="Reds")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=8)
    ax.set_yticks(range(len(labels)))
    ax.set_yticklabels(labels, fontsize=8)
    for i in range(len(labels)):
        for j in range(len(labels)):
            if matrix[i, j]:
                ax.text(j, i, str(matrix[i, j]), ha="center", va="center", fontsize=8)
    ax.set_title("Entity type disagreements (mention pairs)")
    fig.colorbar(image, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(target, dpi=150)
    plt.close(fig)
    return target


def render_figures(bundle: ReportBundle, outdir: str | Path) -> list[Path]:
    """Render all figures the bundle has data for; returns written paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for result in (
        _plot_false_negatives(bundle, outdir / "false_negatives_by_entity_type.png"),
        _plot_type_confusion(bundle, outdir / "entity_type_confusion.png"),
    ):
        if result is not None:
            written.append(result)
    return written
