"""Figure rendering for evaluation reports: ROC curve, confusion matrix,
machine-fraction sensitivity curve. All figures go straight to image files."""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluation import ConfusionMatrix, FractionBin


def save_roc_figure(
    points: Sequence[tuple[float, float]], auc: float, path: str
) -> None:
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot(xs, ys, marker="o", markersize=3, label=f"AUC = {auc:.3f}")
    ax.plot([0, 1], [0, 1], linestyle="--", color="gray", linewidth=1)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.set_xlim(-0.02, 1.02)
    ax.set_ylim(-0.02, 1.02)
    ax.set_title("Detector ROC (fake = positive)")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_confusion_figure(matrix: ConfusionMatrix, path: str) -> None:
    grid = [[matrix.tp, matrix.fn], [matrix.fp, matrix.tn]]
    fig, ax = plt.subplots(figsize=(4.5, 4))
    image = ax.imshow(grid, cmap="Blues")
    for i in range(2):
        for j in range(2):
            ax.text(j, i, str(grid[i][j]), ha="center", va="center", fontsize=14)
    ax.set_xticks([0, 1], labels=["pred fake", "pred real"])
    ax.set_yticks([0, 1], labels=["gold fake", "gold real"])
    ax.set_title("Confusion matrix")
    fig.colorbar(image, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_fraction_figure(rows: Sequence[FractionBin], path: str) -> None:
    centers = [(row.low + row.high) / 2 for row in rows if row.n]
    rates = [row.real_rate for row in rows if row.n]
    sizes = [row.n for row in rows if row.n]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(centers, rates, marker="o")
    for x, y, n in zip(centers, rates, sizes):
        ax.annotate(f"n={n}", (x, y), textcoords="offset points", xytext=(0, 6), fontsize=7)
    ax.set_xlabel("machine-generated token fraction")
    ax.set_ylabel("share predicted real")
    ax.set_xlim(0, 1)
    ax.set_ylim(-0.05, 1.05)
    ax.set_title("Predictions by machine-token fraction")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
