"""Standalone SVG renderings of diagrams and heat maps."""
from __future__ import annotations

import csv
import io
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["diagram_svg", "heatmap_svg", "read_heatmap_csv"]

# stable element ids so repeated renders are byte-identical
matplotlib.rcParams["svg.hashsalt"] = "fpd"


def _save(fig) -> str:
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return buf.getvalue()


def diagram_svg(diagrams, labels=None, title: str | None = None) -> str:
    """Scatter plot of one or more diagrams with the diagonal drawn in."""
    fig, ax = plt.subplots(figsize=(4, 4))
    pts = [np.asarray(d.points if hasattr(d, "points") else d, dtype=float).reshape(-1, 2) for d in diagrams]
    finite = [p[np.isfinite(p).all(axis=1)] for p in pts]
    hi = max([float(p.max()) for p in finite if len(p)], default=1.0)
    hi = hi * 1.05 if hi > 0 else 1.0
    (line,) = ax.plot([0, hi], [0, hi], color="0.5", lw=1)
    line.set_gid("diagonal")
    for i, p in enumerate(finite):
        for k, (b, d) in enumerate(p):
            (m,) = ax.plot([b], [d], "o", ms=4, color=f"C{i % 10}")
            m.set_gid(f"point-{i}-{k}")
    if labels:
        for i, lab in enumerate(labels):
            ax.plot([], [], "o", color=f"C{i % 10}", label=lab)
        ax.legend(fontsize=7)
    ax.set_xlabel("birth")
    ax.set_ylabel("death")
    ax.set_xlim(0, hi)
    ax.set_ylim(0, hi)
    if title:
        ax.set_title(title)
    return _save(fig)


def heatmap_svg(values, row_labels=None, col_labels=None, title: str | None = None,
                fmt: str = "{:.3g}") -> str:
    """Grid of coloured cells, each labelled with its value."""
    V = np.asarray(values, dtype=float)
    if V.ndim != 2:
        raise ValueError("heat map data must be a 2-D table")
    fig, ax = plt.subplots(figsize=(1 + 0.8 * V.shape[1], 1 + 0.6 * V.shape[0]))
    finite = V[np.isfinite(V)]
    lo, hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    cmap = plt.get_cmap("viridis")
    for i in range(V.shape[0]):
        for j in range(V.shape[1]):
            v = V[i, j]
            frac = 0.5 if hi == lo or not np.isfinite(v) else (v - lo) / (hi - lo)
            rect = plt.Rectangle((j, i), 1, 1, color=cmap(frac))
            rect.set_gid(f"cell-{i}-{j}")
            ax.add_patch(rect)
            txt = ax.text(j + 0.5, i + 0.5, fmt.format(v), ha="center", va="center", fontsize=8,
                          color="white" if frac < 0.5 else "black")
            txt.set_gid(f"label-{i}-{j}")
    ax.set_xlim(0, V.shape[1])
    ax.set_ylim(V.shape[0], 0)
    ax.set_xticks(np.arange(V.shape[1]) + 0.5)
    ax.set_yticks(np.arange(V.shape[0]) + 0.5)
    ax.set_xticklabels(col_labels if col_labels is not None else range(V.shape[1]))
    ax.set_yticklabels(row_labels if row_labels is not None else range(V.shape[0]))
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return _save(fig)


def read_heatmap_csv(path):
    """Table with a header row of column labels and a leading row-label column."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if len(rows) < 2:
        raise ValueError(f"{path}: heat map needs a header and at least one row")
    cols = rows[0][1:]
    names, vals = [], []
    for lineno, r in enumerate(rows[1:], start=2):
        if len(r) != len(cols) + 1:
            raise ValueError(f"{path}: line {lineno}: expected {len(cols) + 1} fields")
        names.append(r[0])
        try:
            vals.append([float(v) for v in r[1:]])
        except ValueError:
            raise ValueError(f"{path}: line {lineno}: non-numeric cell") from None
    return np.array(vals), names, cols


def write_svg(svg: str, path) -> None:
    Path(path).write_text(svg)
