"""Figure rendering for report paths.

Every CLI report that writes delimited output can also render a figure
next to it; all functions take explicit output paths and use the Agg
backend so headless runs work.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def size_histogram_figure(size_histogram: dict[int, int], path) -> None:
    sizes = sorted(size_histogram)
    counts = [size_histogram[s] for s in sizes]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(sizes, counts, width=0.9, color="#4878a8")
    ax.set_xlabel("atoms per reaction (incl. implicit H)")
    ax.set_ylabel("reactions")
    ax.set_title("Reaction size distribution")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def element_histogram_figure(element_histogram: dict[str, int], path) -> None:
    symbols = sorted(element_histogram, key=element_histogram.get, reverse=True)
    counts = [element_histogram[s] for s in symbols]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(symbols, counts, color="#76a865")
    ax.set_xlabel("element")
    ax.set_ylabel("atom count")
    ax.set_yscale("log")
    ax.set_title("Element distribution")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def accuracy_bar_figure(table: dict[int, float], path, title: str) -> None:
    ns = sorted(table)
    values = [table[n] for n in ns]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar([f"top-{n}" for n in ns], values, color="#a86478")
    ax.set_ylabel("accuracy (%)")
    ax.set_ylim(0, 100)
    for i, v in enumerate(values):
        ax.text(i, v + 1, f"{v:.1f}", ha="center", fontsize=9)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def pathway_figure(steps_scores: list[float | None], path) -> None:
    xs = list(range(1, len(steps_scores) + 1))
    ys = [s if s is not None else 0.0 for s in steps_scores]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(xs, ys, "o-", color="#4878a8")
    ax.set_xticks(xs)
    ax.set_xlabel("step")
    ax.set_ylabel("step score")
    ax.set_title("Pathway step scores")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def recovery_figure(per_depth: dict[int, dict[str, int]], path) -> None:
    depths = sorted(per_depth)
    total = [per_depth[d]["total"] for d in depths]
    recovered = [per_depth[d]["recovered"] for d in depths]
    fig, ax = plt.subplots(figsize=(7, 4))
    width = 0.4
    ax.bar([d - width / 2 for d in depths], total, width, label="total",
           color="#b0b0b0")
    ax.bar([d + width / 2 for d in depths], recovered, width,
           label="recovered", color="#4878a8")
    ax.set_xlabel("pathway depth")
    ax.set_ylabel("benchmarks")
    ax.set_xticks(depths)
    ax.legend()
    ax.set_title("Targets recovered by depth")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
