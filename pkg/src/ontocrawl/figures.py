"""Render comparison reports to PNG files.

Matplotlib with the Agg backend; figures are written next to the CSV and
JSON output with fixed metadata so corpus-mode reruns stay bit-identical.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_PNG_METADATA = {"Software": "ontocrawl"}


def _save(fig, path: Path) -> None:
    fig.savefig(path, format="png", dpi=100, metadata=_PNG_METADATA)
    plt.close(fig)


def render_crawl_times(report, path: str | Path) -> None:
    """Bar chart: elapsed time of each single run, their total, the multi run."""
    labels = [run.label for run in report.single_runs]
    values = [run.report.elapsed_ms for run in report.single_runs]
    labels += ["singles total", report.multi_run.label]
    values += [sum(r.report.elapsed_ms for r in report.single_runs),
               report.multi_run.report.elapsed_ms]
    colors = ["#7f9fc4"] * (len(labels) - 2) + ["#46658c", "#c46a4f"]

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(labels, values, color=colors)
    ax.set_ylabel("elapsed (ms)")
    ax.set_title("Crawl time: per-domain runs vs combined run")
    ax.tick_params(axis="x", rotation=20)
    fig.tight_layout()
    _save(fig, Path(path))


def render_page_distribution(report, path: str | Path) -> None:
    """Bar chart: distinct relevant pages and per-domain membership counts."""
    dist = report.distribution
    labels = ["all pages (m)"] + list(dist["per_domain"])
    values = [dist["m"]] + list(dist["per_domain"].values())

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(labels, values, color=["#c46a4f"] + ["#7f9fc4"] * (len(labels) - 1))
    ax.set_ylabel("pages")
    ax.set_title("Page distribution of the combined crawl")
    fig.tight_layout()
    _save(fig, Path(path))
