"""Single-domain versus all-domain crawl comparison over one corpus.

Runs one crawl per domain with just that domain's ontology, then one
crawl with every domain loaded, all on the same corpus and fetch budget.
Emits a CSV and JSON report plus rendered figures: crawl times per run
and the page distribution of the combined run.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

from .config import ConfigError, ServiceConfig
from .crawler import CrawlReport, crawl, load_repository
from .figures import render_crawl_times, render_page_distribution
from .graph import build_graph

CSV_NAME = "compare.csv"
JSON_NAME = "compare.json"


@dataclass
class CompareRun:
    label: str
    domain_names: list[str]
    report: CrawlReport
    stored_urls: list[str]

    def to_json_obj(self) -> dict:
        obj = {"label": self.label, "domains": self.domain_names}
        obj.update(self.report.to_json_obj())
        obj["stored_urls"] = self.stored_urls
        return obj


@dataclass
class CompareReport:
    runs: list[CompareRun]          # one per single domain, multi run last
    distribution: dict

    @property
    def single_runs(self) -> list[CompareRun]:
        return self.runs[:-1]

    @property
    def multi_run(self) -> CompareRun:
        return self.runs[-1]

    def to_json_obj(self) -> dict:
        return {
            "runs": [run.to_json_obj() for run in self.runs],
            "distribution": self.distribution,
            "single_elapsed_ms_total": sum(r.report.elapsed_ms for r in self.single_runs),
            "multi_elapsed_ms": self.multi_run.report.elapsed_ms,
        }


def _run_one(cfg: ServiceConfig, indices: list[int] | None, out_dir: Path, label: str) -> CompareRun:
    crawl_cfg, ontologies = cfg.crawl_config(domain_indices=indices, output_dir=out_dir)
    report = crawl(crawl_cfg, ontologies)
    stored = [r.url for r in load_repository(out_dir / "pages.jsonl")]
    return CompareRun(
        label=label, domain_names=ontologies.names(), report=report, stored_urls=stored
    )


def run_comparison(cfg: ServiceConfig, out_root: Path | None = None) -> CompareReport:
    """Execute all runs and write compare.csv, compare.json and the figures."""
    if cfg.crawl_raw.get("fetch_mode", "corpus") != "corpus":
        raise ConfigError("crawl.fetch_mode: comparison requires corpus mode")
    root = out_root if out_root is not None else cfg.output_dir / "compare"
    root.mkdir(parents=True, exist_ok=True)

    runs = []
    for dom in cfg.ontologies:
        runs.append(
            _run_one(cfg, [dom.id.index], root / f"single_{dom.id.name}", dom.id.name)
        )
    multi = _run_one(cfg, None, root / "multi", "+".join(cfg.ontologies.names()))
    runs.append(multi)

    multi_records = load_repository(root / "multi" / "pages.jsonl")
    stats = build_graph(multi_records, len(cfg.ontologies)).stats()
    distribution = {
        "m": stats.m,
        "per_domain": dict(zip(cfg.ontologies.names(), stats.per_domain)),
        "space": stats.space_count,
        "space_edge_weight": stats.space_edge_weight,
    }
    report = CompareReport(runs=runs, distribution=distribution)

    _write_csv(report, cfg.ontologies.names(), root / CSV_NAME)
    (root / JSON_NAME).write_text(
        json.dumps(report.to_json_obj(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    render_crawl_times(report, root / "crawl_times.png")
    render_page_distribution(report, root / "page_distribution.png")
    return report


def _write_csv(report: CompareReport, all_names: list[str], path: Path) -> None:
    header = ["run", "domains", "fetched", "stored", "elapsed_ms"]
    header += [f"stored_{name}" for name in all_names]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for run in report.runs:
            row = [
                run.label,
                "+".join(run.domain_names),
                run.report.fetched,
                run.report.stored,
                run.report.elapsed_ms,
            ]
            row += [run.report.per_domain_stored.get(name, 0) for name in all_names]
            writer.writerow(row)
