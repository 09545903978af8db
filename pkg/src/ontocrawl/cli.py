"""Command line entry points: crawl, score, compare, graph, search, serve.

Exit codes: 0 success, 1 runtime failure (repository and friends),
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .compare import run_comparison
from .config import ConfigError, load_service_config
from .crawler import CrawlError, RepositoryError, crawl, load_repository
from .graph import load_graph, rebuild_from_repository, save_graph
from .ontology import OntologyError, format_milli, partition_terms
from .relevance import extract_text, score_partitioned
from .search import CacheTextStore, QueryError, search
from .server import create_app, result_to_json

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def _cmd_crawl(args) -> int:
    cfg = load_service_config(args.config)
    crawl_cfg, ontologies = cfg.crawl_config()
    report = crawl(crawl_cfg, ontologies)
    print(report.summary_line())
    return EXIT_OK


def _cmd_score(args) -> int:
    cfg = load_service_config(args.config)
    try:
        content = Path(args.html).read_bytes()
    except OSError as exc:
        raise ConfigError(f"html: cannot read {args.html}: {exc}") from exc
    page = extract_text(content, source_url=str(args.html))
    partition = partition_terms(cfg.ontologies)
    scores = score_partitioned(page, cfg.ontologies, partition)
    rendered = {
        dom.id.name: format_milli(scores[dom.id.index]) for dom in cfg.ontologies
    }
    print(json.dumps(rendered, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_compare(args) -> int:
    cfg = load_service_config(args.config)
    report = run_comparison(cfg)
    for run in report.runs:
        print(f"{run.label}: {run.report.summary_line()}")
    dist = report.distribution
    print(f"distribution: m={dist['m']} per_domain={dist['per_domain']}")
    out = cfg.output_dir / "compare"
    print(f"written: {out / 'compare.csv'}, {out / 'compare.json'}, figures")
    return EXIT_OK


def _cmd_graph_build(args) -> int:
    cfg = load_service_config(args.config)
    graph = rebuild_from_repository(cfg.repository_path, cfg.limits)
    save_graph(graph, cfg.graph_path)
    stats = graph.stats()
    print(f"graph: m={stats.m} space={stats.space_count} -> {cfg.graph_path}")
    return EXIT_OK


def _cmd_graph_stats(args) -> int:
    cfg = load_service_config(args.config)
    records = load_repository(cfg.repository_path)
    graph = load_graph(cfg.graph_path, records)
    doc = graph.stats().to_json_obj()
    doc["domain_names"] = cfg.ontologies.names()
    print(json.dumps(doc, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_search(args) -> int:
    cfg = load_service_config(args.config)
    records = load_repository(cfg.repository_path)
    graph = load_graph(cfg.graph_path, records)
    if args.limit < 1:
        raise ConfigError(f"limit: must be positive, got {args.limit}")
    names = [n.strip() for n in args.domains.split(",") if n.strip()]
    if not names:
        raise ConfigError("domains: at least one domain name required")
    try:
        selected = {cfg.ontologies.index_of(n) for n in names}
    except KeyError as exc:
        raise ConfigError(f"domains: unknown domain {exc.args[0]!r}") from exc
    try:
        results = search(
            graph,
            CacheTextStore(cfg.cache_dir),
            args.query,
            selected,
            semantics=args.semantics,
            limit=args.limit,
        )
    except QueryError as exc:
        raise ConfigError(f"query: {exc}") from exc
    payload = {"results": [result_to_json(r, cfg.ontologies) for r in results]}
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    cfg = load_service_config(args.config)
    host, port = cfg.server.host, cfg.server.port
    if args.bind:
        try:
            host, port_text = args.bind.rsplit(":", 1)
            port = int(port_text)
        except ValueError as exc:
            raise ConfigError(f"bind: expected host:port, got {args.bind!r}") from exc
    app = create_app(cfg)
    uvicorn.run(app, host=host, port=port, log_level="info")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ontocrawl",
        description="Multi-domain focused crawler and search service",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("crawl", help="run a crawl per the config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_crawl)

    p = sub.add_parser("score", help="score one HTML file against every domain")
    p.add_argument("--config", required=True)
    p.add_argument("html", help="HTML file to score")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("compare", help="single- vs multi-domain crawl comparison")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("graph", help="domain graph operations")
    graph_sub = p.add_subparsers(dest="graph_command", required=True)
    g = graph_sub.add_parser("build", help="build graph.json from the repository")
    g.add_argument("--config", required=True)
    g.set_defaults(func=_cmd_graph_build)
    g = graph_sub.add_parser("stats", help="print stats of the built graph")
    g.add_argument("--config", required=True)
    g.set_defaults(func=_cmd_graph_stats)

    p = sub.add_parser("search", help="query the built graph")
    p.add_argument("--config", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--domains", required=True, help="comma-separated domain names")
    p.add_argument("--semantics", choices=["intersect", "contain"], default="intersect")
    p.add_argument("--limit", type=int, default=20)
    p.set_defaults(func=_cmd_search)

    p = sub.add_parser("serve", help="serve the HTTP API and web UI")
    p.add_argument("--config", required=True)
    p.add_argument("--bind", help="host:port override")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ConfigError, OntologyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RepositoryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except CrawlError as exc:
        # Remaining crawl errors at this level are setup problems (bad
        # seeds, missing corpus root), not per-page fetch failures.
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
