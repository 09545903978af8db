"""Service configuration: one JSON file drives every subcommand.

The file names the ontology manifest, the per-domain relevance limits,
the crawl parameters and the server bind address.  Relative paths are
resolved against the config file's own directory so a fixture tree can be
checked in whole.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from pathlib import Path

from .crawler import CrawlConfig, CrawlError
from .ontology import MILLI, OntologyError, OntologySet, load_ontology_set


class ConfigError(Exception):
    """Invalid or unreadable configuration; the message names the field."""


def _limit_to_milli(field: str, value) -> int:
    try:
        milli = Decimal(str(value)) * MILLI
    except InvalidOperation as exc:
        raise ConfigError(f"{field}: not a decimal number: {value!r}") from exc
    if milli != milli.to_integral_value():
        raise ConfigError(f"{field}: finer than three decimal digits: {value!r}")
    if int(milli) < 1:
        raise ConfigError(f"{field}: relevance limit must be at least 0.001")
    return int(milli)


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8020
    ui_dir: Path | None = None


@dataclass
class ServiceConfig:
    base_dir: Path
    manifest_path: Path
    ontologies: OntologySet
    limits: tuple[int, ...]
    output_dir: Path
    crawl_raw: dict
    server: ServerConfig

    @property
    def repository_path(self) -> Path:
        return self.output_dir / "pages.jsonl"

    @property
    def graph_path(self) -> Path:
        return self.output_dir / "graph.json"

    @property
    def cache_dir(self) -> Path:
        return self.output_dir / "cache"

    def crawl_config(
        self, domain_indices: list[int] | None = None, output_dir: Path | None = None
    ) -> tuple[CrawlConfig, OntologySet]:
        """Build a crawl config, optionally restricted to a domain subset."""
        if domain_indices is None:
            ontologies = self.ontologies
            limits = self.limits
        else:
            ontologies = self.ontologies.subset(domain_indices)
            limits = tuple(self.limits[i] for i in sorted(domain_indices))
        raw = self.crawl_raw
        corpus_root = raw.get("corpus_root")
        try:
            config = CrawlConfig(
                seeds=list(raw.get("seeds", [])),
                max_pages=raw.get("max_pages", 0),
                tolerance_limit=raw.get("tolerance_limit", 0),
                limits=limits,
                output_dir=output_dir if output_dir is not None else self.output_dir,
                fetch_mode=raw.get("fetch_mode", "corpus"),
                corpus_root=(self.base_dir / corpus_root) if corpus_root else None,
                politeness_delay_ms=raw.get("politeness_delay_ms", 1000),
                max_concurrent_fetches=raw.get("max_concurrent_fetches", 1),
                respect_robots=bool(raw.get("respect_robots", False)),
                user_agent=raw.get("user_agent", "ontocrawl/0.1"),
            )
        except (CrawlError, TypeError) as exc:
            raise ConfigError(f"crawl.{exc}") from exc
        return config, ontologies


def load_service_config(path: str | Path) -> ServiceConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    base = path.parent

    manifest_rel = doc.get("manifest")
    if not manifest_rel:
        raise ConfigError("manifest: required")
    manifest_path = base / manifest_rel
    try:
        ontologies = load_ontology_set(manifest_path)
    except OntologyError as exc:
        raise ConfigError(f"manifest: {exc}") from exc

    limits_doc = doc.get("limits")
    if not isinstance(limits_doc, dict) or not limits_doc:
        raise ConfigError("limits: required, keyed by domain name")
    known = {name.lower() for name in ontologies.names()}
    for name in limits_doc:
        if name.lower() not in known:
            raise ConfigError(f"limits.{name}: not a domain in the manifest")
    limits = []
    for name in ontologies.names():
        key = next((k for k in limits_doc if k.lower() == name.lower()), None)
        if key is None:
            raise ConfigError(f"limits.{name}: missing")
        limits.append(_limit_to_milli(f"limits.{name}", limits_doc[key]))

    output_rel = doc.get("output_dir")
    if not output_rel:
        raise ConfigError("output_dir: required")

    crawl_raw = doc.get("crawl", {})
    if not isinstance(crawl_raw, dict):
        raise ConfigError("crawl: must be an object")

    server_doc = doc.get("server", {})
    if not isinstance(server_doc, dict):
        raise ConfigError("server: must be an object")
    ui_rel = server_doc.get("ui_dir")
    server = ServerConfig(
        host=server_doc.get("host", "127.0.0.1"),
        port=int(server_doc.get("port", 8020)),
        ui_dir=(base / ui_rel) if ui_rel else None,
    )

    return ServiceConfig(
        base_dir=base,
        manifest_path=manifest_path,
        ontologies=ontologies,
        limits=tuple(limits),
        output_dir=base / output_rel,
        crawl_raw=crawl_raw,
        server=server,
    )
