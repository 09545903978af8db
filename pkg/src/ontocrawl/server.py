"""HTTP/JSON API over a built graph, plus the static search UI.

All served state lives in one immutable snapshot object; reloading swaps
the snapshot reference atomically, so requests (and /healthz) always see
a complete graph.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .config import ServiceConfig
from .graph import DomainGraph, load_graph
from .crawler import RepositoryError, load_repository
from .ontology import OntologySet, format_milli
from .search import CacheTextStore, EmptyQuery, QueryError, search

log = logging.getLogger(__name__)

MAX_RESULT_LIMIT = 500


@dataclass
class Snapshot:
    ontologies: OntologySet
    graph: DomainGraph
    texts: CacheTextStore


def load_snapshot(cfg: ServiceConfig) -> Snapshot:
    if not cfg.repository_path.exists():
        raise RepositoryError(f"repository not found: {cfg.repository_path} (run a crawl first)")
    if not cfg.graph_path.exists():
        raise RepositoryError(f"graph not found: {cfg.graph_path} (run 'graph build' first)")
    records = load_repository(cfg.repository_path)
    graph = load_graph(cfg.graph_path, records)
    return Snapshot(
        ontologies=cfg.ontologies, graph=graph, texts=CacheTextStore(cfg.cache_dir)
    )


class SearchRequest(BaseModel):
    query: str = ""
    domains: list[str] = []
    semantics: str = "intersect"
    limit: int = 20


def result_to_json(result, ontologies: OntologySet) -> dict:
    per_domain = {}
    for index, milli in result.per_domain_milli.items():
        name = ontologies.domains[index].id.name
        per_domain[name] = {"milli": milli, "score": format_milli(milli)}
    return {
        "url": result.url,
        "match_score": result.match_score,
        "hits": result.hits,
        "per_domain_scores": per_domain,
        "snippet": result.snippet,
    }


def create_app(cfg: ServiceConfig) -> FastAPI:
    app = FastAPI(title="ontocrawl", docs_url=None, redoc_url=None)
    app.state.snapshot = load_snapshot(cfg)

    def refresh() -> None:
        # Build the new snapshot fully before the reference swap.
        app.state.snapshot = load_snapshot(cfg)

    app.state.refresh = refresh

    @app.exception_handler(Exception)
    async def internal_error(request: Request, exc: Exception):
        log.exception("request failed: %s %s", request.method, request.url.path)
        return JSONResponse(status_code=500, content={"detail": "internal error"})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/api/domains")
    def domains():
        snap: Snapshot = app.state.snapshot
        return [{"index": d.id.index, "name": d.id.name} for d in snap.ontologies]

    @app.get("/api/graph/stats")
    def stats():
        snap: Snapshot = app.state.snapshot
        doc = snap.graph.stats().to_json_obj()
        doc["domain_names"] = snap.ontologies.names()
        return doc

    @app.post("/api/search")
    def api_search(body: SearchRequest):
        snap: Snapshot = app.state.snapshot
        if not body.domains:
            raise HTTPException(status_code=400, detail="domains must not be empty")
        selected = set()
        for name in body.domains:
            try:
                selected.add(snap.ontologies.index_of(name))
            except KeyError:
                raise HTTPException(status_code=400, detail=f"unknown domain {name!r}")
        if body.semantics not in ("intersect", "contain"):
            raise HTTPException(status_code=400, detail=f"unknown semantics {body.semantics!r}")
        if body.limit < 1 or body.limit > MAX_RESULT_LIMIT:
            raise HTTPException(
                status_code=400, detail=f"limit must be 1..{MAX_RESULT_LIMIT}"
            )
        try:
            results = search(
                snap.graph,
                snap.texts,
                body.query,
                selected,
                semantics=body.semantics,
                limit=body.limit,
            )
        except EmptyQuery:
            raise HTTPException(status_code=422, detail="query has no searchable terms")
        except QueryError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"results": [result_to_json(r, snap.ontologies) for r in results]}

    ui_dir = cfg.server.ui_dir
    if ui_dir is not None and ui_dir.is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    else:
        if ui_dir is not None:
            log.warning("ui_dir %s not found; serving API only", ui_dir)

        @app.get("/")
        def index():
            return {"service": "ontocrawl", "api": ["/api/domains", "/api/search", "/api/graph/stats"]}

    return app
