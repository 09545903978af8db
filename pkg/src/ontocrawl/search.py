"""Domain-scoped queries over the graph: parsing, candidates, ranking.

Query terms are hit-counted against each candidate page's text; each hit
is worth 1000 and the page's stored milli relevance summed over the
selected domains is added on top, so a strongly on-topic page can outrank
one extra hit.  Pages with no query-term hit at all are dropped.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path

from .crawler import PageRecord
from .graph import DomainGraph
from .ontology import EmptyTerm, normalize_term, term_tokens
from .relevance import PageText, count_occurrences, extract_text

log = logging.getLogger(__name__)

HIT_WEIGHT = 1000
SNIPPET_RADIUS = 8

_QUOTED = re.compile(r'"([^"]*)"')


class QueryError(ValueError):
    pass


class EmptyQuery(QueryError):
    pass


class NoDomainSelected(QueryError):
    pass


@dataclass
class Query:
    raw: str
    terms: list[str]
    selected_domains: set[int]


@dataclass
class SearchResult:
    url: str
    match_score: int
    hits: int
    per_domain_milli: dict[int, int]
    snippet: str


def parse_query(raw: str, selected: set[int]) -> Query:
    """Normalize free text into terms; double-quoted spans become phrases."""
    if not selected:
        raise NoDomainSelected("select at least one domain")
    terms: list[str] = []
    rest_parts: list[str] = []
    last = 0
    for match in _QUOTED.finditer(raw):
        rest_parts.append(raw[last : match.start()])
        last = match.end()
        try:
            terms.append(normalize_term(match.group(1)))
        except EmptyTerm:
            pass
    rest_parts.append(raw[last:])
    for token in term_tokens(" ".join(rest_parts).lower()):
        terms.append(token)
    if not terms:
        raise EmptyQuery(f"no searchable terms in {raw!r}")
    return Query(raw=raw, terms=terms, selected_domains=set(selected))


def candidate_pages(graph: DomainGraph, selected: set[int], semantics: str = "intersect") -> list[PageRecord]:
    """Union of the graph databases implied by the selected domains."""
    return [graph.records[i] for i in graph.candidate_ids(selected, semantics)]


class CacheTextStore:
    """Page text retrieved from the crawl's content-addressed HTML cache."""

    def __init__(self, cache_dir: str | Path) -> None:
        self.cache_dir = Path(cache_dir)

    def get(self, record: PageRecord) -> PageText | None:
        path = self.cache_dir / f"{record.digest}.html"
        try:
            content = path.read_bytes()
        except OSError:
            log.debug("no cached content for %s", record.url)
            return None
        return extract_text(content, source_url=record.url)


class MemoryTextStore:
    """Test double: page text keyed by URL."""

    def __init__(self, pages: dict[str, PageText]) -> None:
        self.pages = pages

    def get(self, record: PageRecord) -> PageText | None:
        return self.pages.get(record.url)


def _snippet(query: Query, page: PageText) -> str:
    """Window of tokens around the first query-term hit on the page."""
    first_pos = None
    first_len = 0
    for term in query.terms:
        needle = term_tokens(term)
        if not needle:
            continue
        k = len(needle)
        for i in range(len(page.tokens) - k + 1):
            if tuple(page.tokens[i : i + k]) == needle:
                if first_pos is None or i < first_pos:
                    first_pos, first_len = i, k
                break
    if first_pos is None:
        return ""
    lo = max(0, first_pos - SNIPPET_RADIUS)
    hi = min(len(page.tokens), first_pos + first_len + SNIPPET_RADIUS)
    return " ".join(page.tokens[lo:hi])


def rank_results(query: Query, candidates: list[PageRecord], texts) -> list[SearchResult]:
    """Score candidates and order them deterministically.

    match_score = total query-term hits * 1000 + the sum of the page's
    stored milli scores over the selected domains.  Zero-hit pages are
    dropped; ties order by URL ascending.
    """
    results: list[SearchResult] = []
    for record in candidates:
        page = texts.get(record)
        if page is None:
            continue
        hits = sum(count_occurrences(term, page) for term in query.terms)
        if hits == 0:
            continue
        domain_part = sum(record.scores[i] for i in query.selected_domains)
        results.append(
            SearchResult(
                url=record.url,
                match_score=hits * HIT_WEIGHT + domain_part,
                hits=hits,
                per_domain_milli={i: record.scores[i] for i in sorted(query.selected_domains)},
                snippet=_snippet(query, page),
            )
        )
    results.sort(key=lambda r: (-r.match_score, r.url))
    return results


def search(
    graph: DomainGraph,
    texts,
    raw_query: str,
    selected: set[int],
    semantics: str = "intersect",
    limit: int | None = None,
) -> list[SearchResult]:
    """Parse, select candidates, rank; the one code path used by CLI and API."""
    query = parse_query(raw_query, selected)
    results = rank_results(query, candidate_pages(graph, selected, semantics), texts)
    if limit is not None:
        results = results[:limit]
    return results
