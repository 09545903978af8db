"""Focused crawl loop: frontier, fetching, scoring, tunneling, persistence.

Pages are processed in breadth-first order keyed by (level, discovery
order), where level counts consecutive irrelevant ancestors since the
last relevant page or seed.  Links out of a relevant page re-enter the
frontier at level 0; links out of an irrelevant page carry its level + 1
and are discarded once that exceeds the tolerance limit.  Because a page
fetched through a poor path may later be reachable through a better one,
level improvements are propagated through already-fetched pages without
refetching.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from html.parser import HTMLParser
from pathlib import Path
from urllib.parse import urljoin, urlsplit, urlunsplit

import requests

from .ontology import OntologySet, partition_terms
from .relevance import classify_domains, extract_text, score_partitioned

log = logging.getLogger(__name__)

MAX_REDIRECTS = 5
FETCH_TIMEOUT_S = 10.0
HTML_CONTENT_TYPES = ("text/html", "application/xhtml+xml")

# Corpus-mode runs tick a virtual clock instead of reading the wall clock,
# so repeated runs produce byte-identical repositories and reports.
VIRTUAL_EPOCH = datetime(2000, 1, 1, tzinfo=timezone.utc)
VIRTUAL_TICK_MS = 10


class CrawlError(Exception):
    pass


class InvalidUrl(CrawlError):
    pass


class FetchError(CrawlError):
    pass


class NotInCorpus(FetchError):
    pass


class RepositoryError(CrawlError):
    pass


def normalize_url(raw: str, base: str | None = None) -> str:
    """Resolve against base and canonicalize for deduplication.

    Scheme and host are lowercased, the default port and any fragment are
    stripped, and an empty path becomes "/".  Only http/https survive.
    """
    resolved = urljoin(base, raw.strip()) if base else raw.strip()
    parts = urlsplit(resolved)
    scheme = parts.scheme.lower()
    if scheme not in ("http", "https"):
        raise InvalidUrl(f"non-fetchable scheme in {raw!r}")
    host = parts.hostname
    if not host:
        raise InvalidUrl(f"no host in {raw!r}")
    netloc = host.lower()
    default_port = 80 if scheme == "http" else 443
    try:
        port = parts.port
    except ValueError as exc:
        raise InvalidUrl(f"bad port in {raw!r}") from exc
    if port is not None and port != default_port:
        netloc = f"{netloc}:{port}"
    path = parts.path or "/"
    return urlunsplit((scheme, netloc, path, parts.query, ""))


class _LinkCollector(HTMLParser):
    def __init__(self) -> None:
        super().__init__()
        self.hrefs: list[str] = []

    def handle_starttag(self, tag: str, attrs) -> None:
        if tag == "a":
            for name, value in attrs:
                if name == "href" and value:
                    self.hrefs.append(value)


def extract_links(html: bytes, base: str) -> list[str]:
    """De-duplicated anchor targets in document order, resolved and normalized."""
    collector = _LinkCollector()
    collector.feed(html.decode("utf-8", errors="replace"))
    collector.close()
    seen: set[str] = set()
    links: list[str] = []
    for href in collector.hrefs:
        try:
            url = normalize_url(href, base)
        except InvalidUrl:
            continue
        if url not in seen:
            seen.add(url)
            links.append(url)
    return links


@dataclass
class CrawlConfig:
    """Parameters of one crawl run.

    max_pages is a fetch budget: the crawl dispatches at most that many
    fetches, successful or not.  limits holds one milli-unit relevance
    threshold per domain, aligned with the ontology set in use.
    """

    seeds: list[str]
    max_pages: int
    tolerance_limit: int
    limits: tuple[int, ...]
    output_dir: Path
    fetch_mode: str = "corpus"
    corpus_root: Path | None = None
    politeness_delay_ms: int = 1000
    max_concurrent_fetches: int = 1
    respect_robots: bool = False
    user_agent: str = "ontocrawl/0.1"

    def __post_init__(self) -> None:
        if not self.seeds:
            raise CrawlError("seeds: must not be empty")
        if self.max_pages < 1:
            raise CrawlError("max_pages: must be >= 1")
        if self.tolerance_limit < 0:
            raise CrawlError("tolerance_limit: must be >= 0")
        if self.fetch_mode not in ("live", "corpus"):
            raise CrawlError(f"fetch_mode: unknown mode {self.fetch_mode!r}")
        if self.fetch_mode == "corpus" and self.corpus_root is None:
            raise CrawlError("corpus_root: required in corpus mode")
        if self.max_concurrent_fetches < 1:
            raise CrawlError("max_concurrent_fetches: must be >= 1")
        if any(lim < 1 for lim in self.limits):
            raise CrawlError("limits: every relevance limit must be >= 1 milli")


@dataclass
class PageRecord:
    """One harvested page: only pages relevant to at least one domain are kept."""

    url: str
    digest: str
    scores: tuple[int, ...]
    domains: frozenset[int]
    fetched_at: str

    def to_json_obj(self) -> dict:
        return {
            "url": self.url,
            "digest": self.digest,
            "scores": list(self.scores),
            "domains": sorted(self.domains),
            "fetched_at": self.fetched_at,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "PageRecord":
        return cls(
            url=obj["url"],
            digest=obj["digest"],
            scores=tuple(obj["scores"]),
            domains=frozenset(obj["domains"]),
            fetched_at=obj["fetched_at"],
        )


@dataclass
class CrawlReport:
    domain_names: list[str]
    fetched: int = 0
    stored: int = 0
    discarded: int = 0
    fetch_errors: int = 0
    elapsed_ms: int = 0
    per_domain_stored: dict[str, int] = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        return {
            "fetched": self.fetched,
            "stored": self.stored,
            "discarded": self.discarded,
            "fetch_errors": self.fetch_errors,
            "elapsed_ms": self.elapsed_ms,
            "per_domain_stored": {n: self.per_domain_stored.get(n, 0) for n in self.domain_names},
        }

    def summary_line(self) -> str:
        return (
            f"fetched={self.fetched} stored={self.stored} "
            f"discarded={self.discarded} elapsed_ms={self.elapsed_ms}"
        )


def load_repository(path: str | Path) -> list[PageRecord]:
    """Read a pages.jsonl repository back into records."""
    records = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    records.append(PageRecord.from_json_obj(json.loads(line)))
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise RepositoryError(f"{path}:{lineno}: bad record: {exc}") from exc
    except OSError as exc:
        raise RepositoryError(f"cannot read repository {path}: {exc}") from exc
    return records


class _Clock:
    """Wall clock for live crawls."""

    def __init__(self) -> None:
        self._start = time.monotonic()

    def on_fetch(self) -> None:
        pass

    def now_iso(self) -> str:
        return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%f")[:-3] + "Z"

    def elapsed_ms(self) -> int:
        return int((time.monotonic() - self._start) * 1000)


class _VirtualClock(_Clock):
    """Deterministic clock: advances a fixed quantum per fetch dispatched."""

    def __init__(self) -> None:
        self._ticks = 0

    def on_fetch(self) -> None:
        self._ticks += 1

    def now_iso(self) -> str:
        at = VIRTUAL_EPOCH + timedelta(milliseconds=self._ticks * VIRTUAL_TICK_MS)
        return at.strftime("%Y-%m-%dT%H:%M:%S.%f")[:-3] + "Z"

    def elapsed_ms(self) -> int:
        return self._ticks * VIRTUAL_TICK_MS


class CorpusFetcher:
    """Deterministic fetches from a local directory tree.

    "http(s)://host/path" maps to <root>/host/path; a trailing "/" maps to
    index.html.  Query strings are ignored by the mapping.
    """

    def __init__(self, root: Path) -> None:
        self.root = root.resolve()
        if not self.root.is_dir():
            raise CrawlError(f"corpus_root: {root} is not a directory")

    def path_for(self, url: str) -> Path:
        parts = urlsplit(url)
        path = parts.path
        if path.endswith("/"):
            path += "index.html"
        candidate = (self.root / parts.netloc / path.lstrip("/")).resolve()
        if not candidate.is_relative_to(self.root):
            raise NotInCorpus(f"{url} escapes the corpus root")
        return candidate

    def fetch(self, url: str) -> tuple[bytes, str]:
        candidate = self.path_for(url)
        try:
            return candidate.read_bytes(), url
        except OSError as exc:
            raise NotInCorpus(f"{url} not in corpus: {exc}") from exc


class LiveFetcher:
    """HTTP fetches with redirects, per-host politeness and a content-type filter."""

    def __init__(self, config: CrawlConfig) -> None:
        self.delay_s = config.politeness_delay_ms / 1000.0
        self.user_agent = config.user_agent
        self.respect_robots = config.respect_robots
        self.session = requests.Session()
        self.session.max_redirects = MAX_REDIRECTS
        self._lock = threading.Lock()
        self._next_slot: dict[str, float] = {}
        self._robots: dict[str, object] = {}

    def _wait_for_host(self, host: str) -> None:
        with self._lock:
            now = time.monotonic()
            slot = max(self._next_slot.get(host, now), now)
            self._next_slot[host] = slot + self.delay_s
        pause = slot - time.monotonic()
        if pause > 0:
            time.sleep(pause)

    def _allowed_by_robots(self, url: str) -> bool:
        from urllib import robotparser

        host = urlsplit(url).netloc
        with self._lock:
            parser = self._robots.get(host)
        if parser is None:
            parser = robotparser.RobotFileParser(f"{urlsplit(url).scheme}://{host}/robots.txt")
            try:
                parser.read()
            except OSError:
                parser.allow_all = True
            with self._lock:
                self._robots[host] = parser
        return parser.can_fetch(self.user_agent, url)

    def fetch(self, url: str) -> tuple[bytes, str]:
        if self.respect_robots and not self._allowed_by_robots(url):
            raise FetchError(f"{url} disallowed by robots.txt")
        self._wait_for_host(urlsplit(url).netloc)
        try:
            resp = self.session.get(
                url,
                timeout=FETCH_TIMEOUT_S,
                headers={"User-Agent": self.user_agent},
                allow_redirects=True,
            )
        except requests.TooManyRedirects as exc:
            raise FetchError(f"{url}: too many redirects") from exc
        except requests.RequestException as exc:
            raise FetchError(f"{url}: {exc}") from exc
        if resp.status_code != 200:
            raise FetchError(f"{url}: HTTP {resp.status_code}")
        ctype = resp.headers.get("Content-Type", "").split(";")[0].strip().lower()
        if ctype and ctype not in HTML_CONTENT_TYPES:
            raise FetchError(f"{url}: non-HTML content type {ctype}")
        return resp.content, normalize_url(resp.url)


def fetch_page(url: str, config: CrawlConfig) -> tuple[bytes, str]:
    """One-shot fetch honoring the config's fetch mode."""
    if config.fetch_mode == "corpus":
        return CorpusFetcher(config.corpus_root).fetch(url)
    return LiveFetcher(config).fetch(url)


@dataclass
class _FetchedPage:
    relevant: bool
    level: int
    links: list[str]


@dataclass
class _WorkItem:
    url: str
    level: int
    final_url: str = ""
    content: bytes = b""
    digest: str = ""
    scores: tuple[int, ...] = ()
    domains: frozenset[int] = frozenset()
    links: list[str] = field(default_factory=list)
    error: str = ""


class Crawler:
    """Single-coordinator crawl over one config and ontology set.

    Fetching and scoring may run on several worker threads; all frontier,
    dedup and repository transitions happen on the coordinator thread.
    """

    def __init__(self, config: CrawlConfig, ontologies: OntologySet) -> None:
        if len(config.limits) != len(ontologies):
            raise CrawlError(
                f"limits: got {len(config.limits)} limits for {len(ontologies)} domains"
            )
        self.config = config
        self.ontologies = ontologies
        self.partition = partition_terms(ontologies)
        self.clock = _VirtualClock() if config.fetch_mode == "corpus" else _Clock()
        if config.fetch_mode == "corpus":
            self.fetcher = CorpusFetcher(config.corpus_root)
        else:
            self.fetcher = LiveFetcher(config)
        self._frontier: list[tuple[int, int, str]] = []
        self._seq = 0
        self._best_level: dict[str, int] = {}
        self._fetched: dict[str, _FetchedPage] = {}
        self._dispatched = 0
        self.report = CrawlReport(domain_names=ontologies.names())

    # -- frontier ---------------------------------------------------------

    def _discover(self, url: str, level: int) -> None:
        """Add a candidate URL, relaxing levels through fetched pages."""
        stack = [(url, level)]
        while stack:
            u, v = stack.pop()
            info = self._fetched.get(u)
            if info is not None:
                # Already fetched; a better path only matters for the level
                # it hands down to the page's own links.
                if v < info.level:
                    info.level = v
                    if not info.relevant:
                        for link in info.links:
                            stack.append((link, v + 1))
                continue
            if v > self.config.tolerance_limit:
                self._log_discard(u, v)
                continue
            if v < self._best_level.get(u, v + 1):
                self._best_level[u] = v
                self._seq += 1
                heapq.heappush(self._frontier, (v, self._seq, u))

    def _pop_next(self) -> tuple[str, int] | None:
        while self._frontier:
            level, _, url = heapq.heappop(self._frontier)
            if url in self._fetched or level > self._best_level.get(url, -1):
                continue  # stale entry superseded by a better one
            return url, level
        return None

    # -- persistence ------------------------------------------------------

    def _open_outputs(self) -> None:
        out = self.config.output_dir
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "cache").mkdir(exist_ok=True)
            self._pages_fh = open(out / "pages.jsonl", "w", encoding="utf-8")
            self._discards_fh = open(out / "discards.jsonl", "w", encoding="utf-8")
        except OSError as exc:
            raise RepositoryError(f"cannot prepare output dir {out}: {exc}") from exc

    def _close_outputs(self) -> None:
        self._pages_fh.close()
        self._discards_fh.close()

    def _log_discard(self, url: str, level: int) -> None:
        self.report.discarded += 1
        self._discards_fh.write(json.dumps({"url": url, "level": level}, sort_keys=True) + "\n")

    def _store(self, record: PageRecord, content: bytes) -> None:
        try:
            self._pages_fh.write(json.dumps(record.to_json_obj(), sort_keys=True) + "\n")
            cache_file = self.config.output_dir / "cache" / f"{record.digest}.html"
            if not cache_file.exists():
                cache_file.write_bytes(content)
        except OSError as exc:
            raise RepositoryError(f"cannot write page record: {exc}") from exc
        self.report.stored += 1
        for i in record.domains:
            name = self.ontologies.domains[i].id.name
            self.report.per_domain_stored[name] = self.report.per_domain_stored.get(name, 0) + 1

    # -- fetch + score (worker side) --------------------------------------

    def _process(self, item: _WorkItem) -> _WorkItem:
        try:
            content, final_url = self.fetcher.fetch(item.url)
        except FetchError as exc:
            item.error = str(exc)
            return item
        item.content = content
        item.final_url = final_url
        item.digest = hashlib.sha256(content).hexdigest()
        page = extract_text(content, source_url=final_url)
        item.scores = score_partitioned(page, self.ontologies, self.partition)
        item.domains = frozenset(classify_domains(item.scores, self.config.limits))
        item.links = extract_links(content, final_url)
        return item

    # -- coordinator ------------------------------------------------------

    def _apply(self, item: _WorkItem) -> None:
        if item.error:
            self.report.fetch_errors += 1
            log.warning("fetch failed: %s", item.error)
            return
        # Redirects can land on an already-fetched page; alias, don't re-store.
        if item.final_url != item.url and item.final_url in self._fetched:
            self._fetched[item.url] = self._fetched[item.final_url]
            return
        self.report.fetched += 1
        relevant = bool(item.domains)
        info = _FetchedPage(relevant=relevant, level=item.level, links=item.links)
        self._fetched[item.url] = info
        if item.final_url != item.url:
            self._fetched[item.final_url] = info
        if relevant:
            record = PageRecord(
                url=item.final_url,
                digest=item.digest,
                scores=item.scores,
                domains=item.domains,
                fetched_at=self.clock.now_iso(),
            )
            self._store(record, item.content)
            child_level = 0
        else:
            child_level = item.level + 1
        for link in item.links:
            self._discover(link, child_level)

    def run(self) -> CrawlReport:
        for seed in self.config.seeds:
            self._discover(normalize_url(seed), 0)
        self._open_outputs()
        try:
            workers = self.config.max_concurrent_fetches
            with ThreadPoolExecutor(max_workers=workers) as pool:
                while True:
                    # Lockstep batches: fetches run concurrently, but results
                    # are applied in dispatch order, so frontier decisions and
                    # repository ordering never depend on thread timing.
                    batch: list[_WorkItem] = []
                    while (
                        len(batch) < workers
                        and self._dispatched < self.config.max_pages
                    ):
                        entry = self._pop_next()
                        if entry is None:
                            break
                        url, level = entry
                        self._dispatched += 1
                        self.clock.on_fetch()
                        batch.append(_WorkItem(url, level))
                    if not batch:
                        break
                    for item in pool.map(self._process, batch):
                        self._apply(item)
            self.report.elapsed_ms = self.clock.elapsed_ms()
            self._write_report()
        finally:
            self._close_outputs()
        return self.report

    def _write_report(self) -> None:
        path = self.config.output_dir / "report.json"
        try:
            path.write_text(
                json.dumps(self.report.to_json_obj(), sort_keys=True, indent=2) + "\n",
                encoding="utf-8",
            )
        except OSError as exc:
            raise RepositoryError(f"cannot write report: {exc}") from exc


def crawl(config: CrawlConfig, ontologies: OntologySet) -> CrawlReport:
    """Run a crawl to completion and return its report.

    The repository (pages.jsonl), the discard log, the HTML cache and
    report.json are written under config.output_dir.
    """
    return Crawler(config, ontologies).run()
