import http.server
import json
import random
import tempfile
import threading
import time
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from ontocrawl.crawler import (
    CorpusFetcher,
    CrawlConfig,
    CrawlError,
    Crawler,
    FetchError,
    InvalidUrl,
    LiveFetcher,
    NotInCorpus,
    PageRecord,
    crawl,
    extract_links,
    load_repository,
    normalize_url,
)

from helpers import FIXTURES, link_page, write_corpus
from oracles import oracle_harvest

RELEVANT_BODY = "The wicket fell and the next wicket took the bat with it."
IRRELEVANT_BODY = "Morning light settles across the quiet valley farms."


def corpus_config(tmp_path: Path, corpus_root: Path, **overrides) -> CrawlConfig:
    params = dict(
        seeds=["http://t.test/index.html"],
        max_pages=100,
        tolerance_limit=2,
        limits=(1000, 1000, 1000),
        output_dir=tmp_path / "out",
        fetch_mode="corpus",
        corpus_root=corpus_root,
    )
    params.update(overrides)
    return CrawlConfig(**params)


class TestNormalizeUrl:
    def test_lowercases_scheme_and_host(self):
        assert normalize_url("HTTP://Example.COM/A/b") == "http://example.com/A/b"

    def test_strips_fragment_keeps_query(self):
        assert normalize_url("http://h.test/p?q=1#frag") == "http://h.test/p?q=1"

    def test_default_port_dropped_nonstandard_kept(self):
        assert normalize_url("http://h.test:80/p") == "http://h.test/p"
        assert normalize_url("http://h.test:8080/p") == "http://h.test:8080/p"
        assert normalize_url("https://h.test:443/p") == "https://h.test/p"

    def test_empty_path_becomes_slash(self):
        assert normalize_url("http://h.test") == "http://h.test/"

    def test_relative_resolution(self):
        assert (
            normalize_url("../x.html", base="http://h.test/a/b/c.html")
            == "http://h.test/a/x.html"
        )

    @pytest.mark.parametrize("raw", ["mailto:a@b", "ftp://h/x", "javascript:void(0)"])
    def test_non_http_rejected(self, raw):
        with pytest.raises(InvalidUrl):
            normalize_url(raw)

    def test_missing_host_rejected(self):
        with pytest.raises(InvalidUrl):
            normalize_url("http:///nohost")

    def test_bad_port_rejected(self):
        with pytest.raises(InvalidUrl):
            normalize_url("http://h.test:notaport/")


class TestExtractLinks:
    def test_document_order_deduplicated(self):
        html = (
            b'<a href="b.html">one</a> <a href="c.html">two</a> '
            b'<a href="b.html">again</a>'
        )
        assert extract_links(html, "http://h.test/a/index.html") == [
            "http://h.test/a/b.html",
            "http://h.test/a/c.html",
        ]

    def test_unfetchable_schemes_skipped(self):
        html = b'<a href="mailto:x@y">m</a><a href="p.html">p</a>'
        assert extract_links(html, "http://h.test/") == ["http://h.test/p.html"]

    def test_no_links(self):
        assert extract_links(b"<p>plain</p>", "http://h.test/") == []


class TestCorpusMapping:
    def make(self, tmp_path) -> CorpusFetcher:
        write_corpus(tmp_path, "h.test", {
            "index.html": "<p>root</p>",
            "a/index.html": "<p>a</p>",
            "a/b.html": "<p>b</p>",
        })
        return CorpusFetcher(tmp_path)

    def test_trailing_slash_maps_to_index(self, tmp_path):
        fetcher = self.make(tmp_path)
        assert fetcher.path_for("http://h.test/") == tmp_path / "h.test" / "index.html"
        assert (
            fetcher.path_for("http://h.test/a/")
            == tmp_path / "h.test" / "a" / "index.html"
        )

    def test_plain_path(self, tmp_path):
        fetcher = self.make(tmp_path)
        assert fetcher.path_for("http://h.test/a/b.html") == tmp_path / "h.test" / "a" / "b.html"

    def test_query_ignored_by_mapping(self, tmp_path):
        fetcher = self.make(tmp_path)
        assert (
            fetcher.path_for("http://h.test/a/?session=9")
            == tmp_path / "h.test" / "a" / "index.html"
        )

    def test_escape_attempt_rejected(self, tmp_path):
        fetcher = self.make(tmp_path)
        with pytest.raises(NotInCorpus):
            fetcher.path_for("http://h.test/../../etc/passwd")

    def test_missing_page_is_fetch_error(self, tmp_path):
        fetcher = self.make(tmp_path)
        with pytest.raises(NotInCorpus):
            fetcher.fetch("http://h.test/absent.html")


class TestToleranceChain:
    """Hand-traced harvest over the checked-in chain corpus.

    The corpus plants relevant pages behind 1, 2 and 4 consecutive
    irrelevant pages; with tolerance 3 the first two are harvested and the
    deep one is not, with tolerance 0 neither is.
    """

    ROOT = FIXTURES / "tunnel"

    def run(self, tmp_path, tolerance: int):
        config = corpus_config(
            tmp_path,
            self.ROOT,
            seeds=["http://tunnel.test/index.html"],
            max_pages=50,
            tolerance_limit=tolerance,
        )
        from ontocrawl.ontology import load_ontology_set

        ontologies = load_ontology_set(FIXTURES / "ontologies" / "manifest.json")
        report = crawl(config, ontologies)
        stored = {r.url for r in load_repository(config.output_dir / "pages.jsonl")}
        discards = [
            json.loads(line)
            for line in (config.output_dir / "discards.jsonl").read_text().splitlines()
        ]
        return report, stored, discards

    def test_tolerance_three_harvests_planted_pages(self, tmp_path):
        report, stored, discards = self.run(tmp_path, 3)
        assert stored == {
            "http://tunnel.test/index.html",
            "http://tunnel.test/r0.html",
            "http://tunnel.test/r2.html",
            "http://tunnel.test/r3.html",
        }
        assert report.fetched == 11
        assert {d["url"] for d in discards} == {"http://tunnel.test/r9.html"}
        assert discards[0]["level"] == 4

    def test_tolerance_zero_stays_on_relevant_spine(self, tmp_path):
        report, stored, discards = self.run(tmp_path, 0)
        assert stored == {
            "http://tunnel.test/index.html",
            "http://tunnel.test/r0.html",
        }
        assert report.fetched == 4
        assert {(d["url"], d["level"]) for d in discards} == {
            ("http://tunnel.test/r2.html", 1),
            ("http://tunnel.test/i3.html", 1),
        }


def write_graph_corpus(root: Path, links: dict[str, list[str]],
                       relevant: set[str]) -> dict[str, str]:
    """Materialize an abstract page graph as a corpus under host g.test."""
    pages = {}
    for name, targets in links.items():
        body = RELEVANT_BODY if name in relevant else IRRELEVANT_BODY
        pages[f"{name}.html"] = link_page(name, body, [f"{t}.html" for t in targets])
    write_corpus(root, "g.test", pages)
    return pages


def url_of(name: str) -> str:
    return f"http://g.test/{name}.html"


class TestRelaxation:
    def test_better_path_reopens_children_of_fetched_page(self, tmp_path):
        # x is first fetched at the tolerance boundary, so its child y is
        # discarded; a relevant page found later links x at level 0 and y
        # must then be fetched and stored.
        links = {
            "s": ["a", "c"],
            "a": ["x"],
            "c": ["b"],
            "x": ["y"],
            "b": ["x"],
            "y": [],
        }
        write_graph_corpus(tmp_path / "corpus", links, relevant={"s", "b", "y"})
        config = corpus_config(
            tmp_path,
            tmp_path / "corpus",
            seeds=[url_of("s")],
            tolerance_limit=1,
        )
        from ontocrawl.ontology import load_ontology_set

        ontologies = load_ontology_set(FIXTURES / "ontologies" / "manifest.json")
        crawl(config, ontologies)
        stored = {r.url for r in load_repository(config.output_dir / "pages.jsonl")}
        assert url_of("y") in stored
        assert stored == {url_of("s"), url_of("b"), url_of("y")}


class TestHarvestMatchesOracle:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32 - 1))
    def test_stored_and_fetched_sets(self, seed):
        rng = random.Random(seed)
        n = rng.randint(2, 12)
        names = [f"p{i}" for i in range(n)]
        links = {
            name: sorted(rng.sample(names, rng.randint(0, min(3, n))))
            for name in names
        }
        relevant = {name for name in names if rng.random() < 0.5}
        tolerance = rng.randint(0, 3)
        workers = rng.choice([1, 3])

        url_links = {
            url_of(name): [url_of(t) for t in targets]
            for name, targets in links.items()
        }
        expected_fetched, expected_stored = oracle_harvest(
            url_links, [url_of("p0")], {url_of(r) for r in relevant}, tolerance
        )

        with tempfile.TemporaryDirectory() as tmp:
            tmp_path = Path(tmp)
            write_graph_corpus(tmp_path / "corpus", links, relevant)
            config = corpus_config(
                tmp_path,
                tmp_path / "corpus",
                seeds=[url_of("p0")],
                tolerance_limit=tolerance,
                max_pages=n + 5,
                max_concurrent_fetches=workers,
            )
            from ontocrawl.ontology import load_ontology_set

            ontologies = load_ontology_set(FIXTURES / "ontologies" / "manifest.json")
            report = crawl(config, ontologies)
            stored = {
                r.url for r in load_repository(config.output_dir / "pages.jsonl")
            }
        assert stored == expected_stored
        assert report.fetched == len(expected_fetched)


class TestBudgetAndDedup:
    def setup_corpus(self, tmp_path) -> Path:
        links = {"s": ["a", "a", "s", "b"], "a": ["s"], "b": []}
        write_graph_corpus(tmp_path / "corpus", links, relevant={"s", "a", "b"})
        return tmp_path / "corpus"

    def test_budget_of_one_fetches_only_seed(self, tmp_path):
        root = self.setup_corpus(tmp_path)
        config = corpus_config(tmp_path, root, seeds=[url_of("s")], max_pages=1)
        from ontocrawl.ontology import load_ontology_set

        ontologies = load_ontology_set(FIXTURES / "ontologies" / "manifest.json")
        report = crawl(config, ontologies)
        assert report.fetched == 1
        stored = load_repository(config.output_dir / "pages.jsonl")
        assert [r.url for r in stored] == [url_of("s")]

    def test_each_page_fetched_once(self, tmp_path):
        root = self.setup_corpus(tmp_path)
        config = corpus_config(tmp_path, root, seeds=[url_of("s")])
        from ontocrawl.ontology import load_ontology_set

        ontologies = load_ontology_set(FIXTURES / "ontologies" / "manifest.json")
        report = crawl(config, ontologies)
        assert report.fetched == 3
        stored = [r.url for r in load_repository(config.output_dir / "pages.jsonl")]
        assert sorted(stored) == sorted({url_of("s"), url_of("a"), url_of("b")})

    def test_fetch_errors_logged_not_fatal(self, tmp_path):
        links = {"s": ["a", "missing", "b"], "a": [], "b": []}
        pages = {
            f"{n}.html": link_page(n, RELEVANT_BODY, [f"{t}.html" for t in targets])
            for n, targets in links.items()
            if n != "missing"
        }
        write_corpus(tmp_path / "corpus", "g.test", pages)
        config = corpus_config(tmp_path, tmp_path / "corpus", seeds=[url_of("s")])
        from ontocrawl.ontology import load_ontology_set

        ontologies = load_ontology_set(FIXTURES / "ontologies" / "manifest.json")
        report = crawl(config, ontologies)
        assert report.fetch_errors == 1
        assert report.fetched == 3
        stored = {r.url for r in load_repository(config.output_dir / "pages.jsonl")}
        assert stored == {url_of("s"), url_of("a"), url_of("b")}


class TestDeterminism:
    def run_once(self, tmp_path: Path, out_name: str) -> dict[str, bytes]:
        config = corpus_config(
            tmp_path,
            FIXTURES / "corpus",
            seeds=["http://sports.test/index.html"],
            max_pages=250,
            tolerance_limit=2,
            max_concurrent_fetches=4,
            output_dir=tmp_path / out_name,
        )
        from ontocrawl.ontology import load_ontology_set

        ontologies = load_ontology_set(FIXTURES / "ontologies" / "manifest.json")
        crawl(config, ontologies)
        out = {}
        for name in ("pages.jsonl", "discards.jsonl", "report.json"):
            out[name] = (config.output_dir / name).read_bytes()
        out["cache-listing"] = "\n".join(
            sorted(p.name for p in (config.output_dir / "cache").iterdir())
        ).encode()
        return out

    def test_two_runs_byte_identical(self, tmp_path):
        first = self.run_once(tmp_path, "run1")
        second = self.run_once(tmp_path, "run2")
        assert first == second

    def test_timestamps_are_virtual(self, tmp_path):
        self.run_once(tmp_path, "run1")
        records = load_repository(tmp_path / "run1" / "pages.jsonl")
        assert all(r.fetched_at.startswith("2000-01-01T") for r in records)


class TestRecordRoundTrip:
    def test_json_round_trip(self):
        record = PageRecord(
            url="http://h.test/p",
            digest="ab" * 32,
            scores=(1200, 0, 300),
            domains=frozenset({0, 2}),
            fetched_at="2000-01-01T00:00:00.050Z",
        )
        obj = record.to_json_obj()
        assert obj["domains"] == [0, 2]
        assert PageRecord.from_json_obj(json.loads(json.dumps(obj))) == record


class TestConfigValidation:
    def test_empty_seeds_rejected(self, tmp_path):
        with pytest.raises(CrawlError, match="seeds"):
            CrawlConfig(
                seeds=[], max_pages=1, tolerance_limit=0, limits=(1,),
                output_dir=tmp_path, corpus_root=tmp_path,
            )

    def test_zero_budget_rejected(self, tmp_path):
        with pytest.raises(CrawlError, match="max_pages"):
            CrawlConfig(
                seeds=["http://a/"], max_pages=0, tolerance_limit=0, limits=(1,),
                output_dir=tmp_path, corpus_root=tmp_path,
            )

    def test_negative_tolerance_rejected(self, tmp_path):
        with pytest.raises(CrawlError, match="tolerance"):
            CrawlConfig(
                seeds=["http://a/"], max_pages=1, tolerance_limit=-1, limits=(1,),
                output_dir=tmp_path, corpus_root=tmp_path,
            )

    def test_corpus_mode_needs_root(self, tmp_path):
        with pytest.raises(CrawlError, match="corpus_root"):
            CrawlConfig(
                seeds=["http://a/"], max_pages=1, tolerance_limit=0, limits=(1,),
                output_dir=tmp_path, fetch_mode="corpus", corpus_root=None,
            )

    def test_limits_length_checked_against_domains(self, tmp_path, sports_ontologies):
        config = CrawlConfig(
            seeds=["http://a/"], max_pages=1, tolerance_limit=0, limits=(1000,),
            output_dir=tmp_path, corpus_root=tmp_path,
        )
        with pytest.raises(CrawlError, match="limits"):
            Crawler(config, sports_ontologies)


class _Handler(http.server.BaseHTTPRequestHandler):
    def log_message(self, *args):
        pass

    def do_GET(self):
        if self.path == "/real.html":
            body = b"<html><body><p>wicket wicket bat</p></body></html>"
            self.send_response(200)
            self.send_header("Content-Type", "text/html; charset=utf-8")
            self.end_headers()
            self.wfile.write(body)
        elif self.path == "/alias":
            self.send_response(302)
            self.send_header("Location", "/real.html")
            self.end_headers()
        elif self.path == "/plain.txt":
            self.send_response(200)
            self.send_header("Content-Type", "text/plain")
            self.end_headers()
            self.wfile.write(b"not html")
        elif self.path == "/robots.txt":
            self.send_response(200)
            self.send_header("Content-Type", "text/plain")
            self.end_headers()
            self.wfile.write(b"User-agent: *\nDisallow: /secret/\n")
        else:
            self.send_error(404)


@pytest.fixture(scope="module")
def local_server():
    server = http.server.ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()


def live_config(tmp_path: Path, **overrides) -> CrawlConfig:
    params = dict(
        seeds=["http://placeholder.test/"],
        max_pages=10,
        tolerance_limit=1,
        limits=(1000, 1000, 1000),
        output_dir=tmp_path / "out",
        fetch_mode="live",
        politeness_delay_ms=0,
    )
    params.update(overrides)
    return CrawlConfig(**params)


class TestLiveFetching:
    def test_fetch_and_redirect_resolution(self, tmp_path, local_server):
        fetcher = LiveFetcher(live_config(tmp_path))
        content, final = fetcher.fetch(f"{local_server}/alias")
        assert b"wicket" in content
        assert final == f"{local_server}/real.html"

    def test_non_html_content_type_rejected(self, tmp_path, local_server):
        fetcher = LiveFetcher(live_config(tmp_path))
        with pytest.raises(FetchError, match="content type"):
            fetcher.fetch(f"{local_server}/plain.txt")

    def test_http_error_status_rejected(self, tmp_path, local_server):
        fetcher = LiveFetcher(live_config(tmp_path))
        with pytest.raises(FetchError, match="404"):
            fetcher.fetch(f"{local_server}/gone.html")

    def test_politeness_spaces_same_host_fetches(self, tmp_path, local_server):
        fetcher = LiveFetcher(live_config(tmp_path, politeness_delay_ms=150))
        start = time.monotonic()
        fetcher.fetch(f"{local_server}/real.html")
        fetcher.fetch(f"{local_server}/real.html")
        assert time.monotonic() - start >= 0.15

    def test_robots_disallow_honored_when_enabled(self, tmp_path, local_server):
        fetcher = LiveFetcher(live_config(tmp_path, respect_robots=True))
        with pytest.raises(FetchError, match="robots"):
            fetcher.fetch(f"{local_server}/secret/page.html")

    def test_robots_ignored_by_default(self, tmp_path, local_server):
        fetcher = LiveFetcher(live_config(tmp_path))
        with pytest.raises(FetchError, match="404"):
            fetcher.fetch(f"{local_server}/secret/page.html")

    def test_redirect_onto_fetched_page_stored_once(self, tmp_path, local_server, sports_ontologies):
        config = live_config(
            tmp_path,
            seeds=[f"{local_server}/real.html", f"{local_server}/alias"],
            max_pages=2,
        )
        report = crawl(config, sports_ontologies)
        stored = load_repository(config.output_dir / "pages.jsonl")
        assert [r.url for r in stored] == [f"{local_server}/real.html"]
        assert report.fetched == 1
