"""Shared builders for tests: small ontology sets, random instances, corpora."""

from __future__ import annotations

import json
import random
import string
from pathlib import Path

from ontocrawl.ontology import DomainId, DomainOntology, OntologySet
from ontocrawl.relevance import PageText

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def build_set(*domains: tuple[str, dict[str, int], dict[str, list[str]]]) -> OntologySet:
    """OntologySet from (name, weights, synonyms) triples, indexed in order."""
    return OntologySet(
        [
            DomainOntology(id=DomainId(i, name), weights=dict(weights), synonyms=dict(syns))
            for i, (name, weights, syns) in enumerate(domains)
        ]
    )


def random_vocab(rng: random.Random, size: int) -> list[str]:
    words = set()
    while len(words) < size:
        length = rng.randint(2, 7)
        words.add("".join(rng.choice(string.ascii_lowercase) for _ in range(length)))
    return sorted(words)


def random_ontology_set(rng: random.Random, n_domains: int,
                        max_terms: int = 50) -> tuple[OntologySet, list[str]]:
    """Random domains drawing terms from one shared pool so subsets overlap."""
    vocab = random_vocab(rng, 40)

    def random_term() -> str:
        k = rng.choice([1, 1, 1, 2, 2, 3])
        return " ".join(rng.choice(vocab) for _ in range(k))

    pool = sorted({random_term() for _ in range(60)})
    domains = []
    for index in range(n_domains):
        n_terms = rng.randint(1, max_terms)
        terms = rng.sample(pool, min(n_terms, len(pool)))
        weights = {t: rng.randint(1, 1000) for t in terms}
        synonyms = {}
        for t in terms:
            if rng.random() < 0.3:
                syns = {random_term() for _ in range(rng.randint(1, 2))}
                synonyms[t] = sorted(syns - {t})
        domains.append(
            DomainOntology(id=DomainId(index, f"domain{index}"), weights=weights,
                           synonyms=synonyms)
        )
    return OntologySet(domains), vocab


def random_page(rng: random.Random, vocab: list[str], max_tokens: int = 500) -> PageText:
    n = rng.randint(0, max_tokens)
    return PageText(tokens=[rng.choice(vocab) for _ in range(n)])


def write_corpus(root: Path, host: str, pages: dict[str, str]) -> Path:
    """Lay out page files under root/host/ and return the corpus root."""
    host_dir = root / host
    host_dir.mkdir(parents=True, exist_ok=True)
    for name, content in pages.items():
        target = host_dir / name
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(content, encoding="utf-8")
    return root


def link_page(title: str, body: str, hrefs: list[str]) -> str:
    anchors = " ".join(f'<a href="{h}">link</a>' for h in hrefs)
    return (
        f"<html><head><title>{title}</title></head>"
        f"<body><p>{body}</p><p>{anchors}</p></body></html>"
    )


def write_config(path: Path, **overrides) -> Path:
    """Write a service config JSON pointing at the shared fixture ontologies.

    Keyword overrides replace top-level keys; the `crawl` dict is merged.
    """
    doc = {
        "manifest": str(FIXTURES / "ontologies" / "manifest.json"),
        "limits": {"cricket": 1.0, "football": 1.0, "hockey": 1.0},
        "output_dir": "out",
        "crawl": {
            "seeds": ["http://sports.test/index.html"],
            "max_pages": 250,
            "tolerance_limit": 2,
            "fetch_mode": "corpus",
            "corpus_root": str(FIXTURES / "corpus"),
        },
    }
    crawl_overrides = overrides.pop("crawl", {})
    doc.update(overrides)
    doc["crawl"] = {**doc["crawl"], **crawl_overrides}
    path.write_text(json.dumps(doc, indent=2), encoding="utf-8")
    return path
