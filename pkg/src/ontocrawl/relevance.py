"""Per-domain relevance scoring of page text.

A page's score for a domain is the sum, over the domain's terms, of the
term weight multiplied by the number of occurrences of the term and of
each of its synonyms.  Two scorers produce that number: a flat per-domain
sum (`score_naive`) and a single traversal over terms grouped by the
domains that share them (`score_partitioned`).  They agree exactly; the
flat sum is kept as the reference the fast path is tested against.

All scores are integers in milli-units.  No floating point is involved
anywhere in scoring.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from html.parser import HTMLParser

from .ontology import OntologySet, TermPartition, term_tokens

_WORD = re.compile(r"\w+", re.UNICODE)


class LengthMismatch(ValueError):
    pass


@dataclass
class PageText:
    """Ordered word tokens of a page, plus where they came from."""

    tokens: list[str]
    source_url: str = ""

    @cached_property
    def token_counts(self) -> Counter[str]:
        return Counter(self.tokens)


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens; punctuation and symbols separate tokens."""
    return _WORD.findall(text.lower())


def count_occurrences(term: str, page: PageText) -> int:
    """Non-overlapping, word-boundary-aligned occurrences of a term.

    Multiword terms match contiguous token runs; matches are taken greedily
    left to right.  A term with no word characters never matches.
    """
    needle = term_tokens(term)
    if not needle:
        return 0
    if len(needle) == 1:
        # Single tokens cannot overlap themselves; a plain count is exact.
        return page.token_counts.get(needle[0], 0)
    tokens = page.tokens
    n, k = len(tokens), len(needle)
    count = 0
    i = 0
    while i <= n - k:
        if tuple(tokens[i : i + k]) == needle:
            count += 1
            i += k
        else:
            i += 1
    return count


def score_naive(page: PageText, ontologies: OntologySet) -> tuple[int, ...]:
    """Reference scorer: independent flat sum per domain.

    For each domain, every term contributes weight * (occurrences of the
    term plus occurrences of each synonym).  Synonyms score with the head
    term's weight.
    """
    scores = []
    for dom in ontologies:
        total = 0
        for term, weight in dom.weights.items():
            hits = count_occurrences(term, page)
            for syn in dom.synonyms_of(term):
                hits += count_occurrences(syn, page)
            total += weight * hits
        scores.append(total)
    return tuple(scores)


def score_partitioned(
    page: PageText, ontologies: OntologySet, partition: TermPartition
) -> tuple[int, ...]:
    """Score all domains in one pass over the partitioned term classes.

    Terms shared by several domains are counted once and the single count
    is multiplied by each sharing domain's own weight; each domain's
    synonyms for the term are then counted and weighted the same way.
    Produces exactly the same vector as `score_naive`.
    """
    scores = [0] * len(ontologies)
    for subset, terms in partition.ordered():
        members = sorted(subset)
        for term in terms:
            shared_count = count_occurrences(term, page)
            for i in members:
                dom = ontologies.domains[i]
                weight = dom.weights[term]
                scores[i] += weight * shared_count
                for syn in dom.synonyms_of(term):
                    scores[i] += weight * count_occurrences(syn, page)
    return tuple(scores)


def classify_domains(scores: tuple[int, ...], limits: tuple[int, ...]) -> set[int]:
    """Domains whose score strictly exceeds their relevance limit."""
    if len(scores) != len(limits):
        raise LengthMismatch(f"{len(scores)} scores vs {len(limits)} limits")
    return {i for i, (s, lim) in enumerate(zip(scores, limits)) if s > lim}


class _TextExtractor(HTMLParser):
    """Collects title and visible body text; skips script/style content."""

    SKIP = {"script", "style"}

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.chunks: list[str] = []
        self._skip_depth = 0

    def handle_starttag(self, tag: str, attrs) -> None:
        if tag in self.SKIP:
            self._skip_depth += 1

    def handle_endtag(self, tag: str) -> None:
        if tag in self.SKIP and self._skip_depth:
            self._skip_depth -= 1

    def handle_data(self, data: str) -> None:
        if not self._skip_depth:
            self.chunks.append(data)


def extract_text(html: bytes, source_url: str = "") -> PageText:
    """Tokenize the visible text of an HTML document, best effort.

    Invalid markup is tolerated; comments, scripts and styles contribute
    nothing; entities are decoded before tokenization.
    """
    parser = _TextExtractor()
    parser.feed(html.decode("utf-8", errors="replace"))
    parser.close()
    return PageText(tokens=tokenize(" ".join(parser.chunks)), source_url=source_url)
