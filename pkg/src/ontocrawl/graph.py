"""Partition harvested pages into the weighted domain graph.

Every stored page lands in exactly one bucket keyed by its domain set:
single-domain pages in a node database, two-domain pages in the edge
database of that pair, pages relevant to all domains in the space node.
Domain subsets of intermediate size (possible for more than three
domains) get their own hyper-edge buckets.  The space edge weight is the
page count of the space node.

Buckets hold indices into the repository the graph was built from, never
record copies; ids are repository line numbers, so a graph rebuilt under
different limits still points into the same pages.jsonl.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .crawler import PageRecord, RepositoryError, load_repository
from .relevance import classify_domains


class DomainOutOfRange(ValueError):
    pass


@dataclass
class GraphStats:
    m: int
    per_domain: list[int]
    node_counts: dict[int, int]
    edge_counts: dict[tuple[int, int], int]
    hyper_counts: dict[tuple[int, ...], int]
    space_count: int
    space_edge_weight: int

    def to_json_obj(self) -> dict:
        return {
            "m": self.m,
            "per_domain": self.per_domain,
            "nodes": {str(i): c for i, c in sorted(self.node_counts.items())},
            "edges": {_subset_key(pair): c for pair, c in sorted(self.edge_counts.items())},
            "hyper": {_subset_key(sub): c for sub, c in sorted(self.hyper_counts.items())},
            "space": self.space_count,
            "space_edge_weight": self.space_edge_weight,
        }


@dataclass
class DomainGraph:
    n_domains: int
    records: list[PageRecord]
    buckets: dict[frozenset[int], list[int]] = field(default_factory=dict)

    @property
    def space_key(self) -> frozenset[int]:
        return frozenset(range(self.n_domains))

    def space_ids(self) -> list[int]:
        return self.buckets.get(self.space_key, [])

    @property
    def space_edge_weight(self) -> int:
        return len(self.space_ids())

    def candidate_ids(self, selected: set[int], semantics: str = "intersect") -> list[int]:
        """Record ids in every bucket implied by the selected domains.

        "intersect" takes buckets sharing any selected domain; "contain"
        keeps only buckets entirely inside the selection.
        """
        if semantics not in ("intersect", "contain"):
            raise ValueError(f"unknown semantics {semantics!r}")
        ids: list[int] = []
        for subset, bucket in self.buckets.items():
            if semantics == "intersect":
                keep = bool(subset & selected)
            else:
                keep = subset <= selected
            if keep:
                ids.extend(bucket)
        return sorted(ids)

    def stats(self) -> GraphStats:
        return graph_stats(self)


def _subset_key(subset) -> str:
    return ",".join(str(i) for i in sorted(subset))


def _parse_subset_key(key: str) -> frozenset[int]:
    return frozenset(int(p) for p in key.split(","))


def _bucket(
    graph: DomainGraph, memberships: list[tuple[int, frozenset[int]]]
) -> DomainGraph:
    for record_id, domains in memberships:
        graph.buckets.setdefault(domains, []).append(record_id)
    for bucket in graph.buckets.values():
        bucket.sort()
    return graph


def build_graph(records: list[PageRecord], n_domains: int) -> DomainGraph:
    """Bucket every record by its exact domain subset.

    The full-domain subset is the space node (checked by key, so it wins
    the degenerate cases of one or two domains), singletons are node
    databases, pairs are edge databases, anything between is a hyper-edge
    bucket.
    """
    for record in records:
        if not record.domains:
            raise DomainOutOfRange(f"record {record.url}: empty domain set")
        if any(i < 0 or i >= n_domains for i in record.domains):
            raise DomainOutOfRange(
                f"record {record.url}: domains {sorted(record.domains)} outside 0..{n_domains - 1}"
            )
    graph = DomainGraph(n_domains=n_domains, records=records)
    return _bucket(graph, [(i, frozenset(r.domains)) for i, r in enumerate(records)])


def graph_stats(graph: DomainGraph) -> GraphStats:
    """Page totals: m distinct pages, per-domain counts with multiplicity."""
    per_domain = [0] * graph.n_domains
    node_counts: dict[int, int] = {}
    edge_counts: dict[tuple[int, int], int] = {}
    hyper_counts: dict[tuple[int, ...], int] = {}
    m = 0
    space_key = graph.space_key
    for subset, bucket in graph.buckets.items():
        m += len(bucket)
        for i in subset:
            per_domain[i] += len(bucket)
        if subset == space_key:
            continue
        if len(subset) == 1:
            node_counts[next(iter(subset))] = len(bucket)
        elif len(subset) == 2:
            edge_counts[tuple(sorted(subset))] = len(bucket)
        else:
            hyper_counts[tuple(sorted(subset))] = len(bucket)
    return GraphStats(
        m=m,
        per_domain=per_domain,
        node_counts=node_counts,
        edge_counts=edge_counts,
        hyper_counts=hyper_counts,
        space_count=len(graph.space_ids()),
        space_edge_weight=graph.space_edge_weight,
    )


def rebuild_from_repository(
    repo_path: str | Path, limits: tuple[int, ...]
) -> DomainGraph:
    """Re-derive domain sets from stored score vectors under new limits.

    Raising or lowering limits reshapes the graph without re-crawling.
    Records that no longer pass any limit stay in the record list (ids are
    repository line numbers) but appear in no bucket.
    """
    records = load_repository(repo_path)
    memberships = []
    for record_id, record in enumerate(records):
        if len(record.scores) != len(limits):
            raise RepositoryError(
                f"record {record.url}: {len(record.scores)} scores vs {len(limits)} limits"
            )
        domains = frozenset(classify_domains(record.scores, limits))
        if domains:
            memberships.append((record_id, domains))
    graph = DomainGraph(n_domains=len(limits), records=records)
    return _bucket(graph, memberships)


def save_graph(graph: DomainGraph, path: str | Path) -> None:
    """Write the graph document: id lists per bucket kind, plus stats."""
    doc = {
        "domain_count": graph.n_domains,
        "record_count": len(graph.records),
        "nodes": {},
        "edges": {},
        "hyper": {},
        "space": graph.space_ids(),
        "space_edge_weight": graph.space_edge_weight,
        "stats": graph.stats().to_json_obj(),
    }
    space_key = graph.space_key
    for subset, bucket in graph.buckets.items():
        if subset == space_key:
            continue
        kind = "nodes" if len(subset) == 1 else "edges" if len(subset) == 2 else "hyper"
        doc[kind][_subset_key(subset)] = bucket
    tmp = Path(str(path) + ".tmp")
    tmp.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    tmp.replace(path)  # atomic swap; readers never see a partial graph


def load_graph(path: str | Path, records: list[PageRecord]) -> DomainGraph:
    """Load a graph document over its repository snapshot."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise RepositoryError(f"cannot read graph {path}: {exc}") from exc
    if doc.get("record_count") != len(records):
        raise RepositoryError(
            f"graph {path} was built over {doc.get('record_count')} records, "
            f"repository has {len(records)}"
        )
    graph = DomainGraph(n_domains=doc["domain_count"], records=records)
    for kind in ("nodes", "edges", "hyper"):
        for key, bucket in doc.get(kind, {}).items():
            graph.buckets[_parse_subset_key(key)] = list(bucket)
    if doc.get("space"):
        graph.buckets[graph.space_key] = list(doc["space"])
    return graph
