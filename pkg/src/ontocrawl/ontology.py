"""Domain ontology tables: weighted terms plus synonym lists.

Each domain is described by two TSV files: a weight table mapping terms to
weights in (0, 1], and a synonym table mapping terms to zero or more
synonyms.  Weights are stored as integer milli-units (0.8 -> 800) so that
every downstream score is exact integer arithmetic.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import IO, Iterable

MILLI = 1000

_WS_RUN = re.compile(r"\s+")
_WORD = re.compile(r"\w+", re.UNICODE)

# Sentinel in synonym tables meaning "this term has no synonyms".
NO_SYNONYM = "NA"


class OntologyError(Exception):
    """Base class for ontology loading/validation failures."""


class EmptyTerm(OntologyError):
    pass


class ParseError(OntologyError):
    pass


class WeightOutOfRange(OntologyError):
    pass


class DuplicateTerm(OntologyError):
    pass


class UnknownHeadTerm(OntologyError):
    pass


def normalize_term(raw: str) -> str:
    """Lowercase and collapse whitespace; raises EmptyTerm on blank input."""
    collapsed = _WS_RUN.sub(" ", raw.strip()).lower()
    if not collapsed:
        raise EmptyTerm(f"term is empty after normalization: {raw!r}")
    return collapsed


def term_tokens(term: str) -> tuple[str, ...]:
    """Lowercased word tokens of a term; punctuation acts as a separator."""
    return tuple(_WORD.findall(term.lower()))


def parse_weight_milli(text: str) -> int:
    """Parse a decimal weight in (0, 1] into milli-units.

    At most three decimal digits are representable; anything finer is a
    ParseError rather than a silent rounding.
    """
    try:
        value = Decimal(text.strip())
    except InvalidOperation as exc:
        raise ParseError(f"not a decimal weight: {text!r}") from exc
    milli = value * MILLI
    if milli != milli.to_integral_value():
        raise ParseError(f"weight {text!r} has more than three decimal digits")
    milli_int = int(milli)
    if milli_int < 1 or milli_int > MILLI:
        raise WeightOutOfRange(f"weight {text!r} outside (0, 1]")
    return milli_int


def format_milli(milli: int) -> str:
    """Render a milli-unit score as a decimal string with three digits."""
    sign = "-" if milli < 0 else ""
    q, r = divmod(abs(milli), MILLI)
    return f"{sign}{q}.{r:03d}"


@dataclass(frozen=True)
class DomainId:
    index: int
    name: str


@dataclass
class DomainOntology:
    """One domain's weight table plus synonym table.

    weights maps normalized terms to milli-unit weights; synonyms maps a
    subset of those terms to their synonym lists.  A synonym scores with
    its head term's weight and need not itself appear in the weight table.
    """

    id: DomainId
    weights: dict[str, int]
    synonyms: dict[str, list[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.weights:
            raise OntologyError(f"domain {self.id.name!r}: weight table is empty")
        for head, syns in self.synonyms.items():
            if head not in self.weights:
                raise UnknownHeadTerm(
                    f"domain {self.id.name!r}: synonym head {head!r} not in weight table"
                )
            if head in syns:
                raise OntologyError(
                    f"domain {self.id.name!r}: {head!r} listed as its own synonym"
                )

    def synonyms_of(self, term: str) -> list[str]:
        return self.synonyms.get(term, [])


@dataclass
class OntologySet:
    """All domains under consideration, with contiguous indices 0..N-1."""

    domains: list[DomainOntology]

    def __post_init__(self) -> None:
        if not self.domains:
            raise OntologyError("ontology set has no domains")
        indices = [d.id.index for d in self.domains]
        if indices != list(range(len(self.domains))):
            raise OntologyError(f"domain indices not contiguous from 0: {indices}")
        names = [d.id.name.lower() for d in self.domains]
        if len(set(names)) != len(names):
            raise OntologyError(f"duplicate domain names: {names}")

    def __len__(self) -> int:
        return len(self.domains)

    def __iter__(self):
        return iter(self.domains)

    def names(self) -> list[str]:
        return [d.id.name for d in self.domains]

    def index_of(self, name: str) -> int:
        lowered = name.lower()
        for d in self.domains:
            if d.id.name.lower() == lowered:
                return d.id.index
        raise KeyError(name)

    def subset(self, indices: Iterable[int]) -> "OntologySet":
        """New set containing only the given domains, reindexed from 0."""
        picked = sorted(indices)
        domains = []
        for new_index, old_index in enumerate(picked):
            old = self.domains[old_index]
            domains.append(
                DomainOntology(
                    id=DomainId(new_index, old.id.name),
                    weights=dict(old.weights),
                    synonyms={h: list(s) for h, s in old.synonyms.items()},
                )
            )
        return OntologySet(domains)


@dataclass
class TermPartition:
    """Terms grouped by the exact subset of domains whose tables contain them.

    For three domains the full-set class is the one traversed for all
    domains at once, the two-domain classes update score pairs, and the
    singleton classes update one score each.
    """

    classes: dict[frozenset[int], set[str]]

    def ordered(self) -> list[tuple[frozenset[int], list[str]]]:
        """Classes largest-subset-first, deterministic within a class."""
        keys = sorted(self.classes, key=lambda s: (-len(s), sorted(s)))
        return [(k, sorted(self.classes[k])) for k in keys]


def partition_terms(ontologies: OntologySet) -> TermPartition:
    """Assign every term to the subset of domains containing it."""
    membership: dict[str, set[int]] = {}
    for dom in ontologies:
        for term in dom.weights:
            membership.setdefault(term, set()).add(dom.id.index)
    classes: dict[frozenset[int], set[str]] = {}
    for term, subset in membership.items():
        classes.setdefault(frozenset(subset), set()).add(term)
    return TermPartition(classes)


def _tsv_rows(stream: IO[bytes], what: str) -> Iterable[tuple[int, str, str]]:
    """Yield (line number, first column, second column) from a two-column TSV.

    Blank lines and '#'-prefixed comment lines are skipped.
    """
    for lineno, raw in enumerate(stream, start=1):
        line = raw.decode("utf-8").rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(f"{what} line {lineno}: expected 2 tab-separated columns")
        yield lineno, parts[0], parts[1]


def load_weight_table(stream: IO[bytes], id: DomainId) -> dict[str, int]:
    """Load `term<TAB>weight` rows into a normalized-term -> milli map."""
    weights: dict[str, int] = {}
    for lineno, raw_term, raw_weight in _tsv_rows(stream, f"weight table {id.name!r}"):
        try:
            term = normalize_term(raw_term)
        except EmptyTerm as exc:
            raise ParseError(f"weight table {id.name!r} line {lineno}: empty term") from exc
        if term in weights:
            raise DuplicateTerm(f"weight table {id.name!r} line {lineno}: duplicate {term!r}")
        weights[term] = parse_weight_milli(raw_weight)
    return weights


def load_syntable(stream: IO[bytes], weights: dict[str, int]) -> dict[str, list[str]]:
    """Load `term<TAB>synonym-or-NA` rows keyed by normalized head term.

    Multiple rows with the same head accumulate; the NA sentinel records
    the head with an empty list.  Heads must exist in the weight table.
    """
    synonyms: dict[str, list[str]] = {}
    for lineno, raw_head, raw_syn in _tsv_rows(stream, "synonym table"):
        try:
            head = normalize_term(raw_head)
        except EmptyTerm as exc:
            raise ParseError(f"synonym table line {lineno}: empty head term") from exc
        if head not in weights:
            raise UnknownHeadTerm(f"synonym table line {lineno}: {head!r} not in weight table")
        entry = synonyms.setdefault(head, [])
        if raw_syn.strip() == NO_SYNONYM:
            continue
        try:
            entry.append(normalize_term(raw_syn))
        except EmptyTerm as exc:
            raise ParseError(f"synonym table line {lineno}: empty synonym") from exc
    return synonyms


def dump_weight_table(weights: dict[str, int]) -> bytes:
    """Serialize a weight table back to TSV (round-trips through load)."""
    lines = [f"{term}\t{format_milli(milli)}" for term, milli in sorted(weights.items())]
    return ("\n".join(lines) + "\n").encode("utf-8")


def load_ontology_set(manifest_path: str | Path) -> OntologySet:
    """Load all domains named by a JSON manifest.

    The manifest holds a `domains` array of objects with `name`, `weights`
    and `synonyms` keys; table paths are resolved relative to the manifest
    file.
    """
    path = Path(manifest_path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read manifest {path}: {exc}") from exc
    entries = doc.get("domains")
    if not isinstance(entries, list) or not entries:
        raise ParseError(f"manifest {path}: 'domains' must be a non-empty array")
    domains = []
    for index, entry in enumerate(entries):
        try:
            name = entry["name"]
            weights_rel = entry["weights"]
            syn_rel = entry["synonyms"]
        except (TypeError, KeyError) as exc:
            raise ParseError(
                f"manifest {path}: domain #{index} needs name/weights/synonyms"
            ) from exc
        dom_id = DomainId(index, name)
        weights_path = path.parent / weights_rel
        syn_path = path.parent / syn_rel
        try:
            with open(weights_path, "rb") as fh:
                weights = load_weight_table(fh, dom_id)
            with open(syn_path, "rb") as fh:
                synonyms = load_syntable(fh, weights)
        except OSError as exc:
            raise ParseError(f"manifest {path}: domain {name!r}: {exc}") from exc
        domains.append(DomainOntology(id=dom_id, weights=weights, synonyms=synonyms))
    return OntologySet(domains)
