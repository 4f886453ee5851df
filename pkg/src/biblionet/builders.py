"""Corpus -> network builders.

Every builder uses full counting: a record adds 1 (or its shared-reference
count, for coupling) to each entity pair it connects. Nodes are emitted in
label order and edges in id order, so output depends only on the corpus
contents and the :class:`BuildSpec`, never on record order or on how the
work was partitioned across workers.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterable, Mapping, Sequence, TypeVar

from .errors import EmptyCorpus, InvalidSpec
from .ingest import (
    CountryAliases,
    Corpus,
    PublicationRecord,
    extract_countries,
    normalize_keywords,
    reference_keys,
)
from .netcore import Network
from .text import normalize_text

NETWORK_KINDS: dict[str, tuple[str, ...]] = {
    "coauthorship-country": ("country",),
    "citation-country": ("country",),
    "source-citation": ("source",),
    "coupling": ("document", "country"),
    "cocitation": ("reference",),
    "keyword-cooccurrence": ("keyword",),
}

SOURCE_MIN_DOCUMENTS = 20
# titles shorter than this only match a reference that is exactly the title
MIN_TITLE_TOKENS = 3


@dataclass(frozen=True)
class BuildSpec:
    network_kind: str
    unit: str | None = None
    min_documents: int | None = None
    min_occurrences: int = 1
    include_index_keywords: bool = False

    def __post_init__(self) -> None:
        units = NETWORK_KINDS.get(self.network_kind)
        if units is None:
            raise InvalidSpec(f"unknown network kind {self.network_kind!r}")
        if self.unit is None:
            object.__setattr__(self, "unit", units[0])
        elif self.unit not in units:
            raise InvalidSpec(f"unit {self.unit!r} not allowed for {self.network_kind}; choose from {units}")
        if self.min_documents is None:
            default = SOURCE_MIN_DOCUMENTS if self.network_kind == "source-citation" else 1
            object.__setattr__(self, "min_documents", default)
        if self.min_documents < 1:
            raise InvalidSpec("min_documents must be >= 1")
        if self.min_occurrences < 1:
            raise InvalidSpec("min_occurrences must be >= 1")

    def describe(self) -> dict:
        return {
            "network_kind": self.network_kind,
            "unit": self.unit,
            "min_documents": self.min_documents,
            "min_occurrences": self.min_occurrences,
        }


# ---------------------------------------------------------------- helpers

T = TypeVar("T")
PairCounts = Counter  # (label_a, label_b) with label_a < label_b -> weight


def _pair(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a < b else (b, a)


def _partitioned(items: Sequence[T], work: Callable[[Sequence[T]], Counter], workers: int) -> Counter:
    """Run ``work`` over contiguous chunks and add the partial counters."""
    if workers <= 1 or len(items) < 2:
        return work(items)
    size = math.ceil(len(items) / workers)
    chunks = [items[k : k + size] for k in range(0, len(items), size)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(work, chunks))
    total: Counter = Counter()
    for part in parts:
        total.update(part)
    return total


def _assemble(
    kind: str,
    node_attrs: Mapping[str, dict],
    pairs: Counter,
    spec: BuildSpec,
    extra: Mapping | None = None,
) -> Network:
    net = Network({**spec.describe(), **(extra or {})})
    for label in sorted(node_attrs):
        net.add_node(label, kind, **node_attrs[label])
    edges = sorted(
        (net.node_id(a), net.node_id(b), w)
        for (a, b), w in pairs.items()
        if w > 0 and a in node_attrs and b in node_attrs
    )
    for i, j, w in edges:
        net.add_edge(min(i, j), max(i, j), w)
    return net


def _require(corpus: Corpus, spec: BuildSpec, kind: str) -> None:
    if spec.network_kind != kind:
        raise InvalidSpec(f"spec is for {spec.network_kind}, not {kind}")
    if len(corpus) == 0:
        raise EmptyCorpus(f"cannot build {kind} from an empty corpus")


def _country_sets(
    corpus: Corpus, aliases: CountryAliases | None, unmatched: Counter | None
) -> dict[str, frozenset[str]]:
    aliases = aliases or CountryAliases.default()
    return {rec.record_id: extract_countries(rec, aliases, unmatched) for rec in corpus}


def _qualified(doc_counts: Counter, threshold: int) -> dict[str, dict]:
    return {label: {"documents": n} for label, n in doc_counts.items() if n >= threshold}


# ---------------------------------------------------------------- citation matching


class TitleIndex:
    """Find corpus records whose normalized title occurs inside a reference string.

    A title matches when its tokens appear as a contiguous run of the
    normalized reference's tokens. Candidates are found through the
    title's first :data:`MIN_TITLE_TOKENS` tokens, so lookup cost grows
    with reference length, not with corpus size.
    """

    def __init__(self, records: Iterable[PublicationRecord]):
        self._exact: dict[str, list[str]] = {}
        self._by_prefix: dict[tuple[str, ...], dict[tuple[str, ...], list[str]]] = {}
        for rec in records:
            key = normalize_text(rec.title)
            if not key:
                continue
            self._exact.setdefault(key, []).append(rec.record_id)
            tokens = tuple(key.split())
            if len(tokens) >= MIN_TITLE_TOKENS:
                bucket = self._by_prefix.setdefault(tokens[:MIN_TITLE_TOKENS], {})
                bucket.setdefault(tokens, []).append(rec.record_id)

    def match(self, reference: str) -> set[str]:
        text = normalize_text(reference)
        found = set(self._exact.get(text, ()))
        tokens = text.split()
        width = MIN_TITLE_TOKENS
        for pos in range(len(tokens) - width + 1):
            bucket = self._by_prefix.get(tuple(tokens[pos : pos + width]))
            if not bucket:
                continue
            for title, ids in bucket.items():
                if tuple(tokens[pos : pos + len(title)]) == title:
                    found.update(ids)
        return found


@dataclass(frozen=True)
class CitationLinks:
    cited: Mapping[str, frozenset[str]]  # citing record id -> cited record ids
    references_total: int
    references_matched: int

    @property
    def match_ratio(self) -> float:
        return self.references_matched / self.references_total if self.references_total else 0.0


def match_citations(corpus: Corpus) -> CitationLinks:
    """Resolve every record's references to records of the same corpus.

    Self-citations are dropped. Each (citing, cited) pair is kept once no
    matter how many reference strings resolve to it.
    """
    index = TitleIndex(corpus)
    cited: dict[str, frozenset[str]] = {}
    total = matched = 0
    for rec in corpus:
        targets: set[str] = set()
        seen: set[str] = set()
        for ref in rec.references:
            key = normalize_text(ref)
            if not key or key in seen:
                continue
            seen.add(key)
            total += 1
            hits = index.match(ref) - {rec.record_id}
            if hits:
                matched += 1
                targets |= hits
        if targets:
            cited[rec.record_id] = frozenset(targets)
    return CitationLinks(cited, total, matched)


def _citation_extra(links: CitationLinks) -> dict:
    return {"references_total": links.references_total, "references_matched": links.references_matched}


# ---------------------------------------------------------------- builders


def build_coauthorship(
    corpus: Corpus,
    spec: BuildSpec | None = None,
    aliases: CountryAliases | None = None,
    *,
    workers: int = 1,
    unmatched: Counter | None = None,
) -> Network:
    """Country co-authorship network.

    Each record adds 1 to every unordered pair of distinct countries among
    its affiliations; single-country records add nothing.
    """
    spec = spec or BuildSpec("coauthorship-country")
    _require(corpus, spec, "coauthorship-country")
    sets = _country_sets(corpus, aliases, unmatched)
    nodes = _qualified(Counter(c for cs in sets.values() for c in cs), spec.min_documents)

    def work(chunk: Sequence[frozenset[str]]) -> Counter:
        counts: Counter = Counter()
        for cs in chunk:
            for a, b in combinations(sorted(c for c in cs if c in nodes), 2):
                counts[(a, b)] += 1
        return counts

    pairs = _partitioned(list(sets.values()), work, workers)
    return _assemble("country", nodes, pairs, spec)


def build_citation_country(
    citing: Corpus,
    spec: BuildSpec | None = None,
    aliases: CountryAliases | None = None,
    *,
    workers: int = 1,
    unmatched: Counter | None = None,
) -> Network:
    """Country citation network from within-corpus citations.

    When record r cites record s, every pair (a, b) with a in r's countries,
    b in s's countries and a != b gains 1 on the undirected edge {a, b}.
    """
    spec = spec or BuildSpec("citation-country")
    _require(citing, spec, "citation-country")
    sets = _country_sets(citing, aliases, unmatched)
    nodes = _qualified(Counter(c for cs in sets.values() for c in cs), spec.min_documents)
    links = match_citations(citing)

    def work(chunk: Sequence[tuple[str, frozenset[str]]]) -> Counter:
        counts: Counter = Counter()
        for r, targets in chunk:
            for s in targets:
                for a in sets[r]:
                    for b in sets[s]:
                        if a != b:
                            counts[_pair(a, b)] += 1
        return counts

    pairs = _partitioned(sorted(links.cited.items()), work, workers)
    return _assemble("country", nodes, pairs, spec, _citation_extra(links))


def build_source_citation(
    corpus: Corpus, spec: BuildSpec | None = None, *, workers: int = 1
) -> Network:
    """Source citation network over sources with at least ``min_documents`` records.

    Qualified sources without any cross-source citation stay in the network
    as isolated nodes.
    """
    spec = spec or BuildSpec("source-citation")
    _require(corpus, spec, "source-citation")
    source = {rec.record_id: rec.source_title for rec in corpus}
    docs = Counter(s for s in source.values() if s)
    cites: Counter = Counter()
    for rec in corpus:
        cites[rec.source_title] += rec.cited_by
    nodes = {
        label: {"documents": n, "citations": cites[label]}
        for label, n in docs.items()
        if n >= spec.min_documents
    }
    links = match_citations(corpus)

    def work(chunk: Sequence[tuple[str, frozenset[str]]]) -> Counter:
        counts: Counter = Counter()
        for r, targets in chunk:
            a = source[r]
            for s in targets:
                b = source[s]
                if a != b and a in nodes and b in nodes:
                    counts[_pair(a, b)] += 1
        return counts

    pairs = _partitioned(sorted(links.cited.items()), work, workers)
    return _assemble("source", nodes, pairs, spec, _citation_extra(links))


def coupling_counts(corpus: Corpus, workers: int = 1) -> Counter:
    """Shared normalized reference count for every document pair that shares any."""
    postings: dict[str, list[str]] = {}
    for rec in corpus:
        for key in reference_keys(rec):
            postings.setdefault(key, []).append(rec.record_id)

    def work(chunk: Sequence[list[str]]) -> Counter:
        counts: Counter = Counter()
        for docs in chunk:
            for a, b in combinations(sorted(docs), 2):
                counts[(a, b)] += 1
        return counts

    shared = [docs for _, docs in sorted(postings.items()) if len(docs) > 1]
    return _partitioned(shared, work, workers)


def build_coupling(
    corpus: Corpus,
    spec: BuildSpec | None = None,
    aliases: CountryAliases | None = None,
    *,
    workers: int = 1,
    unmatched: Counter | None = None,
) -> Network:
    """Bibliographic coupling at document or country level.

    Document unit: weight(Y, Z) is the number of normalized reference keys
    Y and Z share. Country unit: each coupled document pair with k shared
    references adds k to every pair (a in C_Y, b in C_Z, a != b).
    """
    spec = spec or BuildSpec("coupling")
    _require(corpus, spec, "coupling")
    doc_pairs = coupling_counts(corpus, workers)
    if spec.unit == "document":
        nodes = {rec.record_id: {"references": len(reference_keys(rec))} for rec in corpus}
        return _assemble("document", nodes, doc_pairs, spec)

    sets = _country_sets(corpus, aliases, unmatched)
    nodes = _qualified(Counter(c for cs in sets.values() for c in cs), spec.min_documents)

    def work(chunk: Sequence[tuple[tuple[str, str], int]]) -> Counter:
        counts: Counter = Counter()
        for (y, z), k in chunk:
            for a in sets[y]:
                for b in sets[z]:
                    if a != b:
                        counts[_pair(a, b)] += k
        return counts

    pairs = _partitioned(sorted(doc_pairs.items()), work, workers)
    return _assemble("country", nodes, pairs, spec)


def build_cocitation(corpus: Corpus, spec: BuildSpec | None = None, *, workers: int = 1) -> Network:
    """Co-citation network over references cited at least ``min_occurrences`` times."""
    spec = spec or BuildSpec("cocitation")
    _require(corpus, spec, "cocitation")
    keys = [reference_keys(rec) for rec in corpus]
    cited = Counter(k for ks in keys for k in ks)
    nodes = {k: {"citations": n} for k, n in cited.items() if n >= spec.min_occurrences}

    def work(chunk: Sequence[list[str]]) -> Counter:
        counts: Counter = Counter()
        for ks in chunk:
            for a, b in combinations(sorted(k for k in ks if k in nodes), 2):
                counts[(a, b)] += 1
        return counts

    return _assemble("reference", nodes, _partitioned(keys, work, workers), spec)


def build_keyword_cooccurrence(
    corpus: Corpus, spec: BuildSpec | None = None, *, workers: int = 1
) -> Network:
    """Keyword co-occurrence network; node attribute ``occurrences`` counts records per keyword."""
    spec = spec or BuildSpec("keyword-cooccurrence")
    _require(corpus, spec, "keyword-cooccurrence")
    lists = [normalize_keywords(rec, spec.include_index_keywords) for rec in corpus]
    occurrences = Counter(k for ks in lists for k in ks)
    nodes = {k: {"occurrences": n} for k, n in occurrences.items() if n >= spec.min_occurrences}

    def work(chunk: Sequence[list[str]]) -> Counter:
        counts: Counter = Counter()
        for ks in chunk:
            for a, b in combinations(sorted(k for k in ks if k in nodes), 2):
                counts[(a, b)] += 1
        return counts

    return _assemble("keyword", nodes, _partitioned(lists, work, workers), spec)


def build_network(
    corpus: Corpus,
    spec: BuildSpec,
    aliases: CountryAliases | None = None,
    *,
    workers: int = 1,
    unmatched: Counter | None = None,
) -> Network:
    kind = spec.network_kind
    if kind == "coauthorship-country":
        return build_coauthorship(corpus, spec, aliases, workers=workers, unmatched=unmatched)
    if kind == "citation-country":
        return build_citation_country(corpus, spec, aliases, workers=workers, unmatched=unmatched)
    if kind == "source-citation":
        return build_source_citation(corpus, spec, workers=workers)
    if kind == "coupling":
        return build_coupling(corpus, spec, aliases, workers=workers, unmatched=unmatched)
    if kind == "cocitation":
        return build_cocitation(corpus, spec, workers=workers)
    return build_keyword_cooccurrence(corpus, spec, workers=workers)
