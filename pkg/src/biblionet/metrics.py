"""Link strength, association-strength normalization and centralities."""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

from .errors import (
    AlreadyNormalized,
    BadProbability,
    DegenerateGraph,
    EmptyCorpus,
    IsolatedNode,
    SelfLoop,
)
from .graphio import format_weight
from .ingest import Corpus
from .netcore import Network, total_weight


def _strengths(net: Network) -> list[float]:
    return [sum(net.neighbors(v).values()) for v in range(net.n)]


def link_strength(net: Network, i: int, j: int) -> float:
    """Association strength ``2 m c_ij / (c_i c_j)`` of the pair ``(i, j)``.

    ``c_ij`` is the edge weight, ``c_i`` the total link strength of node
    ``i`` and ``m`` the total weight of the network. Non-adjacent pairs
    score 0.
    """
    if i == j:
        raise SelfLoop(f"link strength of node {i} with itself")
    c_ij = net.weight(i, j)
    c_i = sum(net.neighbors(i).values())
    c_j = sum(net.neighbors(j).values())
    if c_i == 0 or c_j == 0:
        raise IsolatedNode(f"node {i if c_i == 0 else j} has no links")
    if c_ij == 0:
        return 0.0
    return 2 * total_weight(net) * c_ij / (c_i * c_j)


def normalize_association(net: Network) -> Network:
    """Copy of ``net`` with every weight replaced by its link strength.

    Strengths and the total weight are taken from the input, so the result
    does not depend on edge visiting order. Applying it twice is refused.
    """
    if net.attributes.get("normalized"):
        raise AlreadyNormalized("network is already association-normalized")
    strength = _strengths(net)
    m = total_weight(net)
    out = net.copy()
    for i, j, w in net.edges():
        out.set_weight(i, j, 2 * m * w / (strength[i] * strength[j]))
    out.attributes["normalized"] = True
    return out


def degree_centrality(net: Network, v: int) -> float:
    """Incident edge count over ``n - 1`` (weights ignored)."""
    if net.n < 2:
        raise DegenerateGraph("degree centrality needs at least two nodes")
    return net.degree(v) / (net.n - 1)


def _bfs_distances(net: Network, source: int) -> dict[int, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        d = dist[u] + 1
        for w in net.neighbors(u):
            if w not in dist:
                dist[w] = d
                queue.append(w)
    return dist


def closeness_centrality(net: Network, v: int) -> float:
    """``(r - 1) / sum of hop distances`` over the ``r`` nodes reachable from ``v``.

    Isolated nodes score 0; on connected graphs ``r = n``.
    """
    if net.n < 2:
        raise DegenerateGraph("closeness centrality needs at least two nodes")
    dist = _bfs_distances(net, v)
    total = sum(dist.values())
    if total == 0:
        return 0.0
    return (len(dist) - 1) / total


def expected_cooccurrence(list_length: int, p: float) -> float:
    """Expected co-occurrences of a word with probability ``p`` in one list of ``list_length`` words."""
    if list_length < 1:
        raise ValueError(f"list length must be >= 1, got {list_length}")
    if not 0 <= p <= 1:
        raise BadProbability(f"probability outside [0, 1]: {p!r}")
    return (list_length - 1) * p


def expected_cooccurrence_total(list_lengths: Iterable[int], p: float) -> float:
    return sum(expected_cooccurrence(n, p) for n in list_lengths)


# ------------------------------------------------------------------ reports


@dataclass(frozen=True)
class MetricRow:
    label: str
    links: int
    total_link_strength: float
    degree_centrality: float
    closeness_centrality: float


@dataclass(frozen=True)
class MetricReport:
    rows: tuple[MetricRow, ...]
    n: int
    m: float

    CSV_HEADER = ("label", "links", "total_link_strength", "degree_centrality", "closeness_centrality")

    def to_csv(self, stream: IO[str]) -> None:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(self.CSV_HEADER)
        for row in self.rows:
            writer.writerow(
                [
                    row.label,
                    row.links,
                    format_weight(row.total_link_strength),
                    f"{row.degree_centrality:.6f}",
                    f"{row.closeness_centrality:.6f}",
                ]
            )


def compute_metrics(net: Network) -> MetricReport:
    if net.n < 2:
        raise DegenerateGraph("metrics need at least two nodes")
    rows = []
    for node in net.nodes:
        nbrs = net.neighbors(node.id)
        rows.append(
            MetricRow(
                label=node.label,
                links=len(nbrs),
                total_link_strength=sum(nbrs.values()),
                degree_centrality=degree_centrality(net, node.id),
                closeness_centrality=closeness_centrality(net, node.id),
            )
        )
    return MetricReport(tuple(rows), net.n, total_weight(net))


def _ranked(pairs: Iterable[tuple[str, float]], k: int | None) -> list[tuple[str, float]]:
    ranked = sorted(pairs, key=lambda p: (-p[1], p[0]))
    return ranked if k is None else ranked[:k]


def top_link_strength(net: Network, focus: str, k: int | None = 10) -> list[tuple[str, float]]:
    """Neighbors of ``focus`` by edge weight, heaviest first, ties alphabetical."""
    v = net.node_id(focus)
    return _ranked(((net.label(u), w) for u, w in net.neighbors(v).items()), k)


def rank_nodes(net: Network, k: int | None = 10, by: str = "strength") -> list[tuple[str, float]]:
    """Rank all nodes by total link strength, or by a numeric node attribute."""
    if by == "strength":
        values = ((node.label, sum(net.neighbors(node.id).values())) for node in net.nodes)
    else:
        values = ((node.label, node.attributes.get(by, 0)) for node in net.nodes)
    return _ranked(values, k)


RANKED_HEADERS = {
    "coauthorship-country": ("Country", "Link Strength of Co-Authorship Network"),
    "citation-country": ("Country", "Link Strength of Citation Network"),
    "source-citation": ("Source", "Link Strength of Source Citation Network"),
    "coupling": ("Country", "Bibliographic Strength"),
    "cocitation": ("Reference", "Co-citation Strength"),
    "keyword-cooccurrence": ("Keyword", "Co-occurrence"),
}


def format_ranked_table(
    rows: Sequence[tuple[str, float]],
    headers: tuple[str, str] = ("Label", "Link Strength"),
    title: str | None = None,
) -> str:
    """Two-column aligned text table, one ranked row per line."""
    cells = [headers] + [(label, format_weight(value)) for label, value in rows]
    width = max(len(c[0]) for c in cells)
    lines = [title] if title else []
    lines += [f"{a.ljust(width)}  {b}" for a, b in cells]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SourceRow:
    source_title: str
    document_count: int
    citation_count: int

    @property
    def cited_more_than_published(self) -> bool:
        return self.citation_count > self.document_count


def source_summary(corpus: Corpus, min_documents: int = 1) -> list[SourceRow]:
    """Documents and total cited-by per source, most prolific first."""
    if len(corpus) == 0:
        raise EmptyCorpus("source summary of an empty corpus")
    docs: dict[str, int] = {}
    cites: dict[str, int] = {}
    for rec in corpus:
        docs[rec.source_title] = docs.get(rec.source_title, 0) + 1
        cites[rec.source_title] = cites.get(rec.source_title, 0) + rec.cited_by
    rows = [SourceRow(s, docs[s], cites[s]) for s in docs if docs[s] >= min_documents]
    rows.sort(key=lambda r: (-r.document_count, r.source_title))
    return rows


def write_source_summary(rows: Iterable[SourceRow], stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["source_title", "documents", "citations", "cited_more_than_published"])
    for r in rows:
        writer.writerow([r.source_title, r.document_count, r.citation_count, int(r.cited_more_than_published)])
