"""Resolution-parameterized clustering by local moving.

The objective for an assignment is

    V = sum over same-cluster pairs i < j of (s_ij - resolution)

where ``s_ij`` is the (normally association-strength-normalized) edge
weight and 0 for non-adjacent pairs. Larger resolutions favour more,
smaller clusters.
"""

from __future__ import annotations

import csv
import heapq
import logging
import random
from collections import Counter
from dataclasses import dataclass
from typing import IO, Callable, Mapping, Sequence

from .errors import BadResolution, PartialAssignment
from .netcore import Network

log = logging.getLogger(__name__)

MoveHook = Callable[[int, Sequence[int], float], None]


@dataclass(frozen=True)
class Clustering:
    assignment: tuple[int, ...]  # node id -> cluster id
    resolution: float
    quality: float
    seed: int
    iterations_run: int
    restarts: int = 1
    min_cluster_size: int = 1

    @property
    def n_clusters(self) -> int:
        return len(set(self.assignment))

    def members(self) -> list[list[int]]:
        groups: list[list[int]] = [[] for _ in range(self.n_clusters)]
        for node, c in enumerate(self.assignment):
            groups[c].append(node)
        return groups


def _as_list(net: Network, assignment: Sequence[int] | Mapping[int, int]) -> list[int]:
    if isinstance(assignment, Mapping):
        missing = [v for v in range(net.n) if v not in assignment]
        if missing:
            raise PartialAssignment(f"nodes without a cluster: {missing[:10]}")
        return [assignment[v] for v in range(net.n)]
    if len(assignment) != net.n:
        raise PartialAssignment(f"assignment covers {len(assignment)} of {net.n} nodes")
    return list(assignment)


def _warn_raw(net: Network) -> None:
    if not net.attributes.get("normalized"):
        log.warning("clustering raw weights; association-normalize the network first")


def cluster_objective(
    net: Network, assignment: Sequence[int] | Mapping[int, int], resolution: float
) -> float:
    """Compute the objective for ``assignment`` from scratch."""
    labels = _as_list(net, assignment)
    _warn_raw(net)
    inside = sum(w for i, j, w in net.edges() if labels[i] == labels[j])
    pairs = sum(k * (k - 1) // 2 for k in Counter(labels).values())
    return inside - resolution * pairs


def canonicalize(assignment: Sequence[int]) -> tuple[int, ...]:
    """Renumber clusters 0, 1, ... by their smallest member node id."""
    mapping: dict[int, int] = {}
    return tuple(mapping.setdefault(c, len(mapping)) for c in assignment)


def _local_moving(
    net: Network, resolution: float, rng: random.Random, tol: float, hook: MoveHook | None, restart: int
) -> tuple[list[int], float, int]:
    """Alternate node moves and cluster merges from singletons until neither helps.

    Node moves alone stall when two clusters would gain from joining but no
    single member gains from switching; the merge phase joins the adjacent
    pair with the largest positive gain ``W_AB - resolution |A| |B|`` (ties
    toward the lowest ids) and hands control back to node moves.
    """
    n = net.n
    cluster = list(range(n))
    size = [1] * n
    empty: list[int] = []  # heap of unused cluster ids
    quality = 0.0
    passes = 0
    while True:
        moved = True
        while moved:
            moved = False
            passes += 1
            order = list(range(n))
            rng.shuffle(order)
            for v in order:
                cv = cluster[v]
                links: dict[int, float] = {}
                for u, w in net.neighbors(v).items():
                    cu = cluster[u]
                    links[cu] = links.get(cu, 0.0) + w
                stay = links.get(cv, 0.0) - resolution * (size[cv] - 1)
                best, best_gain = cv, 0.0
                for c, w in links.items():
                    if c == cv:
                        continue
                    gain = w - resolution * size[c] - stay
                    if gain > best_gain + tol or (abs(gain - best_gain) <= tol and best != cv and c < best):
                        best, best_gain = c, gain
                if size[cv] > 1:
                    fresh = empty[0]
                    gain = -stay
                    if gain > best_gain + tol or (abs(gain - best_gain) <= tol and best != cv and fresh < best):
                        best, best_gain = fresh, gain
                if best == cv or best_gain <= tol:
                    continue
                if size[best] == 0:
                    heapq.heappop(empty)
                size[cv] -= 1
                size[best] += 1
                if size[cv] == 0:
                    heapq.heappush(empty, cv)
                cluster[v] = best
                quality += best_gain
                moved = True
                if hook is not None:
                    hook(restart, cluster, quality)

        between: dict[tuple[int, int], float] = {}
        for i, j, w in net.edges():
            a, b = cluster[i], cluster[j]
            if a != b:
                key = (a, b) if a < b else (b, a)
                between[key] = between.get(key, 0.0) + w
        best_pair, best_gain = None, tol
        for (a, b), w in sorted(between.items()):
            gain = w - resolution * size[a] * size[b]
            if gain > best_gain + tol:
                best_pair, best_gain = (a, b), gain
        if best_pair is None:
            return cluster, quality, passes
        keep, drop = best_pair
        cluster = [keep if c == drop else c for c in cluster]
        size[keep] += size[drop]
        size[drop] = 0
        heapq.heappush(empty, drop)
        quality += best_gain
        if hook is not None:
            hook(restart, cluster, quality)


def _merge_small(net: Network, labels: tuple[int, ...], min_size: int) -> tuple[int, ...]:
    """Fold clusters below ``min_size`` into their most strongly connected neighbor cluster."""
    while True:
        sizes = Counter(labels)
        small = sorted((k, c) for c, k in sizes.items() if k < min_size)
        merged = False
        for _, c in small:
            links: dict[int, float] = {}
            for v, cv in enumerate(labels):
                if cv != c:
                    continue
                for u, w in net.neighbors(v).items():
                    if labels[u] != c:
                        links[labels[u]] = links.get(labels[u], 0.0) + w
            if not links:
                continue
            target = min(links, key=lambda t: (-links[t], t))
            labels = canonicalize([target if x == c else x for x in labels])
            merged = True
            break
        if not merged:
            return labels


def cluster_network(
    net: Network,
    resolution: float = 1.0,
    seed: int = 42,
    restarts: int = 32,
    min_cluster_size: int = 1,
    on_move: MoveHook | None = None,
) -> Clustering:
    """Cluster ``net`` by local moving from singletons, keeping the best of ``restarts`` runs.

    Each run visits nodes in a seed-derived random order, moving a node to
    the neighboring cluster (or a fresh singleton) with the largest strict
    gain in the objective, ties going to the lowest cluster id, until a full
    pass makes no move; then the best-gaining pair of adjacent clusters is
    merged and node moves resume, until neither step helps. The best run (highest objective, then lowest restart
    index) is post-processed by folding undersized clusters into neighbors.

    ``on_move(restart, assignment, quality)`` is called after every
    accepted move with the running objective value.
    """
    if not resolution > 0:
        raise BadResolution(f"resolution must be positive, got {resolution!r}")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if min_cluster_size < 1:
        raise ValueError("min_cluster_size must be >= 1")
    _warn_raw(net)
    if net.n == 0:
        return Clustering((), resolution, 0.0, seed, 0, restarts, min_cluster_size)

    scale = sum(w for _, _, w in net.edges()) + resolution * net.n
    tol = 1e-12 * max(1.0, scale)
    best: tuple[float, list[int], int] | None = None
    for r in range(restarts):
        rng = random.Random(f"{seed}:{r}")
        labels, quality, passes = _local_moving(net, resolution, rng, tol, on_move, r)
        if best is None or quality > best[0] + tol:
            best = (quality, labels, passes)

    _, labels, passes = best
    final = canonicalize(labels)
    if min_cluster_size > 1:
        final = _merge_small(net, final, min_cluster_size)
    return Clustering(
        assignment=final,
        resolution=resolution,
        quality=cluster_objective(net, final, resolution),
        seed=seed,
        iterations_run=passes,
        restarts=restarts,
        min_cluster_size=min_cluster_size,
    )


def annotate(net: Network, clustering: Clustering) -> Network:
    """Copy of ``net`` with a ``cluster`` attribute on every node."""
    out = net.copy()
    for node in out.nodes:
        node.attributes["cluster"] = clustering.assignment[node.id]
    out.attributes["resolution"] = float(clustering.resolution)
    return out


def write_clustering_csv(net: Network, clustering: Clustering, stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["label", "cluster"])
    for node in net.nodes:
        writer.writerow([node.label, clustering.assignment[node.id]])


def write_clu(clustering: Clustering, stream: IO[str]) -> None:
    """Pajek partition file: vertex count header, then 1-based cluster per vertex."""
    stream.write(f"*Vertices {len(clustering.assignment)}\n")
    for c in clustering.assignment:
        stream.write(f"{c + 1}\n")
