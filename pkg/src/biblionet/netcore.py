"""Weighted undirected network shared by builders, metrics and clustering."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator

from .errors import DuplicateNode, SelfLoop, UnknownNode

NODE_KINDS = ("country", "source", "keyword", "document", "reference")


@dataclass
class Node:
    id: int
    label: str
    kind: str
    attributes: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class NodeStrength:
    node_id: int
    link_count: int
    total_link_strength: float


class Network:
    """Undirected graph with positive edge weights and unique node labels.

    Node ids are dense integers assigned in insertion order. Each edge is
    held once per endpoint so neighbor scans are cheap; :meth:`edges` yields
    every pair once with ``i < j``.
    """

    def __init__(self, attributes: dict[str, Any] | None = None):
        self.nodes: list[Node] = []
        self.attributes: dict[str, Any] = dict(attributes or {})
        self._adj: list[dict[int, float]] = []
        self._by_label: dict[str, int] = {}

    # ----------------------------------------------------------- nodes
    def add_node(self, label: str, kind: str = "document", **attributes: Any) -> int:
        if kind not in NODE_KINDS:
            raise ValueError(f"unknown node kind {kind!r}")
        if label in self._by_label:
            raise DuplicateNode(f"label already registered: {label!r}")
        node_id = len(self.nodes)
        self.nodes.append(Node(node_id, label, kind, dict(attributes)))
        self._adj.append({})
        self._by_label[label] = node_id
        return node_id

    def ensure_node(self, label: str, kind: str = "document") -> int:
        node_id = self._by_label.get(label)
        if node_id is None:
            node_id = self.add_node(label, kind)
        return node_id

    def node_id(self, label: str) -> int:
        try:
            return self._by_label[label]
        except KeyError:
            raise UnknownNode(f"no node labelled {label!r}") from None

    def label(self, node_id: int) -> str:
        self._check(node_id)
        return self.nodes[node_id].label

    def has_label(self, label: str) -> bool:
        return label in self._by_label

    @property
    def n(self) -> int:
        return len(self.nodes)

    def __len__(self) -> int:
        return len(self.nodes)

    def _check(self, node_id: int) -> None:
        if not (isinstance(node_id, int) and 0 <= node_id < len(self.nodes)):
            raise UnknownNode(f"unknown node id {node_id!r}")

    # ----------------------------------------------------------- edges
    def add_edge(self, i: int, j: int, w: float = 1) -> "Network":
        """Accumulate ``w`` onto the edge ``{i, j}``."""
        self._check(i)
        self._check(j)
        if i == j:
            raise SelfLoop(f"self-loop on node {i}")
        if not w > 0:
            raise ValueError(f"edge weight must be positive, got {w!r}")
        new = self._adj[i].get(j, 0) + w
        self._adj[i][j] = new
        self._adj[j][i] = new
        return self

    def set_weight(self, i: int, j: int, w: float) -> None:
        """Overwrite the weight of an existing edge."""
        self._check(i)
        self._check(j)
        if j not in self._adj[i]:
            raise KeyError((i, j))
        if not w > 0:
            raise ValueError(f"edge weight must be positive, got {w!r}")
        self._adj[i][j] = w
        self._adj[j][i] = w

    def weight(self, i: int, j: int) -> float:
        self._check(i)
        self._check(j)
        return self._adj[i].get(j, 0)

    def neighbors(self, v: int) -> dict[int, float]:
        """Read-only view by convention: neighbor id -> weight."""
        self._check(v)
        return self._adj[v]

    def degree(self, v: int) -> int:
        self._check(v)
        return len(self._adj[v])

    def edges(self) -> Iterator[tuple[int, int, float]]:
        """Stored pairs in ``(i, j)`` lexicographic order, ``i < j``."""
        for i, nbrs in enumerate(self._adj):
            for j in sorted(k for k in nbrs if k > i):
                yield i, j, nbrs[j]

    def edge_count(self) -> int:
        return sum(len(nbrs) for nbrs in self._adj) // 2

    # ----------------------------------------------------------- misc
    def copy(self) -> "Network":
        other = Network(self.attributes)
        for node in self.nodes:
            other.add_node(node.label, node.kind, **node.attributes)
        for i, nbrs in enumerate(self._adj):
            other._adj[i] = dict(nbrs)
        return other

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return (
            self.attributes == other.attributes
            and self.nodes == other.nodes
            and self._adj == other._adj
        )

    def __repr__(self) -> str:
        return f"<Network n={self.n} edges={self.edge_count()}>"


def node_strength(net: Network, v: int) -> NodeStrength:
    nbrs = net.neighbors(v)
    return NodeStrength(v, len(nbrs), sum(nbrs.values()))


def total_weight(net: Network) -> float:
    """Sum of edge weights, each undirected pair counted once."""
    return sum(w for _, _, w in net.edges())
