"""Attributed directed graphs and dataset-level statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import GraphError
from .kernels import UNREACHABLE, bfs_rows

INFINITE = math.inf


def _as_features(x, rows: int, name: str) -> np.ndarray:
    if x is None:
        return np.zeros((rows, 0), dtype=np.float64)
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1 and arr.size == 0:
        arr = arr.reshape(rows, 0)
    if arr.ndim != 2 or arr.shape[0] != rows:
        raise GraphError(f"{name} must have {rows} rows, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class AttributedGraph:
    """Directed graph with per-node and per-edge real feature vectors.

    Undirected graphs are stored with both directions of every edge.
    ``node_labels`` is an optional integer class per node and ``graph_label``
    an optional scalar target.
    """

    num_nodes: int
    edges: np.ndarray
    node_features: np.ndarray = None
    edge_features: np.ndarray = None
    node_labels: Optional[np.ndarray] = None
    graph_label: Optional[Union[int, float]] = None

    def __post_init__(self):
        n = int(self.num_nodes)
        if n < 0:
            raise GraphError("num_nodes must be non-negative")
        edges = np.asarray(self.edges, dtype=np.int64)
        if edges.size == 0:
            edges = edges.reshape(0, 2)
        if edges.ndim != 2 or edges.shape[1] != 2:
            raise GraphError(f"edges must be (E, 2), got shape {edges.shape}")
        object.__setattr__(self, "num_nodes", n)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "node_features", _as_features(self.node_features, n, "node_features"))
        object.__setattr__(self, "edge_features", _as_features(self.edge_features, len(edges), "edge_features"))
        if self.node_labels is not None:
            labels = np.asarray(self.node_labels, dtype=np.int64).reshape(-1)
            if labels.shape[0] != n:
                raise GraphError("node_labels length must equal num_nodes")
            object.__setattr__(self, "node_labels", labels)
        if isinstance(self.graph_label, np.integer):
            object.__setattr__(self, "graph_label", int(self.graph_label))
        elif isinstance(self.graph_label, np.floating):
            object.__setattr__(self, "graph_label", float(self.graph_label))
        for arr in (self.edges, self.node_features, self.edge_features, self.node_labels):
            if arr is not None:
                arr.setflags(write=False)

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    @property
    def d_v(self) -> int:
        return int(self.node_features.shape[1])

    @property
    def d_e(self) -> int:
        return int(self.edge_features.shape[1])

    def validate(self, allow_self_loops: bool = False) -> None:
        """Raise :class:`GraphError` naming the first violated invariant."""
        e = self.edges
        if len(e) and (e.min() < 0 or e.max() >= self.num_nodes):
            raise GraphError("endpoint out of range")
        if not allow_self_loops and len(e) and np.any(e[:, 0] == e[:, 1]):
            raise GraphError("self-loop not allowed")
        if len(e):
            keys = e[:, 0] * max(self.num_nodes, 1) + e[:, 1]
            if np.unique(keys).size != len(keys):
                raise GraphError("duplicate directed edge")
        if not np.all(np.isfinite(self.node_features)) or not np.all(np.isfinite(self.edge_features)):
            raise GraphError("non-finite feature value")

    def edge_set(self) -> set:
        return {(int(u), int(v)) for u, v in self.edges}

    def adjacency(self) -> np.ndarray:
        """Dense boolean adjacency, symmetrised (entry set iff either direction exists)."""
        a = np.zeros((self.num_nodes, self.num_nodes), dtype=bool)
        if self.num_edges:
            a[self.edges[:, 0], self.edges[:, 1]] = True
            a[self.edges[:, 1], self.edges[:, 0]] = True
        return a

    def with_(self, **changes) -> "AttributedGraph":
        kw = dict(
            num_nodes=self.num_nodes,
            edges=self.edges,
            node_features=self.node_features,
            edge_features=self.edge_features,
            node_labels=self.node_labels,
            graph_label=self.graph_label,
        )
        kw.update(changes)
        return AttributedGraph(**kw)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AttributedGraph):
            return NotImplemented
        if (self.node_labels is None) != (other.node_labels is None):
            return False
        return (
            self.num_nodes == other.num_nodes
            and np.array_equal(self.edges, other.edges)
            and self.node_features.shape == other.node_features.shape
            and np.array_equal(self.node_features, other.node_features)
            and self.edge_features.shape == other.edge_features.shape
            and np.array_equal(self.edge_features, other.edge_features)
            and (self.node_labels is None or np.array_equal(self.node_labels, other.node_labels))
            and self.graph_label == other.graph_label
            and type(self.graph_label) is type(other.graph_label)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return (
            f"AttributedGraph(num_nodes={self.num_nodes}, num_edges={self.num_edges}, "
            f"d_v={self.d_v}, d_e={self.d_e}, graph_label={self.graph_label!r})"
        )


@dataclass(frozen=True)
class GraphStats:
    num_edges: int
    density: float
    diameter: Union[int, float]
    homophily: Optional[float] = None


def density(g: AttributedGraph) -> float:
    """Directed edge count over ``num_nodes ** 2``."""
    if g.num_nodes < 1:
        raise GraphError("density needs at least one node")
    return g.num_edges / g.num_nodes**2


def homophily(g: AttributedGraph) -> float:
    """Fraction of edges whose endpoints carry the same node label."""
    if g.node_labels is None:
        raise GraphError("homophily requires node_labels")
    if g.num_edges == 0:
        raise GraphError("homophily undefined on a graph without edges")
    lab = g.node_labels
    same = lab[g.edges[:, 0]] == lab[g.edges[:, 1]]
    return float(np.count_nonzero(same)) / g.num_edges


def all_pairs_distances(g: AttributedGraph, cap: Optional[int] = None) -> np.ndarray:
    """Hop distances ignoring edge direction; ``UNREACHABLE`` (-1) beyond ``cap`` or across components."""
    n = g.num_nodes
    if cap is None:
        cap = max(n, 1)
    return bfs_rows(g.adjacency(), np.arange(n, dtype=np.int64), int(cap))


def diameter(g: AttributedGraph) -> Union[int, float]:
    """Longest shortest path (direction ignored); :data:`INFINITE` when disconnected."""
    if g.num_nodes < 1:
        raise GraphError("diameter needs at least one node")
    dist = all_pairs_distances(g)
    if np.any(dist == UNREACHABLE):
        return INFINITE
    return int(dist.max())


def component_diameter(g: AttributedGraph) -> int:
    """Largest finite shortest-path length over all connected components."""
    dist = all_pairs_distances(g)
    return int(dist.max()) if dist.size else 0


def graph_stats(g: AttributedGraph) -> GraphStats:
    h = None
    if g.node_labels is not None and g.num_edges:
        h = homophily(g)
    return GraphStats(num_edges=g.num_edges, density=density(g), diameter=diameter(g), homophily=h)


def homophily_buckets(
    graphs: Sequence[AttributedGraph], k: int
) -> List[Tuple[Tuple[float, float], List[int]]]:
    """Sort graphs by homophily and cut them into ``k`` contiguous near-equal buckets.

    Earlier buckets absorb the remainder, so 7 graphs in 3 buckets split 3/2/2.
    Each entry is ``((lowest_score, highest_score), graph_indices)``.
    """
    if k < 1:
        raise GraphError("k must be >= 1")
    scores = np.array([homophily(g) for g in graphs], dtype=np.float64)
    order = np.argsort(scores, kind="stable")
    base, extra = divmod(len(graphs), k)
    out = []
    start = 0
    for b in range(k):
        size = base + (1 if b < extra else 0)
        idx = order[start : start + size]
        start += size
        if size:
            rng = (float(scores[idx].min()), float(scores[idx].max()))
        else:
            rng = (math.nan, math.nan)
        out.append((rng, [int(i) for i in idx]))
    return out
