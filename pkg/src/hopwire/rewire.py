"""Topological rewiring: r-hop receptive-field expansion and a global CLS node."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Optional, Union

import numpy as np

from .errors import GraphError, NotRecoverableError
from .graph import AttributedGraph, all_pairs_distances

if TYPE_CHECKING:
    from .encode import EdgePositionalEncoding, NodePositionalEncoding

ORIGINAL = 0
HOP_ADDED = 1
CLS = 2

CLS_NODE_LABEL = -1


@dataclass(frozen=True, eq=False)
class RewiredGraph:
    """A rewired graph G' plus what is needed to explain (and undo) the rewiring.

    Edge layout is canonical: original edges in input order, then hop-added
    edges sorted by ``(u, v)``, then CLS edges as ``(cls, v), (v, cls)`` for
    ascending ``v``. ``edge_provenance`` may be ``None`` for graphs read back
    from encoded files, in which case only the positional encodings can be
    used for recovery.
    """

    graph: AttributedGraph
    edge_provenance: Optional[np.ndarray]
    r: int = 1
    cls_node: Optional[int] = None
    constant_edge_feature: Optional[np.ndarray] = None
    constant_node_feature: Optional[np.ndarray] = None
    edge_pe: Optional[EdgePositionalEncoding] = None
    node_pe: Optional[NodePositionalEncoding] = None

    def __post_init__(self):
        g = self.graph
        ce = np.zeros(g.d_e) if self.constant_edge_feature is None else np.asarray(self.constant_edge_feature, float)
        cv = np.zeros(g.d_v) if self.constant_node_feature is None else np.asarray(self.constant_node_feature, float)
        object.__setattr__(self, "constant_edge_feature", ce.reshape(-1))
        object.__setattr__(self, "constant_node_feature", cv.reshape(-1))
        if self.edge_provenance is not None:
            prov = np.asarray(self.edge_provenance, dtype=np.int8).reshape(-1)
            if prov.shape[0] != g.num_edges:
                raise GraphError("edge_provenance length must equal the number of edges")
            if prov.size and (prov.min() < ORIGINAL or prov.max() > CLS):
                raise GraphError("edge_provenance values must be 0, 1 or 2")
            prov.setflags(write=False)
            object.__setattr__(self, "edge_provenance", prov)
        if self.cls_node is not None:
            object.__setattr__(self, "cls_node", int(self.cls_node))
            if not 0 <= self.cls_node < g.num_nodes:
                raise GraphError("cls_node out of range")

    @property
    def num_original_nodes(self) -> int:
        return self.graph.num_nodes - (0 if self.cls_node is None else 1)

    def without_encodings(self) -> "RewiredGraph":
        return replace(self, edge_pe=None, node_pe=None)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RewiredGraph):
            return NotImplemented

        def same(a, b):
            if a is None or b is None:
                return a is None and b is None
            return np.array_equal(a, b)

        return (
            self.graph == other.graph
            and same(self.edge_provenance, other.edge_provenance)
            and self.r == other.r
            and self.cls_node == other.cls_node
            and np.array_equal(self.constant_edge_feature, other.constant_edge_feature)
            and np.array_equal(self.constant_node_feature, other.constant_node_feature)
            and self.edge_pe == other.edge_pe
            and self.node_pe == other.node_pe
        )

    __hash__ = None


def _constant(value, dim: int, what: str) -> np.ndarray:
    if value is None:
        return np.zeros(dim)
    arr = np.asarray(value, dtype=np.float64).reshape(-1)
    if arr.shape[0] != dim:
        raise GraphError(f"{what} has dimension {arr.shape[0]}, expected {dim}")
    return arr


def _assemble(g: AttributedGraph, r: int, with_cls: bool, c_e: np.ndarray, c_v: np.ndarray) -> RewiredGraph:
    n = g.num_nodes
    blocks = [g.edges]
    feats = [g.edge_features]
    prov = [np.full(g.num_edges, ORIGINAL, dtype=np.int8)]

    if r > 1 and n > 1:
        dist = all_pairs_distances(g, cap=r)
        added = np.argwhere(dist >= 2)
        blocks.append(added)
        feats.append(np.broadcast_to(c_e, (len(added), g.d_e)))
        prov.append(np.full(len(added), HOP_ADDED, dtype=np.int8))

    node_features = g.node_features
    node_labels = g.node_labels
    cls_node = None
    if with_cls:
        cls_node = n
        v = np.arange(n, dtype=np.int64)
        pairs = np.empty((2 * n, 2), dtype=np.int64)
        pairs[0::2, 0] = cls_node
        pairs[0::2, 1] = v
        pairs[1::2, 0] = v
        pairs[1::2, 1] = cls_node
        blocks.append(pairs)
        feats.append(np.broadcast_to(c_e, (2 * n, g.d_e)))
        prov.append(np.full(2 * n, CLS, dtype=np.int8))
        node_features = np.vstack([g.node_features, c_v[None, :]])
        if node_labels is not None:
            node_labels = np.append(node_labels, CLS_NODE_LABEL)

    out = AttributedGraph(
        num_nodes=n + (1 if with_cls else 0),
        edges=np.vstack(blocks).astype(np.int64),
        node_features=node_features,
        edge_features=np.concatenate(feats, axis=0),
        node_labels=node_labels,
        graph_label=g.graph_label,
    )
    return RewiredGraph(
        graph=out,
        edge_provenance=np.concatenate(prov),
        r=r,
        cls_node=cls_node,
        constant_edge_feature=c_e,
        constant_node_feature=c_v,
    )


GraphLike = Union[AttributedGraph, RewiredGraph]


def _base(g: GraphLike):
    if isinstance(g, RewiredGraph):
        return recover_original(g), g.r, g.cls_node is not None, g
    return g, 1, False, None


def expand_receptive_field(g: GraphLike, r: int, c_e=None) -> RewiredGraph:
    """Connect every pair of nodes within ``r`` hops of each other.

    New edges get the constant feature ``c_e`` (zeros by default) and are
    tagged ``HOP_ADDED``. Hop distances ignore edge direction and are taken
    in the original graph, so expanding an already rewired graph is
    idempotent and nodes in different components are never joined. Only
    pairs at distance two or more are added; a one-directional input edge is
    not mirrored.
    """
    if r < 1:
        raise GraphError("r must be >= 1")
    base, r_prev, has_cls, prev = _base(g)
    if c_e is None and prev is not None:
        c_e = prev.constant_edge_feature
    c_e = _constant(c_e, base.d_e, "c_e")
    c_v = prev.constant_node_feature if prev is not None else np.zeros(base.d_v)
    return _assemble(base, max(r, r_prev), has_cls, c_e, c_v)


def add_cls_node(g: GraphLike, c_v=None, c_e=None) -> RewiredGraph:
    """Append a node joined in both directions to every original node."""
    base, r, has_cls, prev = _base(g)
    if has_cls:
        raise GraphError("graph already has a CLS node")
    if c_e is None and prev is not None:
        c_e = prev.constant_edge_feature
    c_e = _constant(c_e, base.d_e, "c_e")
    c_v = _constant(c_v, base.d_v, "c_v")
    return _assemble(base, r, True, c_e, c_v)


def rewire(g: AttributedGraph, r: int = 1, cls: bool = False, c_e=None, c_v=None) -> RewiredGraph:
    """Expand to ``r`` hops and optionally add a CLS node in one call."""
    out = expand_receptive_field(g, r, c_e=c_e)
    if cls:
        out = add_cls_node(out, c_v=c_v, c_e=c_e)
    return out


def _drop_node(g: AttributedGraph, keep_edges: np.ndarray, node: Optional[int]) -> AttributedGraph:
    edges = g.edges[keep_edges]
    node_features = g.node_features
    node_labels = g.node_labels
    n = g.num_nodes
    if node is not None:
        if np.any(edges == node):
            raise NotRecoverableError("CLS node is incident to an edge marked original")
        mask = np.arange(n) != node
        node_features = node_features[mask]
        if node_labels is not None:
            node_labels = node_labels[mask]
        edges = edges - (edges > node)
        n -= 1
    return AttributedGraph(
        num_nodes=n,
        edges=edges,
        node_features=node_features,
        edge_features=g.edge_features[keep_edges],
        node_labels=node_labels,
        graph_label=g.graph_label,
    )


def recover_original(rw: RewiredGraph) -> AttributedGraph:
    """Reconstruct the pre-rewiring graph.

    Provenance tags are used when present. Otherwise the original edges are
    exactly those with shortest-path encoding 1, or with a first
    adjacency-power coordinate of 1. Spectral encodings alone are not
    enough and raise :class:`NotRecoverableError`.
    """
    g = rw.graph
    if rw.edge_provenance is not None:
        keep = rw.edge_provenance == ORIGINAL
    elif rw.edge_pe is not None:
        # both lossless encodings mark the 1-ring with a leading 1
        keep = rw.edge_pe.values[:, 0] == 1
    else:
        raise NotRecoverableError(
            "not recoverable: no edge provenance and no lossless (shortest-path or adjacency) encoding"
        )
    return _drop_node(g, keep, rw.cls_node)
