"""Packing encoded graphs into one block-diagonal batch."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np

from ..errors import GraphError
from ..graph import AttributedGraph
from ..rewire import RewiredGraph

PE_NONE = "none"


def pe_kind_of(item: Union[AttributedGraph, RewiredGraph]) -> str:
    if isinstance(item, RewiredGraph):
        if item.edge_pe is not None:
            return item.edge_pe.kind
        if item.node_pe is not None:
            return "lp"
    return PE_NONE


@dataclass
class GraphBatch:
    """Several graphs laid out as one disconnected graph.

    Attention runs over ``att_*`` arrays: every real edge ``(j -> i)`` plus a
    self-loop per node, sorted by target node so each node's incoming set is
    a contiguous segment starting at ``att_starts[i]``. ``att_edge`` indexes
    the real edge list, with ``num_edges`` standing for "self-loop".
    """

    num_graphs: int
    num_nodes: int
    num_edges: int
    x: np.ndarray
    edge_attr: np.ndarray
    edge_pe: Optional[np.ndarray]
    node_pe: Optional[np.ndarray]
    pe_kind: str
    graph_ids: np.ndarray
    node_starts: np.ndarray
    cls_index: np.ndarray
    att_src: np.ndarray
    att_dst: np.ndarray
    att_edge: np.ndarray
    att_starts: np.ndarray
    y: Optional[np.ndarray]
    node_y: Optional[np.ndarray]


def make_batch(items: Sequence[Union[AttributedGraph, RewiredGraph]], node_pe_signs: Optional[List[np.ndarray]] = None) -> GraphBatch:
    """Concatenate graphs; ``node_pe_signs[k]`` optionally flips spectral columns of graph ``k``."""
    if not items:
        raise GraphError("cannot batch an empty list of graphs")
    kinds = {pe_kind_of(it) for it in items}
    if len(kinds) != 1:
        raise GraphError(f"mixed positional encodings in one batch: {sorted(kinds)}")
    kind = kinds.pop()

    xs, eas, epes, npes, gids, cls_idx, srcs, dsts, ys, node_ys = [], [], [], [], [], [], [], [], [], []
    starts = []
    offset = 0
    for k, it in enumerate(items):
        rw = it if isinstance(it, RewiredGraph) else None
        g = rw.graph if rw is not None else it
        starts.append(offset)
        xs.append(g.node_features)
        eas.append(g.edge_features)
        srcs.append(g.edges[:, 0] + offset)
        dsts.append(g.edges[:, 1] + offset)
        gids.append(np.full(g.num_nodes, k, dtype=np.int64))
        cls_idx.append(offset + rw.cls_node if rw is not None and rw.cls_node is not None else -1)
        if kind in ("short", "adj"):
            epes.append(rw.edge_pe.values)
        elif kind == "lp":
            pe = rw.node_pe.values
            if node_pe_signs is not None:
                pe = pe * node_pe_signs[k]
            npes.append(pe)
        ys.append(g.graph_label)
        if g.node_labels is not None:
            node_ys.append(g.node_labels)
        offset += g.num_nodes

    n = offset
    src = np.concatenate(srcs).astype(np.int64)
    dst = np.concatenate(dsts).astype(np.int64)
    m = src.shape[0]
    loops = np.arange(n, dtype=np.int64)
    a_src = np.concatenate([src, loops])
    a_dst = np.concatenate([dst, loops])
    a_edge = np.concatenate([np.arange(m, dtype=np.int64), np.full(n, m, dtype=np.int64)])
    order = np.lexsort((a_src, a_dst))
    a_src, a_dst, a_edge = a_src[order], a_dst[order], a_edge[order]
    att_starts = np.searchsorted(a_dst, np.arange(n))

    y = None
    if all(v is not None for v in ys):
        y = np.asarray(ys)
    return GraphBatch(
        num_graphs=len(items),
        num_nodes=n,
        num_edges=m,
        x=np.vstack(xs),
        edge_attr=np.vstack(eas) if m else np.zeros((0, eas[0].shape[1])),
        edge_pe=np.vstack(epes) if epes else None,
        node_pe=np.vstack(npes) if npes else None,
        pe_kind=kind,
        graph_ids=np.concatenate(gids),
        node_starts=np.asarray(starts, dtype=np.int64),
        cls_index=np.asarray(cls_idx, dtype=np.int64),
        att_src=a_src,
        att_dst=a_dst,
        att_edge=a_edge,
        att_starts=att_starts,
        y=y,
        node_y=np.concatenate(node_ys) if len(node_ys) == len(items) else None,
    )
