"""JSONL dataset files: one graph per line, optional ``gen_meta`` header line.

Core keys: ``num_nodes``, ``edges``, ``node_feat``, ``edge_feat``,
``node_labels``, ``graph_label``. Rewired graphs add ``edge_provenance`` and
``rewire_meta``; encoded graphs add ``pe_kind``, ``edge_pe`` / ``node_pe`` and
``pe_meta``. Keys are written in a fixed order and floats with ``repr``
precision, so writing the same data twice gives identical bytes.
"""
from __future__ import annotations

import json
import os
import tempfile
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .encode import EdgePositionalEncoding, NodePositionalEncoding
from .errors import DatasetError, GraphError
from .graph import AttributedGraph
from .rewire import RewiredGraph

Item = Union[AttributedGraph, RewiredGraph]

_EXTENSION_KEYS = ("edge_provenance", "rewire_meta", "pe_kind", "edge_pe", "node_pe", "pe_meta")
_KNOWN_KEYS = frozenset(
    ("num_nodes", "edges", "node_feat", "edge_feat", "node_labels", "graph_label") + _EXTENSION_KEYS
)


# --------------------------------------------------------------------------
# encoding


def _floats(arr: np.ndarray) -> list:
    return [[float(x) for x in row] for row in arr]


def _ints(arr: np.ndarray) -> list:
    return [[int(x) for x in row] for row in arr]


def graph_to_record(item: Item) -> Dict[str, Any]:
    rw = item if isinstance(item, RewiredGraph) else None
    g = rw.graph if rw is not None else item
    rec: Dict[str, Any] = {"num_nodes": g.num_nodes, "edges": _ints(g.edges)}
    if g.d_v:
        rec["node_feat"] = _floats(g.node_features)
    if g.d_e:
        rec["edge_feat"] = _floats(g.edge_features)
    if g.node_labels is not None:
        rec["node_labels"] = [int(x) for x in g.node_labels]
    if g.graph_label is not None:
        rec["graph_label"] = g.graph_label
    if rw is None:
        return rec
    if rw.edge_provenance is not None:
        rec["edge_provenance"] = [int(x) for x in rw.edge_provenance]
    meta: Dict[str, Any] = {"r": int(rw.r), "cls_node": rw.cls_node}
    if rw.constant_edge_feature.size and np.any(rw.constant_edge_feature):
        meta["c_e"] = [float(x) for x in rw.constant_edge_feature]
    if rw.constant_node_feature.size and np.any(rw.constant_node_feature):
        meta["c_v"] = [float(x) for x in rw.constant_node_feature]
    rec["rewire_meta"] = meta
    if rw.edge_pe is not None:
        rec["pe_kind"] = rw.edge_pe.kind
        rec["edge_pe"] = _ints(rw.edge_pe.values)
        rec["pe_meta"] = {"r": rw.edge_pe.width if rw.edge_pe.kind == "adj" else int(rw.r)}
    elif rw.node_pe is not None:
        rec["pe_kind"] = "lp"
        rec["node_pe"] = _floats(rw.node_pe.values)
        rec["pe_meta"] = {"q": rw.node_pe.q, "padded": int(rw.node_pe.padded)}
    return rec


def dumps_record(rec: Dict[str, Any]) -> str:
    return json.dumps(rec, separators=(",", ":"), allow_nan=False)


def _atomic_write(path: Union[str, Path], text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=str(path.parent) if str(path.parent) else ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_dataset(graphs: Sequence[Item], path: Union[str, Path], header: Optional[Dict[str, Any]] = None) -> None:
    """Write graphs (plain or rewired/encoded) as JSONL, atomically.

    ``header`` becomes a first line ``{"gen_meta": header}``.
    """
    lines = []
    if header is not None:
        lines.append(dumps_record({"gen_meta": header}))
    for item in graphs:
        lines.append(dumps_record(graph_to_record(item)))
    _atomic_write(path, "".join(line + "\n" for line in lines))


# --------------------------------------------------------------------------
# decoding


class _Line:
    def __init__(self, lineno: int):
        self.lineno = lineno

    def fail(self, what: str):
        raise DatasetError(f"{what}, line {self.lineno}")


def _int(x, ctx: _Line, what: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        ctx.fail(f"{what} must be an integer")
    return x


def _matrix(x, rows: int, ctx: _Line, what: str, dtype) -> Optional[np.ndarray]:
    """Parse a list of equal-length numeric rows. Returns ``None`` for an empty list with zero rows."""
    if not isinstance(x, list):
        ctx.fail(f"{what} must be an array of arrays")
    if len(x) != rows:
        ctx.fail(f"{what} has {len(x)} rows, expected {rows}")
    if rows == 0:
        return None
    try:
        arr = np.array(x, dtype=dtype)
    except (ValueError, TypeError):
        ctx.fail(f"{what} must be a rectangular numeric array")
    if arr.ndim != 2:
        ctx.fail(f"{what} must be a rectangular numeric array")
    if dtype is np.int64:
        if any(isinstance(v, bool) or not isinstance(v, int) for row in x for v in row):
            ctx.fail(f"{what} must contain integers")
    elif not np.all(np.isfinite(arr)):
        ctx.fail(f"{what} contains non-finite values")
    return arr


def record_to_graph(rec: Dict[str, Any], lineno: int = 1) -> Tuple[Item, Dict[str, Optional[int]]]:
    """Decode one record; also returns the feature dims seen (``None`` if undeterminable)."""
    ctx = _Line(lineno)
    if not isinstance(rec, dict):
        ctx.fail("record must be a JSON object")
    unknown = set(rec) - _KNOWN_KEYS
    if unknown:
        ctx.fail(f"unknown field(s) {sorted(unknown)}")
    if "num_nodes" not in rec or "edges" not in rec:
        ctx.fail("missing required field num_nodes or edges")
    n = _int(rec["num_nodes"], ctx, "num_nodes")
    if n < 0:
        ctx.fail("num_nodes must be non-negative")
    edges_raw = rec["edges"]
    if not isinstance(edges_raw, list) or any(not isinstance(e, list) or len(e) != 2 for e in edges_raw):
        ctx.fail("edges must be an array of [u, v] pairs")
    edges = _matrix(edges_raw, len(edges_raw), ctx, "edges", np.int64)
    edges = np.zeros((0, 2), dtype=np.int64) if edges is None else edges
    m = len(edges)

    # an empty graph without a feature key says nothing about the dimension
    dims: Dict[str, Optional[int]] = {"d_v": 0 if n else None, "d_e": 0 if m else None}
    node_feat = None
    if "node_feat" in rec:
        node_feat = _matrix(rec["node_feat"], n, ctx, "node_feat", np.float64)
        dims["d_v"] = None if node_feat is None else node_feat.shape[1]
    edge_feat = None
    if "edge_feat" in rec:
        edge_feat = _matrix(rec["edge_feat"], m, ctx, "edge_feat", np.float64)
        dims["d_e"] = None if edge_feat is None else edge_feat.shape[1]

    labels = None
    if "node_labels" in rec:
        raw = rec["node_labels"]
        if not isinstance(raw, list) or len(raw) != n:
            ctx.fail("node_labels length must equal num_nodes")
        labels = [_int(x, ctx, "node_labels entry") for x in raw]
    graph_label = rec.get("graph_label")
    if graph_label is not None and (isinstance(graph_label, bool) or not isinstance(graph_label, (int, float))):
        ctx.fail("graph_label must be a number")

    try:
        g = AttributedGraph(
            num_nodes=n,
            edges=edges,
            node_features=node_feat,
            edge_features=edge_feat,
            node_labels=labels,
            graph_label=graph_label,
        )
    except GraphError as exc:
        ctx.fail(str(exc))
    has_ext = any(k in rec for k in _EXTENSION_KEYS)
    try:
        g.validate()
    except GraphError as exc:
        ctx.fail(str(exc))
    if not has_ext:
        return g, dims
    return _decode_extensions(rec, g, ctx), dims


def _decode_extensions(rec, g: AttributedGraph, ctx: _Line) -> RewiredGraph:
    prov = None
    if "edge_provenance" in rec:
        raw = rec["edge_provenance"]
        if not isinstance(raw, list) or len(raw) != g.num_edges:
            ctx.fail("edge_provenance length must equal the number of edges")
        prov = [_int(x, ctx, "edge_provenance entry") for x in raw]
    meta = rec.get("rewire_meta") or {}
    pe_meta = rec.get("pe_meta") or {}
    if not isinstance(meta, dict) or not isinstance(pe_meta, dict):
        ctx.fail("rewire_meta and pe_meta must be objects")
    r = meta.get("r", pe_meta.get("r", 1))
    r = _int(r, ctx, "rewire_meta.r")
    cls_node = meta.get("cls_node")
    if cls_node is not None:
        cls_node = _int(cls_node, ctx, "rewire_meta.cls_node")
    kind = rec.get("pe_kind")
    edge_pe = node_pe = None
    if kind in ("short", "adj"):
        if "edge_pe" not in rec:
            ctx.fail(f"pe_kind {kind!r} requires edge_pe")
        vals = _matrix(rec["edge_pe"], g.num_edges, ctx, "edge_pe", np.int64)
        width = 1 if kind == "short" else int(pe_meta.get("r", r))
        vals = np.zeros((0, width), dtype=np.int64) if vals is None else vals
        edge_pe = EdgePositionalEncoding(kind, vals)
    elif kind == "lp":
        if "node_pe" not in rec:
            ctx.fail("pe_kind 'lp' requires node_pe")
        vals = _matrix(rec["node_pe"], g.num_nodes, ctx, "node_pe", np.float64)
        q = int(pe_meta.get("q", 0))
        vals = np.zeros((0, q)) if vals is None else vals
        node_pe = NodePositionalEncoding(vals, padded=int(pe_meta.get("padded", 0)))
    elif kind is not None:
        ctx.fail(f"unknown pe_kind {kind!r}")
    try:
        return RewiredGraph(
            graph=g,
            edge_provenance=prov,
            r=r,
            cls_node=cls_node,
            constant_edge_feature=meta.get("c_e"),
            constant_node_feature=meta.get("c_v"),
            edge_pe=edge_pe,
            node_pe=node_pe,
        )
    except (GraphError, ValueError) as exc:
        ctx.fail(str(exc))


def _reshape_empty(item: Item, d_v: int, d_e: int) -> Item:
    g = item.graph if isinstance(item, RewiredGraph) else item
    changes = {}
    if g.d_v != d_v and g.num_nodes == 0:
        changes["node_features"] = np.zeros((0, d_v))
    if g.d_e != d_e and g.num_edges == 0:
        changes["edge_features"] = np.zeros((0, d_e))
    if not changes:
        return item
    g = g.with_(**changes)
    if isinstance(item, RewiredGraph):
        return replace(item, graph=g)
    return g


def read_dataset(path: Union[str, Path]) -> Tuple[Optional[Dict[str, Any]], List[Item]]:
    """Read a JSONL dataset, returning ``(gen_meta header or None, items)``.

    Items are :class:`AttributedGraph` for plain records and
    :class:`RewiredGraph` for records carrying rewiring or encoding fields.
    """
    path = Path(path)
    header = None
    items: List[Item] = []
    dim_seen: Dict[str, Optional[Tuple[int, int]]] = {"d_v": None, "d_e": None}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"invalid JSON ({exc.msg}), line {lineno}") from None
            if isinstance(rec, dict) and "gen_meta" in rec:
                if items or header is not None or len(rec) != 1:
                    raise DatasetError(f"gen_meta header must be the sole first record, line {lineno}")
                header = rec["gen_meta"]
                continue
            item, dims = record_to_graph(rec, lineno)
            for key, d in dims.items():
                if d is None:
                    continue
                prev = dim_seen[key]
                if prev is None:
                    dim_seen[key] = (d, lineno)
                elif prev[0] != d:
                    raise DatasetError(
                        f"dimension mismatch: {key}={d} but line {prev[1]} has {key}={prev[0]}, line {lineno}"
                    )
            items.append(item)
    d_v = dim_seen["d_v"][0] if dim_seen["d_v"] else 0
    d_e = dim_seen["d_e"][0] if dim_seen["d_e"] else 0
    items = [_reshape_empty(it, d_v, d_e) for it in items]
    return header, items


def load_dataset(path: Union[str, Path]) -> List[AttributedGraph]:
    """Load graphs from a JSONL file.

    Rewired or encoded records come back as their graph G'; use
    :func:`read_dataset` to keep provenance and encodings.
    """
    _, items = read_dataset(path)
    return [it.graph if isinstance(it, RewiredGraph) else it for it in items]
