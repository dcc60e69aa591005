"""Positional encodings for rewired graphs.

Two edge encodings (shortest-path length, adjacency-power walk counts) keep
the original graph recoverable; the spectral node encoding is global and is
not. Everything is computed on the original graph G, never on G'.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Union

import numpy as np

from .errors import GraphError
from .graph import AttributedGraph, all_pairs_distances
from .linalg import adjacency_powers, normalized_laplacian, symmetric_eigendecomposition
from .rewire import CLS, ORIGINAL, RewiredGraph, recover_original

CLS_SHORTEST_VALUE = 0

PE_KINDS = ("short", "adj", "lp")


class PaddingWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class EdgePositionalEncoding:
    kind: str
    values: np.ndarray

    def __post_init__(self):
        if self.kind not in ("short", "adj"):
            raise GraphError(f"unknown edge encoding kind {self.kind!r}")
        vals = np.asarray(self.values, dtype=np.int64)
        if vals.ndim == 1:
            vals = vals.reshape(-1, 1)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def width(self) -> int:
        return int(self.values.shape[1])

    def __eq__(self, other):
        if not isinstance(other, EdgePositionalEncoding):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self.values, other.values)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class NodePositionalEncoding:
    values: np.ndarray
    padded: int = 0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def q(self) -> int:
        return int(self.values.shape[1])

    def __eq__(self, other):
        if not isinstance(other, NodePositionalEncoding):
            return NotImplemented
        return self.padded == other.padded and np.array_equal(self.values, other.values)

    __hash__ = None


def _as_rewired(g: Union[AttributedGraph, RewiredGraph]) -> RewiredGraph:
    if isinstance(g, RewiredGraph):
        return g
    # an untouched graph is its own 1-hop rewiring
    return RewiredGraph(graph=g, edge_provenance=np.zeros(g.num_edges, dtype=np.int8), r=1)


def _original(rw: RewiredGraph) -> AttributedGraph:
    if rw.edge_provenance is None:
        raise GraphError("edge provenance missing; run rewire before encoding")
    return recover_original(rw)


def _original_index(rw: RewiredGraph) -> np.ndarray:
    """Map G' node ids to G node ids (CLS maps to -1)."""
    n = rw.graph.num_nodes
    idx = np.arange(n, dtype=np.int64)
    if rw.cls_node is not None:
        idx = idx - (idx > rw.cls_node)
        idx[rw.cls_node] = -1
    return idx


def encode_shortest_path(rw: RewiredGraph) -> RewiredGraph:
    """Label every non-CLS edge with its hop distance in G; CLS edges get 0."""
    rw = _as_rewired(rw)
    g = _original(rw)
    dist = all_pairs_distances(g, cap=max(rw.r, 1))
    idx = _original_index(rw)
    u = idx[rw.graph.edges[:, 0]]
    v = idx[rw.graph.edges[:, 1]]
    vals = np.full(rw.graph.num_edges, CLS_SHORTEST_VALUE, dtype=np.int64)
    real = rw.edge_provenance != CLS
    vals[real] = dist[u[real], v[real]]
    if np.any(vals[real] < 1):
        raise GraphError("rewired edge joins nodes farther apart than r")
    return replace(rw, edge_pe=EdgePositionalEncoding("short", vals[:, None]))


def encode_adjacency_powers(rw: RewiredGraph, num_powers: Optional[int] = None) -> RewiredGraph:
    """Attach ``((A)_uv, (A^2)_uv, ..., (A^k)_uv)`` to every edge, zeros on CLS edges.

    ``k`` defaults to the rewiring radius.
    """
    rw = _as_rewired(rw)
    k = rw.r if num_powers is None else int(num_powers)
    g = _original(rw)
    powers = adjacency_powers(g, k).powers
    idx = _original_index(rw)
    u = idx[rw.graph.edges[:, 0]]
    v = idx[rw.graph.edges[:, 1]]
    vals = np.zeros((rw.graph.num_edges, k), dtype=np.int64)
    real = rw.edge_provenance != CLS
    for j, p in enumerate(powers):
        vals[real, j] = p[u[real], v[real]]
    return replace(rw, edge_pe=EdgePositionalEncoding("adj", vals))


def spectral_embedding(g: AttributedGraph, q: int):
    """First ``q`` non-trivial Laplacian eigenvectors of ``g`` as rows per node, plus the zero-pad count."""
    if q < 1:
        raise GraphError("q must be >= 1")
    n = g.num_nodes
    decomp = symmetric_eigendecomposition(normalized_laplacian(g))
    avail = max(n - 1, 0)
    take = min(q, avail)
    emb = np.zeros((n, q))
    emb[:, :take] = decomp.eigenvectors[:, 1 : 1 + take]
    return emb, q - take


def encode_spectral(rw, q: int, sign_seed: Optional[int] = None) -> RewiredGraph:
    """Per-node spectral embedding of G; the CLS node gets zeros.

    With ``sign_seed`` each eigenvector column is negated with probability
    1/2, which is the augmentation used during training. Without it the
    canonical signs are kept.
    """
    rw = _as_rewired(rw)
    g = _original(rw) if rw.edge_provenance is not None else rw.graph
    emb, padded = spectral_embedding(g, q)
    if padded:
        warnings.warn(
            f"graph with {g.num_nodes} nodes has only {max(g.num_nodes - 1, 0)} non-trivial eigenvectors; "
            f"padding {padded} of {q} columns with zeros",
            PaddingWarning,
            stacklevel=2,
        )
    if sign_seed is not None:
        emb = emb * random_signs(np.random.default_rng(sign_seed), q)
    full = np.zeros((rw.graph.num_nodes, q))
    keep = _original_index(rw) >= 0
    full[keep] = emb
    return replace(rw, node_pe=NodePositionalEncoding(full, padded=padded))


def random_signs(rng: np.random.Generator, q: int) -> np.ndarray:
    return np.where(rng.random(q) < 0.5, -1.0, 1.0)


def encode(rw, kind: str, q: Optional[int] = None, sign_seed: Optional[int] = None, num_powers=None):
    if kind == "short":
        return encode_shortest_path(rw)
    if kind == "adj":
        return encode_adjacency_powers(rw, num_powers)
    if kind == "lp":
        if q is None:
            raise GraphError("spectral encoding needs q")
        return encode_spectral(rw, q, sign_seed)
    raise GraphError(f"unknown positional encoding {kind!r}; choose from {PE_KINDS}")


def shortest_from_adjacency(pe: Sequence[int]) -> int:
    """Smallest ``k`` with a nonzero ``k``-walk count, i.e. the hop distance."""
    pe = np.asarray(pe).reshape(-1)
    nz = np.flatnonzero(pe > 0)
    if nz.size == 0:
        raise GraphError("all-zero adjacency encoding has no shortest-path value")
    return int(nz[0]) + 1


def diffusion_weights_from_pe(rw: RewiredGraph, thetas: Sequence[float]) -> np.ndarray:
    """Truncated diffusion weights ``sum_k theta_k (A^k)_uv`` for every edge.

    Uses only the stored adjacency-power vectors. ``thetas[0]`` multiplies the
    identity and so only matters for self-loops.
    """
    pe = rw.edge_pe
    if pe is None or pe.kind != "adj":
        raise GraphError("diffusion weights need an adjacency-power encoding")
    thetas = np.asarray(thetas, dtype=np.float64).reshape(-1)
    if thetas.shape[0] != pe.width + 1:
        raise GraphError(f"expected {pe.width + 1} thetas, got {thetas.shape[0]}")
    e = rw.graph.edges
    w = thetas[0] * (e[:, 0] == e[:, 1]).astype(np.float64)
    for k in range(1, pe.width + 1):
        w = w + thetas[k] * pe.values[:, k - 1].astype(np.float64)
    return w


def original_edge_mask(rw: RewiredGraph) -> np.ndarray:
    """Which edges of G' belong to G, read off the encoding (or provenance)."""
    if rw.edge_pe is not None:
        return rw.edge_pe.values[:, 0] == 1
    if rw.edge_provenance is not None:
        return rw.edge_provenance == ORIGINAL
    raise GraphError("no lossless information on this graph")
