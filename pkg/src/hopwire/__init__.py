"""Model-agnostic graph rewiring with lossless positional encodings.

Expand every node's receptive field to its r-hop neighbourhood, optionally
add a global CLS node, and attach positional encodings (shortest-path,
adjacency powers, or Laplacian eigenvectors) so a downstream GNN can still
see the original topology.
"""
from ._numba import USE_NUMBA
from .encode import (
    EdgePositionalEncoding,
    NodePositionalEncoding,
    diffusion_weights_from_pe,
    encode,
    encode_adjacency_powers,
    encode_shortest_path,
    encode_spectral,
    shortest_from_adjacency,
)
from .errors import DatasetError, GraphError, HopwireError, NotRecoverableError, NumericalError
from .graph import (
    INFINITE,
    AttributedGraph,
    GraphStats,
    density,
    diameter,
    graph_stats,
    homophily,
    homophily_buckets,
)
from .io import load_dataset, read_dataset, save_dataset
from .linalg import (
    AdjacencyPowers,
    SpectralDecomposition,
    adjacency_powers,
    bfs_distances,
    normalized_laplacian,
    symmetric_eigendecomposition,
)
from .rewire import (
    CLS,
    HOP_ADDED,
    ORIGINAL,
    RewiredGraph,
    add_cls_node,
    expand_receptive_field,
    recover_original,
    rewire,
)

__version__ = "0.1.0"

__all__ = [
    "add_cls_node",
    "adjacency_powers",
    "AdjacencyPowers",
    "AttributedGraph",
    "bfs_distances",
    "CLS",
    "DatasetError",
    "density",
    "diameter",
    "diffusion_weights_from_pe",
    "EdgePositionalEncoding",
    "encode",
    "encode_adjacency_powers",
    "encode_shortest_path",
    "encode_spectral",
    "expand_receptive_field",
    "graph_stats",
    "GraphError",
    "GraphStats",
    "homophily",
    "homophily_buckets",
    "HOP_ADDED",
    "HopwireError",
    "INFINITE",
    "load_dataset",
    "NodePositionalEncoding",
    "normalized_laplacian",
    "NotRecoverableError",
    "NumericalError",
    "ORIGINAL",
    "read_dataset",
    "recover_original",
    "rewire",
    "RewiredGraph",
    "save_dataset",
    "shortest_from_adjacency",
    "SpectralDecomposition",
    "symmetric_eigendecomposition",
    "USE_NUMBA",
]
