"""Seeded synthetic datasets: Erdős–Rényi retrieval, NeighborsMatch trees, SBM graphs.

All randomness flows through ``numpy.random.Generator(PCG64)``. Dataset
generators split the root seed with ``SeedSequence.spawn`` so graph ``k``
depends only on ``(seed, k)``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np

from .errors import GraphError
from .graph import AttributedGraph

RNG_ID = "numpy.PCG64/SeedSequence.spawn"

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator]

ROLE_ROOT, ROLE_INTERNAL, ROLE_LEAF = 0, 1, 2


def _rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def _child_seeds(seed: int, count: int) -> List[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(count)


def _check_prob(p: float, name: str) -> None:
    if not 0.0 <= p <= 1.0:
        raise GraphError(f"{name} must lie in [0, 1], got {p}")


def _symmetric_edges(pairs: np.ndarray) -> np.ndarray:
    both = np.vstack([pairs, pairs[:, ::-1]]) if len(pairs) else np.zeros((0, 2), dtype=np.int64)
    order = np.lexsort((both[:, 1], both[:, 0]))
    return both[order].astype(np.int64)


def _sample_pairs(rng: np.random.Generator, n: int, prob_fn) -> np.ndarray:
    iu, ju = np.triu_indices(n, k=1)
    probs = prob_fn(iu, ju)
    keep = rng.random(iu.shape[0]) < probs
    return np.stack([iu[keep], ju[keep]], axis=1)


def gen_erdos(n: int, p: float, seed: SeedLike) -> AttributedGraph:
    """G(n, p) with both directions per sampled pair and a constant node feature of 1.0."""
    if n < 1:
        raise GraphError("n must be >= 1")
    _check_prob(p, "p")
    rng = _rng(seed)
    pairs = _sample_pairs(rng, n, lambda i, j: p)
    return AttributedGraph(num_nodes=n, edges=_symmetric_edges(pairs), node_features=np.ones((n, 1)))


def gen_erdos_retrieval_dataset(num_graphs: int, n: int, p: float, seed: int, max_retries: int = 100):
    """``num_graphs`` pairwise-distinct G(n, p) graphs, graph ``k`` labelled ``k``."""
    if num_graphs < 2:
        raise GraphError("num_graphs must be >= 2")
    seen = set()
    out = []
    for k, child in enumerate(_child_seeds(seed, num_graphs)):
        rng = _rng(child)
        for _ in range(max_retries + 1):
            g = gen_erdos(n, p, rng)
            key = g.edges.tobytes()
            if key not in seen:
                break
        else:
            raise GraphError(
                f"collision cap: no distinct graph for label {k} after {max_retries} retries (n={n}, p={p})"
            )
        seen.add(key)
        out.append(g.with_(graph_label=k))
    return out


def neighborsmatch_feature_dim(r_p: int) -> int:
    return 2 * 2**r_p + 3


def gen_neighborsmatch(r_p: int, seed: SeedLike) -> AttributedGraph:
    """One NeighborsMatch instance: a complete binary tree of depth ``r_p``.

    Nodes are numbered breadth-first (root 0). Each of the ``K = 2**r_p``
    leaves holds a marker count and a class id, both random permutations of
    ``0..K-1``. The root holds a query count equal to one leaf's marker; the
    graph label is that leaf's class. Node features concatenate
    ``one_hot(count, K)``, ``one_hot(class, K)`` and ``one_hot(role, 3)``.
    """
    if r_p < 1:
        raise GraphError("r_p must be >= 1")
    rng = _rng(seed)
    k = 2**r_p
    n = 2 ** (r_p + 1) - 1
    child = np.arange(1, n)
    parent = (child - 1) // 2
    edges = _symmetric_edges(np.stack([parent, child], axis=1))

    leaves = np.arange(k - 1, n)
    markers = rng.permutation(k)
    classes = rng.permutation(k)
    target = int(rng.integers(k))

    x = np.zeros((n, neighborsmatch_feature_dim(r_p)))
    x[leaves, markers] = 1.0
    x[leaves, k + classes] = 1.0
    x[0, markers[target]] = 1.0
    roles = np.full(n, ROLE_INTERNAL)
    roles[0] = ROLE_ROOT
    roles[leaves] = ROLE_LEAF
    x[np.arange(n), 2 * k + roles] = 1.0
    return AttributedGraph(num_nodes=n, edges=edges, node_features=x, graph_label=int(classes[target]))


def gen_neighborsmatch_dataset(r_p: int, count: int, seed: int) -> List[AttributedGraph]:
    return [gen_neighborsmatch(r_p, s) for s in _child_seeds(seed, count)]


def gen_sbm(block_sizes: Sequence[int], p_in: float, p_out: float, seed: SeedLike) -> AttributedGraph:
    """Stochastic block model; ``node_labels`` are block indices."""
    _check_prob(p_in, "p_in")
    _check_prob(p_out, "p_out")
    sizes = [int(s) for s in block_sizes]
    if not sizes or min(sizes) < 1:
        raise GraphError("block sizes must be positive")
    blocks = np.repeat(np.arange(len(sizes)), sizes)
    n = blocks.shape[0]
    rng = _rng(seed)
    pairs = _sample_pairs(rng, n, lambda i, j: np.where(blocks[i] == blocks[j], p_in, p_out))
    return AttributedGraph(
        num_nodes=n, edges=_symmetric_edges(pairs), node_features=np.ones((n, 1)), node_labels=blocks
    )


def gen_random_tree(n: int, seed: SeedLike) -> AttributedGraph:
    """Random recursive tree: node ``i`` attaches to a uniform earlier node."""
    if n < 1:
        raise GraphError("n must be >= 1")
    rng = _rng(seed)
    child = np.arange(1, n)
    parent = np.array([rng.integers(i) for i in child], dtype=np.int64)
    pairs = np.stack([parent, child], axis=1) if n > 1 else np.zeros((0, 2), dtype=np.int64)
    return AttributedGraph(num_nodes=n, edges=_symmetric_edges(pairs), node_features=np.ones((n, 1)))


FAMILIES = ("erdos", "neighborsmatch", "sbm", "tree")


@dataclass
class GeneratorSpec:
    """A full, serialisable description of a synthetic dataset."""

    family: str
    count: int
    seed: int
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise GraphError(f"unknown family {self.family!r}")
        if self.count < 0:
            raise GraphError("count must be non-negative")
        p = self.params
        for key in ("p", "p_in", "p_out"):
            if key in p:
                _check_prob(float(p[key]), key)
        if self.family == "neighborsmatch" and int(p.get("depth", 0)) < 1:
            raise GraphError("neighborsmatch depth must be >= 1")

    def header(self) -> Dict[str, Any]:
        return {**asdict(self), "rng": RNG_ID}


def generate(spec: GeneratorSpec) -> Tuple[Dict[str, Any], List[AttributedGraph]]:
    """Build the dataset described by ``spec``; returns ``(header, graphs)``."""
    p = spec.params
    if spec.family == "erdos":
        if p.get("retrieval", True):
            graphs = gen_erdos_retrieval_dataset(spec.count, int(p["n"]), float(p["p"]), spec.seed)
        else:
            graphs = [gen_erdos(int(p["n"]), float(p["p"]), s) for s in _child_seeds(spec.seed, spec.count)]
    elif spec.family == "neighborsmatch":
        graphs = gen_neighborsmatch_dataset(int(p["depth"]), spec.count, spec.seed)
    elif spec.family == "sbm":
        graphs = [
            gen_sbm(p["blocks"], float(p["p_in"]), float(p["p_out"]), s)
            for s in _child_seeds(spec.seed, spec.count)
        ]
    else:
        graphs = [gen_random_tree(int(p["n"]), s) for s in _child_seeds(spec.seed, spec.count)]
    return spec.header(), graphs
