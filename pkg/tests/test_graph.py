import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hopwire import AttributedGraph, GraphError, density, diameter, homophily, homophily_buckets
from hopwire.generate import GeneratorSpec, gen_erdos, generate
from hopwire.graph import INFINITE, graph_stats

from conftest import complete_graph, floyd_warshall, path_graph, random_graphs, undirected


def test_density_examples():
    cycle = AttributedGraph(3, [[0, 1], [1, 2], [2, 0]])
    assert density(cycle) == pytest.approx(3 / 9)
    assert density(complete_graph(3)) == pytest.approx(6 / 9)


def test_density_golden_erdos_batch():
    # brute-force edge count over the seed-7 batch, frozen from a reference run
    _, graphs = generate(GeneratorSpec("erdos", 10, 7, {"n": 20, "p": 0.1, "retrieval": False}))
    manual = np.mean([len({tuple(e) for e in g.edges.tolist()}) / 400 for g in graphs])
    assert np.mean([density(g) for g in graphs]) == manual
    assert manual == pytest.approx(0.1035, abs=1e-12)


def test_density_adding_edge_raises_by_one_over_n2():
    g = path_graph(4)
    g2 = g.with_(edges=np.vstack([g.edges, [[0, 3]]]), edge_features=None)
    assert density(g2) - density(g) == pytest.approx(1 / 16)


def test_homophily_examples():
    g = undirected(4, [(0, 1), (1, 2), (2, 3)], node_labels=[0, 0, 0, 0])
    assert homophily(g) == 1.0
    bip = undirected(4, [(0, 2), (1, 3), (0, 3)], node_labels=[0, 0, 1, 1])
    assert homophily(bip) == 0.0
    g = AttributedGraph(4, [[0, 1], [1, 2], [2, 3]], node_labels=[0, 0, 1, 1])
    assert homophily(g) == pytest.approx(2 / 3)


def test_homophily_errors():
    with pytest.raises(GraphError):
        homophily(path_graph(3))
    with pytest.raises(GraphError):
        homophily(AttributedGraph(2, [], node_labels=[0, 1]))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_homophily_bounded_and_label_permutation_invariant(seed):
    rng = np.random.default_rng(seed)
    g = gen_erdos(12, 0.4, seed)
    if g.num_edges == 0:
        return
    labels = rng.integers(0, 3, size=12)
    perm = rng.permutation(3)
    h1 = homophily(g.with_(node_labels=labels))
    h2 = homophily(g.with_(node_labels=perm[labels]))
    assert 0.0 <= h1 <= 1.0
    assert h1 == h2


def test_diameter_examples():
    assert diameter(path_graph(4)) == 3
    assert diameter(AttributedGraph(2, [])) is INFINITE
    assert math.isinf(diameter(AttributedGraph(2, [])))


def test_diameter_matches_floyd_warshall():
    g = gen_erdos(15, 0.3, 3)
    fw = floyd_warshall(g)
    assert diameter(g) == (fw.max() if np.isfinite(fw).all() else INFINITE)
    for g in random_graphs(30, seed=11, max_n=50):
        fw = floyd_warshall(g)
        expect = int(fw.max()) if np.isfinite(fw).all() else INFINITE
        assert diameter(g) == expect


def test_diameter_ignores_direction():
    g = AttributedGraph(3, [[0, 1], [2, 1]])
    assert diameter(g) == 2


def test_validate_messages():
    with pytest.raises(GraphError, match="endpoint out of range"):
        AttributedGraph(3, [[0, 5]]).validate()
    with pytest.raises(GraphError, match="self-loop"):
        AttributedGraph(3, [[1, 1]]).validate()
    with pytest.raises(GraphError, match="duplicate"):
        AttributedGraph(3, [[0, 1], [0, 1]]).validate()
    with pytest.raises(GraphError, match="non-finite"):
        AttributedGraph(2, [], node_features=[[np.nan], [0.0]]).validate()
    with pytest.raises(GraphError):
        AttributedGraph(2, [[0, 1]], edge_features=np.zeros((2, 1)))


def test_graph_is_immutable():
    g = path_graph(3)
    with pytest.raises(ValueError):
        g.edges[0, 0] = 2


def test_graph_stats_homophily_iff_labels():
    assert graph_stats(path_graph(3)).homophily is None
    s = graph_stats(path_graph(3, node_labels=[0, 0, 1]))
    assert s.homophily == pytest.approx(0.5)
    assert s.density == pytest.approx(4 / 9)
    assert s.diameter == 2


def _labelled(score_edges):
    # 4-node path whose homophily equals (#same-label edges) / 3
    labels = [[0, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 1], [0, 1, 1, 0]]
    return [AttributedGraph(4, [[0, 1], [1, 2], [2, 3]], node_labels=labels[i]) for i in score_edges]


def test_homophily_buckets_sizes_and_order():
    graphs = _labelled([0, 3, 1, 2, 0, 3])
    buckets = homophily_buckets(graphs, 3)
    assert [len(b[1]) for b in buckets] == [2, 2, 2]
    scores = [homophily(graphs[i]) for b in buckets for i in b[1]]
    assert scores == sorted(scores)
    assert homophily_buckets(graphs, 1)[0][1] == sorted(range(6), key=lambda i: (homophily(graphs[i]), i))
    seven = _labelled([0, 1, 2, 3, 0, 1, 2])
    assert [len(b[1]) for b in homophily_buckets(seven, 3)] == [3, 2, 2]


def test_homophily_buckets_need_labels():
    with pytest.raises(GraphError):
        homophily_buckets([path_graph(3)], 1)
