import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hopwire import CLS, HOP_ADDED, ORIGINAL, AttributedGraph, GraphError
from hopwire import adjacency_powers, diffusion_weights_from_pe, encode, encode_adjacency_powers
from hopwire import encode_shortest_path, encode_spectral, normalized_laplacian, rewire, shortest_from_adjacency
from hopwire.encode import PaddingWarning, original_edge_mask
from hopwire.generate import gen_erdos

from conftest import complete_graph, count_walks, floyd_warshall, path_graph, random_graphs


def _pe_of(rw, u, v):
    e = rw.graph.edges
    i = np.flatnonzero((e[:, 0] == u) & (e[:, 1] == v))[0]
    return rw.edge_pe.values[i].tolist()


def test_shortest_examples():
    rw = encode_shortest_path(rewire(path_graph(3), 2))
    assert _pe_of(rw, 0, 2) == [2] and _pe_of(rw, 0, 1) == [1]
    rw1 = encode_shortest_path(rewire(gen_erdos(10, 0.3, 1), 1))
    assert np.all(rw1.edge_pe.values == 1)


def test_shortest_matches_floyd_warshall_with_cls():
    g = gen_erdos(12, 0.25, 5)
    rw = encode_shortest_path(rewire(g, 3, cls=True))
    fw = floyd_warshall(g)
    for (u, v), p, prov in zip(rw.graph.edges, rw.edge_pe.values[:, 0], rw.edge_provenance):
        if prov == CLS:
            assert p == 0
        else:
            assert p == fw[u, v]


def test_shortest_invariants_by_provenance():
    for g in random_graphs(20, seed=6):
        rw = encode(rewire(g, 3, cls=True), "short")
        p = rw.edge_pe.values[:, 0]
        assert np.all(p[rw.edge_provenance == ORIGINAL] == 1)
        assert np.all(p[rw.edge_provenance == CLS] == 0)
        hop = p[rw.edge_provenance == HOP_ADDED]
        assert np.all((hop >= 2) & (hop <= 3))


def test_adjacency_examples():
    rw = encode_adjacency_powers(rewire(path_graph(3), 2))
    assert _pe_of(rw, 0, 2) == [0, 1] and _pe_of(rw, 0, 1) == [1, 0]
    tri = encode_adjacency_powers(rewire(complete_graph(3), 2))
    assert _pe_of(tri, 0, 1) == [1, 1]
    one = encode_adjacency_powers(rewire(gen_erdos(10, 0.3, 2), 1))
    assert np.all(one.edge_pe.values == 1)


def test_adjacency_matches_walk_enumeration_and_cls_zero():
    for g in random_graphs(10, seed=7, max_n=15):
        rw = encode(rewire(g, 4, cls=True), "adj")
        walks = [count_walks(g, k) for k in range(1, 5)]
        for (u, v), pe, prov in zip(rw.graph.edges, rw.edge_pe.values, rw.edge_provenance):
            if prov == CLS:
                assert not pe.any()
            else:
                assert pe.tolist() == [int(w[u, v]) for w in walks]
        first_is_one = rw.edge_pe.values[:, 0] == 1
        assert np.array_equal(first_is_one, rw.edge_provenance == ORIGINAL)


def test_num_powers_override():
    rw = encode_adjacency_powers(rewire(path_graph(4), 3), num_powers=6)
    assert rw.edge_pe.width == 6


def test_encoding_requires_provenance():
    bare = rewire(path_graph(3), 2)
    bare = bare.__class__(**{**bare.__dict__, "edge_provenance": None})
    with pytest.raises(GraphError, match="run rewire"):
        encode_shortest_path(bare)


def test_spectral_two_nodes():
    rw = encode_spectral(rewire(path_graph(2), 1), 1)
    s = 1 / np.sqrt(2)
    assert np.allclose(rw.node_pe.values[:, 0], [s, -s])


def test_spectral_degenerate_eigenspace_contract():
    rw = encode_spectral(rewire(complete_graph(3), 1), 2)
    v = rw.node_pe.values
    lap = normalized_laplacian(complete_graph(3))
    assert np.allclose(v.T @ v, np.eye(2), atol=1e-10)
    assert np.max(np.abs(lap @ v - 1.5 * v)) < 1e-10


def test_spectral_padding_recorded():
    g = path_graph(4)
    with pytest.warns(PaddingWarning):
        rw = encode_spectral(rewire(g, 1), 7)
    assert rw.node_pe.padded == 4
    assert np.all(rw.node_pe.values[:, 3:] == 0)
    assert np.any(rw.node_pe.values[:, :3] != 0)


def test_spectral_uses_original_graph_and_zero_cls():
    g = gen_erdos(10, 0.4, 3)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        a = encode_spectral(rewire(g, 1), 3).node_pe.values
        b = encode_spectral(rewire(g, 3, cls=True), 3).node_pe.values
    assert np.array_equal(b[:10], a)
    assert np.all(b[10] == 0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_spectral_sign_flip_keeps_eigenpairs(seed):
    g = gen_erdos(12, 0.35, seed % 50)
    base = encode_spectral(rewire(g, 1), 4)
    flip = encode_spectral(rewire(g, 1), 4, sign_seed=seed)
    a, b = base.node_pe.values, flip.node_pe.values
    signs = np.sign(np.sum(a * b, axis=0))
    assert np.array_equal(np.abs(signs), np.ones(4))
    assert np.allclose(b, a * signs)
    assert np.allclose(b.T @ b, a.T @ a)


def test_sign_seed_is_deterministic():
    g = gen_erdos(12, 0.35, 0)
    a = encode_spectral(rewire(g, 1), 4, sign_seed=9).node_pe.values
    b = encode_spectral(rewire(g, 1), 4, sign_seed=9).node_pe.values
    assert a.tobytes() == b.tobytes()


def test_shortest_from_adjacency_examples():
    assert shortest_from_adjacency([0, 1]) == 2
    assert shortest_from_adjacency([1, 1]) == 1
    with pytest.raises(GraphError):
        shortest_from_adjacency([0, 0])
    g = gen_erdos(12, 0.25, 5)
    s = encode(rewire(g, 3), "short").edge_pe.values[:, 0]
    a = encode(rewire(g, 3), "adj").edge_pe.values
    assert [shortest_from_adjacency(p) for p in a] == s.tolist()


def test_diffusion_examples():
    rw = encode(rewire(path_graph(3), 1), "adj")
    w = diffusion_weights_from_pe(rw, [1.0, 0.5])
    assert w[0] == 0.5
    assert not diffusion_weights_from_pe(rw, [0.0, 0.0]).any()
    tri = encode(rewire(complete_graph(3), 2), "adj")
    e = tri.graph.edges
    i = np.flatnonzero((e[:, 0] == 0) & (e[:, 1] == 1))[0]
    assert diffusion_weights_from_pe(tri, [0.0, 1.0, 0.25])[i] == 1.25
    with pytest.raises(GraphError, match="thetas"):
        diffusion_weights_from_pe(tri, [1.0, 0.5])


def test_diffusion_equals_direct_matrix_sum():
    rng = np.random.default_rng(0)
    for g in random_graphs(20, seed=13, max_n=20):
        r = int(rng.integers(1, 6))
        thetas = [2.0**-k for k in range(r + 1)]
        rw = encode(rewire(g, r), "adj")
        got = diffusion_weights_from_pe(rw, thetas)
        powers = adjacency_powers(g, r).powers
        u, v = rw.graph.edges.T
        direct = thetas[0] * (u == v).astype(float)
        for k in range(1, r + 1):
            direct = direct + thetas[k] * powers[k - 1][u, v].astype(float)
        assert np.array_equal(got, direct)


def test_original_edge_mask_from_pe():
    g = gen_erdos(12, 0.3, 1)
    rw = encode(rewire(g, 3, cls=True), "short")
    assert np.array_equal(original_edge_mask(rw), rw.edge_provenance == ORIGINAL)


def _ball(g, nodes, r):
    d = floyd_warshall(g)
    return {int(x) for x in np.flatnonzero((d[list(nodes)] <= r).any(axis=0))}


def test_locality_of_edge_encodings():
    g = path_graph(12)
    # surgery: attach an extra edge far from the left end
    far = g.with_(edges=np.vstack([g.edges, [[9, 11], [11, 9]]]), edge_features=None)
    r = 2
    for kind in ("short", "adj"):
        a = encode(rewire(g, r), kind)
        b = encode(rewire(far, r), kind)
        for (u, v), pe in zip(a.graph.edges, a.edge_pe.values):
            if not (_ball(g, [u], r) | _ball(g, [v], r)) & {9, 10, 11}:
                assert _pe_of(b, u, v) == pe.tolist()


def test_spectral_is_global():
    g = path_graph(12)
    far = g.with_(edges=np.vstack([g.edges, [[9, 11], [11, 9]]]), edge_features=None)
    a = encode_spectral(rewire(g, 1), 3).node_pe.values
    b = encode_spectral(rewire(far, 1), 3).node_pe.values
    assert not np.allclose(np.abs(a[0]), np.abs(b[0]))


def test_empty_graph_encodings():
    g = AttributedGraph(3, [])
    assert encode(rewire(g, 2), "short").edge_pe.values.shape == (0, 1)
    assert encode(rewire(g, 2), "adj").edge_pe.values.shape == (0, 2)
