import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hopwire import AttributedGraph, GraphError, NumericalError, adjacency_powers, bfs_distances
from hopwire import normalized_laplacian, symmetric_eigendecomposition
from hopwire.generate import gen_erdos
from hopwire.graph import component_diameter
from hopwire.kernels import UNREACHABLE
from hopwire.linalg import heat_diffusion

from conftest import complete_graph, count_walks, floyd_warshall, path_graph, random_graphs


def test_bfs_examples():
    g = path_graph(4)
    assert bfs_distances(g, 0, 10).tolist() == [0, 1, 2, 3]
    assert bfs_distances(g, 0, 2).tolist() == [0, 1, 2, UNREACHABLE]
    with pytest.raises(GraphError):
        bfs_distances(g, 4, 1)


def test_bfs_matches_floyd_warshall():
    g = gen_erdos(12, 0.25, 5)
    fw = floyd_warshall(g)
    for s in range(12):
        d = bfs_distances(g, s, 100).astype(float)
        d[d == UNREACHABLE] = np.inf
        assert np.array_equal(d, fw[s])


def test_adjacency_power_examples():
    p = adjacency_powers(path_graph(3), 2).powers
    assert p[1][0, 2] == 1 and p[1][1, 1] == 2
    e = adjacency_powers(path_graph(2), 3).powers
    assert np.array_equal(e[2], e[0])
    z = adjacency_powers(AttributedGraph(4, []), 3).powers
    assert all(not m.any() for m in z)


def test_adjacency_powers_match_walk_enumeration():
    for g in random_graphs(12, seed=8, max_n=12):
        powers = adjacency_powers(g, 4).powers
        for k in range(1, 5):
            assert np.array_equal(powers[k - 1], count_walks(g, k))


def test_adjacency_power_overflow_names_power():
    g = complete_graph(60)
    with pytest.raises(NumericalError, match=r"A\^\d+"):
        adjacency_powers(g, 12)


def test_bfs_agrees_with_first_nonzero_power():
    for g in random_graphs(15, seed=9, max_n=30):
        n = g.num_nodes
        top = max(component_diameter(g), 1)
        powers = adjacency_powers(g, top).powers
        for s in range(min(n, 4)):
            d = bfs_distances(g, s, n)
            for t in range(n):
                if t == s or d[t] == UNREACHABLE:
                    continue
                first = next(k for k, p in enumerate(powers, start=1) if p[s, t] > 0)
                assert first == d[t]


def test_laplacian_examples():
    assert np.array_equal(normalized_laplacian(path_graph(2)), [[1.0, -1.0], [-1.0, 1.0]])
    k3 = normalized_laplacian(complete_graph(3))
    assert np.allclose(np.diag(k3), 1) and np.allclose(k3[~np.eye(3, dtype=bool)], -0.5)
    iso = normalized_laplacian(AttributedGraph(3, [[0, 1], [1, 0]]))
    assert iso[2, 2] == 1 and iso[2, :2].tolist() == [0, 0] and iso[:2, 2].tolist() == [0, 0]


def test_eigen_examples():
    w = symmetric_eigendecomposition(normalized_laplacian(complete_graph(3))).eigenvalues
    assert np.allclose(w, [0, 1.5, 1.5], atol=1e-10)
    d = symmetric_eigendecomposition(np.eye(4))
    assert np.allclose(d.eigenvalues, 1) and np.allclose(d.eigenvectors.T @ d.eigenvectors, np.eye(4))
    w2 = symmetric_eigendecomposition(np.array([[1.0, -1.0], [-1.0, 1.0]])).eigenvalues
    assert np.allclose(w2, [0, 2], atol=1e-12)


def test_eigen_errors():
    with pytest.raises(GraphError, match="not symmetric"):
        symmetric_eigendecomposition(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(GraphError):
        symmetric_eigendecomposition(np.zeros((2, 3)))


def test_eigen_invariants_on_random_laplacians():
    for g in random_graphs(20, seed=2, max_n=60):
        lap = normalized_laplacian(g)
        d = symmetric_eigendecomposition(lap)
        v, w = d.eigenvectors, d.eigenvalues
        assert np.all(np.diff(w) >= 0)
        assert np.max(np.abs(lap @ v - v * w)) < 1e-8
        assert np.max(np.abs(v.T @ v - np.eye(g.num_nodes))) < 1e-8
        assert w.min() > -1e-8 and w.max() < 2 + 1e-8
        # one zero eigenvalue per connected component without isolated nodes
        deg = g.adjacency().sum(axis=1)
        fw = floyd_warshall(g)
        comps = len({tuple(np.isfinite(row)) for row, dg in zip(fw, deg) if dg > 0})
        assert np.sum(np.abs(w) < 1e-8) == comps


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 40), st.integers(0, 10_000))
def test_eigen_reconstruction(n, seed):
    m = np.random.default_rng(seed).normal(size=(n, n))
    m = m + m.T
    d = symmetric_eigendecomposition(m)
    assert np.max(np.abs(d.eigenvectors @ np.diag(d.eigenvalues) @ d.eigenvectors.T - m)) < 1e-7


def test_eigen_deterministic_bitwise():
    m = normalized_laplacian(gen_erdos(30, 0.2, 1))
    a, b = symmetric_eigendecomposition(m), symmetric_eigendecomposition(m.copy())
    assert a.eigenvalues.tobytes() == b.eigenvalues.tobytes()
    assert a.eigenvectors.tobytes() == b.eigenvectors.tobytes()


def test_eigenvector_sign_canonical():
    d = symmetric_eigendecomposition(normalized_laplacian(gen_erdos(20, 0.3, 4)))
    for col in d.eigenvectors.T:
        big = np.flatnonzero(np.abs(col) > 1e-10)
        assert col[big[0]] > 0


def _euler(lap, u0, t, dt=1e-4):
    u = u0.copy()
    for _ in range(int(round(t / dt))):
        u = u - dt * (lap @ u)
    return u


def test_heat_diffusion_matches_euler():
    for g in random_graphs(6, seed=5, max_n=20):
        lap = normalized_laplacian(g)
        u0 = np.random.default_rng(g.num_nodes).normal(size=g.num_nodes)
        d = symmetric_eigendecomposition(lap)
        for t in (0.1, 0.5):
            assert np.max(np.abs(heat_diffusion(d, u0, t) - _euler(lap, u0, t))) < 1e-4
