import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvgraph.generators import complete, cycle, gnp, path, random_weighted
from curvgraph.graph_core import (
    GraphError,
    WeightedGraph,
    averaging,
    ball,
    distance,
    gamma,
    laplacian,
    load_graph,
    r_gradient,
    r_gradient_all,
    sup_r_gradient,
)


@pytest.mark.parametrize(
    "weights, measure, message",
    [
        ([[0, 1], [2, 0]], None, "symmetric"),
        ([[0, -1], [-1, 0]], None, "non-negative"),
        ([[1, 1], [1, 0]], None, "self-loops"),
        ([[0, np.nan], [np.nan, 0]], None, "finite"),
        ([[0, 1], [1, 0]], [1, 0], "positive"),
        ([[0, 1], [1, 0]], [1, 1, 1], "length"),
        ([[0, 1, 0], [1, 0, 1]], None, "square"),
    ],
)
def test_invalid_graphs_rejected(weights, measure, message):
    with pytest.raises(GraphError, match=message):
        WeightedGraph(weights, measure)


def test_edge_list_errors():
    with pytest.raises(GraphError, match="self-loop"):
        WeightedGraph.from_edges(3, [(1, 1)])
    with pytest.raises(GraphError, match="out of range"):
        WeightedGraph.from_edges(3, [(0, 3)])
    with pytest.raises(GraphError, match="conflicting"):
        WeightedGraph.from_edges(3, [(0, 1, 1.0), (1, 0, 2.0)])
    with pytest.raises(GraphError, match="positive"):
        WeightedGraph.from_edges(3, [(0, 1, 0.0)])


def test_arrays_are_read_only():
    g = cycle(4)
    with pytest.raises(ValueError):
        g.weights[0, 1] = 5.0


def test_basic_quantities_weighted():
    g = WeightedGraph([[0, 2, 0], [2, 0, 1], [0, 1, 0]], measure=[1, 2, 4])
    np.testing.assert_allclose(g.transition, [[0, 2, 0], [1, 0, 0.5], [0, 0.25, 0]])
    np.testing.assert_allclose(g.degree, [2, 1.5, 0.25])
    assert g.deg_max == 2
    assert g.q_min == 0.25
    assert g.dim == 8
    assert not g.is_simple
    assert cycle(5).is_simple and cycle(5).dim == 2


def test_distances_and_balls():
    g = path(5)
    assert distance(g, 0, 4) == 4
    assert ball(g, 2, 1) == [1, 2, 3]
    two = WeightedGraph.from_edges(4, [(0, 1), (2, 3)])
    assert math.isinf(distance(two, 0, 3))
    assert ball(two, 0, 10) == [0, 1]


def test_json_round_trip(tmp_path):
    g = random_weighted(7, 0.5, 3)
    data = json.loads(json.dumps(g.to_dict()))
    assert WeightedGraph.from_dict(data) == g
    p = tmp_path / "g.json"
    p.write_text(json.dumps(data))
    assert load_graph(p) == g


@pytest.mark.parametrize("text", ['{"n": 2, "edges": [[0]]}', '{"edges": []}', '{"n": -1}', "[1, 2]", '{"n": 2, "measure": [1]}', "{"])
def test_malformed_json_rejected(tmp_path, text):
    p = tmp_path / "bad.json"
    p.write_text(text)
    with pytest.raises(GraphError):
        load_graph(p)


def test_laplacian_on_cycle():
    g = cycle(6)
    f = np.arange(6, dtype=float)
    lap = laplacian(g, f)
    assert lap[2] == 0.0
    assert lap[0] == (1 - 0) + (5 - 0)
    assert laplacian(g, np.ones(6)).tolist() == [0.0] * 6


def test_gamma_matches_product_rule():
    g = random_weighted(8, 0.6, 1)
    f = np.random.default_rng(0).normal(size=8)
    expected = 0.5 * (laplacian(g, f**2) - 2 * f * laplacian(g, f))
    np.testing.assert_allclose(gamma(g, f), expected, atol=1e-12)


def test_averaging_preserves_non_negativity():
    g = random_weighted(9, 0.5, 2)
    rng = np.random.default_rng(1)
    for _ in range(20):
        f = rng.uniform(0, 1, 9)
        assert np.all(averaging(g, f) >= -1e-12)


def test_r_gradient_examples():
    g = path(4)
    f = np.array([0.0, 2.0, -1.0, 5.0])
    assert r_gradient(g, f, 0, 1) == (2.0, [1])
    assert r_gradient(g, f, 0, 3) == (5.0, [3])
    assert r_gradient(g, np.ones(4), 1, 2) == (0.0, [])
    np.testing.assert_allclose(r_gradient_all(g, f, 1), [2, 3, 6, 6])
    assert sup_r_gradient(g, f, 1) == 6
    with pytest.raises(GraphError):
        r_gradient(g, f, 0, 0)
    with pytest.raises(GraphError):
        r_gradient(g, f[:3], 0, 1)


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(0, 10_000),
    scale=st.floats(-5, 5, allow_nan=False),
    shift=st.floats(-5, 5, allow_nan=False),
)
def test_r_gradient_homogeneity_and_shift(seed, scale, shift):
    g = gnp(8, 0.4, seed)
    f = np.random.default_rng(seed).normal(size=8)
    for radius in (1, 2):
        base = r_gradient_all(g, f, radius)
        np.testing.assert_allclose(r_gradient_all(g, scale * f + shift, radius), abs(scale) * base, atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), radius=st.integers(1, 4))
def test_balls_and_gradients_monotone_in_radius(seed, radius):
    g = gnp(9, 0.3, seed)
    f = np.random.default_rng(seed).normal(size=9)
    for x in range(g.n):
        assert set(ball(g, x, radius)) <= set(ball(g, x, radius + 1))
    assert np.all(r_gradient_all(g, f, radius) <= r_gradient_all(g, f, radius + 1))


def test_laplacian_is_m_symmetric():
    g = random_weighted(10, 0.5, 9)
    rng = np.random.default_rng(2)
    f, h = rng.normal(size=10), rng.normal(size=10)
    m = g.measure
    assert abs(np.dot(laplacian(g, f) * m, h) - np.dot(f * m, laplacian(g, h))) < 1e-12
    assert complete(3).n == 3
