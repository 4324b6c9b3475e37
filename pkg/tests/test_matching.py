import itertools
import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from synpa.errors import MatchingError
from synpa.matching import (
    PairGraph,
    brute_force_matching,
    min_weight_perfect_matching,
    perfect_matchings,
)


def _random_graph(rng, n, lo=0.0, hi=10.0):
    w = rng.uniform(lo, hi, size=(n, n))
    w = np.triu(w, 1)
    return PairGraph(w + w.T)


def _nx_optimum(graph):
    g = nx.Graph()
    for i, j in itertools.combinations(range(graph.n), 2):
        g.add_edge(i, j, weight=graph.weight(i, j))
    m = nx.min_weight_matching(g)
    return math.fsum(graph.weight(i, j) for i, j in m)


def test_four_vertex_example(backend):
    w = [[0, 1, 5, 5], [1, 0, 5, 5], [5, 5, 0, 1], [5, 5, 1, 0]]
    m = min_weight_perfect_matching(PairGraph(w))
    assert m.pairs == ((0, 1), (2, 3))
    assert m.total_weight == 2.0
    assert m.partner(3) == 2


def test_additive_weights_tie_on_every_matching(backend):
    # with w(i, j) = i + j every perfect matching weighs 15
    g = PairGraph.from_function(6, lambda i, j: i + j)
    m = min_weight_perfect_matching(g)
    assert m.total_weight == 15.0
    assert m.pairs == ((0, 1), (2, 3), (4, 5))
    assert brute_force_matching(g) == m


def test_two_vertices(backend):
    m = min_weight_perfect_matching(PairGraph([[0, 3.5], [3.5, 0]]))
    assert m.pairs == ((0, 1),) and m.total_weight == 3.5


@pytest.mark.parametrize("n", [0, 1, 3, 7])
def test_odd_or_empty_rejected(n):
    g = PairGraph(np.ones((n, n)).tolist()) if n else PairGraph([])
    with pytest.raises(MatchingError):
        min_weight_perfect_matching(g)
    with pytest.raises(MatchingError):
        brute_force_matching(g)


@pytest.mark.parametrize("bad", [
    [[0, 1], [2, 0]],
    [[0, -1], [-1, 0]],
    [[0, math.inf], [math.inf, 0]],
    [[0, 1, 2], [1, 0]],
])
def test_invalid_weights(bad):
    with pytest.raises(MatchingError):
        PairGraph(bad)


def test_matching_error_is_value_error():
    assert issubclass(MatchingError, ValueError)


def test_matching_count():
    # (n-1)!! perfect matchings, first one in lexicographic order
    ms = list(perfect_matchings(range(8)))
    assert len(ms) == 105
    assert ms[0] == [(0, 1), (2, 3), (4, 5), (6, 7)]
    assert ms == sorted(ms)


@pytest.mark.parametrize("n", [2, 4, 6, 8, 10, 12])
def test_blossom_equals_brute_force(n, backend):
    rng = np.random.default_rng(n)
    for _ in range(15 if n <= 8 else 3):
        g = _random_graph(rng, n)
        assert min_weight_perfect_matching(g) == brute_force_matching(g)


def test_brute_force_limit():
    g = PairGraph(np.ones((14, 14)).tolist())
    with pytest.raises(MatchingError):
        brute_force_matching(g)


@pytest.mark.parametrize("n", [8, 16, 32])
def test_against_networkx(n, backend):
    rng = np.random.default_rng(100 + n)
    for _ in range(5):
        g = _random_graph(rng, n)
        m = min_weight_perfect_matching(g)
        assert m.total_weight == pytest.approx(_nx_optimum(g), rel=1e-9)
        assert sorted(v for p in m.pairs for v in p) == list(range(n))


def test_integer_ties_pick_lexicographic_minimum(backend):
    rng = np.random.default_rng(9)
    for _ in range(30):
        w = rng.integers(0, 3, size=(8, 8)).astype(float)
        w = np.triu(w, 1)
        g = PairGraph(w + w.T)
        m = min_weight_perfect_matching(g)
        best = min(math.fsum(g.weight(i, j) for i, j in p) for p in perfect_matchings(range(8)))
        first = next(p for p in perfect_matchings(range(8))
                     if math.fsum(g.weight(i, j) for i, j in p) == best)
        assert m.pairs == tuple(first)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([4, 6, 8]),
       st.floats(0.5, 50.0), st.floats(0.0, 20.0))
def test_affine_invariance(seed, n, scale, shift):
    g = _random_graph(np.random.default_rng(seed), n)
    h = PairGraph.from_function(n, lambda i, j: scale * g.weight(i, j) + shift)
    assert min_weight_perfect_matching(h).pairs == min_weight_perfect_matching(g).pairs


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([4, 6, 8]))
def test_relabelling_preserves_weight(seed, n):
    rng = np.random.default_rng(seed)
    g = _random_graph(rng, n)
    perm = rng.permutation(n)
    h = PairGraph.from_function(n, lambda i, j: g.weight(perm[i], perm[j]))
    assert min_weight_perfect_matching(h).total_weight == pytest.approx(
        min_weight_perfect_matching(g).total_weight, rel=1e-12)


def test_constant_weights():
    g = PairGraph.from_function(6, lambda i, j: 2.0)
    m = min_weight_perfect_matching(g)
    assert m.pairs == ((0, 1), (2, 3), (4, 5)) and m.total_weight == 6.0
