import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from invperc import (
    CompleteGraph,
    DuplicateWeightError,
    Forest,
    InvalidArgument,
    RandomSource,
    WeightedGraph,
    complete_graph_uniform,
    components,
    sample_critical_window,
)
from invperc.errors import ConsistencyError
from invperc.graph import ComponentIndex, ranked_components, read_graph, sorted_edges, window_arrays, write_graph


def test_random_source_is_deterministic():
    a = RandomSource(7).child(3, 1).generator().random(5)
    b = RandomSource(7).child(3, 1).generator().random(5)
    c = RandomSource(7).child(3, 2).generator().random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_random_source_float_and_int_ids_differ():
    assert RandomSource(1).child(2).key64() != RandomSource(1).child(2.0).key64()


def test_random_source_rejects_negative_ids():
    with pytest.raises(InvalidArgument):
        RandomSource(1).child(-1)


def test_complete_graph_needs_a_vertex():
    with pytest.raises(InvalidArgument):
        complete_graph_uniform(0, 1)


def test_single_vertex_complete_graph_has_no_edges():
    g = complete_graph_uniform(1, 5)
    assert g.num_edges == 0
    assert sorted_edges(g) == []


def test_complete_graph_weights_are_reproducible():
    g = complete_graph_uniform(3, 11)
    assert g.weight(1, 2) == g.weight(1, 2) == g.weight(2, 1)
    assert g.weight(1, 2) == complete_graph_uniform(3, 11).weight(1, 2)


def test_complete_graph_requery_of_random_pairs():
    g = complete_graph_uniform(500, 3)
    rng = np.random.default_rng(0)
    pairs = [tuple(rng.choice(np.arange(1, 501), size=2, replace=False)) for _ in range(1000)]
    first = [g.weight(int(u), int(v)) for u, v in pairs]
    again = [g.weight(int(v), int(u)) for u, v in pairs]
    assert first == again


def test_complete_graph_weight_mean():
    us, vs, ws = complete_graph_uniform(100, 2).arrays()
    assert len(ws) == 4950
    assert 0.45 <= ws.mean() <= 0.55
    assert ws.min() > 0 and ws.max() < 1
    assert len(np.unique(ws)) == len(ws)


def test_complete_graph_bulk_weights_match_queries():
    g = complete_graph_uniform(20, 4)
    for e in g.edges()[:50]:
        assert g.weight(e.u, e.v) == e.weight


def test_weighted_graph_validation():
    with pytest.raises(InvalidArgument):
        WeightedGraph(0)
    with pytest.raises(InvalidArgument):
        WeightedGraph(3, [(1, 1, 0.5)])
    with pytest.raises(InvalidArgument):
        WeightedGraph(3, [(1, 4, 0.5)])
    with pytest.raises(InvalidArgument):
        WeightedGraph(3, [(1, 2, 0.5), (2, 1, 0.6)])
    with pytest.raises(DuplicateWeightError):
        WeightedGraph(3, [(1, 2, 0.5), (2, 3, 0.5)])


def test_sorted_edges_small():
    g = WeightedGraph(4, [(1, 2, 0.5), (2, 3, 0.1), (3, 4, 0.9)])
    assert [(e.u, e.v) for e in sorted_edges(g)] == [(2, 3), (1, 2), (3, 4)]
    single = WeightedGraph(2, [(1, 2, 0.3)])
    assert [(e.u, e.v) for e in sorted_edges(single)] == [(1, 2)]


def test_sorted_edges_k4_matches_brute_force():
    g = complete_graph_uniform(4, 9)
    brute = sorted(((g.weight(u, v), (u, v)) for u, v in itertools.combinations(range(1, 5), 2)))
    assert [(e.u, e.v) for e in sorted_edges(g)] == [e for _, e in brute]


@given(st.permutations(list(range(6))))
def test_sorted_edges_ignores_storage_order(perm):
    rows = [(1, 2, 0.3), (2, 3, 0.7), (3, 4, 0.1), (1, 4, 0.9), (1, 3, 0.5), (2, 4, 0.2)]
    g = WeightedGraph(4, [rows[i] for i in perm])
    assert [(e.u, e.v) for e in sorted_edges(g)] == [(3, 4), (2, 4), (1, 2), (1, 3), (2, 3), (1, 4)]


def test_window_full_probability_keeps_every_edge():
    g = sample_critical_window(4, 1.0, 1)
    assert g.num_edges == 6


def test_window_tiny_probability_is_empty():
    assert sample_critical_window(50, 1e-12, 1).num_edges == 0


def test_window_rejects_bad_p():
    for p in (0.0, -0.1, 1.5):
        with pytest.raises(InvalidArgument):
            sample_critical_window(10, p, 1)


def test_window_edge_count_mean():
    n, p = 2000, 1 / 2000
    counts = [sample_critical_window(n, p, RandomSource(5).child(r)).num_edges for r in range(500)]
    expect = n * (n - 1) / 2 * p
    sd = np.sqrt(n * (n - 1) / 2 * p * (1 - p))
    assert abs(np.mean(counts) - expect) < 3 * sd / np.sqrt(500)


def test_window_weights_are_below_p():
    g = sample_critical_window(300, 0.02, 3)
    assert g.ws.max() <= 0.02 and g.ws.min() > 0


def test_window_implicit_method_filters_complete_graph():
    us, vs, ws = window_arrays(40, 0.3, 8, method="implicit")
    full = complete_graph_uniform(40, 8)
    expect = {(e.u, e.v) for e in full.edges() if e.weight <= 0.3}
    assert set(zip(us.tolist(), vs.tolist())) == expect


def test_window_fixed_pair_is_bernoulli():
    n, p, reps = 6, 0.3, 100_000
    hits = 0
    for r in range(reps):
        us, vs, _ = window_arrays(n, p, RandomSource(1).child(r))
        hits += bool(np.any((us == 1) & (vs == 2)))
    assert abs(hits / reps - p) < 4 * np.sqrt(p * (1 - p) / reps)


def test_components_examples():
    assert components(Forest(5)) == [1, 1, 1, 1, 1]
    assert components(Forest(5, frozenset({(1, 2), (2, 3), (3, 4), (4, 5)}))) == [5]
    assert components(Forest(5, frozenset({(1, 2), (3, 4)}))) == [2, 2, 1]


def test_forest_rejects_cycles_and_shared_sources():
    with pytest.raises(InvalidArgument):
        Forest(3, frozenset({(1, 2), (2, 3), (1, 3)}))
    with pytest.raises(ConsistencyError):
        Forest(3, frozenset({(1, 2)}), frozenset({1, 2}))


def test_forest_component_count():
    f = Forest(7, frozenset({(1, 2), (3, 4), (4, 5)}))
    assert len(f.component_sets()) == 7 - len(f)
    assert f.labels[5] == 3
    assert f.component_of(5) == {3, 4, 5}


def test_ranked_components_tie_break():
    f = Forest(6, frozenset({(1, 2), (3, 4), (5, 6)}))
    assert [min(c) for c in ranked_components(f)] == [1, 3, 5]
    firsts = {min(ranked_components(f, np.random.default_rng(s))[0]) for s in range(40)}
    assert firsts == {1, 3, 5}


def test_component_index_refuses_source_merge():
    idx = ComponentIndex(4, [1, 3])
    idx.union(1, 2)
    assert idx.merges_sources(2, 3)
    assert not idx.merges_sources(2, 4)
    with pytest.raises(ConsistencyError):
        idx.union(2, 3)
    assert idx.source_of(2) == 1


@settings(max_examples=50)
@given(st.lists(st.tuples(st.integers(1, 12), st.integers(1, 12)), max_size=30))
def test_find_is_idempotent(pairs):
    idx = ComponentIndex(12)
    for a, b in pairs:
        idx.union(a, b)
    for v in range(1, 13):
        assert idx.find(idx.find(v)) == idx.find(v)


def test_graph_file_round_trip(tmp_path):
    g = WeightedGraph(5, [(1, 2, 0.25), (2, 5, 0.125), (3, 4, 0.3333333333333333)])
    path = tmp_path / "g.txt"
    write_graph(g, path)
    h = read_graph(path)
    assert h.n == 5 and h.edges() == g.edges()


def test_graph_file_header_mismatch(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("3 2\n1 2 0.5\n")
    with pytest.raises(InvalidArgument):
        read_graph(path)


def test_materialize_matches_complete_graph():
    g = CompleteGraph(7, 1)
    m = g.materialize()
    assert m.num_edges == 21
    assert m.weight(2, 6) == g.weight(2, 6)
