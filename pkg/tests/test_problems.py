import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quasargen import problems as pb


def test_graph_rejects_asymmetric():
    w = np.zeros((3, 3))
    w[0, 1] = 1.0
    with pytest.raises(ValueError):
        pb.Graph(n=3, weights=w)


def test_graph_rejects_self_loop_weight():
    w = np.eye(2)
    with pytest.raises(ValueError):
        pb.Graph(n=2, weights=w)


def test_from_edges_accumulates_parallel_edges():
    g = pb.Graph.from_edges(3, [(0, 1), (0, 1), (1, 2, 2.0)])
    assert g.weights[0, 1] == 2.0
    assert g.weights[2, 1] == 2.0
    assert g.edges() == [(0, 1, 2.0), (1, 2, 2.0)]


def test_laplacian_degree_minus_adjacency():
    g = pb.Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)])
    lap = g.laplacian()
    deg = g.weights.sum(axis=1)
    assert np.array_equal(np.diag(lap), deg)
    assert np.array_equal(lap - np.diag(deg), -g.weights)
    assert np.allclose(lap.sum(axis=1), 0.0)


def test_cut_value_counts_crossing_edges():
    g = pb.Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    # bipartition {0, 2} vs {1, 3} cuts all four edges of the 4-cycle
    assert g.cut_value(np.array([1, -1, 1, -1])) == 4.0
    assert g.cut_value(np.array([1, 1, 1, 1])) == 0.0
    assert g.cut_value(np.array([1, 1, -1, -1])) == 2.0


@given(st.integers(0, 2 ** 6 - 1), st.integers(0, 10 ** 6))
def test_cut_value_matches_edge_loop(mask, seed):
    g = pb.erdos_renyi(6, 0.5, seed % 100)
    s = np.array([1 if mask >> i & 1 else -1 for i in range(6)])
    direct = sum(w for i, j, w in g.edges() if s[i] != s[j])
    assert g.cut_value(s) == pytest.approx(direct, abs=1e-12)


def test_erdos_renyi_deterministic():
    a = pb.erdos_renyi(10, 0.4, 42)
    b = pb.erdos_renyi(10, 0.4, 42)
    c = pb.erdos_renyi(10, 0.4, 43)
    assert np.array_equal(a.weights, b.weights)
    assert not np.array_equal(a.weights, c.weights)


def test_erdos_renyi_extreme_probabilities():
    assert pb.erdos_renyi(5, 0.0, 0).edges() == []
    full = pb.erdos_renyi(5, 1.0, 0)
    assert len(full.edges()) == 10
    with pytest.raises(ValueError):
        pb.erdos_renyi(5, 1.5, 0)


def test_csp_satisfied_matches_table_lookup():
    # predicate (x0 XOR x1) with +1 treated as true
    xor = ((0, 1), (0, 1, 1, 0))
    # unary predicate: x2 must be +1
    unary = ((2,), (0, 1))
    csp = pb.CSPInstance(n=3, k=2, predicates=(xor, unary))
    for bits in itertools.product([-1, 1], repeat=3):
        s = np.array(bits)
        expect = int((s[0] > 0) != (s[1] > 0)) + int(s[2] > 0)
        assert csp.satisfied(s) == expect


def test_csp_scope_validation():
    with pytest.raises(ValueError):
        pb.CSPInstance(n=3, k=2, predicates=(((1, 0), (0, 0, 0, 1)),))  # unsorted
    with pytest.raises(ValueError):
        pb.CSPInstance(n=3, k=2, predicates=(((0, 0), (0, 0, 0, 1)),))  # repeated
    with pytest.raises(ValueError):
        pb.CSPInstance(n=3, k=1, predicates=(((0, 1), (0, 0, 0, 1)),))  # arity > k
    with pytest.raises(ValueError):
        pb.CSPInstance(n=3, k=2, predicates=(((0,), (0, 2)),))  # non-boolean table


def test_random_csp_respects_bounds():
    csp = pb.random_csp(6, 12, 3, seed=1)
    assert len(csp.predicates) == 12
    for vs, table in csp.predicates:
        assert 1 <= len(vs) <= 3
        assert len(table) == 2 ** len(vs)


def test_metric_assignment_is_symmetric_zero_diagonal():
    ap = pb.metric_assignment(6, seed=2)
    assert np.allclose(ap.costs, ap.costs.T)
    assert np.allclose(np.diag(ap.costs), 0.0)
    assert ap.problem == "tsp"


@pytest.mark.parametrize("inst", [
    pb.erdos_renyi(5, 0.5, 3),
    pb.Graph.from_edges(3, [(0, 2, 1.5)], problem="mincut"),
    pb.random_csp(4, 6, 2, seed=4),
    pb.random_assignment(4, seed=5),
    pb.metric_assignment(4, seed=6),
])
def test_json_round_trip(tmp_path, inst):
    path = tmp_path / "inst.json"
    pb.save_instance(inst, path)
    back = pb.load_instance(path)
    assert type(back) is type(inst)
    assert back.n == inst.n
    if isinstance(inst, pb.Graph):
        assert np.array_equal(back.weights, inst.weights)
        assert back.problem == inst.problem
    elif isinstance(inst, pb.CSPInstance):
        assert back.predicates == inst.predicates
    else:
        assert np.allclose(back.costs, inst.costs)
        assert back.problem == inst.problem


def test_instance_dict_without_problem_key_defaults():
    g = pb.instance_from_dict({"type": "graph", "n": 2, "edges": [[0, 1]]})
    assert g.problem == "maxcut"
    ap = pb.instance_from_dict({"type": "assignment", "n": 2,
                                "costs": [[0, 1], [2, 0]]})
    assert ap.problem == "mwbm"


def test_instance_from_dict_unknown_type():
    with pytest.raises(ValueError):
        pb.instance_from_dict({"type": "sudoku", "n": 9})
