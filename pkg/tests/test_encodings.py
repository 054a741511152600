import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quasargen import encodings as enc
from quasargen import problems as pb


def test_sign_vectors_bit_convention():
    s = enc.sign_vectors(3)
    assert s.shape == (8, 3)
    # row index bit j sets coordinate j: index 5 = 0b101 -> (+, -, +)
    assert np.array_equal(s[5], [1, -1, 1])
    assert np.array_equal(s[0], [-1, -1, -1])
    assert len({tuple(row) for row in s}) == 8


def test_sign_vectors_cap():
    with pytest.raises(enc.EnumerationCapError):
        enc.sign_vectors(21)


def test_permutation_labels_complete():
    labels = enc.permutation_labels(4)
    assert len(labels) == 24
    assert len(set(labels)) == 24
    for sig in labels:
        assert sorted(sig) == [0, 1, 2, 3]


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_cyclic_labels_are_single_cycles(n):
    labels = enc.cyclic_permutation_labels(n)
    assert len(labels) == math.factorial(n - 1)
    assert len(set(labels)) == len(labels)
    for sig in labels:
        # following successors from 0 must visit every vertex exactly once
        seen = [0]
        while True:
            nxt = sig[seen[-1]]
            if nxt == 0:
                break
            seen.append(nxt)
        assert len(seen) == n


def test_cyclic_labels_reject_tiny():
    with pytest.raises(ValueError):
        enc.cyclic_permutation_labels(2)


def test_permutation_matrix_places_ones():
    m = enc.permutation_matrix((1, 2, 0))
    assert np.array_equal(m, [[0, 1, 0], [0, 0, 1], [1, 0, 0]])


def test_subsets_up_to_order_and_count():
    subs = enc.subsets_up_to(3, 2)
    assert subs == [(), (0,), (1,), (2,), (0, 1), (0, 2), (1, 2)]


def test_subset_feature_index_injective():
    n, k = 4, 3
    idx = [enc.subset_feature_index(sub, n, k) for sub in enc.subsets_up_to(n, k)]
    assert len(set(idx)) == len(idx)
    assert all(0 <= i < (n + 1) ** k for i in idx)
    # the empty subset is the all-constant corner
    assert enc.subset_feature_index((), n, k) == 0


def test_fourier_coefficients_reconstruct_table():
    # oracle: evaluate the multilinear expansion at every assignment
    scope = (0, 2, 3)
    rng = np.random.default_rng(3)
    table = tuple(int(b) for b in rng.integers(0, 2, size=8))
    coeffs = enc.fourier_coefficients(scope, table)
    for idx in range(8):
        s = {v: (1 if idx >> t & 1 else -1) for t, v in enumerate(scope)}
        val = sum(c * np.prod([s[v] for v in sub]) if sub else c
                  for sub, c in coeffs.items())
        assert val == pytest.approx(table[idx], abs=1e-12)


def test_fourier_parseval():
    table = (0, 1, 1, 0)  # XOR
    coeffs = enc.fourier_coefficients((0, 1), table)
    assert sum(c * c for c in coeffs.values()) == pytest.approx(np.mean(np.square(table)))
    assert coeffs[(0, 1)] == pytest.approx(-0.5)


def test_double_center_zero_sums_and_offset():
    rng = np.random.default_rng(4)
    mat = rng.standard_normal((5, 5))
    centered, removed = enc.double_center(mat)
    assert np.allclose(centered.sum(axis=0), 0.0, atol=1e-12)
    assert np.allclose(centered.sum(axis=1), 0.0, atol=1e-12)
    # every permutation picks up the same removed scalar
    for sig in enc.permutation_labels(5)[:10]:
        p = enc.permutation_matrix(sig)
        assert np.sum(mat * p) == pytest.approx(np.sum(centered * p) + removed)


@pytest.mark.parametrize("n,builder,dim", [
    (4, enc.symmetric_offdiag_basis, 6),
    (5, enc.symmetric_offdiag_basis, 10),
    (4, enc.doubly_centered_basis, 9),
    (5, enc.doubly_centered_basis, 16),
    (4, enc.cyclic_subspace_basis, 5),
    (5, enc.cyclic_subspace_basis, 11),
    (6, enc.cyclic_subspace_basis, 19),
])
def test_bases_orthonormal_with_expected_dimension(n, builder, dim):
    basis = builder(n)
    assert basis.shape == (n * n, dim)
    assert np.allclose(basis.T @ basis, np.eye(dim), atol=1e-10)
    for col in basis.T:
        mat = col.reshape(n, n)
        if builder is enc.symmetric_offdiag_basis:
            assert np.allclose(mat, mat.T)
            assert np.allclose(np.diag(mat), 0.0)
        else:
            assert np.allclose(mat.sum(axis=0), 0.0, atol=1e-10)
            assert np.allclose(mat.sum(axis=1), 0.0, atol=1e-10)
            if builder is enc.cyclic_subspace_basis:
                assert np.allclose(np.diag(mat), 0.0, atol=1e-10)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_cyclic_variance_matches_enumeration(n, rng):
    mats = np.stack([enc.permutation_matrix(sig)
                     for sig in enc.cyclic_permutation_labels(n)])
    for _ in range(5):
        W = rng.standard_normal((n, n))
        vals = np.tensordot(mats, W, axes=([1, 2], [0, 1]))
        assert enc.cyclic_variance(W) == pytest.approx(float(np.var(vals)), abs=1e-10)
        assert float(np.mean(vals)) == pytest.approx(
            (W.sum() - np.trace(W)) / (n - 1), abs=1e-10)


def test_cyclic_variance_ignores_diagonal(rng):
    W = rng.standard_normal((5, 5))
    shifted = W + np.diag(rng.standard_normal(5))
    assert enc.cyclic_variance(W) == pytest.approx(enc.cyclic_variance(shifted))


@pytest.mark.parametrize("n", [3, 4, 5])
def test_matching_variance_closed_form(n, rng):
    # over all n! permutations, doubly centered W has Var = ||W||^2/(n-1)
    mats = np.stack([enc.permutation_matrix(sig)
                     for sig in enc.permutation_labels(n)])
    W, _ = enc.double_center(rng.standard_normal((n, n)))
    vals = np.tensordot(mats, W, axes=([1, 2], [0, 1]))
    assert float(np.var(vals)) == pytest.approx(np.sum(W * W) / (n - 1), abs=1e-10)


# ---------------------------------------------------------------------------
# encoders: the bilinear cost must equal the native objective, solution by
# solution, with no tolerance beyond float round-off


def test_maxcut_cost_identity():
    g = pb.erdos_renyi(5, 0.6, 11)
    e = enc.encode_maxcut(g)
    assert e.n_solutions == 32
    for label, cost in zip(e.labels, e.cost_values):
        assert cost == pytest.approx(-4.0 * g.cut_value(label), abs=1e-9)
        assert enc.native_value(e, cost) == pytest.approx(g.cut_value(label))


def test_mincut_cost_identity_and_cone():
    g = pb.erdos_renyi(5, 0.6, 12)
    e = enc.encode_mincut(g)
    assert e.nonneg_cone
    for label, cost in zip(e.labels, e.cost_values):
        assert cost == pytest.approx(4.0 * g.cut_value(label), abs=1e-9)


def test_maxcut_triangle_optimum():
    g = pb.Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    e = enc.encode_maxcut(g)
    best, argmins = enc.brute_force_optimum(e)
    assert best == pytest.approx(-8.0)  # maxcut(K3) = 2
    assert len(argmins) == 6  # every non-constant sign pattern


def test_csp_cost_counts_satisfied_exactly():
    csp = pb.random_csp(5, 8, 3, seed=13)
    e = enc.encode_max_k_csp(csp)
    for label, cost in zip(e.labels, e.cost_values):
        assert cost == pytest.approx(-float(csp.satisfied(label)), abs=1e-9)


def test_csp_feature_dimension_and_bound():
    csp = pb.random_csp(4, 3, 2, seed=14)
    e = enc.encode_max_k_csp(csp)
    assert e.n_x == 25
    norms = np.linalg.norm(e.features, axis=1)
    assert np.allclose(norms, e.feature_bound)  # (n+1)^{k/2}, tight


def test_mwbm_cost_identity():
    ap = pb.random_assignment(4, seed=15)
    e = enc.encode_mwbm(ap)
    assert e.n_solutions == 24
    for sig, cost in zip(e.labels, e.cost_values):
        weight = sum(ap.costs[i, sig[i]] for i in range(4))
        assert enc.native_value(e, cost) == pytest.approx(weight, abs=1e-9)
    # minimizing encoded cost maximizes weight
    best, _ = enc.brute_force_optimum(e)
    assert enc.native_value(e, best) == pytest.approx(
        max(sum(ap.costs[i, sig[i]] for i in range(4))
            for sig in enc.permutation_labels(4)))


def test_tsp_cost_identity():
    ap = pb.metric_assignment(5, seed=16)
    e = enc.encode_tsp(ap)
    assert e.n_solutions == 24
    for sig, cost in zip(e.labels, e.cost_values):
        length = sum(ap.costs[i, sig[i]] for i in range(5))
        assert enc.native_value(e, cost) == pytest.approx(length, abs=1e-9)
    best, _ = enc.brute_force_optimum(e)
    assert enc.native_value(e, best) == pytest.approx(
        min(sum(ap.costs[i, sig[i]] for i in range(5))
            for sig in enc.cyclic_permutation_labels(5)))


def test_variance_floors_exact_values(battery):
    # spin-pair features have covariance 2I on the symmetric off-diagonal
    # subspace; canonical monomials are orthonormal parities; both
    # permutation families sit at exactly 1/(n-1)
    assert battery["maxcut"].variance_floor == pytest.approx(2.0, abs=1e-9)
    assert battery["mincut"].variance_floor == pytest.approx(2.0, abs=1e-9)
    assert battery["csp"].variance_floor == pytest.approx(1.0, abs=1e-9)
    assert battery["mwbm"].variance_floor == pytest.approx(1.0 / 3.0, abs=1e-9)
    assert battery["tsp"].variance_floor == pytest.approx(1.0 / 4.0, abs=1e-9)


def test_tsp_floor_small_n():
    # at n=3 only the antisymmetric direction survives: floor n/((n-1)(n-2))
    e = enc.encode_tsp(pb.metric_assignment(3, seed=17))
    assert e.subspace_basis.shape[1] == 1
    assert e.variance_floor == pytest.approx(1.5, abs=1e-9)


def test_validate_encoding_clean(battery):
    for e in battery.values():
        report = enc.validate_encoding(e)
        assert report.ok, report.messages
        assert report.alpha > 0
        d = report.to_dict()
        assert d["ok"] and d["alpha"] == report.alpha


def test_brute_force_optimum_reports_ties():
    g = pb.Graph.from_edges(2, [(0, 1)])
    e = enc.encode_maxcut(g)
    best, argmins = enc.brute_force_optimum(e)
    assert best == pytest.approx(-4.0)
    assert len(argmins) == 2  # (+,-) and (-,+)


def test_native_value_unknown_kind(battery):
    e = battery["maxcut"]
    bad = enc.ProblemEncoding(
        kind="knapsack", labels=e.labels, features=e.features, z=e.z, M=e.M,
        feature_bound=e.feature_bound, instance_bound=e.instance_bound,
        cost_matrix_bound=e.cost_matrix_bound, variance_floor=e.variance_floor,
        subspace_name=e.subspace_name, subspace_basis=e.subspace_basis)
    with pytest.raises(ValueError):
        enc.native_value(bad, 0.0)


def test_cost_range(battery):
    e = battery["maxcut"]
    assert e.cost_range() == pytest.approx(
        float(e.cost_values.max() - e.cost_values.min()))


@given(st.integers(0, 10 ** 6))
def test_cut_encoding_cost_table_consistent(seed):
    g = pb.erdos_renyi(4, 0.5, seed % 50)
    e = enc.encode_maxcut(g)
    # the stored cost table must equal the bilinear form applied row-wise
    assert np.allclose(e.cost_values, e.features @ (e.z @ e.M), atol=1e-9)
