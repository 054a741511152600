"""Bilinear cost encodings over exhaustively enumerated solution spaces.

Every problem is cast the same way: a finite list of solutions with feature
vectors x, one instance feature vector z, and a cost matrix M such that the
scalar cost of a solution is z^T M x.  Minimizing that bilinear form over the
enumeration recovers the native objective (max cut, min cut, satisfied
predicates, matching weight, tour length) up to the recorded offset.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .problems import AssignmentProblem, CSPInstance, Graph

MAX_SOLUTIONS = 2 ** 20


class EnumerationCapError(ValueError):
    """Solution space (or feature space) too large to enumerate."""


def _check_cap(count: int, what: str) -> None:
    if count > MAX_SOLUTIONS:
        raise EnumerationCapError(
            f"{what} has {count} elements, above the enumeration cap {MAX_SOLUTIONS}")


def sign_vectors(n: int) -> np.ndarray:
    """All 2^n vectors in {-1, +1}^n; bit j of the row index sets coordinate j."""
    _check_cap(2 ** n, f"sign-vector space for n={n}")
    idx = np.arange(2 ** n)
    bits = (idx[:, None] >> np.arange(n)[None, :]) & 1
    return 2.0 * bits - 1.0


def permutation_labels(n: int) -> list[tuple[int, ...]]:
    import math

    _check_cap(math.factorial(n), f"permutation space for n={n}")
    return list(itertools.permutations(range(n)))


def cyclic_permutation_labels(n: int) -> list[tuple[int, ...]]:
    """Permutations consisting of a single n-cycle, as successor maps."""
    import math

    if n < 3:
        raise ValueError("cyclic tours need n >= 3")
    _check_cap(math.factorial(n - 1), f"cyclic permutation space for n={n}")
    out = []
    for rest in itertools.permutations(range(1, n)):
        order = (0,) + rest
        sigma = [0] * n
        for t in range(n):
            sigma[order[t]] = order[(t + 1) % n]
        out.append(tuple(sigma))
    return out


def permutation_matrix(sigma) -> np.ndarray:
    n = len(sigma)
    mat = np.zeros((n, n))
    mat[np.arange(n), list(sigma)] = 1.0
    return mat


def subsets_up_to(n: int, k: int) -> list[tuple[int, ...]]:
    """Subsets of {0..n-1} of size <= k, ordered by size then lexicographically."""
    out: list[tuple[int, ...]] = []
    for size in range(k + 1):
        out.extend(itertools.combinations(range(n), size))
    return out


def subset_feature_index(subset, n: int, k: int) -> int:
    """Canonical flat index of a monomial inside the (1, s)^{tensor k} feature block.

    The subset {i1 < ... < ij} is padded with leading constant coordinates so
    each degree <= k monomial owns exactly one index.
    """
    subset = tuple(sorted(int(i) for i in subset))
    if len(subset) > k:
        raise ValueError(f"subset {subset} larger than tensor order {k}")
    digits = (0,) * (k - len(subset)) + tuple(i + 1 for i in subset)
    return int(np.ravel_multi_index(digits, (n + 1,) * k))


def fourier_coefficients(scope, table) -> dict[tuple[int, ...], float]:
    """Multilinear (parity-basis) expansion of a 0/1 predicate on +-1 inputs.

    Truth-table indexing matches CSPInstance: bit t of the index is 1 exactly
    when variable scope[t] is +1.  The returned map sends each subset of the
    scope to its coefficient; summing coeff * prod(s_i for i in subset) over
    the map reproduces the table exactly.
    """
    scope = tuple(scope)
    arity = len(scope)
    coeffs: dict[tuple[int, ...], float] = {}
    for sub_mask in range(2 ** arity):
        sub = tuple(scope[t] for t in range(arity) if sub_mask >> t & 1)
        total = 0.0
        for idx in range(2 ** arity):
            chi = 1.0
            for t in range(arity):
                if sub_mask >> t & 1 and not idx >> t & 1:
                    chi = -chi
            total += table[idx] * chi
        coeffs[sub] = total / 2 ** arity
    return coeffs


def double_center(mat: np.ndarray) -> tuple[np.ndarray, float]:
    """Remove row then column means; returns the centered matrix and the scalar
    that every permutation matrix picks up from the removed part."""
    mat = np.asarray(mat, dtype=float)
    row = mat.mean(axis=1, keepdims=True)
    col = (mat - row).mean(axis=0, keepdims=True)
    return mat - row - col, float(row.sum() + col.sum())


def symmetric_offdiag_basis(n: int) -> np.ndarray:
    """Orthonormal basis (as flattened n x n matrices) of the symmetric
    zero-diagonal matrices: the directions that move a spin-pair density."""
    cols = []
    for i in range(n):
        for j in range(i + 1, n):
            b = np.zeros((n, n))
            b[i, j] = b[j, i] = 1.0 / np.sqrt(2.0)
            cols.append(b.ravel())
    if not cols:
        return np.zeros((n * n, 0))
    return np.stack(cols, axis=1)


def doubly_centered_basis(n: int) -> np.ndarray:
    """Orthonormal basis (as flattened n x n matrices) of matrices with zero
    row and column sums."""
    if n < 2:
        return np.zeros((n * n, 0))
    # Orthonormal basis of the hyperplane orthogonal to the all-ones vector.
    u = np.linalg.qr(np.eye(n) - np.full((n, n), 1.0 / n))[0][:, : n - 1]
    cols = [np.outer(u[:, a], u[:, b]).ravel() for a in range(n - 1) for b in range(n - 1)]
    return np.stack(cols, axis=1)


def cyclic_subspace_basis(n: int) -> np.ndarray:
    """Orthonormal basis (as flattened n x n matrices) of zero-diagonal
    matrices with zero row and column sums.

    Single-cycle permutation matrices all share diagonal 0 and line sums 1,
    so these n^2 - 3n + 1 directions are exactly the ones a distribution
    over tours can distinguish; diagonal mass in a parameter matrix is
    invisible and must be excluded from the variance floor.
    """
    if n < 3:
        return np.zeros((n * n, 0))
    constraints = []
    for i in range(n):
        d = np.zeros((n, n))
        d[i, i] = 1.0
        constraints.append(d.ravel())
        r = np.zeros((n, n))
        r[i, :] = 1.0
        constraints.append(r.ravel())
        c = np.zeros((n, n))
        c[:, i] = 1.0
        constraints.append(c.ravel())
    _, svals, vt = np.linalg.svd(np.stack(constraints))
    rank = int(np.sum(svals > 1e-9 * svals[0]))
    return vt[rank:].T


def cyclic_variance(W: np.ndarray) -> float:
    """Variance of W . P over the (n-1)! single-cycle permutation matrices,
    in closed form.

    Only the off-diagonal part V of W matters (every cycle matrix has a zero
    diagonal).  Writing T1 = sum V_ij^2, X = sum V_ij V_ji, S = sum V_ij and
    r, c for the row/column sums of V, the pair expectations over a uniform
    cycle are 1/(n-1) for a repeated arc, zero for overlapping or reversed
    arcs, and 1/((n-1)(n-2)) for any two arcs that can coexist on a cycle,
    which gives

        E[W.P]    = S / (n-1)
        E[(W.P)^2] = T1/(n-1) + (S^2 + T1 - X - |r|^2 - |c|^2)/((n-1)(n-2)).
    """
    W = np.asarray(W, dtype=float)
    n = W.shape[0]
    if n < 3:
        raise ValueError("cyclic tours need n >= 3")
    V = W - np.diag(np.diag(W))
    t1 = float(np.sum(V * V))
    x = float(np.sum(V * V.T))
    s = float(V.sum())
    r2 = float(np.sum(V.sum(axis=1) ** 2))
    c2 = float(np.sum(V.sum(axis=0) ** 2))
    second = t1 / (n - 1) + (s * s + t1 - x - r2 - c2) / ((n - 1) * (n - 2))
    return second - (s / (n - 1)) ** 2


@dataclass(frozen=True)
class ProblemEncoding:
    """A fully enumerated problem in bilinear-cost form.

    cost of solution i  =  z @ M @ features[i]  =  cost_values[i]
    native objective    =  recoverable via native_value(); e.g. a Max-Cut
                           solution's cut equals -cost/4.
    """

    kind: str
    labels: list
    features: np.ndarray          # (m, n_x)
    z: np.ndarray                 # (n_z,)
    M: np.ndarray                 # (n_z, n_x)
    feature_bound: float          # max_i ||features[i]||_2, exact
    instance_bound: float         # ||z||_2
    cost_matrix_bound: float      # ||M||_F
    variance_floor: float         # min eigenvalue of the uniform feature
    #                               covariance restricted to subspace_basis
    subspace_name: str
    subspace_basis: np.ndarray | None
    nonneg_cone: bool = False
    cost_offset: float = 0.0
    cost_values: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.cost_values is None:
            object.__setattr__(self, "cost_values",
                               self.features @ (self.z @ self.M))

    @property
    def n_solutions(self) -> int:
        return self.features.shape[0]

    @property
    def n_x(self) -> int:
        return self.features.shape[1]

    @property
    def n_z(self) -> int:
        return self.z.shape[0]

    def cost_range(self) -> float:
        return float(self.cost_values.max() - self.cost_values.min())


def _variance_floor(features: np.ndarray, basis: np.ndarray | None) -> float:
    if basis is None or basis.shape[1] == 0:
        return 0.0
    centered = features - features.mean(axis=0)
    proj = centered @ basis
    cov = proj.T @ proj / features.shape[0]
    return float(np.linalg.eigvalsh(cov)[0])


def _pair_features(signs: np.ndarray) -> np.ndarray:
    m, n = signs.shape
    return np.einsum("mi,mj->mij", signs, signs).reshape(m, n * n)


def _encode_cut(g: Graph, sign: float, kind: str, cone: bool) -> ProblemEncoding:
    signs = sign_vectors(g.n)
    features = _pair_features(signs)
    lap = g.laplacian()
    z = (sign * lap).ravel()
    mat = np.eye(g.n * g.n)
    basis = symmetric_offdiag_basis(g.n)
    return ProblemEncoding(
        kind=kind,
        labels=[signs[i] for i in range(signs.shape[0])],
        features=features,
        z=z,
        M=mat,
        feature_bound=float(g.n),
        instance_bound=float(np.linalg.norm(lap)),
        cost_matrix_bound=float(np.linalg.norm(mat)),
        variance_floor=_variance_floor(features, basis),
        subspace_name="symmetric-zero-diagonal",
        subspace_basis=basis,
        nonneg_cone=cone,
    )


def encode_maxcut(g: Graph) -> ProblemEncoding:
    """Spin-pair features (s s^T); cost -s^T L s = -4 cut, so minimization
    maximizes the cut."""
    return _encode_cut(g, -1.0, "maxcut", cone=False)


def encode_mincut(g: Graph) -> ProblemEncoding:
    """Same features as Max-Cut with the sign flipped: cost s^T L s = 4 cut.
    The natural parameter space is the nonnegative (ferromagnetic) cone."""
    return _encode_cut(g, +1.0, "mincut", cone=True)


def encode_max_k_csp(csp: CSPInstance) -> ProblemEncoding:
    """Degree-k tensor features of the constant-augmented assignment (1, s).

    Each predicate is expanded in the parity basis and its coefficients are
    placed (negated) at the canonical index of their variable subset, so the
    bilinear cost equals minus the number of satisfied predicates, exactly.
    """
    n, k = csp.n, csp.k
    dim = (n + 1) ** k
    _check_cap(dim, f"degree-{k} feature space for n={n}")
    signs = sign_vectors(n)
    m = signs.shape[0]
    aug = np.hstack([np.ones((m, 1)), signs])
    features = aug
    for _ in range(k - 1):
        features = np.einsum("ma,mb->mab", features, aug).reshape(m, -1)
    z = np.zeros(dim)
    for scope, table in csp.predicates:
        for sub, coeff in fourier_coefficients(scope, table).items():
            z[subset_feature_index(sub, n, k)] -= coeff
    mat = np.eye(dim)
    basis_cols = [np.eye(dim)[:, subset_feature_index(sub, n, k)]
                  for sub in subsets_up_to(n, k) if sub]
    basis = np.stack(basis_cols, axis=1) if basis_cols else np.zeros((dim, 0))
    return ProblemEncoding(
        kind="csp",
        labels=[signs[i] for i in range(m)],
        features=features,
        z=z,
        M=mat,
        feature_bound=float((n + 1) ** (k / 2)),
        instance_bound=float(np.linalg.norm(z)),
        cost_matrix_bound=float(np.linalg.norm(mat)),
        variance_floor=_variance_floor(features, basis),
        subspace_name="canonical-nonconstant-monomials",
        subspace_basis=basis,
    )


def _encode_assignment(ap: AssignmentProblem, labels: list, kind: str,
                       sign: float) -> ProblemEncoding:
    n = ap.n
    features = np.stack([permutation_matrix(sig).ravel() for sig in labels])
    centered, removed = double_center(ap.costs)
    z = (sign * centered).ravel()
    mat = np.eye(n * n)
    if kind == "tsp":
        basis = cyclic_subspace_basis(n)
        subspace_name = "zero-diagonal-zero-line-sums"
    else:
        basis = doubly_centered_basis(n)
        subspace_name = "zero-row-and-column-sums"
    return ProblemEncoding(
        kind=kind,
        labels=list(labels),
        features=features,
        z=z,
        M=mat,
        feature_bound=float(np.sqrt(n)),
        instance_bound=float(np.linalg.norm(z)),
        cost_matrix_bound=float(np.linalg.norm(mat)),
        variance_floor=_variance_floor(features, basis),
        subspace_name=subspace_name,
        subspace_basis=basis,
        cost_offset=sign * removed,
    )


def encode_mwbm(ap: AssignmentProblem) -> ProblemEncoding:
    """Maximum-weight bipartite matching over all n! permutation matrices.

    The weight matrix is doubly centered (this shifts every matching by the
    same constant, recorded in cost_offset) and negated, so minimizing the
    bilinear cost maximizes the matching weight:
    matching weight = -(cost + cost_offset).
    """
    return _encode_assignment(ap, permutation_labels(ap.n), "mwbm", sign=-1.0)


def encode_tsp(ap: AssignmentProblem) -> ProblemEncoding:
    """Traveling salesman over the (n-1)! single-cycle permutation matrices.

    tour length = cost + cost_offset.
    """
    return _encode_assignment(ap, cyclic_permutation_labels(ap.n), "tsp", sign=+1.0)


def native_value(e: ProblemEncoding, cost: float) -> float:
    """Translate an encoding-space cost back to the problem's natural scale."""
    if e.kind == "maxcut":
        return -cost / 4.0
    if e.kind == "mincut":
        return cost / 4.0
    if e.kind == "csp":
        return -cost
    if e.kind == "mwbm":
        return -(cost + e.cost_offset)
    if e.kind == "tsp":
        return cost + e.cost_offset
    raise ValueError(f"unknown encoding kind {e.kind!r}")


def native_name(e: ProblemEncoding) -> str:
    return {"maxcut": "cut", "mincut": "cut", "csp": "satisfied",
            "mwbm": "matching weight", "tsp": "tour length"}[e.kind]


def brute_force_optimum(e: ProblemEncoding, atol: float = 1e-9) -> tuple[float, np.ndarray]:
    """Minimum bilinear cost over the enumeration and every tied argmin index."""
    costs = e.cost_values
    best = float(costs.min())
    tol = atol * max(1.0, abs(best))
    return best, np.flatnonzero(costs <= best + tol)


@dataclass
class EncodingReport:
    ok: bool
    alpha: float
    feature_bound_ok: bool
    instance_bound_ok: bool
    cost_bound_ok: bool
    messages: list[str]

    def to_dict(self) -> dict:
        return {"ok": self.ok, "alpha": self.alpha,
                "feature_bound_ok": self.feature_bound_ok,
                "instance_bound_ok": self.instance_bound_ok,
                "cost_bound_ok": self.cost_bound_ok,
                "messages": list(self.messages)}


def validate_encoding(e: ProblemEncoding) -> EncodingReport:
    """Recompute the stored norm bounds and the uniform-covariance floor.

    Violations are reported in the result, never raised; a zero variance
    floor (degenerate solution space) is flagged as a message only.
    """
    tol = 1e-9
    messages: list[str] = []
    norms = np.linalg.norm(e.features, axis=1)
    fb_ok = bool(norms.max() <= e.feature_bound + tol)
    if not fb_ok:
        messages.append(f"feature norm {norms.max():.6g} exceeds bound {e.feature_bound:.6g}")
    ib_ok = bool(np.linalg.norm(e.z) <= e.instance_bound + tol)
    if not ib_ok:
        messages.append("instance feature norm exceeds bound")
    cb_ok = bool(np.linalg.norm(e.M) <= e.cost_matrix_bound + tol)
    if not cb_ok:
        messages.append("cost matrix Frobenius norm exceeds bound")
    alpha = _variance_floor(e.features, e.subspace_basis)
    if abs(alpha - e.variance_floor) > 1e-8 * max(1.0, abs(alpha)):
        messages.append(f"stored variance floor {e.variance_floor:.6g} != recomputed {alpha:.6g}")
    if alpha <= 1e-12:
        messages.append("variance floor is not positive (degenerate solution space)")
    ok = fb_ok and ib_ok and cb_ok
    return EncodingReport(ok=ok, alpha=alpha, feature_bound_ok=fb_ok,
                          instance_bound_ok=ib_ok, cost_bound_ok=cb_ok,
                          messages=messages)
