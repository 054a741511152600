"""Self-contained verification battery behind the ``verify`` CLI command.

Each check recomputes a closed-form identity or bound from scratch on small
random configurations and compares against the library's primary code path.
The ``perturb_correlation`` knob deliberately mis-scales one side of the
correlation identity so operators can confirm the battery actually fails
when an identity breaks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import encodings as enc
from .generator import ALMOST_UNIFORM_C0, MixtureParams, almost_uniform_scan, \
    gibbs_density, mixture_density, total_variation
from .objective import PriorSpec, exact_grad, exact_reg_loss, exact_loss, \
    finite_difference_grad, grad_norm_bound_check
from .problems import erdos_renyi, random_assignment, random_csp


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def __post_init__(self):
        # comparisons against numpy scalars yield np.bool_, which JSON rejects
        self.passed = bool(self.passed)


def _subset_values(signs: np.ndarray, subsets) -> np.ndarray:
    """Parity values chi_S(s) for each sign vector and subset, by direct
    products (independent of the tensor feature machinery)."""
    cols = []
    for sub in subsets:
        col = np.ones(signs.shape[0])
        for i in sub:
            col = col * signs[:, i]
        cols.append(col)
    return np.stack(cols, axis=1)


def check_sign_tensor_variance(level: str) -> CheckResult:
    """Uniform variance of a degree-k score equals the squared coefficient
    mass on nonempty subsets."""
    sizes = [(3, 2), (5, 2), (4, 3)] if level == "default" else \
        [(3, 2), (5, 2), (4, 3), (8, 3), (6, 2)]
    rng = np.random.default_rng(7)
    worst = 0.0
    for n, k in sizes:
        signs = enc.sign_vectors(n)
        subsets = enc.subsets_up_to(n, k)
        coeffs = rng.standard_normal(len(subsets))
        vals = _subset_values(signs, subsets) @ coeffs
        var = float(np.var(vals))
        expected = float(sum(c * c for sub, c in zip(subsets, coeffs) if sub))
        worst = max(worst, abs(var - expected))
    return CheckResult("sign-tensor-variance", worst < 1e-10,
                       f"max deviation {worst:.3e} over {len(sizes)} configs")


def check_matching_variance(level: str) -> CheckResult:
    """Variance of W . P over all permutation matrices P equals
    ||W||_F^2 / (n - 1) for doubly centered W."""
    ns = [3, 4, 5] if level == "default" else [3, 4, 5, 6]
    rng = np.random.default_rng(11)
    worst = 0.0
    for n in ns:
        W, _ = enc.double_center(rng.standard_normal((n, n)))
        vals = [float(np.sum(W * enc.permutation_matrix(sig)))
                for sig in enc.permutation_labels(n)]
        worst = max(worst, abs(np.var(vals) - np.sum(W * W) / (n - 1)))
    return CheckResult("matching-variance", worst < 1e-10,
                       f"max deviation {worst:.3e} for n in {ns}")


def check_tour_stats(level: str) -> CheckResult:
    """First and second moments of single-cycle permutation matrices: each
    off-diagonal entry has mean 1/(n-1) (diagonal zero), pairs of coexisting
    arcs have expectation 1/((n-1)(n-2)), and the variance of W . P matches
    the cyclic_variance closed form, all by direct enumeration."""
    mean_ns = [4, 5, 6] if level == "default" else [4, 5, 6, 7]
    var_ns = [3, 4, 5, 6]
    rng = np.random.default_rng(13)
    worst = 0.0
    for n in mean_ns:
        mats = np.stack([enc.permutation_matrix(sig)
                         for sig in enc.cyclic_permutation_labels(n)])
        mean = mats.mean(axis=0)
        off = ~np.eye(n, dtype=bool)
        worst = max(worst, float(np.abs(mean[off] - 1.0 / (n - 1)).max()),
                    float(np.abs(np.diag(mean)).max()))
        if n >= 4:
            pair = 1.0 / ((n - 1) * (n - 2))
            # two disjoint arcs, a two-arc path, and a reversed arc (impossible)
            worst = max(worst,
                        abs(float(np.mean(mats[:, 0, 1] * mats[:, 2, 3])) - pair),
                        abs(float(np.mean(mats[:, 0, 1] * mats[:, 1, 2])) - pair),
                        float(np.mean(mats[:, 0, 1] * mats[:, 1, 0])))
    for n in var_ns:
        mats = np.stack([enc.permutation_matrix(sig)
                         for sig in enc.cyclic_permutation_labels(n)])
        for centered in (False, True):
            W = rng.standard_normal((n, n))
            if centered:
                W, _ = enc.double_center(W)
            vals = np.tensordot(mats, W, axes=([1, 2], [0, 1]))
            worst = max(worst, abs(float(np.var(vals)) - enc.cyclic_variance(W)))
    return CheckResult("tour-stats", worst < 1e-10,
                       f"max deviation {worst:.3e}")


def _battery_encodings(seed: int = 5):
    yield enc.encode_maxcut(erdos_renyi(4, 0.6, seed))
    yield enc.encode_mincut(erdos_renyi(4, 0.6, seed + 1))
    yield enc.encode_max_k_csp(random_csp(4, 5, 2, seed + 2))
    yield enc.encode_mwbm(random_assignment(4, seed + 3))
    yield enc.encode_tsp(random_assignment(5, seed + 4, problem="tsp"))


def check_correlation_identity(level: str, perturb: float = 0.0) -> CheckResult:
    """gradient . (c + lam w) must equal the weighted branch variances of
    (c + lam w) . x; checked against the assembled gradient matrix."""
    rng = np.random.default_rng(17)
    reps = 3 if level == "default" else 8
    worst = 0.0
    for e in _battery_encodings():
        prior = PriorSpec.from_encoding(e)
        for _ in range(reps):
            scale = 0.5 / max(np.linalg.norm(e.z), 1.0)
            mp = MixtureParams(scale * rng.standard_normal(e.M.shape),
                               beta_star=0.2, rho_star=0.3)
            lam = float(rng.uniform(0.05, 1.0))
            rep = exact_grad(e, prior, mp, lam)
            rhs = rep.correlation_rhs * (1.0 + perturb)
            rel = abs(rep.correlation_lhs - rhs) / max(1.0, abs(rhs))
            worst = max(worst, rel)
    return CheckResult("correlation-identity", worst < 1e-8,
                       f"max relative deviation {worst:.3e}")


def check_gradient_fd(level: str) -> CheckResult:
    """Exact gradients against central finite differences."""
    rng = np.random.default_rng(19)
    reps = 1 if level == "default" else 3
    worst = 0.0
    for e in _battery_encodings():
        prior = PriorSpec.from_encoding(e)
        for _ in range(reps):
            scale = 0.3 / max(np.linalg.norm(e.z), 1.0)
            mp = MixtureParams(scale * rng.standard_normal(e.M.shape),
                               beta_star=0.25, rho_star=0.4)
            lam = 0.3
            g = exact_grad(e, prior, mp, lam).gradient
            fd = finite_difference_grad(e, prior, mp, lam)
            rel = np.linalg.norm(g - fd) / max(np.linalg.norm(fd), 1e-9)
            worst = max(worst, float(rel))
    return CheckResult("gradient-vs-fd", worst < 1e-6,
                       f"max relative error {worst:.3e}")


def check_gradient_norm_bound(level: str) -> CheckResult:
    """Solution-space gradients never exceed 2 D^2 ||c + lam w|| times the
    mixture weight factor."""
    rng = np.random.default_rng(23)
    reps = 10 if level == "default" else 40
    margin = 0.0
    try:
        for e in _battery_encodings():
            for _ in range(reps):
                mp = MixtureParams(rng.standard_normal(e.M.shape)
                                   / max(np.linalg.norm(e.z), 1.0),
                                   beta_star=float(rng.uniform(0, 1)),
                                   rho_star=float(rng.uniform(0.05, 1.0)))
                lhs, rhs = grad_norm_bound_check(e, e.z, mp, float(rng.uniform(0, 2)))
                margin = max(margin, lhs / rhs if rhs > 0 else 0.0)
    except AssertionError as err:
        return CheckResult("gradient-norm-bound", False, str(err))
    return CheckResult("gradient-norm-bound", True,
                       f"max observed/bound ratio {margin:.3f}")


def check_mixture_tv(level: str) -> CheckResult:
    """The mixture moves at most beta away from the fast component in total
    variation, with equality scaled by the fast/slow gap."""
    rng = np.random.default_rng(29)
    worst = -1.0
    for e in _battery_encodings():
        for beta in (0.1, 0.5, 0.9):
            mp = MixtureParams(rng.standard_normal(e.M.shape)
                               / max(np.linalg.norm(e.z), 1.0),
                               beta_star=beta, rho_star=0.1)
            tv = total_variation(mixture_density(e, mp), gibbs_density(e, mp.W))
            if tv > beta + 1e-12:
                return CheckResult("mixture-tv-bound", False,
                                   f"TV {tv} exceeds beta {beta}")
            worst = max(worst, tv - beta)
    return CheckResult("mixture-tv-bound", True,
                       f"max TV-beta gap {worst:.3e} (never positive)")


def check_slow_variance_floor(level: str) -> CheckResult:
    """At the prescribed slow temperature rho = C0 alpha / (B D^3), the slow
    component keeps at least half the uniform variance floor for cost
    directions in the parameter subspace."""
    rng = np.random.default_rng(31)
    ok = True
    details = []
    for e in [enc.encode_maxcut(erdos_renyi(4, 0.6, 5)),
              enc.encode_maxcut(erdos_renyi(5, 0.5, 8)),
              enc.encode_mwbm(random_assignment(4, 9)),
              enc.encode_tsp(random_assignment(5, 10, problem="tsp"))]:
        alpha = e.variance_floor
        ball = 4.0
        rho_star = ALMOST_UNIFORM_C0 * alpha / (ball * e.feature_bound ** 3)
        c = e.subspace_basis @ rng.standard_normal(e.subspace_basis.shape[1])
        W = rng.standard_normal(e.M.shape)
        W *= ball / np.linalg.norm(e.z @ W)
        (_, var), = almost_uniform_scan(e, W, c, [rho_star])
        floor = alpha * float(c @ c) / 2.0
        ok = ok and var >= floor
        details.append(f"var {var:.3g} vs floor {floor:.3g}")
    return CheckResult("slow-variance-floor", ok, "; ".join(details))


def check_completeness(level: str) -> CheckResult:
    """At lam with 1/lam > log(m/delta)/eps, the generator at -M/lam scores
    within eps of the enumerated optimum (small slow component)."""
    from .objective import completeness_lambda

    results = []
    ok = True
    for e in _battery_encodings():
        rng_range = e.cost_range()
        if rng_range <= 0:
            continue
        eps = 0.1 * rng_range
        lam = completeness_lambda(e, eps, delta=0.1)
        mp = MixtureParams(-e.M / lam, beta_star=0.02, rho_star=0.03)
        val = exact_loss(e, None, mp)
        opt = float(e.cost_values.min())
        ok = ok and val <= opt + eps
        results.append(f"{e.kind}: gap {(val - opt) / rng_range:.4f} of range")
    return CheckResult("completeness-at-reference", ok, "; ".join(results))


def check_star_alignment(level: str) -> CheckResult:
    """gradient(W) . (W + M/lam) stays nonnegative on random ball samples
    (the inequality behind average-iterate convergence)."""
    from .optimizer import quasar_certificate

    e = enc.encode_maxcut(erdos_renyi(4, 0.6, 5))
    lam = 0.5
    cert = quasar_certificate(e, None, lam, MixtureParams(np.zeros(e.M.shape),
                                                          0.2, 0.03),
                              n_samples=30 if level == "default" else 100, seed=3)
    ok = cert.min_numerator >= -1e-10 and cert.gamma_hat > 0
    return CheckResult("star-alignment", ok,
                       f"gamma_hat {cert.gamma_hat:.4f}, "
                       f"min numerator {cert.min_numerator:.3e}")


def check_normalization(level: str) -> CheckResult:
    rng = np.random.default_rng(37)
    worst = 0.0
    for e in _battery_encodings():
        for beta in (0.0, 0.3, 1.0):
            mp = MixtureParams(rng.standard_normal(e.M.shape), beta_star=beta,
                               rho_star=0.2)
            worst = max(worst, abs(float(mixture_density(e, mp).probs.sum()) - 1.0))
    return CheckResult("normalization", worst < 1e-12,
                       f"max |sum - 1| = {worst:.3e}")


def run_battery(level: str = "default", perturb_correlation: float = 0.0
                ) -> list[CheckResult]:
    if level not in ("default", "deep"):
        raise ValueError(f"unknown level {level!r}")
    return [
        check_normalization(level),
        check_sign_tensor_variance(level),
        check_matching_variance(level),
        check_tour_stats(level),
        check_correlation_identity(level, perturb_correlation),
        check_gradient_fd(level),
        check_gradient_norm_bound(level),
        check_mixture_tv(level),
        check_slow_variance_floor(level),
        check_completeness(level),
        check_star_alignment(level),
    ]
