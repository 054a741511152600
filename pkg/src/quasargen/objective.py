"""Exact and sampled losses/gradients of mixture generators over enumerations.

All quantities reduce, per instance vector z, to computations on the induced
solution-space parameter w = z @ W and cost vector c = z @ M: the generator's
scores are features @ w and the scalar cost of a solution is features @ c.
The gradient of the entropy-regularized loss in w is a covariance

    g(w) = (1-b) Cov_fast[(c + l w) . x, x] + b r Cov_slow[(c + l w) . x, x]

with b the slow-component weight and r its temperature; dotting g with
(c + l w) yields a nonnegative combination of score variances, which is the
correlation identity reported alongside every exact gradient.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .encodings import ProblemEncoding
from .generator import MixtureParams, log_softmax

# Central finite-difference step used by the verification battery and tests.
FD_STEP = 1e-5


@dataclass(frozen=True)
class PriorSpec:
    """A finite distribution over instance feature vectors sharing one
    solution space."""

    zs: np.ndarray        # (n_instances, n_z)
    weights: np.ndarray   # nonnegative, sums to 1

    def __post_init__(self):
        zs = np.atleast_2d(np.asarray(self.zs, dtype=float))
        weights = np.asarray(self.weights, dtype=float)
        if weights.ndim != 1 or weights.shape[0] != zs.shape[0]:
            raise ValueError("need one weight per instance")
        if np.any(weights < 0):
            raise ValueError("weights must be nonnegative")
        total = weights.sum()
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {total}")
        object.__setattr__(self, "zs", zs)
        object.__setattr__(self, "weights", weights / total)

    @classmethod
    def single(cls, z: np.ndarray) -> "PriorSpec":
        return cls(zs=np.atleast_2d(z), weights=np.array([1.0]))

    @classmethod
    def from_encoding(cls, e: ProblemEncoding) -> "PriorSpec":
        return cls.single(e.z)

    @classmethod
    def uniform(cls, zs) -> "PriorSpec":
        zs = np.atleast_2d(np.asarray(zs, dtype=float))
        k = zs.shape[0]
        return cls(zs=zs, weights=np.full(k, 1.0 / k))


@dataclass
class GradReport:
    """Exact gradient plus the identity diagnostics computed with it.

    correlation_lhs is gradient . (c + l w) assembled from the gradient
    vector itself; correlation_rhs is the variance combination it must equal.
    variance_terms splits the right-hand side into its fast and slow parts.
    """

    gradient: np.ndarray
    correlation_lhs: float
    correlation_rhs: float
    variance_terms: tuple[float, float]

    def to_json(self) -> str:
        return json.dumps({
            "gradient": self.gradient.tolist(),
            "correlation_lhs": self.correlation_lhs,
            "correlation_rhs": self.correlation_rhs,
            "variance_terms": list(self.variance_terms),
        })


def _branch(features: np.ndarray, scores: np.ndarray, v: np.ndarray):
    """Moments of one softmax branch: probabilities, negentropy, E[v], Var[v],
    and the covariance vector Cov[v . x, x]."""
    lp = log_softmax(scores)
    p = np.exp(lp)
    h = float(p @ lp)
    mean_v = float(p @ v)
    centered = v - mean_v
    var_v = float(p @ centered ** 2)
    g = features.T @ (p * centered)
    return p, h, mean_v, var_v, g


def vec_eval(features: np.ndarray, cost_values: np.ndarray, w: np.ndarray,
             lam: float, beta: float, rho: float, need_grad: bool = True):
    """Loss, regularizer, and gradient of the mixture objective in the
    solution-space parameter w.  Returns a dict so callers can pick pieces."""
    scores = features @ w
    v = cost_values + lam * scores if lam != 0.0 else cost_values
    lp_f = log_softmax(scores)
    p_f = np.exp(lp_f)
    h_f = float(p_f @ lp_f)
    loss_f = float(p_f @ cost_values)
    out = {}
    if beta > 0.0:
        lp_s = log_softmax(rho * scores)
        p_s = np.exp(lp_s)
        h_s = float(p_s @ lp_s)
        loss_s = float(p_s @ cost_values)
        out["loss"] = (1.0 - beta) * loss_f + beta * loss_s
        out["reg"] = (1.0 - beta) * h_f + (beta / rho) * h_s
    else:
        out["loss"] = loss_f
        out["reg"] = h_f
    if not need_grad:
        return out
    mean_f = float(p_f @ v)
    cf = v - mean_f
    var_f = float(p_f @ cf ** 2)
    g = features.T @ ((1.0 - beta) * (p_f * cf))
    if beta > 0.0:
        mean_s = float(p_s @ v)
        cs = v - mean_s
        var_s = float(p_s @ cs ** 2)
        g = g + features.T @ (beta * rho * (p_s * cs))
        out["var_fast"] = (1.0 - beta) * var_f
        out["var_slow"] = beta * rho * var_s
    else:
        out["var_fast"] = var_f
        out["var_slow"] = 0.0
    out["grad"] = g
    return out


def _instance_vectors(e: ProblemEncoding, z: np.ndarray):
    w_dot = lambda W: z @ W
    c = z @ e.M
    costs = e.features @ c
    return w_dot, c, costs


def exact_loss(e: ProblemEncoding, prior: PriorSpec | None, mp: MixtureParams) -> float:
    """Expected cost under the mixture generator, averaged over the prior."""
    if prior is None:
        prior = PriorSpec.from_encoding(e)
    total = 0.0
    for z, wt in zip(prior.zs, prior.weights):
        _, _, costs = _instance_vectors(e, z)
        ev = vec_eval(e.features, costs, z @ mp.W, 0.0, mp.beta_star, mp.rho_star,
                      need_grad=False)
        total += wt * ev["loss"]
    return total


def exact_reg_loss(e: ProblemEncoding, prior: PriorSpec | None, mp: MixtureParams,
                   lam: float) -> float:
    """Expected cost plus lam times the mixture negentropy regularizer."""
    if prior is None:
        prior = PriorSpec.from_encoding(e)
    total = 0.0
    for z, wt in zip(prior.zs, prior.weights):
        _, _, costs = _instance_vectors(e, z)
        ev = vec_eval(e.features, costs, z @ mp.W, lam, mp.beta_star, mp.rho_star,
                      need_grad=False)
        total += wt * (ev["loss"] + lam * ev["reg"])
    return total


def exact_grad(e: ProblemEncoding, prior: PriorSpec | None, mp: MixtureParams,
               lam: float) -> GradReport:
    """Exact gradient of the regularized loss in W, with identity diagnostics."""
    if prior is None:
        prior = PriorSpec.from_encoding(e)
    grad = np.zeros(mp.W.shape)
    lhs = 0.0
    rhs_fast = 0.0
    rhs_slow = 0.0
    for z, wt in zip(prior.zs, prior.weights):
        w = z @ mp.W
        c = z @ e.M
        costs = e.features @ c
        ev = vec_eval(e.features, costs, w, lam, mp.beta_star, mp.rho_star)
        g = ev["grad"]
        grad += wt * np.outer(z, g)
        lhs += wt * float(g @ (c + lam * w))
        rhs_fast += wt * ev["var_fast"]
        rhs_slow += wt * ev["var_slow"]
    return GradReport(gradient=grad, correlation_lhs=lhs,
                      correlation_rhs=rhs_fast + rhs_slow,
                      variance_terms=(rhs_fast, rhs_slow))


def regularizer_grad(e: ProblemEncoding, mp: MixtureParams,
                     prior: PriorSpec | None = None) -> np.ndarray:
    """Exact gradient in W of the mixture negentropy regularizer alone."""
    if prior is None:
        prior = PriorSpec.from_encoding(e)
    beta, rho = mp.beta_star, mp.rho_star
    grad = np.zeros(mp.W.shape)
    for z, wt in zip(prior.zs, prior.weights):
        w = z @ mp.W
        scores = e.features @ w
        _, _, _, _, g_f = _branch(e.features, scores, scores)
        g = (1.0 - beta) * g_f
        if beta > 0.0:
            _, _, _, _, g_s = _branch(e.features, rho * scores, scores)
            g = g + beta * rho * g_s
        grad += wt * np.outer(z, g)
    return grad


def policy_grad_estimate(e: ProblemEncoding, prior: PriorSpec | None,
                         mp: MixtureParams, lam: float, batch: int,
                         seed: int) -> np.ndarray:
    """Monte Carlo score-function estimate of the cost-gradient plus the
    analytic regularizer gradient.  Unbiased for the exact gradient;
    deterministic in the seed (draws are grouped by instance)."""
    if prior is None:
        prior = PriorSpec.from_encoding(e)
    rng = np.random.default_rng(seed)
    beta, rho = mp.beta_star, mp.rho_star
    k = prior.zs.shape[0]
    z_draws = rng.choice(k, size=batch, p=prior.weights) if k > 1 else np.zeros(batch, int)
    grad = np.zeros(mp.W.shape)
    for zi in range(k):
        count = int(np.sum(z_draws == zi))
        if count == 0:
            continue
        z = prior.zs[zi]
        w = z @ mp.W
        c = z @ e.M
        costs = e.features @ c
        scores = e.features @ w
        lp_f = log_softmax(scores)
        p_f = np.exp(lp_f)
        mean_f = p_f @ e.features
        if beta > 0.0:
            lp_s = log_softmax(rho * scores)
            p_s = np.exp(lp_s)
            mean_s = p_s @ e.features
            p_mix = (1.0 - beta) * p_f + beta * p_s
        else:
            p_s = p_f
            mean_s = mean_f
            p_mix = p_f
        cdf = np.cumsum(p_mix)
        cdf[-1] = 1.0
        idx = np.searchsorted(cdf, rng.random(count), side="right")
        ratio_f = (1.0 - beta) * p_f[idx] / p_mix[idx]
        ratio_s = beta * rho * p_s[idx] / p_mix[idx] if beta > 0.0 else np.zeros(count)
        a = costs[idx] * ratio_f
        b = costs[idx] * ratio_s
        x_sel = e.features[idx]
        term = a @ x_sel - a.sum() * mean_f + b @ x_sel - b.sum() * mean_s
        grad += np.outer(z, term) / batch
    return grad + lam * regularizer_grad(e, mp, prior)


def grad_norm_bound_check(e: ProblemEncoding, z: np.ndarray, mp: MixtureParams,
                          lam: float) -> tuple[float, float]:
    """Checks the a priori gradient norm bound in the solution-space parameter:

        ||g(w)|| <= 2 D^2 ||c + lam w|| ((1 - beta) + beta rho)

    with D the solution feature norm bound.  Returns (observed, bound) and
    raises if the bound is violated beyond rounding."""
    w = z @ mp.W
    c = z @ e.M
    costs = e.features @ c
    ev = vec_eval(e.features, costs, w, lam, mp.beta_star, mp.rho_star)
    lhs = float(np.linalg.norm(ev["grad"]))
    scale = (1.0 - mp.beta_star) + mp.beta_star * mp.rho_star
    rhs = 2.0 * e.feature_bound ** 2 * float(np.linalg.norm(c + lam * w)) * scale
    if lhs > rhs * (1.0 + 1e-9):
        raise AssertionError(f"gradient norm {lhs} exceeds bound {rhs}")
    return lhs, rhs


def completeness_lambda(e: ProblemEncoding, eps: float, delta: float = 0.1) -> float:
    """Largest regularization weight at which the parameter -M/lam puts all
    but delta of the fast component's mass within eps of the optimum:
    1/lam must exceed log(m / delta) / eps."""
    if eps <= 0.0:
        return float("inf")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    return eps / (np.log(e.n_solutions / delta) * (1.0 + 1e-6))


def finite_difference_grad(e: ProblemEncoding, prior: PriorSpec | None,
                           mp: MixtureParams, lam: float,
                           step: float = FD_STEP) -> np.ndarray:
    """Central finite differences of the exact regularized loss in W."""
    if prior is None:
        prior = PriorSpec.from_encoding(e)
    grad = np.zeros(mp.W.shape)
    it = np.nditer(mp.W, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        for sign in (+1.0, -1.0):
            W = mp.W.copy()
            W[idx] += sign * step
            val = exact_reg_loss(e, prior, MixtureParams(W, mp.beta_star, mp.rho_star),
                                 lam)
            grad[idx] += sign * val / (2.0 * step)
        it.iternext()
    return grad


def smoothness_probe(e: ProblemEncoding, prior: PriorSpec | None, mp: MixtureParams,
                     lam: float, segments: int = 20, seed: int = 0,
                     radius: float = 0.5) -> tuple[float, float]:
    """Empirical Lipschitz constant of the exact gradient along random short
    segments near W, against a generous polynomial overestimate in the stored
    bounds.  Recorded for diagnostics; the overestimate is not asserted."""
    if prior is None:
        prior = PriorSpec.from_encoding(e)
    rng = np.random.default_rng(seed)
    beta, rho = mp.beta_star, mp.rho_star
    emp = 0.0
    vmax = 0.0
    for _ in range(segments):
        d = rng.standard_normal(mp.W.shape)
        d *= radius / max(np.linalg.norm(d), 1e-12)
        w1 = MixtureParams(mp.W + d, beta, rho)
        w2 = MixtureParams(mp.W - d, beta, rho)
        g1 = exact_grad(e, prior, w1, lam).gradient
        g2 = exact_grad(e, prior, w2, lam).gradient
        emp = max(emp, float(np.linalg.norm(g1 - g2) / (2 * np.linalg.norm(d))))
        for mpx in (w1, w2):
            for z in prior.zs:
                vmax = max(vmax, float(np.linalg.norm(z @ e.M + lam * (z @ mpx.W))))
    zsq = float(max(np.linalg.norm(z) ** 2 for z in prior.zs))
    d3 = e.feature_bound ** 3
    bound = zsq * (6.0 * d3 * vmax + 2.0 * lam * e.feature_bound ** 2) \
        * ((1.0 - beta) + beta * rho)
    return emp, bound
