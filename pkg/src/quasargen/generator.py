"""Exponential-family solution generators and their fast/slow mixtures.

A parameter matrix W maps instance features z to a score z @ W @ x per
solution; the generator is the softmax of those scores over the enumerated
solution space.  The mixture blends that density (fast component) with the
same density at temperature-scaled parameters rho * W (slow component), which
stays provably close to uniform when rho is small.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .encodings import ProblemEncoding

# Scale constant for the slow-component temperature rho = C0 * alpha / (B D^3):
# at that scale the slow component keeps a constant fraction of the uniform
# variance floor.  Exposed so the scan tests can exercise the regime directly.
ALMOST_UNIFORM_C0 = 1.0


@dataclass(frozen=True)
class MixtureParams:
    """Parameters of the two-component generator.

    beta_star is the slow-component weight in [0, 1] (0 recovers the plain
    generator); rho_star in (0, 1] is the slow-component temperature scale.
    """

    W: np.ndarray
    beta_star: float = 0.0
    rho_star: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "W", np.asarray(self.W, dtype=float))
        if not 0.0 <= self.beta_star <= 1.0:
            raise ValueError(f"beta_star must lie in [0, 1], got {self.beta_star}")
        if not 0.0 < self.rho_star <= 1.0:
            raise ValueError(f"rho_star must lie in (0, 1], got {self.rho_star}")


@dataclass
class Distribution:
    """A distribution over enumerated solution labels, kept in log space."""

    log_probs: np.ndarray

    def __post_init__(self):
        self.log_probs = np.asarray(self.log_probs, dtype=float)
        if not np.all(np.isfinite(self.log_probs)):
            raise ValueError("log probabilities must be finite")
        self._probs = None

    @property
    def probs(self) -> np.ndarray:
        if self._probs is None:
            self._probs = np.exp(self.log_probs)
        return self._probs

    def __len__(self) -> int:
        return self.log_probs.shape[0]


def log_softmax(scores: np.ndarray) -> np.ndarray:
    scores = np.asarray(scores, dtype=float)
    return scores - logsumexp(scores)


def _scores(e: ProblemEncoding, W: np.ndarray) -> np.ndarray:
    return e.features @ (e.z @ np.asarray(W, dtype=float))


def gibbs_density(e: ProblemEncoding, W: np.ndarray) -> Distribution:
    """Softmax of z @ W @ x over the enumerated solutions."""
    return Distribution(log_softmax(_scores(e, W)))


def mixture_log_probs(scores: np.ndarray, beta: float, rho: float) -> np.ndarray:
    """Log density of (1-beta) softmax(scores) + beta softmax(rho * scores)."""
    if beta <= 0.0:
        return log_softmax(scores)
    if beta >= 1.0:
        return log_softmax(rho * scores)
    return np.logaddexp(np.log1p(-beta) + log_softmax(scores),
                        np.log(beta) + log_softmax(rho * scores))


def mixture_density(e: ProblemEncoding, mp: MixtureParams) -> Distribution:
    return Distribution(mixture_log_probs(_scores(e, mp.W), mp.beta_star, mp.rho_star))


def sample(d: Distribution, seed: int, count: int = 1) -> np.ndarray:
    """Draw label indices i.i.d. from d, deterministically in the seed."""
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(d.probs)
    cdf[-1] = 1.0
    return np.searchsorted(cdf, rng.random(count), side="right")


def neg_entropy(d: Distribution) -> float:
    """E_d[log d]; zero for a point mass, -log(m) for uniform over m labels."""
    return float(d.probs @ d.log_probs)


def regularizer(e: ProblemEncoding, mp: MixtureParams, zs=None, weights=None) -> float:
    """Mixture negentropy (1 - beta) H(W) + (beta / rho) H(rho W), where H is
    the negentropy of the plain generator, averaged over instance features.

    Defaults to the encoding's own z; pass explicit zs/weights to average over
    an instance distribution sharing this solution space.
    """
    if zs is None:
        zs = [e.z]
        weights = [1.0]
    beta, rho = mp.beta_star, mp.rho_star
    total = 0.0
    for z, wt in zip(zs, weights):
        scores = e.features @ (z @ mp.W)
        lp_fast = log_softmax(scores)
        h_fast = float(np.exp(lp_fast) @ lp_fast)
        lp_slow = log_softmax(rho * scores)
        h_slow = float(np.exp(lp_slow) @ lp_slow)
        total += wt * ((1.0 - beta) * h_fast + (beta / rho) * h_slow)
    return total


def linear_variance(d: Distribution, e: ProblemEncoding, v: np.ndarray) -> float:
    """Var_{x ~ d}[v . x] over the encoding's solution features."""
    vals = e.features @ np.asarray(v, dtype=float)
    p = d.probs
    mean = p @ vals
    return float(p @ (vals - mean) ** 2)


def almost_uniform_scan(e: ProblemEncoding, W: np.ndarray, c: np.ndarray,
                        rho_grid) -> list[tuple[float, float]]:
    """Var_{x ~ softmax at rho W}[c . x] for each rho; converges to the uniform
    variance as rho -> 0."""
    out = []
    for rho in rho_grid:
        d = Distribution(log_softmax(rho * _scores(e, W)))
        out.append((float(rho), linear_variance(d, e, c)))
    return out


def total_variation(d1: Distribution, d2: Distribution) -> float:
    return 0.5 * float(np.abs(d1.probs - d2.probs).sum())


def uniform_density(m: int) -> Distribution:
    return Distribution(np.full(m, -np.log(m)))


def distribution_to_csv(d: Distribution, e: ProblemEncoding, path) -> None:
    """Dump (index, label, log_prob, prob) rows for inspection."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "label", "log_prob", "prob"])
        for i in range(len(d)):
            label = e.labels[i]
            if isinstance(label, np.ndarray):
                label = "".join("+" if x > 0 else "-" for x in label)
            else:
                label = "-".join(str(int(x)) for x in label)
            writer.writerow([i, label, f"{d.log_probs[i]:.12g}", f"{d.probs[i]:.12g}"])
