"""Max-Cut training study: regularized mixtures against plain descent.

For a batch of random G(n, 1/2) graphs, trains a solution generator by exact
full-enumeration gradient descent in two variants per scorer family:

  vanilla      plain generator, no regularizer (beta = 0, lambda = 0);
  regularized  fast/slow mixture with a halving lambda schedule.

Families: "linear" scores s^T w s with a full n x n parameter matrix;
"relu" scores with the small ReLU network from scorer_nn.  A trial succeeds
when the generator's top-probability solution attains the true maximum cut
at some iteration.  Everything is deterministic in the master seed: the
graph of trial i comes from seed hash(master, i), inits from sibling
streams hash(master, i, k).
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .encodings import sign_vectors
from .problems import erdos_renyi
from .scorer_nn import init_mlp, mlp_grad_tables

# Step sizes fixed by a one-off grid search over {1, 0.3, 0.1, 0.03}
# (see scripts/tune_step_size.py); recorded in every run manifest.
DEFAULT_ETA_LINEAR = 0.03
DEFAULT_ETA_RELU = 0.1


@dataclass(frozen=True)
class SuiteConfig:
    n: int = 15
    edge_prob: float = 0.5
    trials: int = 100
    iterations: int = 600
    lambda0: float = 10.0
    halve_every: int = 60
    beta: float = 0.2
    rho: float = 0.03
    eta_linear: float = DEFAULT_ETA_LINEAR
    eta_relu: float = DEFAULT_ETA_RELU
    families: tuple = ("linear", "relu")
    variants: tuple = ("vanilla", "regularized")
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "families", tuple(self.families))
        object.__setattr__(self, "variants", tuple(self.variants))
        for f in self.families:
            if f not in ("linear", "relu"):
                raise ValueError(f"unknown scorer family {f!r}")
        for v in self.variants:
            if v not in ("vanilla", "regularized"):
                raise ValueError(f"unknown variant {v!r}")


@dataclass
class TrialRecord:
    trial: int
    family: str
    variant: str
    graph_seed: int
    maxcut: int
    best_cut: int
    success: bool
    first_hit: int
    cuts: np.ndarray = field(repr=False)
    losses: np.ndarray = field(repr=False)


@dataclass
class SuiteResult:
    config: SuiteConfig
    records: list
    wall_clock_s: float

    def counts(self) -> dict:
        out = {}
        for fam in self.config.families:
            for var in self.config.variants:
                out[f"{fam}/{var}"] = sum(1 for r in self.records
                                          if r.family == fam and r.variant == var
                                          and r.success)
        return out

    def summary(self) -> dict:
        return {"trials": self.config.trials, "successes": self.counts(),
                "wall_clock_s": self.wall_clock_s}


def derived_seed(*parts) -> int:
    """Stable scalar seed from a tuple of integers."""
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def schedule_lambda(lambda0: float, halve_every: int, t: int) -> float:
    return lambda0 / 2.0 ** (t // halve_every)


def _softmax(x: np.ndarray) -> np.ndarray:
    p = np.exp(x - x.max())
    p /= p.sum()
    return p


def run_linear_trial(signs: np.ndarray, cut_values: np.ndarray, cfg: SuiteConfig,
                     regularized: bool, init_seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact gradient descent on scores s^T w s from a seeded random init.

    The init is uniform +-1/(2 sqrt(n)), bracketed once so that the plain
    variant gets stuck on a mid-band fraction of graphs (see
    scripts/tune_step_size.py).  Starting from w = 0 instead would make the
    comparison vacuous: the first exact gradient step from zero is
    -2*eta*A (A the adjacency), whose scores order solutions exactly by cut
    value, so even the unregularized run would "find" the maximum cut at
    iteration 1.

    The gradient of expected cost + lambda * (mixture negentropy) in w is the
    feature covariance of (cost + lambda * score) under each branch, combined
    with weights (1 - beta) and beta * rho; slow-branch scores are just
    rho * u by linearity, so one score table serves both branches.

    Returns per-iteration (argmax cuts, mixture losses), length iterations+1.
    """
    n = signs.shape[1]
    m = signs.shape[0]
    cost = -4.0 * cut_values
    beta, rho = (cfg.beta, cfg.rho) if regularized else (0.0, 1.0)
    eta = cfg.eta_linear
    bound = 0.5 / np.sqrt(n)
    w = np.random.default_rng(init_seed).uniform(-bound, bound, size=(n, n))
    cuts = np.zeros(cfg.iterations + 1)
    losses = np.zeros(cfg.iterations + 1)
    for t in range(cfg.iterations + 1):
        lam = schedule_lambda(cfg.lambda0, cfg.halve_every, t) if regularized else 0.0
        u = np.einsum("mi,mi->m", signs @ w, signs)
        p_f = _softmax(u)
        if beta > 0.0:
            p_s = _softmax(rho * u)
            p_mix = (1.0 - beta) * p_f + beta * p_s
        else:
            p_mix = p_f
        top = int(np.argmax(p_mix))
        cuts[t] = cut_values[top]
        losses[t] = float(p_mix @ cost)
        if t == cfg.iterations:
            break
        v = cost + lam * u if lam != 0.0 else cost
        q = p_f * (v - float(p_f @ v))
        if beta > 0.0:
            q = (1.0 - beta) * q + beta * rho * (p_s * (v - float(p_s @ v)))
        grad = signs.T @ (signs * q[:, None])
        w -= eta * grad
    return cuts, losses


def run_relu_trial(signs: np.ndarray, cut_values: np.ndarray, cfg: SuiteConfig,
                   regularized: bool, init_seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact gradient descent on the ReLU scorer from a seeded init."""
    cost = -4.0 * cut_values
    beta = cfg.beta if regularized else 0.0
    eta = cfg.eta_relu
    params = init_mlp(signs.shape[1], cfg.rho, init_seed)
    cuts = np.zeros(cfg.iterations + 1)
    losses = np.zeros(cfg.iterations + 1)
    for t in range(cfg.iterations + 1):
        lam = schedule_lambda(cfg.lambda0, cfg.halve_every, t) if regularized else 0.0
        grads, aux = mlp_grad_tables(params, signs, cost, beta, lam)
        top = int(np.argmax(aux["p_mix"]))
        cuts[t] = cut_values[top]
        losses[t] = aux["loss"]
        if t == cfg.iterations:
            break
        params = type(params)(layer1=params.layer1 - eta * grads.layer1,
                              layer2=params.layer2 - eta * grads.layer2,
                              layer3=params.layer3 - eta * grads.layer3,
                              rho=params.rho)
    return cuts, losses


def run_trial(cfg: SuiteConfig, trial: int, signs: np.ndarray | None = None) -> list:
    """All requested (family, variant) runs for one trial's graph."""
    if signs is None:
        signs = sign_vectors(cfg.n)
    graph_seed = derived_seed(cfg.seed, trial)
    g = erdos_renyi(cfg.n, cfg.edge_prob, graph_seed)
    lap = g.laplacian()
    cut_values = np.einsum("mi,ij,mj->m", signs, lap, signs) / 4.0
    maxcut = int(round(cut_values.max()))
    records = []
    for family in cfg.families:
        for variant in cfg.variants:
            regularized = variant == "regularized"
            if family == "linear":
                cuts, losses = run_linear_trial(signs, cut_values, cfg, regularized,
                                                derived_seed(cfg.seed, trial, 2))
            else:
                cuts, losses = run_relu_trial(signs, cut_values, cfg, regularized,
                                              derived_seed(cfg.seed, trial, 1))
            best = int(round(cuts.max()))
            hits = np.flatnonzero(cuts >= maxcut - 1e-9)
            records.append(TrialRecord(
                trial=trial, family=family, variant=variant, graph_seed=graph_seed,
                maxcut=maxcut, best_cut=best, success=best >= maxcut,
                first_hit=int(hits[0]) if hits.size else -1,
                cuts=cuts, losses=losses))
    return records


def _run_trial_star(args):
    cfg_dict, trial = args
    return run_trial(SuiteConfig(**cfg_dict), trial)


def run_suite(cfg: SuiteConfig, out_dir=None, progress=None) -> SuiteResult:
    """Run every trial, optionally in worker processes, and write CSV output.

    Results are merged in trial order, so the output is identical for any
    worker count.
    """
    start = time.monotonic()
    records = []
    if cfg.workers > 1:
        import multiprocessing as mp

        cfg_dict = asdict(cfg)
        with mp.get_context("spawn").Pool(cfg.workers) as pool:
            for recs in pool.imap(_run_trial_star,
                                  [(cfg_dict, t) for t in range(cfg.trials)]):
                records.extend(recs)
                if progress:
                    progress(recs[0].trial + 1, cfg.trials)
    else:
        signs = sign_vectors(cfg.n)
        for t in range(cfg.trials):
            records.extend(run_trial(cfg, t, signs))
            if progress:
                progress(t + 1, cfg.trials)
    result = SuiteResult(config=cfg, records=records,
                         wall_clock_s=time.monotonic() - start)
    if out_dir is not None:
        write_suite_output(result, out_dir)
    return result


def write_suite_output(result: SuiteResult, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "trials.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial", "family", "variant", "graph_seed", "maxcut",
                         "best_cut", "success", "first_hit"])
        for r in result.records:
            writer.writerow([r.trial, r.family, r.variant, r.graph_seed,
                             r.maxcut, r.best_cut, int(r.success), r.first_hit])
    with open(out / "iterations.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial", "family", "variant", "iteration", "cut", "loss"])
        for r in result.records:
            for t in range(r.cuts.shape[0]):
                writer.writerow([r.trial, r.family, r.variant, t,
                                 f"{r.cuts[t]:.6g}", f"{r.losses[t]:.12g}"])
    (out / "summary.json").write_text(json.dumps(result.summary(), indent=2) + "\n")
