"""Projected (stochastic) gradient descent on the regularized objective.

The feasible set is an optional nonnegativity cone intersected with a
Frobenius ball; projection clamps negative entries first, then rescales
radially.  A certificate routine estimates the star-convexity constant of the
regularized objective toward its closed-form minimizer -M/lam by sampling the
ball.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from .encodings import ProblemEncoding, brute_force_optimum
from .generator import MixtureParams, mixture_density
from .objective import PriorSpec, exact_grad, exact_loss, exact_reg_loss, \
    policy_grad_estimate


class DivergenceError(RuntimeError):
    """Raised when the training loss runs away from its starting value."""


# A run is aborted when the regularized loss exceeds its initial value by this
# multiple of the initial scale.
DIVERGENCE_FACTOR = 1e3


@dataclass(frozen=True)
class SGDConfig:
    steps: int
    step_size: float = 0.1
    batch: int | None = None          # None = exact gradients
    lambda_schedule: tuple = ((0, 1.0),)   # (start_iteration, value) breakpoints
    ball_radius: float = float("inf")
    cone: bool = False
    seed: int = 0

    def __post_init__(self):
        sched = self.lambda_schedule
        if isinstance(sched, (int, float)):
            sched = ((0, float(sched)),)
        sched = tuple((int(t), float(v)) for t, v in sched)
        if not sched or sched[0][0] != 0:
            raise ValueError("lambda schedule must start at iteration 0")
        if any(b[0] <= a[0] for a, b in zip(sched, sched[1:])):
            raise ValueError("lambda schedule breakpoints must increase")
        object.__setattr__(self, "lambda_schedule", sched)
        if self.steps < 0:
            raise ValueError("steps must be nonnegative")
        if self.step_size < 0:
            raise ValueError("step size must be nonnegative")


def lambda_at(schedule, t: int) -> float:
    value = schedule[0][1]
    for start, v in schedule:
        if t >= start:
            value = v
        else:
            break
    return value


def halving_schedule(lambda0: float, halve_every: int, total: int) -> tuple:
    return tuple((t, lambda0 / 2 ** (t // halve_every))
                 for t in range(0, total, halve_every))


def project(W: np.ndarray, radius: float = float("inf"), cone: bool = False) -> np.ndarray:
    """Clamp to the nonnegative cone (if requested), then scale into the
    Frobenius ball of the given radius."""
    out = np.asarray(W, dtype=float).copy()
    if cone:
        np.maximum(out, 0.0, out=out)
    norm = float(np.linalg.norm(out))
    if np.isfinite(radius) and norm > radius > 0:
        out *= radius / norm
    return out


@dataclass
class Trajectory:
    """Per-iteration records of one descent run; index 0 is the initial point
    and the final index is the point after the last update."""

    params: list = field(default_factory=list)
    lambdas: list = field(default_factory=list)
    exact_losses: list = field(default_factory=list)
    reg_losses: list = field(default_factory=list)
    grad_norms: list = field(default_factory=list)
    correlations: list = field(default_factory=list)
    argmax_costs: list = field(default_factory=list)
    wall_clock: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.params)

    def summary(self) -> dict:
        return {
            "iterations": len(self) - 1,
            "final_exact_loss": self.exact_losses[-1],
            "final_reg_loss": self.reg_losses[-1],
            "best_exact_loss": min(self.exact_losses),
            "best_argmax_cost": min(self.argmax_costs),
            "final_grad_norm": self.grad_norms[-1],
            "wall_clock_s": self.wall_clock[-1],
        }

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "lambda", "exact_loss", "reg_loss",
                            "grad_norm", "correlation", "argmax_cost", "wall_clock_s"])
            for t in range(len(self)):
                writer.writerow([t, self.lambdas[t], f"{self.exact_losses[t]:.12g}",
                                 f"{self.reg_losses[t]:.12g}", f"{self.grad_norms[t]:.12g}",
                                 f"{self.correlations[t]:.12g}",
                                 f"{self.argmax_costs[t]:.12g}",
                                 f"{self.wall_clock[t]:.6g}"])


def run_psgd(e: ProblemEncoding, prior: PriorSpec | None, mp0: MixtureParams,
             cfg: SGDConfig) -> Trajectory:
    """Projected gradient descent from mp0.W under cfg; exact gradients when
    cfg.batch is None, otherwise seeded score-function estimates.

    Deterministic given (config, seed).  Raises DivergenceError if the
    regularized loss blows up past the divergence guard.
    """
    if prior is None:
        prior = PriorSpec.from_encoding(e)
    beta, rho = mp0.beta_star, mp0.rho_star
    W = project(mp0.W, cfg.ball_radius, cfg.cone)
    traj = Trajectory()
    start = time.monotonic()
    guard = None
    for t in range(cfg.steps + 1):
        lam = lambda_at(cfg.lambda_schedule, t)
        mp = MixtureParams(W, beta, rho)
        with np.errstate(over="ignore", invalid="ignore"):
            reg_loss = exact_reg_loss(e, prior, mp, lam)
            if not np.isfinite(reg_loss):
                raise DivergenceError(
                    f"regularized loss is not finite at iteration {t}")
            if guard is None:
                guard = reg_loss + DIVERGENCE_FACTOR * max(1.0, abs(reg_loss))
            elif reg_loss > guard:
                raise DivergenceError(
                    f"regularized loss {reg_loss:.6g} exceeded divergence guard at iteration {t}")
            report = exact_grad(e, prior, mp, lam)
            loss = exact_loss(e, prior, mp)
            d = mixture_density(e, mp)
        traj.params.append(W.copy())
        traj.lambdas.append(lam)
        traj.exact_losses.append(loss)
        traj.reg_losses.append(reg_loss)
        traj.grad_norms.append(float(np.linalg.norm(report.gradient)))
        traj.correlations.append(report.correlation_rhs)
        traj.argmax_costs.append(float(e.cost_values[int(np.argmax(d.probs))]))
        traj.wall_clock.append(time.monotonic() - start)
        if t == cfg.steps:
            break
        if cfg.batch is None:
            grad = report.gradient
        else:
            grad = policy_grad_estimate(e, prior, mp, lam, cfg.batch,
                                        seed=cfg.seed + 1000003 * t)
        W = project(W - cfg.step_size * grad, cfg.ball_radius, cfg.cone)
    return traj


@dataclass
class QuasarCertificate:
    """Sampled star-convexity evidence for the regularized objective.

    gamma_hat is the smallest ratio of gradient-alignment to suboptimality
    over the sampled ball; min_numerator is the most negative alignment seen
    (theory says it can never drop below zero)."""

    gamma_hat: float
    min_numerator: float
    n_samples: int
    n_informative: int
    witnesses: list

    def to_dict(self) -> dict:
        return {"gamma_hat": self.gamma_hat, "min_numerator": self.min_numerator,
                "n_samples": self.n_samples, "n_informative": self.n_informative}


def quasar_certificate(e: ProblemEncoding, prior: PriorSpec | None, lam: float,
                       mp_template: MixtureParams, n_samples: int = 200,
                       seed: int = 0, radius: float | None = None) -> QuasarCertificate:
    """Sample W uniformly from the Frobenius ball of radius ||M||_F / lam
    (unless overridden) and measure grad(W) . (W + M/lam) against the
    suboptimality gap to the closed-form minimizer -M/lam."""
    if prior is None:
        prior = PriorSpec.from_encoding(e)
    beta, rho = mp_template.beta_star, mp_template.rho_star
    if radius is None:
        radius = float(np.linalg.norm(e.M)) / lam
    rng = np.random.default_rng(seed)
    w_star = -e.M / lam
    ref = exact_reg_loss(e, prior, MixtureParams(w_star, beta, rho), lam)
    dim = e.M.size
    gamma = float("inf")
    min_num = float("inf")
    informative = 0
    witnesses = []
    for i in range(n_samples):
        direction = rng.standard_normal(e.M.shape)
        direction /= max(np.linalg.norm(direction), 1e-300)
        W = direction * radius * rng.random() ** (1.0 / dim)
        mp = MixtureParams(W, beta, rho)
        num = float(np.sum(exact_grad(e, prior, mp, lam).gradient * (W - w_star)))
        gap = exact_reg_loss(e, prior, mp, lam) - ref
        min_num = min(min_num, num)
        if gap > 1e-10:
            informative += 1
            ratio = num / gap
            if ratio < gamma:
                gamma = ratio
                witnesses.append({"sample": i, "ratio": ratio, "numerator": num,
                                  "gap": gap, "norm": float(np.linalg.norm(W))})
    return QuasarCertificate(gamma_hat=gamma, min_numerator=min_num,
                             n_samples=n_samples, n_informative=informative,
                             witnesses=witnesses[-5:])


@dataclass
class ConvergenceSummary:
    average_loss: float
    best_loss: float
    reference_loss: float
    optimum: float
    cost_range: float
    average_gap: float

    def to_dict(self) -> dict:
        return self.__dict__.copy()


def convergence_report(traj: Trajectory, e: ProblemEncoding, prior: PriorSpec | None,
                       lam: float, mp_template: MixtureParams) -> ConvergenceSummary:
    """Average-iterate convergence summary against the closed-form reference
    parameter -M/lam (the guarantee bounds the average unregularized loss)."""
    if prior is None:
        prior = PriorSpec.from_encoding(e)
    ref = exact_loss(e, prior, MixtureParams(-e.M / lam, mp_template.beta_star,
                                             mp_template.rho_star))
    avg = float(np.mean(traj.exact_losses))
    opt, _ = brute_force_optimum(e)
    return ConvergenceSummary(
        average_loss=avg,
        best_loss=float(np.min(traj.exact_losses)),
        reference_loss=ref,
        optimum=opt,
        cost_range=e.cost_range(),
        average_gap=avg - ref,
    )
