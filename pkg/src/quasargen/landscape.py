"""Loss-surface probes: product-distribution attractors and 2-D parameter grids.

Two complementary views of why entropy alone does not fix the plain
generator's landscape: over product distributions on the cube, the
unregularized cut objective has spurious vertex attractors (local maxima of
the cut that are not global); over low-dimensional parameter grids, the
plain loss pushes its argmin to the grid boundary while the regularized
mixture keeps an interior minimizer with non-vanishing gradients elsewhere.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .encodings import ProblemEncoding, sign_vectors
from .generator import MixtureParams
from .objective import PriorSpec, exact_grad, vec_eval
from .problems import Graph

# Margin keeping product distributions strictly inside the cube [0,1]^n.
CUBE_MARGIN = 0.01

# Small worked 2-D domain used by the landscape command and tests: three
# solution feature vectors in the plane and a cost direction whose entropy
# minimizer sits inside the default grid ranges.
REFERENCE_FEATURES = np.array([[1.0, 0.0], [2.0, 2.0], [0.0, 2.0]])
REFERENCE_COST_DIRECTION = np.array([-3.0, -3.0])


def product_landscape(g: Graph, p: np.ndarray, eps: float = CUBE_MARGIN
                      ) -> tuple[float, np.ndarray]:
    """Expected-cut surrogate over independent-vertex distributions.

    p gives per-vertex probabilities of the +1 side, restricted to
    [eps, 1 - eps]^n.  Returns (value, gradient) of -(2p-1)^T L0 (2p-1) with
    L0 the Laplacian with zeroed diagonal; at cube vertices the value is
    2 * total edge weight - 4 * cut, so minimizing it maximizes the cut.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (g.n,):
        raise ValueError(f"need one probability per vertex, got shape {p.shape}")
    if np.any(p < eps - 1e-12) or np.any(p > 1 - eps + 1e-12):
        raise ValueError(f"probabilities must lie in [{eps}, {1 - eps}]")
    l0 = g.laplacian() - np.diag(np.diag(g.laplacian()))   # = minus the weights
    q = 2.0 * p - 1.0
    value = -float(q @ l0 @ q)
    grad = -4.0 * l0 @ q
    return value, grad


@dataclass
class BadVertexWitness:
    """A spurious product-distribution attractor: a strict local maximum of
    the cut that is not a global maximum, pushed to the cube margin."""

    signs: np.ndarray
    p_star: np.ndarray
    cut: float
    maxcut: float
    condition_values: np.ndarray   # per-vertex (same-side - cross-side) weight
    eps: float

    def condition_holds(self) -> bool:
        return bool(np.all(self.condition_values < 0))

    def to_dict(self) -> dict:
        return {"signs": self.signs.tolist(), "p_star": self.p_star.tolist(),
                "cut": self.cut, "maxcut": self.maxcut,
                "condition_values": self.condition_values.tolist(), "eps": self.eps}


def strict_local_maxima(g: Graph) -> tuple[np.ndarray, np.ndarray, float]:
    """All sign vectors whose every single flip strictly decreases the cut,
    by exhaustive enumeration.  Returns (signs matrix, their cuts, maxcut)."""
    signs = sign_vectors(g.n)
    lap = g.laplacian()
    cuts = np.einsum("mi,ij,mj->m", signs, lap, signs) / 4.0
    margins = (signs @ g.weights) * signs   # same-side minus cross-side weight
    is_max = np.all(margins < 0, axis=1)
    return signs[is_max], cuts[is_max], float(cuts.max())


def _witness_from_signs(g: Graph, s: np.ndarray, cut: float, maxcut: float,
                        eps: float) -> BadVertexWitness:
    p_star = (1.0 + s * (1.0 - 2.0 * eps)) / 2.0
    cond = (s @ g.weights) * s
    return BadVertexWitness(signs=s.copy(), p_star=p_star, cut=float(cut),
                            maxcut=float(maxcut), condition_values=cond, eps=eps)


def find_bad_vertex(g: Graph, restarts: int = 200, seed: int = 0,
                    eps: float = CUBE_MARGIN) -> BadVertexWitness | None:
    """Search for a strict local maximum of the cut below the global maximum.

    Small graphs are scanned exhaustively (so a None answer is a
    certificate); larger ones fall back to seeded greedy ascent with random
    restarts.  The returned witness satisfies, at the margin-eps vertex, the
    attractor condition grad_i * (2 p - 1)_i < 0 for every vertex.
    """
    if g.n <= 14:
        signs, cuts, maxcut = strict_local_maxima(g)
        below = cuts < maxcut - 1e-9
        if not np.any(below):
            return None
        i = int(np.argmax(below))   # first spurious attractor in enumeration order
        return _witness_from_signs(g, signs[i], cuts[i], maxcut, eps)
    rng = np.random.default_rng(seed)
    signs_all = sign_vectors(g.n)
    lap = g.laplacian()
    maxcut = float(np.einsum("mi,ij,mj->m", signs_all, lap, signs_all).max() / 4.0)
    for _ in range(restarts):
        s = rng.choice([-1.0, 1.0], size=g.n)
        while True:
            margins = (s @ g.weights) * s
            worst = int(np.argmax(margins))
            if margins[worst] <= 0:
                break
            s[worst] = -s[worst]    # flipping increases the cut by margins[worst]
        if np.all((s @ g.weights) * s < 0):
            cut = float(s @ lap @ s / 4.0)
            if cut < maxcut - 1e-9:
                return _witness_from_signs(g, s, cut, maxcut, eps)
    return None


@dataclass(frozen=True)
class GridSpec:
    """A 2-D slice of parameter space: w = a * axis1 + b * axis2."""

    axis1: np.ndarray
    axis2: np.ndarray
    range1: tuple[float, float] = (-2.0, 8.0)
    range2: tuple[float, float] = (-2.0, 8.0)
    resolution: int = 41
    objective: str = "plain"     # plain | entropy | mixture

    def __post_init__(self):
        object.__setattr__(self, "axis1", np.asarray(self.axis1, dtype=float))
        object.__setattr__(self, "axis2", np.asarray(self.axis2, dtype=float))
        if self.objective not in ("plain", "entropy", "mixture"):
            raise ValueError(f"unknown objective {self.objective!r}")
        if self.resolution < 2:
            raise ValueError("resolution must be at least 2")


@dataclass
class GridResult:
    a_values: np.ndarray
    b_values: np.ndarray
    values: np.ndarray       # (res, res), indexed [a_index, b_index]
    grad_norms: np.ndarray
    argmin: tuple[int, int]
    argmin_interior: bool
    objective: str

    def argmin_point(self) -> tuple[float, float]:
        return float(self.a_values[self.argmin[0]]), float(self.b_values[self.argmin[1]])

    def min_grad_excluding(self, radius_cells: int) -> float:
        """Smallest gradient norm over cells farther than radius_cells (in the
        max metric) from the argmin cell."""
        ia, ib = self.argmin
        mask = np.ones_like(self.grad_norms, dtype=bool)
        lo_a, hi_a = max(0, ia - radius_cells), min(mask.shape[0], ia + radius_cells + 1)
        lo_b, hi_b = max(0, ib - radius_cells), min(mask.shape[1], ib + radius_cells + 1)
        mask[lo_a:hi_a, lo_b:hi_b] = False
        return float(self.grad_norms[mask].min())

    def save_csv(self, values_path, grads_path) -> None:
        for path, mat in ((values_path, self.values), (grads_path, self.grad_norms)):
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["a\\b"] + [f"{b:.6g}" for b in self.b_values])
                for i, a in enumerate(self.a_values):
                    writer.writerow([f"{a:.6g}"] + [f"{x:.12g}" for x in mat[i]])


def grid_eval(features: np.ndarray, c: np.ndarray, lam: float, beta: float,
              rho: float, spec: GridSpec) -> GridResult:
    """Evaluate one objective over the grid and locate its argmin cell.

    plain:    expected cost under the single generator (no regularizer);
    entropy:  expected cost + lam * negentropy of the single generator;
    mixture:  mixture expected cost + lam * mixture negentropy combination.
    Gradient norms are of the matching objective in the full parameter space.
    """
    features = np.asarray(features, dtype=float)
    costs = features @ np.asarray(c, dtype=float)
    a_values = np.linspace(spec.range1[0], spec.range1[1], spec.resolution)
    b_values = np.linspace(spec.range2[0], spec.range2[1], spec.resolution)
    values = np.zeros((spec.resolution, spec.resolution))
    grads = np.zeros_like(values)
    if spec.objective == "plain":
        use_lam, use_beta = 0.0, 0.0
    elif spec.objective == "entropy":
        use_lam, use_beta = lam, 0.0
    else:
        use_lam, use_beta = lam, beta
    for i, a in enumerate(a_values):
        for j, b in enumerate(b_values):
            w = a * spec.axis1 + b * spec.axis2
            ev = vec_eval(features, costs, w, use_lam, use_beta, rho)
            values[i, j] = ev["loss"] + use_lam * ev["reg"]
            grads[i, j] = float(np.linalg.norm(ev["grad"]))
    flat = int(np.argmin(values))
    ia, ib = np.unravel_index(flat, values.shape)
    interior = bool(0 < ia < spec.resolution - 1 and 0 < ib < spec.resolution - 1)
    return GridResult(a_values=a_values, b_values=b_values, values=values,
                      grad_norms=grads, argmin=(int(ia), int(ib)),
                      argmin_interior=interior, objective=spec.objective)


def vanishing_gradient_scan(e: ProblemEncoding, direction: np.ndarray, scales,
                            lam: float, beta: float, rho: float
                            ) -> list[tuple[float, float]]:
    """Frobenius gradient norm of the regularized loss along W = tau *
    direction.  With beta = 0 the norm collapses as the generator
    concentrates; a positive slow-component weight keeps it bounded away
    from zero."""
    prior = PriorSpec.from_encoding(e)
    out = []
    for tau in scales:
        mp = MixtureParams(float(tau) * direction,
                           beta_star=beta, rho_star=rho)
        g = exact_grad(e, prior, mp, lam).gradient
        out.append((float(tau), float(np.linalg.norm(g))))
    return out
