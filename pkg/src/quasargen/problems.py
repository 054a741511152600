"""Problem instances (graphs, CSPs, assignment costs) and their JSON wire format.

Instance files are JSON objects with a ``type`` field:

    {"type": "graph", "n": 5, "edges": [[0, 1, 1.0], ...]}
    {"type": "csp", "n": 4, "k": 2, "predicates": [{"vars": [0, 1], "table": [0, 0, 0, 1]}, ...]}
    {"type": "assignment", "n": 4, "costs": [[...], ...]}

An optional ``problem`` field ("maxcut", "mincut", "csp", "mwbm", "tsp")
selects the encoding when a type admits more than one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph on vertices 0..n-1.

    ``weights`` is the symmetric adjacency matrix with zero diagonal; an
    absent edge is a zero entry.
    """

    n: int
    weights: np.ndarray
    problem: str = "maxcut"

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if self.n < 1:
            raise ValueError("graph needs at least one vertex")
        if w.shape != (self.n, self.n):
            raise ValueError(f"weight matrix shape {w.shape} does not match n={self.n}")
        if not np.allclose(w, w.T):
            raise ValueError("weight matrix must be symmetric")
        if np.any(np.diag(w) != 0):
            raise ValueError("weight matrix must have zero diagonal")

    @classmethod
    def from_edges(cls, n: int, edges, problem: str = "maxcut") -> "Graph":
        w = np.zeros((n, n))
        for e in edges:
            i, j = int(e[0]), int(e[1])
            wt = float(e[2]) if len(e) > 2 else 1.0
            if i == j:
                raise ValueError(f"self-loop on vertex {i}")
            w[i, j] += wt
            w[j, i] += wt
        return cls(n=n, weights=w, problem=problem)

    def edges(self) -> list[tuple[int, int, float]]:
        out = []
        for i in range(self.n):
            for j in range(i + 1, self.n):
                if self.weights[i, j] != 0:
                    out.append((i, j, float(self.weights[i, j])))
        return out

    def laplacian(self) -> np.ndarray:
        return np.diag(self.weights.sum(axis=1)) - self.weights

    def cut_value(self, signs: np.ndarray) -> float:
        """Total weight of edges crossing the bipartition encoded by +-1 signs."""
        s = np.asarray(signs, dtype=float)
        return float(s @ self.laplacian() @ s) / 4.0


@dataclass(frozen=True)
class CSPInstance:
    """Boolean Max-CSP: maximize the number of satisfied predicates.

    Each predicate is a pair ``(vars, table)`` where ``vars`` is a sorted
    tuple of distinct variable indices and ``table`` lists the 0/1 outputs
    over the 2^arity assignments to those variables.  Truth-table indexing:
    bit t of the table index is 1 exactly when variable ``vars[t]`` takes
    value +1.
    """

    n: int
    k: int
    predicates: tuple = field(default_factory=tuple)

    def __post_init__(self):
        preds = []
        for vs, table in self.predicates:
            vs = tuple(int(v) for v in vs)
            table = tuple(int(t) for t in table)
            if len(set(vs)) != len(vs):
                raise ValueError(f"repeated variable in predicate scope {vs}")
            if sorted(vs) != list(vs):
                raise ValueError(f"predicate scope must be sorted: {vs}")
            if any(v < 0 or v >= self.n for v in vs):
                raise ValueError(f"variable out of range in {vs}")
            if len(vs) > self.k:
                raise ValueError(f"predicate arity {len(vs)} exceeds k={self.k}")
            if len(table) != 2 ** len(vs):
                raise ValueError("truth table length must be 2^arity")
            if any(t not in (0, 1) for t in table):
                raise ValueError("truth table entries must be 0 or 1")
            preds.append((vs, table))
        object.__setattr__(self, "predicates", tuple(preds))
        if self.n < 1 or self.k < 1:
            raise ValueError("need n >= 1 and k >= 1")

    def satisfied(self, signs: np.ndarray) -> int:
        """Number of predicates satisfied by a +-1 assignment."""
        s = np.asarray(signs)
        count = 0
        for vs, table in self.predicates:
            idx = 0
            for t, v in enumerate(vs):
                if s[v] > 0:
                    idx |= 1 << t
            count += table[idx]
        return count


@dataclass(frozen=True)
class AssignmentProblem:
    """An n x n cost (or weight) matrix over agent-task pairs / city-city legs."""

    n: int
    costs: np.ndarray
    problem: str = "mwbm"

    def __post_init__(self):
        c = np.asarray(self.costs, dtype=float)
        object.__setattr__(self, "costs", c)
        if self.n < 1:
            raise ValueError("need n >= 1")
        if c.shape != (self.n, self.n):
            raise ValueError(f"cost matrix shape {c.shape} does not match n={self.n}")


def erdos_renyi(n: int, p: float, seed: int) -> Graph:
    """G(n, p) with unit edge weights, deterministic in the seed."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("edge probability must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    w = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                w[i, j] = w[j, i] = 1.0
    return Graph(n=n, weights=w)


def random_assignment(n: int, seed: int, low: float = 0.0, high: float = 1.0,
                      problem: str = "mwbm") -> AssignmentProblem:
    rng = np.random.default_rng(seed)
    return AssignmentProblem(n=n, costs=rng.uniform(low, high, size=(n, n)),
                             problem=problem)


def metric_assignment(n: int, seed: int) -> AssignmentProblem:
    """Pairwise Euclidean distances of random points in the unit square."""
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2))
    d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    return AssignmentProblem(n=n, costs=d, problem="tsp")


def random_csp(n: int, n_predicates: int, k: int, seed: int) -> CSPInstance:
    """Random Max-k-CSP: uniformly random scopes and truth tables."""
    rng = np.random.default_rng(seed)
    preds = []
    for _ in range(n_predicates):
        arity = int(rng.integers(1, k + 1))
        vs = tuple(sorted(rng.choice(n, size=arity, replace=False).tolist()))
        table = tuple(int(b) for b in rng.integers(0, 2, size=2 ** arity))
        preds.append((vs, table))
    return CSPInstance(n=n, k=k, predicates=tuple(preds))


def instance_to_dict(inst) -> dict:
    if isinstance(inst, Graph):
        return {"type": "graph", "problem": inst.problem, "n": inst.n,
                "edges": [[i, j, w] for i, j, w in inst.edges()]}
    if isinstance(inst, CSPInstance):
        return {"type": "csp", "problem": "csp", "n": inst.n, "k": inst.k,
                "predicates": [{"vars": list(vs), "table": list(tb)}
                               for vs, tb in inst.predicates]}
    if isinstance(inst, AssignmentProblem):
        return {"type": "assignment", "problem": inst.problem, "n": inst.n,
                "costs": inst.costs.tolist()}
    raise TypeError(f"not an instance type: {type(inst)!r}")


def instance_from_dict(d: dict):
    kind = d.get("type")
    if kind == "graph":
        return Graph.from_edges(int(d["n"]), d.get("edges", []),
                                problem=d.get("problem", "maxcut"))
    if kind == "csp":
        preds = tuple((tuple(p["vars"]), tuple(p["table"]))
                      for p in d.get("predicates", []))
        return CSPInstance(n=int(d["n"]), k=int(d["k"]), predicates=preds)
    if kind == "assignment":
        return AssignmentProblem(n=int(d["n"]), costs=np.asarray(d["costs"], dtype=float),
                                 problem=d.get("problem", "mwbm"))
    raise ValueError(f"unknown instance type: {kind!r}")


def save_instance(inst, path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst), indent=2) + "\n")


def load_instance(path):
    return instance_from_dict(json.loads(Path(path).read_text()))
