"""Command-line interface.

Subcommands: gen-graph, encode, optimize, suite-maxcut, landscape, verify,
report.  Every run writes a manifest.json capturing the resolved config and
seeds next to its outputs.  Exit codes: 0 success, 1 bad configuration or
input, 2 verification failure, 3 divergence during optimization.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .encodings import EnumerationCapError, ProblemEncoding, brute_force_optimum, \
    encode_max_k_csp, encode_maxcut, encode_mincut, encode_mwbm, encode_tsp, \
    native_name, native_value, validate_encoding
from .experiments import SuiteConfig, run_suite
from .generator import MixtureParams
from .landscape import GridSpec, REFERENCE_COST_DIRECTION, REFERENCE_FEATURES, \
    find_bad_vertex, grid_eval
from .optimizer import DivergenceError, SGDConfig, convergence_report, \
    halving_schedule, run_psgd
from .problems import AssignmentProblem, CSPInstance, Graph, erdos_renyi, \
    instance_to_dict, load_instance, save_instance
from .verify import run_battery

EXIT_OK = 0
EXIT_BAD_CONFIG = 1
EXIT_VERIFY_FAILED = 2
EXIT_DIVERGED = 3


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems with the bad-config exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_BAD_CONFIG)


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int | None
    workers: int
    version: str = __version__
    started: str = ""
    wall_clock_s: float = 0.0
    results: dict = field(default_factory=dict)

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "manifest.json").write_text(json.dumps(asdict(self), indent=2,
                                                      default=_jsonable) + "\n")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def _load_config(path, defaults: dict) -> dict:
    merged = dict(defaults)
    if path:
        try:
            overrides = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read config {path}: {err}")
        if not isinstance(overrides, dict):
            raise ConfigError("config file must hold a JSON object")
        for key, value in overrides.items():
            if key not in merged:
                raise ConfigError(f"unknown config key {key!r}")
            merged[key] = value
    return merged


class ConfigError(ValueError):
    pass


def _resolve_workers(args) -> int:
    if getattr(args, "workers", None):
        return int(args.workers)
    env = os.environ.get("QG_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"QG_WORKERS must be an integer, got {env!r}")
    return 1


def build_encoding(instance, problem: str | None = None) -> ProblemEncoding:
    """Instance object -> encoding, honoring an explicit problem override."""
    if isinstance(instance, Graph):
        choice = problem or instance.problem
        if choice == "maxcut":
            return encode_maxcut(instance)
        if choice == "mincut":
            return encode_mincut(instance)
        raise ConfigError(f"graph instances encode maxcut or mincut, not {choice!r}")
    if isinstance(instance, CSPInstance):
        if problem not in (None, "csp"):
            raise ConfigError(f"csp instances only encode csp, not {problem!r}")
        return encode_max_k_csp(instance)
    if isinstance(instance, AssignmentProblem):
        choice = problem or instance.problem
        if choice == "mwbm":
            return encode_mwbm(instance)
        if choice == "tsp":
            return encode_tsp(instance)
        raise ConfigError(f"assignment instances encode mwbm or tsp, not {choice!r}")
    raise ConfigError(f"unknown instance type {type(instance)!r}")


def cmd_gen_graph(args) -> int:
    g = erdos_renyi(args.n, args.p, args.seed)
    if args.out:
        save_instance(g, args.out)
    else:
        print(json.dumps(instance_to_dict(g)))
    return EXIT_OK


def cmd_encode(args) -> int:
    inst = load_instance(args.instance)
    e = build_encoding(inst, args.problem)
    report = validate_encoding(e)
    opt, argmins = brute_force_optimum(e)
    payload = {
        "kind": e.kind,
        "n_solutions": e.n_solutions,
        "n_x": e.n_x,
        "n_z": e.n_z,
        "feature_bound": e.feature_bound,
        "instance_bound": e.instance_bound,
        "cost_matrix_bound": e.cost_matrix_bound,
        "variance_floor": e.variance_floor,
        "subspace": e.subspace_name,
        "nonneg_cone": e.nonneg_cone,
        "cost_offset": e.cost_offset,
        "optimum_cost": opt,
        "optimum_native": {native_name(e): native_value(e, opt)},
        "n_optima": int(argmins.size),
        "validation": report.to_dict(),
    }
    text = json.dumps(payload, indent=2, default=_jsonable)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


OPTIMIZE_DEFAULTS = {
    "steps": 300,
    "step_size": "auto",
    "batch": None,
    "lambda0": 1.0,
    "halve_every": None,
    "beta": 0.2,
    "rho": 0.03,
    "ball_radius": "auto",
    "cone": "auto",
}


def cmd_optimize(args) -> int:
    started = time.monotonic()
    cfg = _load_config(args.config, OPTIMIZE_DEFAULTS)
    inst = load_instance(args.instance)
    e = build_encoding(inst, args.problem)
    lam0 = float(cfg["lambda0"])
    if cfg["halve_every"]:
        schedule = halving_schedule(lam0, int(cfg["halve_every"]), int(cfg["steps"]) + 1)
    else:
        schedule = ((0, lam0),)
    radius = cfg["ball_radius"]
    if radius == "auto":
        radius = float(np.linalg.norm(e.M)) / lam0
    cone = e.nonneg_cone if cfg["cone"] == "auto" else bool(cfg["cone"])
    eta = cfg["step_size"]
    if eta == "auto":
        eta = 0.1 / (e.feature_bound ** 2 * max(e.instance_bound, 1e-12) ** 2)
    sgd = SGDConfig(steps=int(cfg["steps"]), step_size=float(eta),
                    batch=None if cfg["batch"] in (None, "exact") else int(cfg["batch"]),
                    lambda_schedule=schedule, ball_radius=float(radius),
                    cone=cone, seed=args.seed)
    mp0 = MixtureParams(np.zeros(e.M.shape), beta_star=float(cfg["beta"]),
                        rho_star=float(cfg["rho"]))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(command="optimize", config={**cfg, "resolved_ball": radius,
                                                      "resolved_cone": cone,
                                                      "resolved_step_size": eta},
                           seed=args.seed, workers=1,
                           started=datetime.datetime.utcnow().isoformat())
    try:
        traj = run_psgd(e, None, mp0, sgd)
    except DivergenceError as err:
        manifest.results = {"diverged": True, "error": str(err)}
        manifest.wall_clock_s = time.monotonic() - started
        manifest.write(out)
        print(f"optimize: {err}", file=sys.stderr)
        return EXIT_DIVERGED
    traj.to_csv(out / "trajectory.csv")
    lam_final = traj.lambdas[-1]
    summary = convergence_report(traj, e, None, lam_final, mp0).to_dict()
    summary["native_objective"] = native_name(e)
    summary["best_argmax_native"] = native_value(e, min(traj.argmax_costs))
    (out / "summary.json").write_text(json.dumps(summary, indent=2,
                                                 default=_jsonable) + "\n")
    manifest.results = summary
    manifest.wall_clock_s = time.monotonic() - started
    manifest.write(out)
    return EXIT_OK


SUITE_CONFIG_KEYS = {f: getattr(SuiteConfig, f) for f in
                     ("n", "edge_prob", "trials", "iterations", "lambda0",
                      "halve_every", "beta", "rho", "eta_linear", "eta_relu",
                      "families", "variants")}


def cmd_suite_maxcut(args) -> int:
    started = time.monotonic()
    cfg_dict = _load_config(args.config, SUITE_CONFIG_KEYS)
    workers = _resolve_workers(args)
    cfg = SuiteConfig(seed=args.seed, workers=workers, **cfg_dict)
    out = Path(args.out_dir)
    progress = None
    if not args.quiet:
        def progress(done, total):
            print(f"\rsuite-maxcut: trial {done}/{total}", end="", file=sys.stderr)
            if done == total:
                print(file=sys.stderr)
    result = run_suite(cfg, out_dir=out, progress=progress)
    manifest = RunManifest(command="suite-maxcut", config=asdict(cfg),
                           seed=args.seed, workers=workers,
                           started=datetime.datetime.utcnow().isoformat(),
                           wall_clock_s=time.monotonic() - started,
                           results=result.summary())
    manifest.write(out)
    for key, count in result.counts().items():
        print(f"{key}: {count}/{cfg.trials}")
    return EXIT_OK


LANDSCAPE_DEFAULTS = {
    "lambda": 1.0,
    "beta": 0.2,
    "rho": 0.03,
    "lo": -2.0,
    "hi": 8.0,
    "resolution": 41,
    "witness_n": 8,
    "witness_p": 0.5,
    "witness_seed": 0,
}


def cmd_landscape(args) -> int:
    started = time.monotonic()
    cfg = _load_config(args.config, LANDSCAPE_DEFAULTS)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    features = REFERENCE_FEATURES
    c = REFERENCE_COST_DIRECTION
    results = {}
    for objective in ("plain", "entropy", "mixture"):
        spec = GridSpec(axis1=np.array([1.0, 0.0]), axis2=np.array([0.0, 1.0]),
                        range1=(cfg["lo"], cfg["hi"]), range2=(cfg["lo"], cfg["hi"]),
                        resolution=int(cfg["resolution"]), objective=objective)
        grid = grid_eval(features, c, float(cfg["lambda"]), float(cfg["beta"]),
                         float(cfg["rho"]), spec)
        grid.save_csv(out / f"grid_{objective}_values.csv",
                      out / f"grid_{objective}_grads.csv")
        _render_heatmap(grid, out / f"grid_{objective}.svg")
        results[objective] = {"argmin": list(grid.argmin),
                              "argmin_point": list(grid.argmin_point()),
                              "argmin_interior": grid.argmin_interior,
                              "min_value": float(grid.values.min())}
    g = erdos_renyi(int(cfg["witness_n"]), float(cfg["witness_p"]),
                    int(cfg["witness_seed"]))
    witness = find_bad_vertex(g, seed=args.seed)
    results["bad_vertex"] = witness.to_dict() if witness else None
    (out / "landscape.json").write_text(json.dumps(results, indent=2,
                                                   default=_jsonable) + "\n")
    manifest = RunManifest(command="landscape", config=cfg, seed=args.seed,
                           workers=1,
                           started=datetime.datetime.utcnow().isoformat(),
                           wall_clock_s=time.monotonic() - started,
                           results={k: v for k, v in results.items()
                                    if k != "bad_vertex"})
    manifest.write(out)
    return EXIT_OK


def _render_heatmap(grid, path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 4))
    mesh = ax.pcolormesh(grid.b_values, grid.a_values, grid.values,
                         shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax)
    ia, ib = grid.argmin
    ax.plot(grid.b_values[ib], grid.a_values[ia], "r*", markersize=12)
    ax.set_xlabel("axis 2")
    ax.set_ylabel("axis 1")
    ax.set_title(f"{grid.objective} objective")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def cmd_verify(args) -> int:
    started = time.monotonic()
    results = run_battery(level=args.level,
                          perturb_correlation=args.perturb_correlation)
    all_ok = True
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        all_ok = all_ok and r.passed
        line = f"{status} {r.name}: {r.detail}"
        lines.append(line)
        print(line)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "verify.json").write_text(json.dumps(
            [{"name": r.name, "passed": r.passed, "detail": r.detail}
             for r in results], indent=2) + "\n")
        RunManifest(command="verify",
                    config={"level": args.level,
                            "perturb_correlation": args.perturb_correlation},
                    seed=None, workers=1,
                    started=datetime.datetime.utcnow().isoformat(),
                    wall_clock_s=time.monotonic() - started,
                    results={"all_passed": all_ok}).write(out)
    return EXIT_OK if all_ok else EXIT_VERIFY_FAILED


def cmd_report(args) -> int:
    out = Path(args.out_dir)
    manifest_path = out / "manifest.json"
    if not manifest_path.exists():
        print(f"report: no manifest.json in {out}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    manifest = json.loads(manifest_path.read_text())
    print(f"command:    {manifest.get('command')}")
    print(f"version:    {manifest.get('version')}")
    print(f"started:    {manifest.get('started')}")
    print(f"wall clock: {manifest.get('wall_clock_s', 0):.1f} s")
    results = manifest.get("results") or {}
    for key, value in results.items():
        print(f"  {key}: {json.dumps(value, default=_jsonable)}")
    summary_path = out / "summary.json"
    if summary_path.exists():
        print("summary.json:")
        for key, value in json.loads(summary_path.read_text()).items():
            print(f"  {key}: {value}")
    return EXIT_OK


def make_parser() -> _Parser:
    parser = _Parser(prog="quasargen",
                     description="Entropy-regularized solution generators "
                                 "over exact enumerations")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-graph", help="sample a G(n, p) instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=str, default=None)
    p.set_defaults(func=cmd_gen_graph)

    p = sub.add_parser("encode", help="encode an instance and validate bounds")
    p.add_argument("--instance", type=str, required=True)
    p.add_argument("--problem", type=str, default=None,
                   choices=["maxcut", "mincut", "csp", "mwbm", "tsp"])
    p.add_argument("--out", type=str, default=None)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("optimize", help="projected gradient descent on an instance")
    p.add_argument("--instance", type=str, required=True)
    p.add_argument("--problem", type=str, default=None,
                   choices=["maxcut", "mincut", "csp", "mwbm", "tsp"])
    p.add_argument("--config", type=str, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", type=str, required=True)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("suite-maxcut", help="train generators on random graphs")
    p.add_argument("--config", type=str, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", type=str, required=True)
    p.add_argument("--workers", type=int, default=None,
                   help="process count (default: QG_WORKERS or 1)")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_suite_maxcut)

    p = sub.add_parser("landscape", help="parameter grids and attractor witnesses")
    p.add_argument("--config", type=str, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", type=str, required=True)
    p.set_defaults(func=cmd_landscape)

    p = sub.add_parser("verify", help="identity and bound battery")
    p.add_argument("--level", type=str, default="default",
                   choices=["default", "deep"])
    p.add_argument("--perturb-correlation", type=float, default=0.0,
                   help="fault injection: mis-scale one identity side to "
                        "confirm the battery fails")
    p.add_argument("--out-dir", type=str, default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="summarize a run directory")
    p.add_argument("--out-dir", type=str, required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return int(err.code or 0)
    try:
        return args.func(args)
    except (ConfigError, EnumerationCapError, ValueError, OSError) as err:
        print(f"{args.command}: {err}", file=sys.stderr)
        return EXIT_BAD_CONFIG


if __name__ == "__main__":
    sys.exit(main())
