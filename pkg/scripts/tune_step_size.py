"""One-off step-size grid search for the Max-Cut training suite.

Runs the suite at each step size in the fixed grid and reports, per
(family, step size, variant), how many trials reach the true maximum cut
at any iteration and how many still hold it at the final iterate.  The
chosen values are frozen into SuiteConfig's defaults; rerun this only to
re-derive them.

Usage: python scripts/tune_step_size.py --trials 30 --out tuning.json
"""

import argparse
import json
import sys
import time

from quasargen.experiments import SuiteConfig, run_suite

GRID = (1.0, 0.3, 0.1, 0.03)


def successes(result):
    """Counts per variant: hit at any iteration / holding at the end."""
    out = {}
    for rec in result.records:
        cell = out.setdefault(rec.variant, {"any": 0, "final": 0, "trials": 0})
        cell["trials"] += 1
        cell["any"] += int(rec.success)
        cell["final"] += int(rec.cuts[-1] >= rec.maxcut - 1e-9)
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=30)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--families", nargs="+", default=["linear", "relu"])
    ap.add_argument("--etas", nargs="+", type=float, default=list(GRID))
    ap.add_argument("--iterations", type=int, default=600)
    ap.add_argument("--out", default=None)
    args = ap.parse_args(argv)

    table = {}
    for family in args.families:
        for eta in args.etas:
            cfg = SuiteConfig(trials=args.trials, iterations=args.iterations,
                              eta_linear=eta, eta_relu=eta,
                              families=(family,), seed=args.seed)
            t0 = time.monotonic()
            result = run_suite(cfg)
            counts = successes(result)
            table[f"{family}/eta={eta}"] = counts
            for variant, cell in counts.items():
                print(f"{family:6s} eta={eta:<5g} {variant:11s} "
                      f"any={cell['any']:3d}/{cell['trials']} "
                      f"final={cell['final']:3d}/{cell['trials']} "
                      f"({time.monotonic() - t0:.0f}s)", flush=True)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(table, fh, indent=2)
        print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
