"""Landscape figures for the three-solution reference instance.

Produces, in one output directory:

  grids.svg        side-by-side heat maps of the plain, entropy-regularized,
                   and mixture objectives over the fixed 2-D parameter slice,
                   with each argmin marked;
  ray_scan.svg     gradient norm along the concentrating ray tau * direction
                   for the fast-only generator (collapses) and the
                   fast/slow mixture (stays macroscopic), log-log;
  bad_vertex.json  a verified strictly-attracting non-optimal cut vertex on a
                   small random graph, if one exists at the searched seed.

Usage: python scripts/make_landscape_figures.py --out runs/landscape
"""

import argparse
import json
import sys
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from quasargen import landscape as ls
from quasargen.encodings import encode_maxcut
from quasargen.problems import erdos_renyi


def plot_grids(out, lam, beta, rho, resolution):
    fig, axes = plt.subplots(1, 3, figsize=(12.5, 4), constrained_layout=True)
    for ax, objective in zip(axes, ("plain", "entropy", "mixture")):
        spec = ls.GridSpec(axis1=np.array([1.0, 0.0]), axis2=np.array([0.0, 1.0]),
                           resolution=resolution, objective=objective)
        res = ls.grid_eval(ls.REFERENCE_FEATURES, ls.REFERENCE_COST_DIRECTION,
                           lam=lam, beta=beta, rho=rho, spec=spec)
        im = ax.pcolormesh(res.a_values, res.b_values, res.values.T,
                           shading="nearest", cmap="viridis")
        a, b = res.argmin_point()
        ax.plot([a], [b], "r*", markersize=12)
        where = "interior" if res.argmin_interior else "boundary"
        ax.set_title(f"{objective} (argmin {where})")
        ax.set_xlabel("$w_1$")
        fig.colorbar(im, ax=ax)
    axes[0].set_ylabel("$w_2$")
    fig.savefig(out / "grids.svg")
    plt.close(fig)


def plot_ray_scan(out, lam, beta, rho, seed):
    e = encode_maxcut(erdos_renyi(4, 0.6, seed))
    taus = np.geomspace(0.1, 100.0, 25)
    fig, ax = plt.subplots(figsize=(5, 4), constrained_layout=True)
    for b, label in ((0.0, "fast only"), (beta, f"mixture (beta={beta:g})")):
        scan = ls.vanishing_gradient_scan(e, -e.M, taus, lam=lam, beta=b, rho=rho)
        ax.loglog([t for t, _ in scan], [g for _, g in scan], marker=".",
                  label=label)
    ax.set_xlabel("ray position tau")
    ax.set_ylabel("gradient norm")
    ax.legend()
    fig.savefig(out / "ray_scan.svg")
    plt.close(fig)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/landscape")
    ap.add_argument("--lam", type=float, default=1.0)
    ap.add_argument("--beta", type=float, default=0.2)
    ap.add_argument("--rho", type=float, default=0.03)
    ap.add_argument("--resolution", type=int, default=41)
    ap.add_argument("--witness-n", type=int, default=8)
    ap.add_argument("--witness-seed", type=int, default=0)
    args = ap.parse_args(argv)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    plot_grids(out, args.lam, args.beta, args.rho, args.resolution)
    plot_ray_scan(out, args.lam, args.beta, args.rho, seed=5)

    witness = ls.find_bad_vertex(erdos_renyi(args.witness_n, 0.5,
                                             args.witness_seed))
    with open(out / "bad_vertex.json", "w") as fh:
        json.dump(witness.to_dict() if witness else None, fh, indent=2)
    if witness:
        print(f"attracting non-optimal vertex: cut {witness.cut:g} "
              f"< maxcut {witness.maxcut:g}")
    else:
        print("no attracting non-optimal vertex at this seed")
    print(f"figures in {out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
