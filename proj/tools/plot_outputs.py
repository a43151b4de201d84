#!/usr/bin/env python3
"""Render the CSV outputs of optomech_cli: Wigner map, outcome density and kernels.

Usage: plot_outputs.py OUT_DIR [--save FILE]
Requires numpy and matplotlib; not needed to build or test the library.
"""
import argparse
import json
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np


def load(path):
    with open(path) as f:
        lines = [ln for ln in f if not ln.startswith("#")]
    return np.genfromtxt(lines, delimiter=",", names=True)


def grid(data, a, b, v):
    xs, ps = np.unique(data[a]), np.unique(data[b])
    return xs, ps, data[v].reshape(len(xs), len(ps)).T


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out_dir", type=Path)
    ap.add_argument("--save", type=Path)
    args = ap.parse_args()

    summary = json.loads((args.out_dir / "summary.json").read_text())
    fig, axes = plt.subplots(1, 3, figsize=(15, 4.5))

    x, p, w = grid(load(args.out_dir / "wigner.csv"), "X", "P", "W")
    lim = np.abs(w).max()
    im = axes[0].pcolormesh(x, p, w, cmap="RdBu_r", vmin=-lim, vmax=lim, shading="auto")
    axes[0].contour(x, p, w, levels=[0.0], colors="k", linewidths=0.6)
    z = summary["outcome"]["Z"]
    axes[0].set(xlabel="X", ylabel="P", title=f"W(X,P), Z = {z[0]:.3f} {z[1]:+.3f}i")
    fig.colorbar(im, ax=axes[0])

    re, im_z, dens = grid(load(args.out_dir / "outcome_density.csv"), "Re_Z", "Im_Z", "w")
    axes[1].pcolormesh(re, im_z, dens, shading="auto")
    axes[1].plot([z[0]], [z[1]], "r+", ms=12)
    axes[1].set(xlabel="Re Z", ylabel="Im Z", title="outcome density w[Z]")

    k = load(args.out_dir / "kernels.csv")
    axes[2].plot(k["t"], k["K_x"], label="K_x")
    axes[2].plot(k["t"], k["K_p"], label="K_p")
    ax2 = axes[2].twinx()
    ax2.plot(k["t"], k["Re_L"], "k--", lw=0.8, label="Re L")
    ax2.plot(k["t"], k["Im_L"], "k:", lw=0.8, label="Im L")
    axes[2].set(xlabel="t", title="kernels (t <= 0)")
    axes[2].legend(loc="upper left")
    ax2.legend(loc="lower left")

    fig.suptitle(f"{summary['config']['scenario']}: min W = {summary['wigner']['min_value']:.3e}")
    fig.tight_layout()
    if args.save:
        fig.savefig(args.save, dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    main()
