#!/usr/bin/env python3
"""Tabulate and plot the dimension bound curves for several bases.

Writes one CSV per base plus an overlay plot of the lower/upper pairs
across the requested noise range.
"""

import argparse
import pathlib
import sys

from rauzynoise.measures import dim_curve


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--bases", default="2,3,10",
                    help="comma-separated list of bases")
    ap.add_argument("--grid", type=int, default=500)
    ap.add_argument("--out-dir", default="dim_curves")
    ap.add_argument("--plot", action="store_true",
                    help="also write an overlay PNG (needs matplotlib)")
    args = ap.parse_args(argv)

    bases = [int(b) for b in args.bases.split(",")]
    out_dir = pathlib.Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    curves = {}
    for base in bases:
        curve = dim_curve(base, args.grid)
        curves[base] = curve
        path = out_dir / f"dim_base{base}.csv"
        with open(path, "w", encoding="ascii") as fh:
            fh.write("s,lower,upper\n")
            for d in curve:
                fh.write(f"{d.s!r},{d.lower!r},{d.upper!r}\n")
        widest = max(d.upper - d.lower for d in curve)
        print(f"base {base}: {len(curve)} rows -> {path} "
              f"(widest gap {widest:.4f})")

    if args.plot:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(7, 5))
        for base, curve in curves.items():
            s = [d.s for d in curve]
            ax.plot(s, [d.lower for d in curve], label=f"base {base} lower")
            ax.plot(s, [d.upper for d in curve], "--",
                    label=f"base {base} upper")
        ax.set_xlabel("prescribed noise s")
        ax.set_ylabel("dimension bound")
        ax.set_ylim(0, 1.05)
        ax.legend(fontsize=8)
        ax.grid(alpha=0.3)
        png = out_dir / "dim_curves.png"
        fig.savefig(png, dpi=150, bbox_inches="tight")
        print(f"plot -> {png}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
