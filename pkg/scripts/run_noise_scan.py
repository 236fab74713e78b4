#!/usr/bin/env python3
"""Profile the showcase sequences side by side.

Builds one sequence per family (uniform, digit counter, rational, biased
product law, interleave, glued blocks), runs the sliding-window noise
profile on each, and prints a classification table plus the tail
estimates per context width.
"""

import argparse
import sys
from fractions import Fraction

import numpy as np

from rauzynoise.digitseq import DigitSeq, champernowne, expand_rational, uniform_random
from rauzynoise.generators import Progression, bernoulli_seq, block_concat, interleave
from rauzynoise.measures import bernoulli_opt
from rauzynoise.predictor import classify, default_grid, noise_profile, usable_length


def build_corpus(n: int, seed: int):
    half = n // 2
    uni = uniform_random(2, n, seed)
    pv, _ = bernoulli_opt(2, Fraction(1, 4))
    yield "uniform", uni
    yield "champernowne", champernowne(2, n)
    yield "1/7 base 10", expand_rational(1, 7, 10, n)
    yield "product s=1/4", bernoulli_seq(pv, n, seed + 1)
    yield "interleave 1/4", interleave(
        Progression(0, 2),
        uniform_random(2, half, seed + 2),
        DigitSeq(2, np.zeros(half, dtype=np.uint8)),
        n,
    )
    yield "glued s=0.2", block_concat([], 0.2, 2, 6, seed + 3)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=10**6, help="sequence length")
    ap.add_argument("--ell-max", type=int, default=6)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tol", type=float, default=0.01)
    args = ap.parse_args(argv)

    print(f"{'sequence':<16} {'loe':>8} {'upe':>8}  classification")
    for name, x in build_corpus(args.n, args.seed):
        grid = default_grid(usable_length(x, args.ell_max))
        prof = noise_profile(x, ell_max=args.ell_max, N_grid=grid)
        c = classify(prof, tol=args.tol)
        print(f"{name:<16} {float(prof.loe_estimate()):>8.4f} "
              f"{float(prof.upe_estimate()):>8.4f}  {c}")
        widths = "  ".join(
            f"l={ell}:{float(prof.tail_entries(ell)[-1].beta):.4f}"
            for ell in prof.ells())
        print(f"{'':<16} {widths}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
