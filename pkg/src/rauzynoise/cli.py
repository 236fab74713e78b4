"""Command-line front end.

Four subcommands: `analyze` profiles the prediction noise of a digit
file, `generate` writes digit files from the library's sources,
`bounds` exports the dimension-bound curves, and `oracle` replays the
exact-reduction check against literal block-function enumeration.

Every command is a pure function of its arguments, seeds, and input
bytes; randomized generators demand an explicit --seed.  Exit codes:
0 success, 2 unreadable input, 64 bad usage or parameter values, 70
internal assertion failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from math import log

import numpy as np

from . import __version__
from .digitseq import (
    DigitSeq,
    ParseError,
    _digit_dtype,
    champernowne,
    expand_rational,
    read_digits,
    uniform_random,
    write_digits,
    write_sidecar,
)
from .generators import (
    LengthError,
    ProbVector,
    Progression,
    bernoulli_seq,
    block_concat,
    interleave,
)
from .marker_codec import (
    CodecParams,
    WindowPredictor,
    build_v,
    payload_track,
    verify_block_errors,
)
from .measures import MarkovSpec, dim_curve, entropy, measure_noise, sample_markov
from .predictor import (
    beta_E,
    beta_ell,
    beta_ell_bruteforce,
    classify,
    default_grid,
    noise_profile,
    usable_length,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_USAGE = 64
EXIT_INTERNAL = 70


class UsageError(Exception):
    """Bad flags or parameter values (exit 64)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _scalar(text: str):
    """Probability-like scalar: `3/4` stays exact, `0.75` is a float."""
    text = text.strip()
    try:
        return Fraction(text) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad numeric value {text!r}: {exc}") from None


def _prob_list(text: str) -> tuple:
    return tuple(_scalar(tok) for tok in text.split(","))


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad integer list {text!r}: {exc}") from None


def _emit(seq: DigitSeq, out: str, manifest: dict) -> None:
    write_digits(seq, out)
    manifest.update({
        "command": "generate",
        "output": str(out),
        "length": len(seq),
        "base": seq.base,
        "sha256": seq.sha256(),
        "tool_version": __version__,
    })
    write_sidecar(out, manifest)
    print(f"wrote {out} ({len(seq)} digits, base {seq.base})")


def cmd_analyze(args) -> int:
    x = read_digits(args.input)
    usable = usable_length(x, args.ell_max)
    if usable < 1:
        raise UsageError(f"input too short for ell_max={args.ell_max}")
    grid = _int_list(args.grid) if args.grid else default_grid(usable, args.grid_start)
    source = {
        "input": str(args.input),
        "sha256": x.sha256(),
        "length": len(x),
        "generator": "file",
    }
    profile = noise_profile(
        x, args.ell_max, grid,
        orientation=args.orientation,
        tail_fraction=args.tail_fraction,
        threads=args.threads,
        source=source,
    )
    prefix = args.out_prefix if args.out_prefix else str(args.input)
    profile.to_csv(prefix + ".profile.csv")
    profile.to_json(prefix + ".profile.json")
    write_sidecar(prefix + ".profile", {
        "command": "analyze",
        "input": str(args.input),
        "input_sha256": x.sha256(),
        "ell_max": args.ell_max,
        "grid": grid,
        "orientation": args.orientation,
        "tail_fraction": args.tail_fraction,
        "tol": args.tol,
        "threads": args.threads,
        "outputs": [prefix + ".profile.csv", prefix + ".profile.json"],
        "tool_version": __version__,
    })
    print(classify(profile, args.tol))
    return EXIT_OK


def _gen_bernoulli(args) -> int:
    probs = _prob_list(args.probs)
    pv = ProbVector(len(probs), probs)
    seq = bernoulli_seq(pv, args.n, args.seed)
    _emit(seq, args.out, {
        "kind": "bernoulli",
        "probs": [str(v) if isinstance(v, Fraction) else v for v in probs],
        "seed": args.seed,
        "rng": "numpy PCG64",
    })
    return EXIT_OK


def _gen_markov(args) -> int:
    try:
        with open(args.spec, "r", encoding="ascii") as fh:
            spec = MarkovSpec.from_json_obj(json.load(fh))
    except (KeyError, json.JSONDecodeError) as exc:
        raise ParseError(f"bad spec file {args.spec}: {exc}") from None
    seq = sample_markov(spec, args.n, args.seed)
    h = entropy(spec)
    scale = log(args.log_base) if args.log_base else 1.0
    _emit(seq, args.out, {
        "kind": "markov",
        "spec_file": str(args.spec),
        "spec": spec.to_json_obj(),
        "entropy_nats": h,
        "entropy": h / scale,
        "entropy_log_base": args.log_base,
        "measure_noise": float(measure_noise(spec)),
        "seed": args.seed,
        "rng": "numpy PCG64",
    })
    return EXIT_OK


def _gen_champernowne(args) -> int:
    _emit(champernowne(args.base, args.n), args.out,
          {"kind": "champernowne"})
    return EXIT_OK


def _gen_rational(args) -> int:
    seq = expand_rational(args.p, args.q, args.base, args.n)
    _emit(seq, args.out, {"kind": "rational", "p": args.p, "q": args.q})
    return EXIT_OK


def _gen_interleave(args) -> int:
    prog = Progression(args.residue, args.modulus)
    members = int(prog.member_array(args.n).sum())
    x = uniform_random(args.base, members, args.seed)
    y = DigitSeq(args.base, np.zeros(args.n - members, dtype=_digit_dtype(args.base)))
    seq = interleave(prog, x, y, args.n)
    _emit(seq, args.out, {
        "kind": "interleave",
        "residue": args.residue,
        "modulus": args.modulus,
        "x": "uniform",
        "y": "zeros",
        "seed": args.seed,
        "rng": "numpy PCG64",
    })
    return EXIT_OK


def _gen_block_concat(args) -> int:
    if args.x_table:
        try:
            with open(args.x_table, "r", encoding="ascii") as fh:
                x_table = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad x-table file {args.x_table}: {exc}") from None
    else:
        x_table = []
    s = _scalar(args.s)
    seq = block_concat(x_table, s, args.base, args.j_max, args.seed)
    _emit(seq, args.out, {
        "kind": "block-concat",
        "s": str(s) if isinstance(s, Fraction) else s,
        "j_max": args.j_max,
        "x_table": x_table,
        "seed": args.seed,
        "rng": "numpy PCG64",
    })
    return EXIT_OK


def _gen_rauzy_codec(args) -> int:
    ell = args.ell if args.ell else CodecParams.min_ell(args.base, args.k)
    params = CodecParams(args.base, args.k, ell)
    u = uniform_random(args.base, args.blocks * args.k, args.seed)
    v = build_v(u, params, args.blocks)
    counts = verify_block_errors(v, params, args.blocks)
    report = {
        "schema_version": 1,
        "params": {
            "base": params.base, "k": params.k, "ell": params.ell,
            "p": params.p, "window": params.window,
            "block_len": params.block_len,
        },
        "n_blocks": args.blocks,
        "block_errors": counts.tolist(),
        "error_histogram": {str(c): int(n) for c, n in
                            zip(*np.unique(counts, return_counts=True))},
        "noise_bound": float(params.noise_bound),
    }
    w = params.window
    if len(v) > w:
        miss = beta_E(v, WindowPredictor(params), len(v) - w, orientation="next")
        report["beta_window"] = {
            "mismatches": miss.numerator, "scored": miss.denominator,
            "value": float(miss),
        }
    track = payload_track(params, v)
    if len(track) > 1:
        track_beta = beta_ell(track, 1, len(track) - 1, orientation="previous")[0]
        d = Fraction(params.k, params.block_len)
        report["payload_track"] = {
            "length": len(track),
            "beta_1": float(track_beta),
            "reference_noise": float(d * Fraction(params.base - 1, params.base)),
        }
    with open(args.out + ".report.json", "w", encoding="ascii") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _emit(v, args.out, {
        "kind": "rauzy-codec",
        "k": args.k,
        "ell": params.ell,
        "blocks": args.blocks,
        "seed": args.seed,
        "rng": "numpy PCG64",
        "report": str(args.out) + ".report.json",
    })
    print(f"max block errors: {int(counts.max(initial=0))} (bound 2)")
    return EXIT_OK


_GEN_DISPATCH = {
    "bernoulli": _gen_bernoulli,
    "markov": _gen_markov,
    "champernowne": _gen_champernowne,
    "rational": _gen_rational,
    "interleave": _gen_interleave,
    "block-concat": _gen_block_concat,
    "rauzy-codec": _gen_rauzy_codec,
}


def cmd_generate(args) -> int:
    return _GEN_DISPATCH[args.kind](args)


def cmd_bounds(args) -> int:
    curve = dim_curve(args.base, args.grid)
    prefix = args.out_prefix if args.out_prefix else f"bounds_b{args.base}"
    csv_path, json_path = prefix + ".csv", prefix + ".json"
    with open(csv_path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("s,lower,upper,A1,A2,A4,L\n")
        for row in curve:
            fh.write(f"{row.s!r},{row.lower!r},{row.upper!r},"
                     f"{row.A1!r},{row.A2!r},{row.A4!r},{row.L!r}\n")
    with open(json_path, "w", encoding="ascii") as fh:
        json.dump({
            "schema_version": 1,
            "base": args.base,
            "grid_size": args.grid,
            "s": [row.s for row in curve],
            "lower": [row.lower for row in curve],
            "upper": [row.upper for row in curve],
            "A1": [row.A1 for row in curve],
            "A2": [row.A2 for row in curve],
            "A4": [row.A4 for row in curve],
            "L": [row.L for row in curve],
        }, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {csv_path} and {json_path} ({len(curve)} rows)")
    if args.plot:
        _render_plot(curve, args.base, args.plot)
        print(f"wrote {args.plot}")
    return EXIT_OK


def _render_plot(curve, base, path) -> None:
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        raise UsageError("plot output requires matplotlib") from None
    s = [row.s for row in curve]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(s, [row.lower for row in curve], label="lower")
    ax.plot(s, [row.upper for row in curve], label="upper")
    ax.set_xlabel("s")
    ax.set_ylabel("dimension")
    ax.set_title(f"dimension bounds, base {base}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def cmd_oracle(args) -> int:
    mismatches = []
    for trial in range(args.trials):
        x = uniform_random(args.base, args.length, [args.seed, trial])
        N = usable_length(x, args.ell)
        exact = beta_ell(x, args.ell, N)[0]
        brute = beta_ell_bruteforce(x, args.ell, N, enum_cap=args.enum_cap)
        if exact != brute:
            mismatches.append((trial, exact, brute))
    print(f"oracle: {args.trials - len(mismatches)}/{args.trials} trials agree "
          f"(base {args.base}, ell {args.ell}, length {args.length})")
    for trial, exact, brute in mismatches:
        print(f"  trial {trial}: reduction={exact} enumeration={brute}")
    return EXIT_OK if not mismatches else 1


def _build_parser() -> _Parser:
    parser = _Parser(prog="rauzynoise",
                     description="prediction noise of digit sequences")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    pa = sub.add_parser("analyze", help="noise profile of a digit file")
    pa.add_argument("input")
    pa.add_argument("--ell-max", type=int, default=6)
    pa.add_argument("--orientation", choices=("previous", "next"),
                    default="previous")
    pa.add_argument("--grid", help="comma-separated N values")
    pa.add_argument("--grid-start", type=int, default=1024)
    pa.add_argument("--tail-fraction", type=float, default=0.5)
    pa.add_argument("--tol", type=float, default=0.01)
    pa.add_argument("--threads", type=int, default=1)
    pa.add_argument("--out-prefix")
    pa.set_defaults(func=cmd_analyze)

    pg = sub.add_parser("generate", help="write a digit file")
    gsub = pg.add_subparsers(dest="kind", required=True, parser_class=_Parser)

    g = gsub.add_parser("bernoulli")
    g.add_argument("--probs", required=True,
                   help="comma-separated digit probabilities (floats or p/q)")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)

    g = gsub.add_parser("markov")
    g.add_argument("--spec", required=True, help="MarkovSpec JSON file")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--log-base", type=int,
                   help="also render entropy divided by log of this base")
    g.add_argument("--out", required=True)

    g = gsub.add_parser("champernowne")
    g.add_argument("--base", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--out", required=True)

    g = gsub.add_parser("rational")
    g.add_argument("--p", type=int, required=True)
    g.add_argument("--q", type=int, required=True)
    g.add_argument("--base", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--out", required=True)

    g = gsub.add_parser("interleave")
    g.add_argument("--base", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--residue", type=int, default=0)
    g.add_argument("--modulus", type=int, default=2)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)

    g = gsub.add_parser("block-concat")
    g.add_argument("--base", type=int, required=True)
    g.add_argument("--s", required=True, help="noise target (float or p/q)")
    g.add_argument("--j-max", type=int, required=True)
    g.add_argument("--x-table", help="JSON file with indicator rows")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)

    g = gsub.add_parser("rauzy-codec")
    g.add_argument("--base", type=int, default=2)
    g.add_argument("--k", type=int, default=5)
    g.add_argument("--ell", type=int,
                   help="gap budget; defaults to the smallest admissible value")
    g.add_argument("--blocks", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)

    pg.set_defaults(func=cmd_generate)

    pb = sub.add_parser("bounds", help="dimension-bound curves")
    pb.add_argument("--base", type=int, required=True)
    pb.add_argument("--grid", type=int, default=1000)
    pb.add_argument("--out-prefix")
    pb.add_argument("--plot", help="optional plot file (requires matplotlib)")
    pb.set_defaults(func=cmd_bounds)

    po = sub.add_parser("oracle",
                        help="exact-reduction check vs. literal enumeration")
    po.add_argument("--base", type=int, required=True)
    po.add_argument("--ell", type=int, required=True)
    po.add_argument("--length", type=int, default=256)
    po.add_argument("--trials", type=int, default=100)
    po.add_argument("--seed", type=int, required=True)
    po.add_argument("--enum-cap", type=int, default=100_000)
    po.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, ArithmeticError) as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit:
        raise
    except Exception as exc:  # pragma: no cover - internal assertion
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
