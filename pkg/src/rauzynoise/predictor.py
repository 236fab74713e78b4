"""Finite-window prediction noise of digit sequences.

For a width-ell block function E, the noise of x over N scored positions
is the fraction of positions whose digit differs from E applied to the
ell digits beside it; the window sits after the digit in the "previous"
orientation and before it in the "next" orientation.  The width-ell
noise beta_ell takes the best E for the scored window, which reduces to
a majority vote inside each context word.  Counts are carried as exact
integers so the reduction can be compared against literal enumeration
of every block function.
"""

from __future__ import annotations

import json
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil

import numpy as np

from .digitseq import DigitSeq

ORIENTATIONS = ("previous", "next")

# Context codes are packed into int64; wider windows fall back to byte keys.
_CODE_LIMIT = 2 ** 62
_DENSE_TABLE_CAP = 2 ** 24


def usable_length(x: DigitSeq, ell: int) -> int:
    """Number of positions of x with a full width-ell context."""
    return max(len(x) - ell, 0)


def _check_window(x, ell, N, orientation):
    if orientation not in ORIENTATIONS:
        raise ValueError(f"orientation must be one of {ORIENTATIONS}, got {orientation!r}")
    if ell < 1:
        raise ValueError(f"window width must be >= 1, got {ell}")
    usable = usable_length(x, ell)
    if not 1 <= N <= usable:
        raise ValueError(f"N={N} outside [1, {usable}] scored positions for ell={ell}")


def _int_codes_fit(base, ell):
    return base ** (ell + 1) < _CODE_LIMIT


def _context_codes(arr, base, ell, N, orientation):
    """Big-endian int64 context codes for the first N scored positions."""
    off = 1 if orientation == "previous" else 0
    codes = np.zeros(N, dtype=np.int64)
    for j in range(ell):
        codes += arr[off + j : off + j + N].astype(np.int64) * base ** (ell - 1 - j)
    return codes


def _scored_digits(arr, ell, N, orientation):
    if orientation == "previous":
        return arr[:N]
    return arr[ell : ell + N]


def _context_windows(arr, base, ell, N, orientation):
    """Context byte strings for widths whose codes overflow int64."""
    if base > 256:
        raise ValueError(
            f"width {ell} with base {base} is too large for either context encoding"
        )
    buf = np.ascontiguousarray(arr, dtype=np.uint8).tobytes()
    off = 1 if orientation == "previous" else 0
    return [buf[off + i : off + i + ell] for i in range(N)]


class BlockFunction:
    """Total function from width-`width` words to digits.

    Dense storage is an array indexed by the big-endian word code; sparse
    storage maps word tuples to digits with a default for the rest.
    """

    __slots__ = ("base", "width", "dense", "sparse", "default")

    def __init__(self, base, width, dense=None, sparse=None, default=0):
        if base < 2 or width < 1:
            raise ValueError("need base >= 2 and width >= 1")
        if (dense is None) == (sparse is None):
            raise ValueError("exactly one of dense/sparse storage required")
        if dense is not None:
            dense = np.asarray(dense)
            if dense.shape != (base ** width,):
                raise ValueError(
                    f"dense table must have base**width = {base ** width} entries"
                )
            if dense.size and (int(dense.min()) < 0 or int(dense.max()) >= base):
                raise ValueError("table values must be digits in range")
            dense = np.ascontiguousarray(dense, dtype=np.int64)
            dense.flags.writeable = False
        else:
            for word, d in sparse.items():
                if len(word) != width or not 0 <= d < base:
                    raise ValueError(f"bad sparse entry {word!r} -> {d}")
            if not 0 <= default < base:
                raise ValueError(f"default digit {default} out of range")
        self.base = base
        self.width = width
        self.dense = dense
        self.sparse = sparse
        self.default = default

    @classmethod
    def from_table(cls, base, width, table):
        return cls(base, width, dense=table)

    @classmethod
    def constant(cls, base, width, digit):
        return cls(base, width, sparse={}, default=digit)

    def predict(self, word) -> int:
        word = tuple(int(d) for d in word)
        if len(word) != self.width:
            raise ValueError(f"word length {len(word)} != width {self.width}")
        if self.dense is not None:
            code = 0
            for d in word:
                code = code * self.base + d
            return int(self.dense[code])
        return self.sparse.get(word, self.default)

    def predict_codes(self, codes: np.ndarray) -> np.ndarray:
        if self.dense is None:
            raise ValueError("sparse block function has no code table")
        return self.dense[codes]


def _pair_counts_int(arr, base, ell, start, stop, orientation):
    codes = _context_codes(arr, base, ell, stop, orientation)[start:stop]
    digits = _scored_digits(arr, ell, stop, orientation)[start:stop].astype(np.int64)
    pair = codes * base + digits
    uniq, cnt = np.unique(pair, return_counts=True)
    return dict(zip(uniq.tolist(), cnt.tolist()))


def _pair_counts_bytes(arr, base, ell, start, stop, orientation):
    ctx = _context_windows(arr, base, ell, stop, orientation)
    digits = _scored_digits(arr, ell, stop, orientation)
    out = Counter()
    for i in range(start, stop):
        out[ctx[i] + bytes([int(digits[i])])] += 1
    return dict(out)


@dataclass(frozen=True)
class ContextTable:
    """Occurrence counts of (context word, scored digit) pairs.

    Tables over the same (base, width, orientation) add pointwise, so a
    sequence may be counted in chunks (chunks overlapping by `width`
    digits through the shared underlying array) and merged in any order.
    """

    base: int
    width: int
    orientation: str
    counts: dict
    total: int

    @classmethod
    def from_seq(cls, x: DigitSeq, ell: int, orientation: str = "previous",
                 start: int = 0, stop: int | None = None) -> "ContextTable":
        if stop is None:
            stop = usable_length(x, ell)
        _check_window(x, ell, stop, orientation)
        if not 0 <= start <= stop:
            raise ValueError(f"bad scored range [{start}, {stop})")
        if _int_codes_fit(x.base, ell):
            counts = _pair_counts_int(x.digits, x.base, ell, start, stop, orientation)
        else:
            counts = _pair_counts_bytes(x.digits, x.base, ell, start, stop, orientation)
        return cls(x.base, ell, orientation, counts, stop - start)

    def merge(self, other: "ContextTable") -> "ContextTable":
        if (self.base, self.width, self.orientation) != (
                other.base, other.width, other.orientation):
            raise ValueError("cannot merge tables with different shapes")
        counts = Counter(self.counts)
        counts.update(other.counts)
        return ContextTable(self.base, self.width, self.orientation,
                            dict(counts), self.total + other.total)

    def best_match_count(self) -> int:
        """Sum over contexts of the most frequent digit's count."""
        return _best_match(self.counts, self.base)

    def mismatch_count(self) -> int:
        return self.total - self.best_match_count()

    def witness(self) -> BlockFunction:
        """Majority-vote block function; ties go to the smallest digit,
        unseen contexts to digit 0."""
        if not self.counts:
            return BlockFunction.constant(self.base, self.width, 0)
        first = next(iter(self.counts))
        if isinstance(first, bytes):
            best = {}
            for key, c in sorted(self.counts.items()):
                ctx, d = key[:-1], key[-1]
                if ctx not in best or c > best[ctx][0]:
                    best[ctx] = (c, d)
            mapping = {tuple(ctx): d for ctx, (c, d) in best.items()}
            return BlockFunction(self.base, self.width, sparse=mapping)
        ctxs, digits = _majority_int(self.counts, self.base)
        size = self.base ** self.width
        if size <= _DENSE_TABLE_CAP:
            table = np.zeros(size, dtype=np.int64)
            table[ctxs] = digits
            return BlockFunction.from_table(self.base, self.width, table)
        mapping = {}
        for code, d in zip(ctxs.tolist(), digits.tolist()):
            word = []
            for _ in range(self.width):
                word.append(code % self.base)
                code //= self.base
            mapping[tuple(reversed(word))] = int(d)
        return BlockFunction(self.base, self.width, sparse=mapping)


def _sorted_key_groups(counts, base):
    keys = np.fromiter(counts.keys(), dtype=np.int64, count=len(counts))
    vals = np.fromiter(counts.values(), dtype=np.int64, count=len(counts))
    order = np.argsort(keys)
    keys = keys[order]
    vals = vals[order]
    ctx = keys // base
    starts = np.flatnonzero(np.concatenate(([True], ctx[1:] != ctx[:-1])))
    return keys, vals, ctx, starts


def _best_match(counts, base):
    if not counts:
        return 0
    first = next(iter(counts))
    if isinstance(first, bytes):
        best = {}
        for key, c in counts.items():
            ctx = key[:-1]
            if c > best.get(ctx, 0):
                best[ctx] = c
        return sum(best.values())
    keys, vals, ctx, starts = _sorted_key_groups(counts, base)
    return int(np.maximum.reduceat(vals, starts).sum())


def _majority_int(counts, base):
    """(context codes, majority digits) with smallest-digit tie-break."""
    keys, vals, ctx, starts = _sorted_key_groups(counts, base)
    gmax = np.maximum.reduceat(vals, starts)
    gid = np.cumsum(np.concatenate(([0], (ctx[1:] != ctx[:-1]).astype(np.int64))))
    hit = np.flatnonzero(vals == gmax[gid])
    first = np.full(starts.size, keys.size, dtype=np.int64)
    np.minimum.at(first, gid[hit], hit)
    return ctx[starts], keys[first] % base


def beta_E(x: DigitSeq, E: BlockFunction, N: int,
           orientation: str = "previous") -> Fraction:
    """Noise of x against the explicit block function E over N scored
    positions, as an exact fraction."""
    if E.base != x.base:
        raise ValueError(f"block function base {E.base} != sequence base {x.base}")
    ell = E.width
    _check_window(x, ell, N, orientation)
    digits = _scored_digits(x.digits, ell, N, orientation).astype(np.int64)
    if E.dense is not None and _int_codes_fit(x.base, ell):
        codes = _context_codes(x.digits, x.base, ell, N, orientation)
        miss = int(np.count_nonzero(E.predict_codes(codes) != digits))
    else:
        ctx = _context_windows(x.digits, x.base, ell, N, orientation)
        miss = 0
        for i in range(N):
            if E.predict(tuple(ctx[i])) != digits[i]:
                miss += 1
    return Fraction(miss, N)


def beta_ell(x: DigitSeq, ell: int, N: int, orientation: str = "previous"
             ) -> tuple[Fraction, BlockFunction]:
    """Best width-ell noise over the first N scored positions.

    Returns the exact value together with an optimal block function.
    """
    table = ContextTable.from_seq(x, ell, orientation, 0, N)
    return Fraction(table.mismatch_count(), N), table.witness()


def beta_ell_bruteforce(x: DigitSeq, ell: int, N: int,
                        orientation: str = "previous",
                        enum_cap: int = 100_000) -> Fraction:
    """Minimum of beta_E over literally every width-ell block function.

    Exists to check beta_ell; refuses when base**(base**ell) exceeds
    enum_cap.
    """
    _check_window(x, ell, N, orientation)
    words = x.base ** ell
    n_tables = x.base ** words
    if n_tables > enum_cap:
        raise ValueError(
            f"enumeration of {n_tables} block functions exceeds cap {enum_cap}"
        )
    codes = _context_codes(x.digits, x.base, ell, N, orientation)
    digits = _scored_digits(x.digits, ell, N, orientation).astype(np.int64)
    weights = x.base ** np.arange(words - 1, -1, -1, dtype=np.int64)
    best = N + 1
    chunk = max(1, 2 ** 22 // max(N, 1))
    for lo in range(0, n_tables, chunk):
        idx = np.arange(lo, min(lo + chunk, n_tables), dtype=np.int64)
        tables = (idx[:, None] // weights[None, :]) % x.base
        miss = np.count_nonzero(tables[:, codes] != digits[None, :], axis=1)
        best = min(best, int(miss.min()))
    return Fraction(best, N)


@dataclass(frozen=True)
class ProfileEntry:
    ell: int
    N: int
    mismatches: int
    scored: int

    @property
    def beta(self) -> Fraction:
        return Fraction(self.mismatches, self.scored)


@dataclass
class NoiseProfile:
    """beta_ell values of one sequence over an N-grid.

    The tail window (the trailing `tail_fraction` share of grid points)
    yields per-width lower/upper noise estimates; the grand estimates are
    the ones at the largest width.
    """

    base: int
    orientation: str
    tail_fraction: float
    entries: list = field(default_factory=list)
    source: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.orientation not in ORIENTATIONS:
            raise ValueError(f"bad orientation {self.orientation!r}")
        if not 0 < self.tail_fraction <= 1:
            raise ValueError("tail_fraction must be in (0, 1]")
        self.entries = sorted(self.entries, key=lambda e: (e.ell, e.N))
        cap = Fraction(self.base - 1, self.base)
        for e in self.entries:
            if not 0 <= e.beta <= cap:
                raise ValueError(f"beta out of range at ell={e.ell}, N={e.N}")

    def ells(self):
        return sorted({e.ell for e in self.entries})

    def for_ell(self, ell):
        return [e for e in self.entries if e.ell == ell]

    def tail_entries(self, ell):
        es = self.for_ell(ell)
        if not es:
            raise ValueError(f"no entries for ell={ell}")
        count = max(1, ceil(len(es) * self.tail_fraction))
        return es[-count:]

    def loe_estimate(self, ell=None) -> Fraction:
        ell = self.ells()[-1] if ell is None else ell
        return min(e.beta for e in self.tail_entries(ell))

    def upe_estimate(self, ell=None) -> Fraction:
        ell = self.ells()[-1] if ell is None else ell
        return max(e.beta for e in self.tail_entries(ell))

    def to_json_obj(self) -> dict:
        return {
            "schema_version": 1,
            "base": self.base,
            "orientation": self.orientation,
            "tail_fraction": self.tail_fraction,
            "entries": [
                {"ell": e.ell, "N": e.N, "mismatches": e.mismatches,
                 "scored": e.scored, "beta": e.mismatches / e.scored}
                for e in self.entries
            ],
            "loe_estimates": {str(l): float(self.loe_estimate(l)) for l in self.ells()},
            "upe_estimates": {str(l): float(self.upe_estimate(l)) for l in self.ells()},
            "loe": float(self.loe_estimate()),
            "upe": float(self.upe_estimate()),
            "source": self.source,
        }

    def to_json(self, path) -> None:
        with open(path, "w", encoding="ascii") as fh:
            json.dump(self.to_json_obj(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_json(cls, path) -> "NoiseProfile":
        with open(path, "r", encoding="ascii") as fh:
            obj = json.load(fh)
        entries = [ProfileEntry(e["ell"], e["N"], e["mismatches"], e["scored"])
                   for e in obj["entries"]]
        return cls(obj["base"], obj["orientation"], obj["tail_fraction"],
                   entries, obj.get("source", {}))

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("ell,N,mismatches,scored,beta\n")
            for e in self.entries:
                fh.write(f"{e.ell},{e.N},{e.mismatches},{e.scored},"
                         f"{e.mismatches / e.scored!r}\n")


def default_grid(usable: int, start: int = 1024, ratio: int = 2) -> list[int]:
    """Geometric N-grid capped by (and always ending at) `usable`."""
    if usable < 1:
        raise ValueError("no scored positions available")
    if ratio < 2:
        raise ValueError("ratio must be >= 2")
    grid = []
    n = start
    while n <= usable:
        grid.append(n)
        n *= ratio
    if not grid or grid[-1] != usable:
        grid.append(usable)
    return grid


def noise_profile(x: DigitSeq, ell_max: int, N_grid=None,
                  orientation: str = "previous", tail_fraction: float = 0.5,
                  threads: int = 1, source: dict | None = None) -> NoiseProfile:
    """Exact beta_ell over all widths 1..ell_max and every N in the grid.

    One grid is shared by all widths, so it must fit inside the usable
    length at ell_max.  Counting runs over grid intervals (optionally in
    `threads` workers) and is folded in a fixed order; results do not
    depend on the worker count.
    """
    if ell_max < 1:
        raise ValueError("ell_max must be >= 1")
    usable = usable_length(x, ell_max)
    if N_grid is None:
        N_grid = default_grid(usable)
    N_grid = [int(n) for n in N_grid]
    if not N_grid:
        raise ValueError("empty N grid")
    if sorted(set(N_grid)) != N_grid:
        raise ValueError("N grid must be strictly ascending")
    if N_grid[0] < 1 or N_grid[-1] > usable:
        raise ValueError(f"N grid must lie in [1, {usable}]")

    bounds = [0] + N_grid
    spans = list(zip(bounds[:-1], bounds[1:]))
    entries = []

    def count_span(ell, span):
        return ContextTable.from_seq(x, ell, orientation, span[0], span[1])

    for ell in range(1, ell_max + 1):
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                tables = list(pool.map(lambda s: count_span(ell, s), spans))
        else:
            tables = [count_span(ell, s) for s in spans]
        acc = Counter()
        total = 0
        for (lo, hi), tab in zip(spans, tables):
            acc.update(tab.counts)
            total += tab.total
            entries.append(ProfileEntry(ell, hi, total - _best_match(acc, x.base), total))
    return NoiseProfile(x.base, orientation, tail_fraction, entries,
                        dict(source or {}))


@dataclass(frozen=True)
class Classification:
    kind: str
    loe: float
    upe: float

    def __str__(self):
        if self.kind == "Intermediate":
            return f"Intermediate [{self.loe:.4f}, {self.upe:.4f}]"
        return self.kind


def classify(profile: NoiseProfile, tol: float) -> Classification:
    """NormalLike when the lower estimate reaches (b-1)/b - tol,
    PreservingLike when the upper estimate stays within tol of zero,
    Intermediate otherwise."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    loe = float(profile.loe_estimate())
    upe = float(profile.upe_estimate())
    if loe >= (profile.base - 1) / profile.base - tol:
        return Classification("NormalLike", loe, upe)
    if upe <= tol:
        return Classification("PreservingLike", loe, upe)
    return Classification("Intermediate", loe, upe)
