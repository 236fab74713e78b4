"""Generators whose outputs have prescribed asymptotic noise.

Besides i.i.d. digits from an arbitrary probability vector, this module
interleaves two sources along a decidable index set, produces the biased
families u_i whose width-independent noise is s + (1-s-1/b)/i, and glues
such samples over super-polynomially growing blocks so the running noise
estimate drifts down toward its target s.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .digitseq import DigitSeq, _digit_dtype


class LengthError(ValueError):
    """A source ran out of digits before the requested length."""


@dataclass(frozen=True)
class ProbVector:
    """Probability distribution over the digits of one base.

    Entries may be floats or Fractions; exact entries are validated
    exactly, floats to 1e-12.
    """

    base: int
    p: tuple

    def __post_init__(self):
        if self.base < 2:
            raise ValueError(f"base must be >= 2, got {self.base}")
        p = tuple(self.p)
        if len(p) != self.base:
            raise ValueError(f"need {self.base} probabilities, got {len(p)}")
        if any(v < 0 for v in p):
            raise ValueError("probabilities must be nonnegative")
        total = sum(p)
        if all(isinstance(v, (int, Fraction)) for v in p):
            if total != 1:
                raise ValueError(f"probabilities sum to {total}, not 1")
        elif abs(float(total) - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {float(total)}, not 1")
        object.__setattr__(self, "p", p)

    def as_floats(self) -> np.ndarray:
        return np.array([float(v) for v in self.p], dtype=np.float64)

    def max_digit_prob(self):
        return max(self.p)


def bernoulli_seq(pv: ProbVector, n: int, seed: int) -> DigitSeq:
    """n i.i.d. digits with law pv, drawn from a seeded PCG64 stream."""
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(pv.as_floats())[:-1]
    digits = np.searchsorted(cdf, rng.random(n), side="right")
    return DigitSeq(pv.base, digits.astype(np.int64))


@dataclass(frozen=True)
class Progression:
    """Arithmetic progression {n : n == residue (mod modulus)}."""

    residue: int
    modulus: int

    def __post_init__(self):
        if self.modulus < 1 or not 0 <= self.residue < self.modulus:
            raise ValueError(f"bad progression {self.residue} mod {self.modulus}")

    def member_array(self, n: int) -> np.ndarray:
        return np.arange(n) % self.modulus == self.residue

    def density(self) -> Fraction:
        return Fraction(1, self.modulus)


@dataclass(frozen=True)
class ProgressionUnion:
    progressions: tuple

    def member_array(self, n: int) -> np.ndarray:
        out = np.zeros(n, dtype=bool)
        for pr in self.progressions:
            out |= pr.member_array(n)
        return out


@dataclass(frozen=True)
class PeriodicMask:
    """Membership repeating a fixed 0/1 pattern."""

    mask: tuple

    def __post_init__(self):
        mask = tuple(bool(b) for b in self.mask)
        if not mask:
            raise ValueError("mask must be nonempty")
        object.__setattr__(self, "mask", mask)

    def member_array(self, n: int) -> np.ndarray:
        period = len(self.mask)
        reps = -(-n // period)
        return np.tile(np.array(self.mask, dtype=bool), reps)[:n]


def progression_partition(i_max: int) -> list[Progression]:
    """Partition of the naturals into i_max dyadic progressions plus a
    residual: piece i is {n == 2**i - 1 (mod 2**(i+1))}, the residual
    {n == 2**i_max - 1 (mod 2**i_max)}."""
    if i_max < 1:
        raise ValueError("i_max must be >= 1")
    pieces = [Progression(2 ** i - 1, 2 ** (i + 1)) for i in range(i_max)]
    pieces.append(Progression(2 ** i_max - 1, 2 ** i_max))
    return pieces


def interleave(a_set, x: DigitSeq, y: DigitSeq, n: int | None = None) -> DigitSeq:
    """Splice x onto the index set and y onto its complement.

    Position m takes x[k] when m is the k-th member of the set, else the
    next unused digit of y.  Without an explicit n the output is the
    longest prefix both sources can fill; an explicit n beyond that
    raises LengthError.
    """
    if x.base != y.base:
        raise ValueError(f"mixed bases {x.base} and {y.base}")
    horizon = len(x) + len(y) if n is None else n
    member = np.asarray(a_set.member_array(horizon) if hasattr(a_set, "member_array")
                        else a_set[:horizon], dtype=bool)
    if member.size < horizon:
        raise ValueError("membership mask shorter than requested length")
    need_x = np.cumsum(member)
    need_y = np.arange(1, horizon + 1) - need_x
    ok = (need_x <= len(x)) & (need_y <= len(y))
    feasible = int(np.argmin(ok)) if not ok.all() else horizon
    if n is None:
        n = feasible
    elif feasible < n:
        raise LengthError(
            f"sources exhausted at position {feasible} of requested {n}"
        )
    member = member[:n]
    out = np.empty(n, dtype=_digit_dtype(x.base))
    out[member] = x.digits[: int(member.sum())]
    out[~member] = y.digits[: n - int(member.sum())]
    return DigitSeq(x.base, out)


def rauzy_u_probs(i: int, s, base: int) -> ProbVector:
    """Digit law whose best-predictor noise is s + (1-s-1/b)/i at every
    window width: digit 0 carries 1 - that much, the rest share evenly."""
    if i < 1:
        raise ValueError(f"index i must be >= 1, got {i}")
    b = base
    exact = isinstance(s, (int, Fraction))
    s = Fraction(s) if exact else float(s)
    inv_b = Fraction(1, b) if exact else 1.0 / b
    cap = Fraction(b - 1, b) if exact else (b - 1) / b
    if not 0 <= s < cap:
        raise ValueError(f"need 0 <= s < (b-1)/b, got s={s}")
    miss = s + (1 - s - inv_b) / i
    if miss > cap + (0 if exact else 1e-15):
        raise ValueError(f"noise target {miss} exceeds (b-1)/b")
    rest = miss / (b - 1)
    return ProbVector(b, (1 - miss,) + (rest,) * (b - 1))


def rauzy_u(i: int, s, base: int, n: int, seed: int) -> DigitSeq:
    """Sample n digits of the biased family member u_i."""
    return bernoulli_seq(rauzy_u_probs(i, s, base), n, seed)


def concat_schedule(j_max: int) -> list[int]:
    """Block boundaries a_1..a_{j_max+1} with a_1 = 1 and
    a_{j+1} = a_j * (j**2 + 1), so a_{j+1}/a_j > j**2."""
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    bounds = [1]
    for j in range(1, j_max + 1):
        bounds.append(bounds[-1] * (j * j + 1))
    return bounds


def indicator_min(x_table, j: int) -> int:
    """m(j) = min(j, first row index whose entry at column j is 1)."""
    for i, row in enumerate(x_table):
        if i >= j:
            break
        if j < len(row) and row[j]:
            return i
    return j


def block_concat(x_table, s, base: int, j_max: int, seed: int) -> DigitSeq:
    """Concatenate fresh u_{m(j)} samples over the blocks [a_j, a_{j+1}).

    Every block is replayable on its own: block j draws from the stream
    seeded by (seed, j).  m(j) = 0 is lifted to 1, the closest defined
    family member.  Position 0 precedes the first block and is 0.
    """
    bounds = concat_schedule(j_max)
    out = np.zeros(bounds[-1], dtype=_digit_dtype(base))
    for j in range(1, j_max + 1):
        lo, hi = bounds[j - 1], bounds[j]
        i = max(1, indicator_min(x_table, j))
        pv = rauzy_u_probs(i, s, base)
        rng = np.random.default_rng([seed, j])
        cdf = np.cumsum(pv.as_floats())[:-1]
        out[lo:hi] = np.searchsorted(cdf, rng.random(hi - lo), side="right")
    return DigitSeq(base, out)
