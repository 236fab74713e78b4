"""Marker-stream codec: blocks that a fixed-width window predictor gets
almost entirely right.

Digits are laid out as a long gap of zeros followed by a prefix of one
canonical stream T.  T concatenates per-index cycles

    t_i = a_i . 0 . b_i . 0 . 11111

where b_i is the index written in k base-b digits (least significant
first), a_i spells the binary form of i in the 5-digit chunks 11001 /
11011 (so runs of ones inside a_i never reach five), and 11111 is the
end-of-cycle marker.  A block carrying payload word s with value i is

    0^q . T[: i * cycle_len + 5p + 1 + k]

padded so the total block length is ell + k; the final k digits of the
block are exactly the payload digits b_i.  The gap q is at least the
predictor width w by construction, so no window ever sees structure
from two different blocks.

A width-w window predictor recovers its position inside T from the
first certified marker (a 11111 run preceded by a zero inside the
window), checks the whole window against that placement, and predicts
the next stream digit; it falls back to 0 on any mismatch.  Each block
then contributes exactly two wrong predictions: one right after the
block boundary, where the stream stops instead of finishing its last
cycle, and one at the first nonzero digit after the gap.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .digitseq import DigitSeq, _digit_dtype
from .generators import LengthError

MARKER = (1, 1, 1, 1, 1)
CHUNK0 = (1, 1, 0, 0, 1)
CHUNK1 = (1, 1, 0, 1, 1)


class DecodeError(ValueError):
    """Block content is not a valid encoding."""


def _derived(base: int, k: int) -> tuple[int, int, int]:
    """(p, cycle_len, window) for the given base and payload width."""
    p = max(1, (base ** k - 1).bit_length()) + 1
    cycle_len = 5 * p + k + 7
    window = 2 * (cycle_len + 1)
    return p, cycle_len, window


@dataclass(frozen=True)
class CodecParams:
    """Geometry of the codec: digit base, payload width k, gap budget ell.

    Valid configurations keep payload digits from ever faking an
    end-of-cycle marker mid-stream (k <= 4, plus base 2 with k = 5 where
    the only all-ones index field sits at the very end of T) and make
    ell long enough that every block's zero gap covers at least one
    predictor window.
    """

    base: int
    k: int
    ell: int

    def __post_init__(self):
        if self.base < 2:
            raise ValueError("need base >= 2")
        if self.k < 1:
            raise ValueError("need k >= 1")
        if self.k * (self.base - 1) <= 2 * self.base:
            raise ValueError(
                f"need k(b-1)/b > 2, got k={self.k}, base={self.base}"
            )
        if not (self.k <= 4 or (self.base == 2 and self.k == 5)):
            raise ValueError(
                f"payload digits could fake a marker for base={self.base}, "
                f"k={self.k}; need k <= 4 (or k = 5 in base 2)"
            )
        if self.ell <= 10 * self.k * self.base ** self.k:
            raise ValueError(
                f"ell must exceed 10*k*b^k = {10 * self.k * self.base ** self.k}"
            )
        if self.ell < self.min_ell(self.base, self.k):
            raise ValueError(
                f"ell={self.ell} leaves gaps shorter than the predictor "
                f"window; need ell >= {self.min_ell(self.base, self.k)}"
            )

    @property
    def p(self) -> int:
        return _derived(self.base, self.k)[0]

    @property
    def cycle_len(self) -> int:
        return _derived(self.base, self.k)[1]

    @property
    def window(self) -> int:
        return _derived(self.base, self.k)[2]

    @property
    def block_len(self) -> int:
        return self.ell + self.k

    @property
    def payload_count(self) -> int:
        return self.base ** self.k

    @property
    def noise_bound(self) -> Fraction:
        """Per-block error density of the window predictor."""
        return Fraction(2, self.block_len)

    @staticmethod
    def min_ell(base: int, k: int) -> int:
        """Smallest gap budget: above 10*k*b^k and wide enough that the
        longest stream prefix still leaves a full window of zeros."""
        p, cycle_len, window = _derived(base, k)
        geometric = window + 5 * p + 1 + (base ** k - 1) * cycle_len
        return max(10 * k * base ** k + 1, geometric)

    @classmethod
    def default(cls, base: int, k: int) -> "CodecParams":
        return cls(base, k, cls.min_ell(base, k))


def bin_rep(word, base: int, p: int) -> tuple:
    """Binary digits of the value of a base-b word (least significant
    digit first), LSB-first and zero-padded to p bits.

    p = ceil(log2(b^k)) + 1 keeps the top bit zero for every k-digit
    word."""
    value = payload_value_of(word, base)
    if value >= 2 ** (p - 1):
        raise ValueError(f"value {value} does not fit in {p} bits with a zero top bit")
    return tuple((value >> t) & 1 for t in range(p))


def expand_c(bits) -> tuple:
    """Spell bits in the chunks 0 -> 11001, 1 -> 11011; ones never run
    five in a row inside or across chunks."""
    out = []
    for bit in bits:
        if bit not in (0, 1):
            raise ValueError(f"bits must be 0/1, got {bit}")
        out.extend(CHUNK1 if bit else CHUNK0)
    return tuple(out)


def payload_digits(params: CodecParams, value: int) -> tuple:
    """k base-b digits of value, least significant first."""
    if not 0 <= value < params.payload_count:
        raise ValueError(f"payload {value} out of range [0, {params.payload_count})")
    digits, v = [], value
    for _ in range(params.k):
        digits.append(v % params.base)
        v //= params.base
    return tuple(digits)


def payload_value_of(word, base: int) -> int:
    """Value of an LSB-first base-b digit word."""
    word = tuple(int(d) for d in word)
    if any(not 0 <= d < base for d in word):
        raise ValueError("digit out of range")
    return sum(d * base ** t for t, d in enumerate(word))


def cycle(params: CodecParams, i: int) -> tuple:
    """t_i = a_i . 0 . b_i . 0 . marker, of length cycle_len."""
    b_i = payload_digits(params, i)
    return expand_c(bin_rep(b_i, params.base, params.p)) + (0,) + b_i + (0,) + MARKER


@dataclass(frozen=True)
class CanonicalSpec:
    """The stream T for one parameter set, as a tuple of digits."""

    params: CodecParams
    T: tuple

    @classmethod
    def build(cls, params: CodecParams) -> "CanonicalSpec":
        out = []
        for i in range(params.payload_count):
            out.extend(cycle(params, i))
        return cls(params, tuple(out))

    @property
    def arr(self) -> np.ndarray:
        a = np.array(self.T, dtype=_digit_dtype(self.params.base))
        a.setflags(write=False)
        return a

    def prefix_len(self, value: int) -> int:
        """Length of the T prefix a block for this payload carries,
        ending right after the payload's own digits."""
        return value * self.params.cycle_len + 5 * self.params.p + 1 + self.params.k


@lru_cache(maxsize=16)
def _canonical(params: CodecParams) -> CanonicalSpec:
    return CanonicalSpec.build(params)


def encode_block(payload, params: CodecParams) -> np.ndarray:
    """Block of length ell + k: a zero gap, then T up to and including
    the payload digits of cycle i.

    `payload` is either a k-digit word (LSB first) or the value itself.
    The gap always spans at least one predictor window, so in particular
    every block starts with at least two zeros.
    """
    if isinstance(payload, (int, np.integer)):
        value = int(payload)
        if not 0 <= value < params.payload_count:
            raise ValueError(f"payload {value} out of range")
    else:
        word = tuple(int(d) for d in payload)
        if len(word) != params.k:
            raise ValueError(f"payload word needs k={params.k} digits")
        value = payload_value_of(word, params.base)
    spec = _canonical(params)
    prefix = spec.prefix_len(value)
    gap = params.block_len - prefix
    assert gap >= params.window, "parameter validation keeps gaps >= window"
    out = np.zeros(params.block_len, dtype=_digit_dtype(params.base))
    out[gap:] = spec.arr[:prefix]
    return out


def decode_block(block, params: CodecParams) -> tuple:
    """Recover the payload word from the index-field position; raises
    DecodeError unless the block is exactly a valid encoding."""
    arr = np.asarray(block)
    if arr.shape != (params.block_len,):
        raise DecodeError(f"block must have length {params.block_len}")
    nz = np.flatnonzero(arr)
    if nz.size == 0:
        raise DecodeError("block is all zeros")
    q = int(nz[0])
    run = params.block_len - q - (5 * params.p + 1 + params.k)
    if run < 0 or run % params.cycle_len:
        raise DecodeError(f"first nonzero digit at {q} fits no payload geometry")
    value = run // params.cycle_len
    if value >= params.payload_count:
        raise DecodeError(f"implied payload {value} out of range")
    if not np.array_equal(arr, encode_block(value, params)):
        raise DecodeError("block content differs from the canonical encoding")
    return payload_digits(params, value)


def build_v(u: DigitSeq, params: CodecParams, n_blocks: int) -> DigitSeq:
    """Concatenate n_blocks encoded blocks whose payload words are
    consecutive k-digit chunks of u; v agrees with u on every payload
    slot."""
    if u.base != params.base:
        raise ValueError(f"payload base {u.base} != codec base {params.base}")
    if n_blocks < 0:
        raise ValueError("n_blocks must be >= 0")
    need = n_blocks * params.k
    if len(u) < need:
        raise LengthError(f"need {need} payload digits, u has {len(u)}")
    if n_blocks == 0:
        return DigitSeq(params.base, np.zeros(0, dtype=_digit_dtype(params.base)))
    k = params.k
    blocks = [encode_block(tuple(u.digits[n * k:(n + 1) * k]), params)
              for n in range(n_blocks)]
    return DigitSeq(params.base, np.concatenate(blocks))


def payload_track(params: CodecParams, v: DigitSeq) -> DigitSeq:
    """The digits of v on the payload slots (the trailing k positions of
    each complete block), in order -- build_v's u prefix."""
    L = params.block_len
    blocks = len(v) // L
    arr = v.digits[:blocks * L].reshape(blocks, L)[:, params.ell:]
    return DigitSeq(v.base, np.ascontiguousarray(arr).reshape(-1))


def decode_stream(v: DigitSeq, params: CodecParams) -> list:
    """Decode every complete block of v into payload words."""
    if v.base != params.base:
        raise DecodeError(f"stream base {v.base} != codec base {params.base}")
    L = params.block_len
    return [decode_block(v.digits[j * L:(j + 1) * L], params)
            for j in range(len(v) // L)]


def predict_E(window, params: CodecParams) -> int:
    """Prediction of the digit following a width-w window.

    All zeros: still in a gap, predict 0.  Stream content only at the
    right edge: match it against the start of T.  Otherwise anchor T at
    the first certified marker (11111 preceded by a zero), read the
    adjacent index field to place the window inside T -- the cycle right
    of the marker when it starts left of the midpoint, the cycle it
    closes otherwise -- and predict T's next digit; any disagreement
    between the window and that placement falls back to 0.
    """
    w = params.window
    win = tuple(int(d) for d in window)
    if len(win) != w:
        raise ValueError(f"window must have length {w}, got {len(win)}")
    f = next((t for t, d in enumerate(win) if d), None)
    if f is None:
        return 0
    T = _canonical(params).T
    half = w // 2
    if f >= half:
        m = w - f
        return T[m] if win[f:] == T[:m] else 0
    p, L_c, k = params.p, params.cycle_len, params.k
    q = next((j for j in range(1, w - 4)
              if win[j - 1] == 0 and win[j:j + 5] == MARKER), None)
    if q is None:
        return 0
    if q < half:
        # Index field of the cycle that starts right after the marker.
        field = win[q + 5 + 5 * p + 1: q + 5 + 5 * p + 1 + k]
        anchor = q + 5 - payload_value_of(field, params.base) * L_c
    else:
        # Index field of the cycle the marker closes.
        field = win[q - k - 1: q - 1]
        anchor = q + 5 - (payload_value_of(field, params.base) + 1) * L_c
    n = len(T)
    for t in range(w):
        model = T[t - anchor] if 0 <= t - anchor < n else 0
        if win[t] != model:
            return 0
    nxt = w - anchor
    return T[nxt] if 0 <= nxt < n else 0


class WindowPredictor:
    """predict_E wrapped as a cached block function over width-w words."""

    def __init__(self, params: CodecParams):
        self.params = params
        self.base = params.base
        self.width = params.window
        self.dense = None
        self._cache = {}

    def predict(self, word) -> int:
        word = tuple(int(d) for d in word)
        hit = self._cache.get(word)
        if hit is None:
            hit = self._cache[word] = predict_E(word, self.params)
        return hit


def sliding_predictions(v: DigitSeq, params: CodecParams) -> np.ndarray:
    """predict_E at every position of v, zero-padding windows that hang
    over the left edge."""
    if v.base != params.base:
        raise ValueError(f"stream base {v.base} != codec base {params.base}")
    w = params.window
    pred = WindowPredictor(params)
    padded = (0,) * w + tuple(int(d) for d in v.digits)
    out = np.empty(len(v), dtype=_digit_dtype(params.base))
    for n in range(len(v)):
        out[n] = pred.predict(padded[n:n + w])
    return out


def block_error_positions(v: DigitSeq, params: CodecParams) -> list:
    """Positions where the window predictor misses, grouped by block
    (the last group covers any partial trailing block)."""
    preds = sliding_predictions(v, params)
    misses = np.flatnonzero(preds != v.digits.astype(preds.dtype))
    L = params.block_len
    blocks = -(-len(v) // L) if len(v) else 0
    out = [[] for _ in range(blocks)]
    for pos in misses.tolist():
        out[pos // L].append(int(pos))
    return out


def verify_block_errors(v: DigitSeq, params: CodecParams,
                        n_blocks: int) -> np.ndarray:
    """Per-block counts of wrong window predictions over the first
    n_blocks blocks (windows zero-padded at the left edge).

    The first block sees only its own leading gap, so it contributes at
    most one error; every later block contributes exactly two.
    """
    if len(v) < n_blocks * params.block_len:
        raise ValueError(f"v too short for {n_blocks} blocks")
    grouped = block_error_positions(v, params)[:n_blocks]
    return np.array([len(g) for g in grouped], dtype=np.int64)
