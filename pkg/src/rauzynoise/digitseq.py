"""Digit sequences in an integer base and the sources that produce them.

A sequence is stored as a numpy array of digit values together with its
base.  Sources cover the rational numbers (long division), Champernowne
concatenation, and seeded uniform digits.  A small text format moves
sequences in and out of files: a `base=<b>` header line followed by the
digits themselves (contiguous characters for base <= 10, whitespace
separated integers above that).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from math import gcd

import numpy as np


class ParseError(ValueError):
    """Malformed digit file; carries the 1-based line and character offset."""

    def __init__(self, message, line=None, offset=None):
        if line is not None:
            message = f"line {line}, offset {offset}: {message}"
        super().__init__(message)
        self.line = line
        self.offset = offset


def _digit_dtype(base):
    return np.uint8 if base <= 256 else np.int64


@dataclass(frozen=True)
class DigitSeq:
    """Immutable digit string: `digits[i]` is the coefficient of base**-(i+1)."""

    base: int
    digits: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.base < 2:
            raise ValueError(f"base must be >= 2, got {self.base}")
        arr = np.ascontiguousarray(self.digits, dtype=_digit_dtype(self.base))
        if arr.ndim != 1:
            raise ValueError("digits must be one-dimensional")
        if arr.size and (int(arr.min()) < 0 or int(arr.max()) >= self.base):
            bad = int(np.argmax((arr < 0) | (arr >= self.base)))
            raise ValueError(
                f"digit {int(arr[bad])} at index {bad} out of range for base {self.base}"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "digits", arr)

    def __len__(self):
        return int(self.digits.size)

    def __getitem__(self, i):
        return self.digits[i]

    def __eq__(self, other):
        if not isinstance(other, DigitSeq):
            return NotImplemented
        return self.base == other.base and np.array_equal(self.digits, other.digits)

    def prefix(self, n: int) -> "DigitSeq":
        return DigitSeq(self.base, self.digits[:n])

    def sha256(self) -> str:
        return hashlib.sha256(self.digits.tobytes()).hexdigest()


def expand_rational(p: int, q: int, base: int, n: int) -> DigitSeq:
    """First n fractional digits of p/q in the given base.

    Plain long division, so terminating expansions come out with a zero
    tail rather than the equivalent (base-1)-repeating form.

    Parameters
    ----------
    p, q : int
        Numerator and positive denominator with 0 <= p/q < 1.
    base : int
        Base >= 2.
    n : int
        Number of digits to emit.
    """
    if q <= 0:
        raise ValueError(f"denominator must be positive, got {q}")
    if not 0 <= p < q:
        raise ValueError(f"need 0 <= p/q < 1, got {p}/{q}")
    if base < 2:
        raise ValueError(f"base must be >= 2, got {base}")
    out = np.empty(n, dtype=_digit_dtype(base))
    r = p
    for i in range(n):
        r *= base
        out[i] = r // q
        r %= q
    return DigitSeq(base, out)


def rational_period(p: int, q: int, base: int) -> tuple[int, int]:
    """(preperiod, period) of the base-b expansion of p/q.

    The preperiod is the multiplicity of base's prime factors in q; the
    period is the multiplicative order of base modulo the coprime part.
    A terminating expansion reports period 1 (the repeating zero tail).
    """
    if q <= 0 or not 0 <= p < q:
        raise ValueError("need 0 <= p/q < 1 with q > 0")
    q //= gcd(p, q) if p else q
    if p == 0:
        return 0, 1
    pre = 0
    rest = q
    g = gcd(rest, base)
    while g > 1:
        while rest % g == 0:
            rest //= g
            pre += 1
        g = gcd(rest, base)
    if rest == 1:
        return pre, 1
    period = 1
    acc = base % rest
    while acc != 1:
        acc = (acc * base) % rest
        period += 1
    return pre, period


def champernowne(base: int, n: int) -> DigitSeq:
    """First n digits of the base-b Champernowne sequence 1,2,3,...

    Representations of consecutive integers are concatenated most
    significant digit first.
    """
    if base < 2:
        raise ValueError(f"base must be >= 2, got {base}")
    if n < 0:
        raise ValueError("n must be nonnegative")
    chunks = []
    total = 0
    width = 1
    lo = 1
    while total < n:
        hi = lo * base
        nums = np.arange(lo, hi, dtype=np.int64)
        block = np.empty((nums.size, width), dtype=_digit_dtype(base))
        rem = nums
        for j in range(width - 1, -1, -1):
            block[:, j] = rem % base
            rem = rem // base
        chunks.append(block.reshape(-1))
        total += nums.size * width
        width += 1
        lo = hi
    return DigitSeq(base, np.concatenate(chunks)[:n])


def uniform_random(base: int, n: int, seed: int) -> DigitSeq:
    """n independent uniform digits from a seeded PCG64 stream."""
    rng = np.random.default_rng(seed)
    return DigitSeq(base, rng.integers(0, base, size=n, dtype=np.int64))


def write_digits(seq: DigitSeq, path) -> None:
    """Write the header + body text format (LF newlines, no BOM)."""
    with open(path, "wb") as fh:
        fh.write(f"base={seq.base}\n".encode("ascii"))
        if seq.base <= 10:
            body = (seq.digits.astype(np.uint8) + ord("0")).tobytes()
            fh.write(body)
        else:
            fh.write(" ".join(str(int(d)) for d in seq.digits).encode("ascii"))
        fh.write(b"\n")


def read_digits(path) -> DigitSeq:
    """Parse a digit file written by `write_digits` (line breaks in the
    body are ignored for base <= 10)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw.startswith(b"\xef\xbb\xbf"):
        raise ParseError("byte order mark not allowed", line=1, offset=0)
    head, sep, body = raw.partition(b"\n")
    if not sep:
        raise ParseError("missing header line", line=1, offset=0)
    if not head.startswith(b"base="):
        raise ParseError("header must be 'base=<int>'", line=1, offset=0)
    try:
        base = int(head[5:])
    except ValueError:
        raise ParseError(f"bad base {head[5:]!r}", line=1, offset=5) from None
    if base < 2:
        raise ParseError(f"base must be >= 2, got {base}", line=1, offset=5)
    if base <= 10:
        arr = np.frombuffer(body, dtype=np.uint8)
        keep = arr != ord("\n")
        digits = arr[keep].astype(np.int64) - ord("0")
        if digits.size and (digits.min() < 0 or digits.max() >= base):
            flat = int(np.argmax((digits < 0) | (digits >= base)))
            pos = int(np.flatnonzero(keep)[flat])
            line = 2 + int(np.count_nonzero(arr[:pos] == ord("\n")))
            offset = pos - (int(np.max(np.flatnonzero(arr[:pos] == ord("\n")))) + 1
                            if line > 2 else 0)
            raise ParseError(
                f"character {chr(arr[pos])!r} not a base-{base} digit",
                line=line, offset=offset,
            )
        return DigitSeq(base, digits)
    fields = body.split()
    digits = np.empty(len(fields), dtype=np.int64)
    for i, tok in enumerate(fields):
        try:
            digits[i] = int(tok)
        except ValueError:
            raise ParseError(f"token {tok.decode(errors='replace')!r} is not an integer",
                             line=2, offset=i) from None
        if not 0 <= digits[i] < base:
            raise ParseError(f"digit {int(digits[i])} out of range for base {base}",
                             line=2, offset=i)
    return DigitSeq(base, digits)


def write_sidecar(path, manifest: dict) -> None:
    """Write the JSON run manifest next to a generated digit file."""
    payload = dict(manifest)
    payload.setdefault("schema_version", 1)
    with open(str(path) + ".manifest.json", "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
