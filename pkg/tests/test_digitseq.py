"""Digit-sequence core: parsing, expansions, generators, file round-trips."""

import numpy as np
import pytest
from fractions import Fraction
from hypothesis import given, settings
from hypothesis import strategies as st

from rauzynoise.digitseq import (
    DigitSeq,
    ParseError,
    champernowne,
    expand_rational,
    rational_period,
    read_digits,
    uniform_random,
    write_digits,
)


def seq(base, digits):
    return DigitSeq(base, np.asarray(digits, dtype=np.uint8))


# ---------------------------------------------------------------------------
# construction and validation


def test_digits_must_be_below_base():
    with pytest.raises(ValueError):
        seq(2, [0, 1, 2])


def test_base_must_be_at_least_two():
    with pytest.raises(ValueError):
        seq(1, [0, 0])


def test_equality_and_length():
    a = seq(3, [0, 1, 2, 1])
    assert len(a) == 4
    assert a == seq(3, [0, 1, 2, 1])
    assert a != seq(3, [0, 1, 2, 2])


def test_sha256_is_stable_and_content_sensitive():
    a = seq(2, [0, 1, 1, 0])
    assert a.sha256() == seq(2, [0, 1, 1, 0]).sha256()
    assert a.sha256() != seq(2, [0, 1, 1, 1]).sha256()


# ---------------------------------------------------------------------------
# rational expansions


def test_one_seventh_base_ten():
    x = expand_rational(1, 7, 10, 12)
    assert list(x.digits) == [1, 4, 2, 8, 5, 7, 1, 4, 2, 8, 5, 7]


def test_one_third_base_ten_is_all_threes():
    x = expand_rational(1, 3, 10, 50)
    assert (x.digits == 3).all()


def test_one_half_base_two_terminates():
    x = expand_rational(1, 2, 2, 8)
    assert list(x.digits) == [1, 0, 0, 0, 0, 0, 0, 0]


def test_rational_rejects_improper_fraction():
    with pytest.raises(ValueError):
        expand_rational(22, 7, 10, 5)
    with pytest.raises(ValueError):
        expand_rational(-1, 7, 10, 5)


def test_rational_period_known_values():
    assert rational_period(1, 7, 10) == (0, 6)
    assert rational_period(1, 6, 10) == (1, 1)
    assert rational_period(1, 8, 10) == (3, 1)
    assert rational_period(5, 12, 10) == (2, 1)
    assert rational_period(1, 3, 10) == (0, 1)


@given(
    p=st.integers(0, 200),
    q=st.integers(1, 201),
    base=st.sampled_from([2, 3, 10]),
)
def test_expansion_partial_sums_converge(p, q, base):
    """The emitted digits really are the base-b expansion: the partial sum
    sum(d_i * b**-(i+1)) approximates p/q to within b**-n."""
    if p >= q:
        p %= q
    n = 24
    x = expand_rational(p, q, base, n)
    partial = sum(
        Fraction(int(d), base ** (i + 1)) for i, d in enumerate(x.digits)
    )
    err = Fraction(p, q) - partial
    assert 0 <= err < Fraction(1, base**n)


@given(p=st.integers(0, 60), q=st.integers(1, 61), base=st.sampled_from([2, 3, 10]))
def test_declared_period_is_a_true_period(p, q, base):
    if p >= q:
        p %= q
    pre, per = rational_period(p, q, base)
    n = pre + 4 * per
    x = expand_rational(p, q, base, n)
    tail = x.digits[pre:]
    assert (tail[: len(tail) - per] == tail[per:]).all()


# ---------------------------------------------------------------------------
# champernowne


def test_champernowne_base_two_prefix():
    assert list(champernowne(2, 8).digits) == [1, 1, 0, 1, 1, 1, 0, 0]


def test_champernowne_base_ten_prefix():
    assert list(champernowne(10, 11).digits) == [1, 2, 3, 4, 5, 6, 7, 8, 9, 1, 0]


@given(base=st.integers(2, 10), n=st.integers(1, 3000))
@settings(max_examples=40)
def test_champernowne_digits_in_range(base, n):
    x = champernowne(base, n)
    assert len(x) == n
    assert x.digits.max() < base


def test_champernowne_prefix_consistency():
    long = champernowne(3, 5000)
    short = champernowne(3, 1200)
    assert (long.digits[:1200] == short.digits).all()


# ---------------------------------------------------------------------------
# uniform random


def test_uniform_random_is_deterministic():
    a = uniform_random(5, 1000, 42)
    b = uniform_random(5, 1000, 42)
    assert a == b
    assert a != uniform_random(5, 1000, 43)


def test_uniform_random_accepts_seed_sequences():
    a = uniform_random(2, 100, [7, 3])
    b = uniform_random(2, 100, [7, 3])
    assert a == b
    assert a != uniform_random(2, 100, [7, 4])


def test_uniform_random_frequencies():
    x = uniform_random(4, 100_000, 0)
    counts = np.bincount(x.digits, minlength=4)
    assert abs(counts / len(x) - 0.25).max() < 0.01


# ---------------------------------------------------------------------------
# file format


def test_round_trip(tmp_path):
    x = uniform_random(7, 4096, 5)
    path = tmp_path / "x.digits"
    write_digits(x, path)
    y = read_digits(path)
    assert y == x
    assert y.base == 7


@given(base=st.integers(2, 36), n=st.integers(0, 500))
@settings(max_examples=30)
def test_round_trip_property(base, n, tmp_path_factory):
    x = uniform_random(base, n, 1)
    path = tmp_path_factory.mktemp("rt") / "x.digits"
    write_digits(x, path)
    assert read_digits(path) == x


def test_read_rejects_bad_digit(tmp_path):
    path = tmp_path / "bad.digits"
    path.write_text("base=2\n0101\n012\n")
    with pytest.raises(ParseError) as err:
        read_digits(path)
    assert err.value.line == 3
    assert err.value.offset == 2


def test_read_rejects_missing_header(tmp_path):
    path = tmp_path / "bad.digits"
    path.write_text("0101\n")
    with pytest.raises(ParseError):
        read_digits(path)


def test_read_rejects_bad_base(tmp_path):
    path = tmp_path / "bad.digits"
    path.write_text("base=1\n000\n")
    with pytest.raises(ParseError):
        read_digits(path)
