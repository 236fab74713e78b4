"""Marker framing codec: construction, round trips, window prediction."""

import numpy as np
import pytest
from fractions import Fraction
from hypothesis import given, settings
from hypothesis import strategies as st

from rauzynoise.digitseq import DigitSeq, uniform_random
from rauzynoise.marker_codec import (
    CHUNK0,
    CHUNK1,
    MARKER,
    CodecParams,
    DecodeError,
    WindowPredictor,
    bin_rep,
    block_error_positions,
    build_v,
    cycle,
    decode_block,
    decode_stream,
    encode_block,
    expand_c,
    payload_digits,
    payload_track,
    payload_value_of,
    predict_E,
    sliding_predictions,
    verify_block_errors,
)
from rauzynoise.generators import LengthError
from rauzynoise.predictor import beta_E


PARAMS = CodecParams.default(2, 5)


def max_one_run(bits) -> int:
    best = run = 0
    for b in bits:
        run = run + 1 if b == 1 else 0
        best = max(best, run)
    return best


# ---------------------------------------------------------------------------
# parameters


def test_derived_quantities_for_the_reference_config():
    assert PARAMS.ell == 1601
    assert PARAMS.p == 6
    assert PARAMS.cycle_len == 42
    assert PARAMS.window == 86
    assert PARAMS.block_len == 1606
    assert PARAMS.payload_count == 32
    assert PARAMS.noise_bound == Fraction(2, 1606)


def test_min_ell_reference_value():
    assert CodecParams.min_ell(2, 5) == 1601


def test_params_reject_weak_payload_rate():
    # k digits out of ell + k must stay under the noise the construction
    # spends on markers: k(b-1) > 2b is required.
    with pytest.raises(ValueError):
        CodecParams(2, 4, 5000)
    with pytest.raises(ValueError):
        CodecParams(3, 3, 5000)


def test_params_reject_unsafe_marker_aliases():
    # large k in small bases lets a payload field contain five 1s in a row
    with pytest.raises(ValueError):
        CodecParams(2, 6, 10**6)
    with pytest.raises(ValueError):
        CodecParams(3, 5, 10**6)


def test_params_reject_short_ell():
    with pytest.raises(ValueError):
        CodecParams(2, 5, 1600)  # below both lower bounds
    assert CodecParams(2, 5, 1601).ell == 1601
    assert CodecParams(2, 5, 5000).ell == 5000


def test_other_legal_configs():
    q = CodecParams.default(4, 3)
    assert q.payload_count == 64
    assert q.block_len == q.ell + 3


# ---------------------------------------------------------------------------
# building blocks


def test_bin_rep_example():
    assert bin_rep((1, 0, 1, 0, 0), 2, 6) == (1, 0, 1, 0, 0, 0)


def test_bin_rep_top_bit_is_reserved():
    # every payload value fits in p-1 bits, so the last (most significant)
    # bit is always 0
    for i in range(PARAMS.payload_count):
        bits = bin_rep(payload_digits(PARAMS, i), 2, PARAMS.p)
        assert len(bits) == PARAMS.p
        assert bits[-1] == 0
    with pytest.raises(ValueError):
        bin_rep((1, 1, 1, 1, 1, 1), 2, 6)


def test_expand_c_chunks():
    assert expand_c((0,)) == CHUNK0
    assert expand_c((1,)) == CHUNK1
    assert expand_c((0, 1)) == CHUNK0 + CHUNK1


@given(bits=st.lists(st.integers(0, 1), min_size=0, max_size=8))
def test_expand_c_never_contains_the_marker(bits):
    assert max_one_run(expand_c(bits)) <= 4


def test_payload_value_round_trip():
    for i in range(PARAMS.payload_count):
        word = payload_digits(PARAMS, i)
        assert len(word) == 5
        assert payload_value_of(word, 2) == i


def test_payload_digits_least_significant_first():
    assert payload_digits(PARAMS, 1) == (1, 0, 0, 0, 0)
    assert payload_digits(PARAMS, 6) == (0, 1, 1, 0, 0)


def test_cycle_layout():
    for i in (0, 1, 17, 31):
        c = cycle(PARAMS, i)
        assert len(c) == PARAMS.cycle_len
        a = expand_c(bin_rep(payload_digits(PARAMS, i), 2, PARAMS.p))
        assert c == a + (0,) + payload_digits(PARAMS, i) + (0,) + MARKER
        assert c[-5:] == MARKER


def test_cycles_have_one_marker_except_the_alias():
    # index fields are raw digits, so i = 31 = 11111 doubles as a marker;
    # every other cycle shows exactly one run of five 1s
    def marker_starts(bits):
        return [t for t in range(len(bits) - 4)
                if bits[t:t + 5] == (1, 1, 1, 1, 1)]

    for i in range(32):
        c = cycle(PARAMS, i)
        starts = marker_starts(c)
        maximal = [t for t in starts if t == 0 or c[t - 1] == 0]
        if i == 31:
            assert len(maximal) == 2
        else:
            assert len(maximal) == 1


# ---------------------------------------------------------------------------
# encode / decode


def test_encode_shape_and_gap():
    block = encode_block(3, PARAMS)
    assert len(block) == PARAMS.block_len
    # the run-up region keeps a full window of zeros before content starts
    first = int(np.flatnonzero(block)[0])
    assert first >= PARAMS.window
    assert list(block[-5:]) == [1, 1, 0, 0, 0]  # payload 3 LSB-first


def test_round_trip_every_payload():
    for i in range(PARAMS.payload_count):
        block = encode_block(i, PARAMS)
        assert decode_block(block, PARAMS) == payload_digits(PARAMS, i)


def test_encode_accepts_digit_words():
    word = (1, 1, 0, 1, 0)
    block = encode_block(word, PARAMS)
    assert decode_block(block, PARAMS) == word


def test_encode_rejects_out_of_range_payloads():
    with pytest.raises(ValueError):
        encode_block(32, PARAMS)
    with pytest.raises(ValueError):
        encode_block((1, 1, 1), PARAMS)


def test_decode_rejects_corruption():
    block = encode_block(5, PARAMS)
    with pytest.raises(DecodeError):
        decode_block(np.zeros_like(block), PARAMS)
    bad = block.copy()
    bad[-1] ^= 1  # flip one payload digit
    with pytest.raises(DecodeError):
        decode_block(bad, PARAMS)
    with pytest.raises(DecodeError):
        decode_block(block[:-1], PARAMS)


def test_build_v_concatenates_payload_chunks():
    u = uniform_random(2, 40, 6)  # eight 5-digit payload words
    v = build_v(u, PARAMS, 8)
    assert len(v) == 8 * PARAMS.block_len
    assert payload_track(PARAMS, v) == DigitSeq(2, u.digits)
    decoded = decode_stream(v, PARAMS)
    assert [payload_value_of(w, 2) for w in decoded] == [
        payload_value_of(tuple(u.digits[5 * j: 5 * j + 5]), 2) for j in range(8)
    ]


def test_build_v_needs_enough_payload_digits():
    u = uniform_random(2, 14, 0)
    with pytest.raises(LengthError):
        build_v(u, PARAMS, 3)


# ---------------------------------------------------------------------------
# window prediction


def test_all_zero_window_predicts_zero():
    assert predict_E((0,) * PARAMS.window, PARAMS) == 0


def test_garbled_window_predicts_zero():
    rng = np.random.default_rng(0)
    win = tuple(int(d) for d in rng.integers(0, 2, PARAMS.window))
    assert predict_E(win, PARAMS) == 0


def test_prediction_tracks_the_stream():
    """Sliding the window across an encoded stream, mismatches happen at
    most twice per block, always just after the run-up gap."""
    u = uniform_random(2, 50, 13)
    v = build_v(u, PARAMS, 10)
    pred = sliding_predictions(v, PARAMS)
    miss = np.flatnonzero(pred != v.digits)
    by_block = np.bincount(miss // PARAMS.block_len, minlength=10)
    assert by_block.max() <= 2
    counts = verify_block_errors(v, PARAMS, 10)
    assert (counts == by_block).all()
    assert [list(g) for g in block_error_positions(v, PARAMS)] == [
        list(miss[miss // PARAMS.block_len == j]) for j in range(10)
    ]


def test_first_block_has_one_miss_interior_blocks_two():
    # before the first block there is nothing to mispredict off of; the
    # zero run-up of each later block meets the previous block's content
    v = build_v(uniform_random(2, 25, 2), PARAMS, 5)
    counts = verify_block_errors(v, PARAMS, 5)
    assert counts[0] == 1
    assert (counts[1:] == 2).all()


def test_alias_payloads_stay_within_budget():
    # all payloads = 31 puts the marker-alias index word in every block
    u = DigitSeq(2, np.ones(5 * 6, dtype=np.uint8))
    v = build_v(u, PARAMS, 6)
    assert verify_block_errors(v, PARAMS, 6).max() <= 2
    assert decode_stream(v, PARAMS) == [(1, 1, 1, 1, 1)] * 6


def test_zero_payloads_stay_within_budget():
    u = DigitSeq(2, np.zeros(5 * 6, dtype=np.uint8))
    v = build_v(u, PARAMS, 6)
    assert verify_block_errors(v, PARAMS, 6).max() <= 2


def test_window_predictor_agrees_with_direct_calls():
    v = build_v(uniform_random(2, 20, 5), PARAMS, 4)
    E = WindowPredictor(PARAMS)
    w = PARAMS.window
    n = len(v) - w
    val = beta_E(v, E, n, orientation="next")
    pred = sliding_predictions(v, PARAMS)
    direct = int((pred[w: w + n] != v.digits[w: w + n]).sum())
    assert val == Fraction(direct, n)


def test_stream_noise_stays_below_the_marker_budget():
    n_blocks = 12
    v = build_v(uniform_random(2, 5 * n_blocks, 8), PARAMS, n_blocks)
    counts = verify_block_errors(v, PARAMS, n_blocks)
    total = int(counts.sum())
    assert Fraction(total, len(v)) <= PARAMS.noise_bound
