import numpy as np
from hypothesis import given, settings, strategies as st

from certkit._bits import HypercubeBatch, bernoulli_words, pack_bits, popcount, tail_mask, unpack_bits


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 1), max_size=300))
def test_pack_round_trip_and_zero_tail(bits):
    words = pack_bits(np.array(bits, dtype=np.uint8))
    assert unpack_bits(words, len(bits)).tolist() == bits
    assert popcount(words) == sum(bits)
    assert popcount(words & ~tail_mask(len(bits))) == 0


def test_hypercube_rows_are_binary_expansions():
    cube = HypercubeBatch(3).dense()
    assert cube.tolist()[5] == [1, 0, 1]
    assert cube.shape == (8, 3)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5000), st.sampled_from([0.0, 1.0, 0.5, 0.3, 1 / 3, 0.9999]))
def test_bernoulli_words_keep_tail_clear(rows, p):
    words = bernoulli_words(np.random.default_rng(rows), p, rows)
    assert words.size == (rows + 63) // 64
    assert popcount(words & ~tail_mask(rows)) == 0
    if p in (0.0, 1.0):
        assert popcount(words) == int(p) * rows


def test_bernoulli_frequency_within_hoeffding_band():
    rows = 400_000
    for p in (0.1, 0.3, 0.7071067811865476, 0.95):
        ones = popcount(bernoulli_words(np.random.default_rng(11), p, rows))
        # 4.5 standard deviations
        assert abs(ones / rows - p) < 4.5 * np.sqrt(p * (1 - p) / rows)


def test_bernoulli_dyadic_probability_is_exact_in_distribution():
    # p = 3/8 is decided by at most three uniform bits per lane
    rows = 1 << 16
    counts = [popcount(bernoulli_words(np.random.default_rng(s), 0.375, rows)) for s in range(20)]
    mean = np.mean(counts) / rows
    assert abs(mean - 0.375) < 4 * np.sqrt(0.375 * 0.625 / (20 * rows))
