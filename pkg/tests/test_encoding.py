import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qieobench.encoding import (
    DEFAULT_BITS_PER_VARIABLE,
    GenomeLayout,
    decode,
    decode_codes,
    encode,
    random_bitstring,
)


def brute_force_decode(bits, lo, hi):
    # Independent scalar decoder: positional weights summed in Python ints.
    code = 0
    for b in bits:
        code = 2 * code + int(b)
    return lo + code * (hi - lo) / (2 ** len(bits) - 1)


layouts = st.builds(
    lambda d, b, lo, width: GenomeLayout.uniform(d, lo, lo + width, b),
    st.integers(1, 6),
    st.integers(1, 32),
    st.floats(-100, 100),
    st.floats(1e-3, 200),
)


def test_total_bits_and_default_width():
    layout = GenomeLayout.uniform(10, -1, 1)
    assert layout.bits_per_variable == DEFAULT_BITS_PER_VARIABLE
    assert layout.total_bits == 10 * DEFAULT_BITS_PER_VARIABLE
    assert layout.max_code == 2**DEFAULT_BITS_PER_VARIABLE - 1


def test_all_zero_and_all_one_hit_bounds_16_bits():
    layout = GenomeLayout.uniform(3, -5.12, 5.12, 16)
    assert np.all(decode(np.zeros(48, np.uint8), layout) == -5.12)
    assert np.all(decode(np.ones(48, np.uint8), layout) == 5.12)


def test_four_bit_code_five():
    layout = GenomeLayout.uniform(1, 0, 15, 4)
    assert decode(np.array([0, 1, 0, 1], np.uint8), layout)[0] == 5.0


def test_all_sixteen_four_bit_codes_linear():
    layout = GenomeLayout.uniform(1, 0, 15, 4)
    for code in range(16):
        bits = np.array([(code >> s) & 1 for s in (3, 2, 1, 0)], np.uint8)
        assert decode_codes(bits, layout)[0] == code
        assert decode(bits, layout)[0] == pytest.approx(brute_force_decode(bits, 0, 15), abs=1e-12)


def test_big_endian_within_each_variable():
    layout = GenomeLayout.uniform(2, 0, 3, 2)
    # variable 0 = 0b10, variable 1 = 0b01
    assert decode_codes(np.array([1, 0, 0, 1], np.uint8), layout).tolist() == [2, 1]


def test_batch_decode_matches_rowwise(rng):
    layout = GenomeLayout.uniform(4, -2, 3, 9)
    pop = random_bitstring(layout, rng, 25)
    batch = decode(pop, layout)
    assert batch.shape == (25, 4)
    for row, x in zip(pop, batch):
        np.testing.assert_array_equal(decode(row, layout), x)


def test_length_mismatch_raises():
    layout = GenomeLayout.uniform(2, 0, 1, 8)
    with pytest.raises(ValueError):
        decode(np.zeros(15, np.uint8), layout)
    with pytest.raises(ValueError):
        decode(np.zeros((2, 17), np.uint8), layout)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(dimension=0, lower_bounds=(), upper_bounds=()),
        dict(dimension=1, lower_bounds=(1.0,), upper_bounds=(1.0,)),
        dict(dimension=1, lower_bounds=(0.0,), upper_bounds=(1.0,), bits_per_variable=0),
        dict(dimension=1, lower_bounds=(0.0,), upper_bounds=(1.0,), bits_per_variable=33),
        dict(dimension=2, lower_bounds=(0.0,), upper_bounds=(1.0, 1.0)),
        dict(dimension=1, lower_bounds=(0.0,), upper_bounds=(float("inf"),)),
    ],
)
def test_invalid_layouts(kwargs):
    with pytest.raises(ValueError):
        GenomeLayout(**kwargs)


def test_random_bitstring_length_and_determinism():
    layout = GenomeLayout.uniform(1, 0, 1, 8)
    a = random_bitstring(layout, np.random.default_rng(9))
    b = random_bitstring(layout, np.random.default_rng(9))
    assert a.shape == (8,) and a.dtype == np.uint8
    np.testing.assert_array_equal(a, b)


def test_random_bitstring_is_fair():
    layout = GenomeLayout.uniform(5, 0, 1, 20)
    bits = random_bitstring(layout, np.random.default_rng(4), 1000)
    assert bits.size == 10**5
    assert 0.49 <= bits.mean() <= 0.51


@given(layouts, st.integers(0, 2**32 - 1))
def test_decode_stays_in_box(layout, seed):
    x = decode(random_bitstring(layout, np.random.default_rng(seed), 8), layout)
    assert np.all(x >= np.asarray(layout.lower_bounds))
    assert np.all(x <= np.asarray(layout.upper_bounds))


@given(st.integers(2, 32), st.floats(-50, 50), st.floats(1e-2, 100), st.data())
def test_decode_monotone_in_code(b, lo, width, data):
    layout = GenomeLayout.uniform(1, lo, lo + width, b)
    c1 = data.draw(st.integers(0, 2**b - 2))
    c2 = data.draw(st.integers(c1 + 1, 2**b - 1))
    bits = [np.array([(c >> s) & 1 for s in range(b - 1, -1, -1)], np.uint8) for c in (c1, c2)]
    assert decode(bits[0], layout)[0] < decode(bits[1], layout)[0]


@given(st.integers(1, 32), st.data())
def test_codes_agree_with_brute_force(b, data):
    bits = np.array(data.draw(st.lists(st.integers(0, 1), min_size=b, max_size=b)), np.uint8)
    layout = GenomeLayout.uniform(1, -3.0, 7.0, b)
    assert decode(bits, layout)[0] == pytest.approx(brute_force_decode(bits, -3.0, 7.0), rel=1e-12, abs=1e-12)


@given(layouts, st.integers(0, 2**32 - 1))
def test_encode_inverts_decode(layout, seed):
    bits = random_bitstring(layout, np.random.default_rng(seed))
    np.testing.assert_array_equal(encode(decode(bits, layout), layout), bits)
