import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcdma.codes import SpreadingCode, all_ones, chip_product, correlation, generate_random_code

chips = st.integers(1, 64).flatmap(lambda n: st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n))


def test_seed_determinism():
    a = generate_random_code(4, 123)
    b = generate_random_code(4, 123)
    assert a == b
    assert a.tolist() == b.tolist()


def test_single_chip():
    for seed in range(10):
        c = generate_random_code(1, seed)
        assert c.tolist()[0] in (-1, 1)


def test_zero_length_rejected():
    with pytest.raises(ValueError):
        generate_random_code(0, 1)


def test_invalid_chip_values_rejected():
    with pytest.raises(ValueError):
        SpreadingCode.from_sequence([1, 0, -1])


def test_chip_mean_concentrates():
    # Over 100 seeds nearly all means sit within 3 / sqrt(N) of zero.
    means = [generate_random_code(10_000, s).chips.mean() for s in range(100)]
    assert sum(abs(m) <= 0.03 for m in means) >= 98


def test_balanced_codes_sum_to_zero():
    c = generate_random_code(16, 3, balanced=True)
    assert int(c.chips.sum()) == 0
    assert correlation(c, all_ones(16)) == 0.0
    with pytest.raises(ValueError):
        generate_random_code(5, 3, balanced=True)


def test_correlation_examples():
    a = SpreadingCode.from_sequence([1, 1])
    b = SpreadingCode.from_sequence([1, -1])
    assert correlation(a, a) == 1.0
    assert correlation(a, b) == 0.0


def test_correlation_length_mismatch():
    with pytest.raises(ValueError):
        correlation(all_ones(3), all_ones(4))
    with pytest.raises(ValueError):
        chip_product(all_ones(3), all_ones(4))


def test_chip_product_examples():
    assert np.allclose(chip_product(all_ones(4), all_ones(4)).values, [0.5] * 4)
    enc = SpreadingCode.from_sequence([1, -1])
    dec = SpreadingCode.from_sequence([1, 1])
    assert np.allclose(chip_product(enc, dec).values, [1 / np.sqrt(2), -1 / np.sqrt(2)])


def test_phases():
    c = SpreadingCode.from_sequence([1, -1, 1])
    assert np.allclose(np.exp(1j * c.phases), c.chips)


def test_codes_are_immutable():
    c = generate_random_code(8, 1)
    with pytest.raises(ValueError):
        c.chips[0] = 1


@given(chips, st.data())
def test_correlation_properties(a, data):
    b = data.draw(st.lists(st.sampled_from([-1, 1]), min_size=len(a), max_size=len(a)))
    ca, cb = SpreadingCode.from_sequence(a), SpreadingCode.from_sequence(b)
    n = len(a)
    rho = correlation(ca, cb)
    assert correlation(ca, ca) == 1.0
    assert rho == correlation(cb, ca)
    assert abs(rho) <= 1
    scaled = rho * n
    assert abs(scaled - round(scaled)) <= 1e-12
    assert (round(scaled) - n) % 2 == 0


@given(chips, st.data())
def test_chip_product_properties(a, data):
    b = data.draw(st.lists(st.sampled_from([-1, 1]), min_size=len(a), max_size=len(a)))
    ca, cb = SpreadingCode.from_sequence(a), SpreadingCode.from_sequence(b)
    pi = chip_product(ca, cb).values
    n = len(a)
    assert pi.size == n
    assert np.allclose(np.abs(pi), 1 / np.sqrt(n), rtol=0, atol=1e-15)
    assert abs(np.sum(pi**2) - 1) <= 1e-12
    ones = all_ones(n)
    # Each entry already carries 1/sqrt(N_c), so the plain inner product is the correlation.
    via_products = np.dot(chip_product(ca, ones).values, chip_product(cb, ones).values)
    assert abs(via_products - correlation(ca, cb)) <= 1e-12
