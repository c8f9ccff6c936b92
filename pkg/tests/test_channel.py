import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcdma.channel import BroadcastMatrix, balanced_m_user, balanced_two_user, broadcast_map


def test_two_user_matrix_verbatim():
    b = balanced_two_user().entries
    assert np.array_equal(b, np.array([[1, 1], [-1, 1]]) / np.sqrt(2))
    assert np.abs(b.conj().T @ b - np.eye(2)).max() <= 1e-15
    assert np.allclose(np.abs(b) ** 2, 0.5)


def test_two_user_matrix_powers():
    b = balanced_two_user().entries
    b2 = b @ b
    assert np.allclose(b2, [[0, 1], [-1, 0]])
    assert np.allclose(np.linalg.matrix_power(b2, 4), np.eye(2))


def test_m_user_examples():
    assert np.allclose(balanced_m_user(1).entries, [[1]])
    b2 = balanced_m_user(2).entries
    assert np.allclose(b2, np.array([[1, 1], [1, -1]]) / np.sqrt(2))
    b4 = balanced_m_user(4).entries
    assert np.abs(b4 @ b4.conj().T - np.eye(4)).max() <= 1e-14
    assert np.allclose(np.abs(b4) ** 2, 0.25)


def test_non_unitary_rejected():
    with pytest.raises(ValueError):
        BroadcastMatrix(np.array([[1.0, 0.1], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        BroadcastMatrix(np.ones((2, 3)))


def test_broadcast_examples():
    a = 0.3 - 0.8j
    assert np.allclose(broadcast_map(balanced_m_user(1), np.array([a])), [a])
    out = broadcast_map(balanced_two_user(), np.array([a, 0]))
    assert np.allclose(out, [a / np.sqrt(2), -a / np.sqrt(2)])
    with pytest.raises(ValueError):
        broadcast_map(balanced_two_user(), np.array([1, 2, 3]))


def test_norm_preserved_over_random_inputs(rng):
    for m in (2, 3, 5):
        b = balanced_m_user(m) if m > 2 else balanced_two_user()
        for _ in range(100):
            x = rng.normal(size=(m, 6)) + 1j * rng.normal(size=(m, 6))
            y = broadcast_map(b, x)
            assert abs(np.sum(np.abs(y) ** 2) - np.sum(np.abs(x) ** 2)) <= 1e-12 * np.sum(np.abs(x) ** 2)


@given(st.integers(1, 12))
def test_dft_coupler_is_balanced(m):
    b = balanced_m_user(m).entries
    assert np.abs(b.conj().T @ b - np.eye(m)).max() <= 1e-12
    assert np.allclose(np.abs(b) ** 2, 1 / m)
