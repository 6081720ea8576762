import numpy as np
import pytest
from hypothesis import given, strategies as st

from hubbard_mf_lab.fock import FockCutoff, annihilator, build_ladder, fock_state, is_hermitian, pad


def test_annihilator_m2_entries():
    a = annihilator(2)
    expected = np.zeros((3, 3))
    expected[0, 1] = 1.0
    expected[1, 2] = np.sqrt(2.0)
    assert np.array_equal(a, expected)


def test_m0_is_zero():
    a = annihilator(0)
    assert a.shape == (1, 1) and a[0, 0] == 0
    assert np.all(a @ fock_state(0, 0) == 0)


def test_m3_number_and_commutator():
    a, ad, n = build_ladder(3)
    assert np.array_equal(n, np.diag([0, 1, 2, 3]).astype(complex))
    comm = a @ ad - ad @ a
    assert np.allclose(comm[:3, :3], np.eye(3), atol=1e-13)
    assert comm[3, 3] == pytest.approx(-3.0)


@given(st.integers(min_value=0, max_value=64))
def test_ladder_properties(M):
    a, ad, n = build_ladder(M)
    assert np.array_equal(ad, a.conj().T)
    assert np.allclose(ad @ a, n, atol=1e-13)
    assert is_hermitian(n)
    if M:
        comm = a @ ad - ad @ a
        assert np.max(np.abs(comm[:M, :M] - np.eye(M))) <= 1e-13


@given(st.integers(min_value=1, max_value=20), st.data())
def test_annihilation_action(M, data):
    n = data.draw(st.integers(min_value=1, max_value=M))
    out = annihilator(M) @ fock_state(n, M)
    assert np.allclose(out, np.sqrt(n) * fock_state(n - 1, M))


def test_cutoff_validation():
    with pytest.raises(ValueError):
        FockCutoff(-1)
    with pytest.raises(ValueError):
        fock_state(3, 2)


def test_pad_and_truncate():
    assert np.array_equal(pad([1.0], 2), [1, 0, 0])
    assert np.array_equal(pad([1.0, 0.0, 0.0], 0), [1])
    with pytest.raises(ValueError):
        pad([0.6, 0.8], 0)
