import numpy as np
import pytest
from hypothesis import given, strategies as st

from hubbard_mf_lab.lattice import Lattice


def test_two_site_chain_double_bond():
    lat = Lattice(2, 1)
    assert lat.num_sites == 2 and lat.num_bonds == 2
    assert sorted(map(tuple, lat.bonds.tolist())) == [(0, 1), (1, 0)]


def test_three_site_ring():
    lat = Lattice(3, 1)
    assert sorted(map(tuple, lat.bonds.tolist())) == [(0, 1), (1, 2), (2, 0)]


def test_cube_coordination():
    lat = Lattice(2, 3)
    assert lat.num_sites == 8 and lat.num_bonds == 24
    degree = np.bincount(lat.bonds.ravel(), minlength=8)
    assert np.all(degree == 6)


@given(st.integers(2, 5), st.integers(1, 3))
def test_index_roundtrip_and_degree(L, d):
    lat = Lattice(L, d)
    for x in range(lat.num_sites):
        assert lat.index(lat.coordinate(x)) == x
    assert lat.num_bonds == d * L**d
    assert np.all(np.bincount(lat.bonds.ravel(), minlength=lat.num_sites) == 2 * d)


def test_rejects_bad_shapes():
    with pytest.raises(ValueError):
        Lattice(1, 2)
    with pytest.raises(ValueError):
        Lattice(3, 0)
