import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hubbard_mf_lab.fock import fock_state
from hubbard_mf_lab.lattice import Lattice
from hubbard_mf_lab.manybody import ModelParams, build_hamiltonian, energy, fock_product, product_state
from hubbard_mf_lab.meanfield import mf_moment
from hubbard_mf_lab.reduced import (
    density_moment,
    density_report,
    make_rng,
    partial_trace_slot,
    projectors,
    q_moment,
    random_density,
    random_unit_vector,
    rdm_energy,
    reduce_one_site,
    reduce_two_site,
    trace_norm_distance,
)

from conftest import HALF


def test_product_state_reduces_to_projector():
    lat = Lattice(2, 2)
    phi = random_unit_vector(3, make_rng(1))
    psi = product_state(phi, lat)
    p = np.outer(phi, phi.conj())
    assert np.allclose(reduce_one_site(psi, lat, 2), p, atol=1e-12)
    assert np.allclose(reduce_two_site(psi, lat, 2), np.kron(p, p), atol=1e-12)


def test_singlet_like_state(chain2):
    psi = (fock_product((1, 0), chain2, 1) + fock_product((0, 1), chain2, 1)) / math.sqrt(2)
    assert np.allclose(reduce_one_site(psi, chain2, 1), np.diag([0.5, 0.5]))
    g2 = reduce_two_site(psi, chain2, 1)
    # slot basis |s1 s2>, index 2*s1 + s2
    expected = np.zeros((4, 4))
    expected[1, 1] = expected[2, 2] = expected[1, 2] = expected[2, 1] = 0.5
    assert np.allclose(g2, expected)


def test_brute_force_partial_trace():
    lat = Lattice(3, 1)
    psi = random_unit_vector(27, make_rng(7))
    rho = np.outer(psi, psi.conj()).reshape((3,) * 6)
    # tensor axes run site 2, 1, 0 for each side
    one = [np.einsum("abcdbc->ad", rho), np.einsum("abcaec->be", rho), np.einsum("abcabf->cf", rho)]
    expected = (one[0] + one[1] + one[2]) / 3
    assert np.allclose(reduce_one_site(psi, lat, 2), expected)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_densities_are_states(seed):
    rng = make_rng(seed)
    lat = Lattice(2, 2)
    psi = random_unit_vector(3**4, rng)
    for gamma in (reduce_one_site(psi, lat, 2), reduce_two_site(psi, lat, 2)):
        rep = density_report(gamma)
        assert rep["hermiticity"] < 1e-14
        assert rep["trace_error"] < 1e-12
        assert rep["min_eigenvalue"] > -1e-12
    g1 = reduce_one_site(psi, lat, 2)
    g2 = reduce_two_site(psi, lat, 2)
    for slot in (1, 2):
        assert np.allclose(partial_trace_slot(g2, slot), g1, atol=1e-12)


def test_trace_distance_examples():
    phi = np.array([0.6, 0.8])
    perp = np.array([-0.8, 0.6])
    proj = projectors(phi)
    assert trace_norm_distance(proj.p, proj) == pytest.approx(0.0, abs=1e-14)
    gamma = np.outer(perp, perp)
    assert trace_norm_distance(gamma, proj) == pytest.approx(2.0)
    assert q_moment(gamma, proj, 0) == pytest.approx(1.0)
    for k in (0, 1, 2):
        assert q_moment(proj.p, proj, k) == pytest.approx(0.0, abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 8))
def test_sandwich_and_cauchy_schwarz(seed, M):
    rng = make_rng(seed)
    gamma = random_density(M + 1, rng)
    phi = random_unit_vector(M + 1, rng)
    proj = projectors(phi)
    tq = q_moment(gamma, proj, 0)
    tn = trace_norm_distance(gamma, proj)
    assert 2 * tq <= tn + 1e-10
    assert tn <= 2 * math.sqrt(2) * math.sqrt(tq) + 1e-10
    for k in (1, 2):
        assert q_moment(gamma, proj, k) <= 2 * density_moment(gamma, k) + 2 * mf_moment(phi, k) + 1e-10


def test_perturbed_site_fraction():
    lat = Lattice(2, 2)
    phi = HALF
    perp = np.array([1.0, -1.0]) / math.sqrt(2)
    psi = product_state(phi, lat, perp, perturbed_sites=[2])
    gamma = reduce_one_site(psi, lat, 1)
    assert q_moment(gamma, projectors(phi), 0) == pytest.approx(1 / lat.num_sites)


@pytest.mark.parametrize("L,d,M", [(2, 1, 3), (3, 1, 2), (2, 2, 2), (4, 1, 1)])
def test_energy_identity(L, d, M):
    rng = make_rng(L * 100 + d * 10 + M)
    lat = Lattice(L, d)
    p = ModelParams(*rng.uniform(-1, 1, 3))
    H = build_hamiltonian(p, lat, M)
    for _ in range(3):
        psi = random_unit_vector(H.dim, rng)
        e = rdm_energy(reduce_one_site(psi, lat, M), reduce_two_site(psi, lat, M), p)
        assert e == pytest.approx(energy(H, psi) / lat.num_sites, abs=1e-12)


def test_philox_stream_is_fixed():
    # frozen first draws guard against silent generator changes
    a = make_rng(0).standard_normal(3)
    b = make_rng(0).standard_normal(3)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, make_rng(1).standard_normal(3))


def test_fock_moments():
    gamma = np.diag([0.0, 0.0, 1.0])
    assert density_moment(gamma, 2) == 4.0
    assert mf_moment(fock_state(2, 2), 2) == 4.0
