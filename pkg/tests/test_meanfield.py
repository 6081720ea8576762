import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hubbard_mf_lab.errors import NumericalError
from hubbard_mf_lab.fock import build_ladder, fock_state
from hubbard_mf_lab.manybody import ModelParams
from hubbard_mf_lab.meanfield import (
    evolve_mf,
    mf_energy,
    mf_generator,
    mf_moment,
    order_parameter,
    projector_distance,
    truncation_refine,
)
from hubbard_mf_lab.reduced import make_rng, random_unit_vector

from conftest import HALF, WITNESS


def test_order_parameter_examples():
    for n in range(4):
        assert order_parameter(fock_state(n, 4)) == 0
    assert order_parameter(HALF) == pytest.approx(0.5)
    assert abs(order_parameter(WITNESS)) < 1e-15
    _, _, n = build_ladder(2)
    a = build_ladder(2)[0]
    assert np.vdot(WITNESS, n @ a @ WITNESS).real == pytest.approx(math.sqrt(2) / 4)


def test_generator_examples():
    p = ModelParams(1.0, 0.3, 1.4)
    h = mf_generator(fock_state(2, 3), p, 3)
    n = np.arange(4.0)
    assert np.allclose(h, np.diag((p.J - p.mu) * n + 0.5 * p.U * n * (n - 1)))
    h0 = mf_generator(random_unit_vector(4, make_rng(0)), ModelParams(0.0, 0.3, 1.4), 3)
    assert np.allclose(h0, np.diag(-0.3 * n + 0.7 * n * (n - 1)))
    h = mf_generator(HALF, ModelParams(1.0, 0.0, 0.0), 1)
    assert np.allclose(h, [[0.25, -0.5], [-0.5, 1.25]])


def test_energy_examples():
    p = ModelParams(1.0, 0.0, 1.0)
    assert mf_energy(fock_state(0, 3), p) == 0.0
    assert mf_energy(fock_state(2, 3), p) == pytest.approx(3.0)
    assert mf_energy(HALF, ModelParams(1.0, 0.0, 0.0)) == pytest.approx(0.25)


def test_moment_examples():
    assert mf_moment(fock_state(3, 4), 2) == pytest.approx(9.0)
    phi = np.array([1.0, 0.0, 1.0]) / math.sqrt(2)
    assert mf_moment(phi, 1) == pytest.approx(1.0)
    assert mf_moment(phi, 0.5) == pytest.approx(math.sqrt(2) / 2)


def test_fock_projector_stationary():
    phi0 = fock_state(1, 6)
    traj = evolve_mf(phi0, ModelParams(1.0, 0.5, 1.0), 6, np.linspace(0.1, 2.0, 5))
    assert max(projector_distance(p, phi0) for p in traj.phis) <= 1e-12


def test_zero_hopping_keeps_moduli():
    phi0 = random_unit_vector(5, make_rng(4))
    traj = evolve_mf(phi0, ModelParams(0.0, 0.7, 1.3), 4, [0.5, 1.5])
    for phi in traj.phis:
        assert np.allclose(np.abs(phi), np.abs(phi0), atol=1e-12)


def test_witness_slope():
    p = ModelParams(0.0, 0.0, 1.0)
    traj = evolve_mf(WITNESS, p, 24, [1e-3, 2e-3], richardson=False)
    slope1 = abs(traj.alphas[0]) / 1e-3
    slope2 = (abs(traj.alphas[1]) - abs(traj.alphas[0])) / 1e-3
    for s in (slope1, slope2):
        assert s == pytest.approx(math.sqrt(2) / 4, rel=1e-3)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_conservation_random(seed):
    rng = make_rng(seed)
    p = ModelParams(*rng.uniform(-1.5, 1.5, 3))
    phi0 = random_unit_vector(4, rng)
    traj = evolve_mf(phi0, p, 12, np.linspace(0.1, 1.0, 4))
    assert traj.norm_drift <= 1e-10
    for phi in traj.phis:
        assert mf_moment(phi, 1) == pytest.approx(mf_moment(phi0, 1), abs=1e-9)
        assert mf_energy(phi, p) == pytest.approx(mf_energy(phi0, p), abs=1e-9)
    assert traj.richardson_error < 1e-8


def test_refinement_examples():
    zero = truncation_refine(fock_state(0, 0), ModelParams(0.0, 0.5, 1.0), 1.0, (2, 4, 6))
    assert zero.vector_deltas == [0.0, 0.0]
    fock = truncation_refine(fock_state(1, 1), ModelParams(1.0, 0.5, 1.0), 1.0, (2, 4, 6))
    assert max(fock.vector_deltas) <= 1e-12
    assert max(fock.projector_deltas) <= 1e-12


def test_input_validation():
    with pytest.raises(ValueError):
        evolve_mf(HALF, ModelParams(1, 0, 1), 2, [1.0], dt=0.1)
    with pytest.raises(ValueError):
        evolve_mf(HALF, ModelParams(1, 0, 1), 2, [1.0, 0.5])
    with pytest.raises(ValueError):
        truncation_refine(HALF, ModelParams(1, 0, 1), 1.0, (4, 4))


def test_blowup_raises():
    # a huge interaction makes the fixed step useless; the drift guard must fire
    p = ModelParams(1.0, 0.0, 1e6)
    phi0 = np.ones(6) / math.sqrt(6)
    with pytest.raises(NumericalError):
        evolve_mf(phi0, p, 5, [0.2], dt=1e-2, richardson=False)
