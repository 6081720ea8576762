import math

import numpy as np
import pytest

from hubbard_mf_lab.diagnostics import (
    alpha_micro,
    compare_run,
    d_sweep,
    decay_constant,
    default_c,
    equivalence_slack,
    excitation_functionals,
    exact_moment_bound,
    gronwall_rhs,
    minimal_passing_C,
    mf_moment_bound_1,
    mf_moment_bound_2,
    moment_bound_report,
    sandwich_bounds,
)
from hubbard_mf_lab.fock import fock_state, pad
from hubbard_mf_lab.lattice import Lattice
from hubbard_mf_lab.manybody import ModelParams, fock_product, product_state
from hubbard_mf_lab.meanfield import mf_moment, order_parameter
from hubbard_mf_lab.reduced import make_rng, random_unit_vector, reduce_one_site

from conftest import HALF


def test_alpha_micro_examples():
    lat = Lattice(2, 2)
    assert alpha_micro(product_state(fock_state(0, 2), lat), lat, 2) == 0
    assert alpha_micro(fock_product((1, 0, 2, 1), lat, 2), lat, 2) == 0
    phi = random_unit_vector(3, make_rng(9))
    assert alpha_micro(product_state(phi, lat), lat, 2) == pytest.approx(order_parameter(phi), abs=1e-14)


def test_g_vanishes_on_product():
    lat = Lattice(2, 1)
    p = ModelParams(1.0, 0.5, 1.0)
    phi = pad(HALF, 2)
    f, g = excitation_functionals(product_state(phi, lat), phi, p, 7.0, lat, 2)
    assert abs(g) <= 1e-12
    # <phi, h phi> equals the mean-field energy, which equals <H>/|Lambda| here
    assert f == pytest.approx(0.0, abs=1e-12)


def test_f_depends_linearly_on_c():
    lat = Lattice(3, 1)
    p = ModelParams(1.0, 0.5, 1.0)
    rng = make_rng(4)
    psi = random_unit_vector(27, rng)
    phi = random_unit_vector(3, rng)
    f1, g1 = excitation_functionals(psi, phi, p, 1.0, lat, 2)
    f2, g2 = excitation_functionals(psi, phi, p, 3.0, lat, 2)
    tq = 1.0 - np.vdot(phi, reduce_one_site(psi, lat, 2) @ phi).real
    assert g1 == g2
    assert f2 - f1 == pytest.approx(2.0 * tq, abs=1e-12)


def test_minimal_C_makes_bound_hold():
    p = ModelParams(1.0, 0.5, 1.0)
    phi0 = pad(HALF, 2)
    f, g, tq, c = -5.0, 3.0, 0.2, default_c(p, phi0)
    C = minimal_passing_C(f, g, tq, c, p, phi0, 1)
    assert C > 0
    c_new = default_c(p, phi0, C)
    f_new = f + (c_new - c) * tq
    assert equivalence_slack(f_new, g, p, 1) == pytest.approx(0.0, abs=1e-12)
    assert minimal_passing_C(10.0, g, tq, c, p, phi0, 1) == 0.0


def test_sandwich_bounds_values():
    assert sandwich_bounds(0.0) == (0.0, 0.0)
    lo, hi = sandwich_bounds(0.5)
    assert lo == 1.0 and hi == pytest.approx(2.0)


def test_gronwall_rhs_at_product_start():
    # with Tr(gamma q) = 0 only the 1/d source term remains
    assert gronwall_rhs(-2.0, 3.0, 0.0, 0.0, 4) == pytest.approx(2.0 * 2.0 * math.sqrt(3.0) / 4)


def test_moment_bounds_at_zero_time():
    phi0 = np.array([0.6, 0.0, 0.8])
    n0 = mf_moment(phi0, 1)
    for k in (1, 2, 4):
        m = mf_moment(phi0, k)
        assert mf_moment_bound_1(m, n0, 1.0, k, 0.0) == pytest.approx(m + k**k / math.e)
        assert exact_moment_bound(m, 1.0, k, 0.0) == pytest.approx(m + k**k / math.e)
    assert mf_moment_bound_2(phi0, 1.0, 2, 0.0) == pytest.approx(mf_moment(phi0, 2))


def test_compare_with_zero_hopping_is_exact():
    lat = Lattice(3, 1)
    p = ModelParams(0.0, 0.4, 1.0)
    phi0 = random_unit_vector(3, make_rng(12))
    times = np.linspace(0.0, 1.0, 6)
    _, _, _, series = compare_run(p, lat, 2, product_state(phi0, lat), phi0, times)
    assert np.max(np.abs(series.tr_gamma_q)) <= 1e-9
    assert np.max(series.trace_norm) <= 1e-4


def test_compare_series_shape_and_start():
    lat = Lattice(2, 1)
    p = ModelParams(1.0, 0.5, 1.0)
    phi0 = pad(HALF, 2)
    times = np.linspace(0.0, 0.5, 6)
    _, exact, mf, series = compare_run(p, lat, 2, product_state(phi0, lat), phi0, times)
    rows = list(series.rows())
    assert len(rows) == 6 and all(len(r) == len(series.CSV_COLUMNS) for r in rows)
    assert abs(series.tr_gamma_q[0]) <= 1e-14
    assert series.sandwich_slack() >= -1e-10
    assert series.derivative_check["passed"]
    assert moment_bound_report(mf, (1, 2, 4), p.J)["passed"]
    assert moment_bound_report(exact, (1, 2), p.J, lat, 2, times)["passed"]


def test_sweep_rejects_oversize_point():
    base = {"params": ModelParams(1.0, 0.5, 1.0), "L": 2, "M": 2, "t_final": 0.2, "n_samples": 3,
            "phi0": pad(HALF, 2)}
    result = d_sweep(base, (1, 4))
    status = {r.d: r.status for r in result.rows}
    assert status == {1: "ok", 4: "resource_rejected"}
    assert not result.has_failures()
    rejected = [r for r in result.rows if r.d == 4][0]
    assert rejected.required_bytes > 2 * 1024**3


def test_decay_constant():
    assert decay_constant(fock_state(0, 4)) == 1.0
    assert decay_constant(fock_state(2, 4)) == pytest.approx(math.e**2)
