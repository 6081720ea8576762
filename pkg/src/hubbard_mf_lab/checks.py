"""Invariant and trend checks run by ``hubbard-mf-lab check``.

Each check returns a dict with ``name``, ``passed``, ``margin`` (worst slack,
positive means room to spare), ``seconds`` and free-form ``detail``.
"""

from __future__ import annotations

import filecmp
import math
import tempfile
import time
from pathlib import Path

import numpy as np
import yaml

from .diagnostics import compare_run, d_sweep, default_c, minimal_passing_C, moment_bound_report
from .fock import build_ladder, fock_state, pad
from .lattice import Lattice
from .manybody import (
    ModelParams,
    build_hamiltonian,
    energy,
    evolve_dense,
    evolve_exact,
    hilbert_dim,
    product_state,
    total_number,
)
from .meanfield import evolve_mf, mf_energy, mf_moment, order_parameter, projector_distance, truncation_refine
from .reduced import (
    density_moment,
    make_rng,
    projectors,
    q_moment,
    random_density,
    random_unit_vector,
    rdm_energy,
    reduce_one_site,
    reduce_two_site,
    trace_norm_distance,
)

STANDARD = ModelParams(J=1.0, mu=0.5, U=1.0)
HALF = np.array([1.0, 1.0]) / math.sqrt(2.0)
WITNESS = np.array([-math.sqrt(2.0), 1.0, 1.0]) / 2.0


def _result(name, passed, margin, start, limit, **detail):
    seconds = time.perf_counter() - start
    return {
        "name": name,
        "passed": bool(passed) and seconds < limit,
        "margin": float(margin),
        "seconds": seconds,
        "time_limit": limit,
        "detail": detail,
    }


def standard_compare(M=2, t_final=1.0, n_samples=21):
    """The reference comparison: L=2, d=1, (|0>+|1>)/sqrt2, J=1, mu=1/2, U=1."""
    lattice = Lattice(2, 1)
    phi0 = pad(HALF, M)
    times = np.linspace(0.0, t_final, n_samples)
    return compare_run(STANDARD, lattice, M, product_state(phi0, lattice), phi0, times)


def check_ladder(seed=0):
    start = time.perf_counter()
    worst, adjoint_exact = 0.0, True
    for M in (1, 2, 4, 8, 16):
        a, ad, n = build_ladder(M)
        comm = a @ ad - ad @ a
        worst = max(worst, float(np.max(np.abs(comm[:M, :M] - np.eye(M)))))
        adjoint_exact &= bool(np.array_equal(ad, a.conj().T))
        adjoint_exact &= bool(np.array_equal(n, np.diag(np.arange(M + 1)).astype(complex)))
    return _result("ladder_algebra", worst <= 1e-13 and adjoint_exact, 1e-13 - worst, start, 1.0,
                   max_ccr_error=worst, adjoint_exact=adjoint_exact)


def check_exact_conservation(seed=0):
    start = time.perf_counter()
    lattice, M = Lattice(2, 2), 3
    params = ModelParams(1.0, 0.5, 1.0)
    phi0 = random_unit_vector(M + 1, make_rng(seed))
    H = build_hamiltonian(params, lattice, M)
    times = np.linspace(0.0, 2.0, 21)
    states = evolve_exact(H, product_state(phi0, lattice), times, tol=1e-10)
    norms = [np.linalg.norm(s) for s in states]
    ns = [total_number(s, lattice, M) for s in states]
    es = [energy(H, s) for s in states]
    drifts = {
        "norm": float(np.max(np.abs(np.array(norms) - 1.0))),
        "number": float(np.max(np.abs(np.array(ns) - ns[0]))),
        "energy": float(np.max(np.abs(np.array(es) - es[0]))),
    }
    worst = max(drifts.values())
    return _result("exact_conservation", worst <= 1e-8, 1e-8 - worst, start, 10.0, **drifts)


def oracle_configurations(max_dim=512):
    """Every ``(L, d, M)`` with ``L <= 9``, ``d <= 3``, ``M >= 1`` and dimension <= 512."""
    configs = []
    for d in (1, 2, 3):
        for L in range(2, 10):
            for M in range(1, 9):
                if hilbert_dim(Lattice(L, d), M) <= max_dim:
                    configs.append((L, d, M))
    return configs


def check_oracle(seed=0):
    start = time.perf_counter()
    rng = make_rng(seed)
    worst = 0.0
    configs = oracle_configurations()
    for L, d, M in configs:
        lattice = Lattice(L, d)
        params = ModelParams(*rng.uniform(-1.5, 1.5, size=3))
        H = build_hamiltonian(params, lattice, M)
        psi0 = product_state(random_unit_vector(M + 1, rng), lattice)
        kry = evolve_exact(H, psi0, [1.0], tol=1e-12)[0]
        ref = evolve_dense(H, psi0, [1.0])[0]
        worst = max(worst, float(np.linalg.norm(kry - ref)))
    return _result("krylov_vs_dense", worst <= 1e-8, 1e-8 - worst, start, 30.0,
                   configurations=len(configs), max_error=worst)


def check_mf_conservation(seed=0):
    start = time.perf_counter()
    times = np.linspace(0.0, 2.0, 41)
    drifts = {}
    for label, phi in (("fock1", fock_state(1, 1)), ("half", HALF), ("witness", WITNESS)):
        traj = evolve_mf(phi, STANDARD, 24, times, dt=1e-3, richardson=False)
        norms = np.linalg.norm(traj.phis, axis=1)
        ns = np.array([mf_moment(p, 1) for p in traj.phis])
        es = np.array([mf_energy(p, STANDARD) for p in traj.phis])
        drifts[label] = {
            "norm": float(np.max(np.abs(norms - 1.0))),
            "number": float(np.max(np.abs(ns - ns[0]))),
            "energy": float(np.max(np.abs(es - es[0]))),
        }
    worst = max(v for dd in drifts.values() for v in dd.values())
    return _result("meanfield_conservation", worst <= 1e-8, 1e-8 - worst, start, 5.0, drifts=drifts)


def check_onset(seed=0):
    start = time.perf_counter()
    h = 1e-3
    params = ModelParams(0.0, 0.0, 1.0)
    traj = evolve_mf(WITNESS, params, 24, [h], dt=1e-3, richardson=False)
    slope = (abs(traj.alphas[0]) - abs(order_parameter(WITNESS))) / h
    expected = math.sqrt(2.0) / 4.0
    rel = abs(slope - expected) / expected
    return _result("mott_superfluid_onset", rel <= 0.01, 0.01 - rel, start, 1.0,
                   slope=slope, expected=expected, relative_error=rel)


def check_fock_stationarity(seed=0):
    start = time.perf_counter()
    grid = [ModelParams(1.0, 0.5, 1.0), ModelParams(-0.7, 1.3, 2.0), ModelParams(2.0, -1.0, -0.5)]
    times = np.linspace(0.0, 2.0, 21)
    phi0 = fock_state(1, 24)
    worst = 0.0
    for params in grid:
        traj = evolve_mf(phi0, params, 24, times, richardson=False)
        worst = max(worst, max(projector_distance(p, phi0) for p in traj.phis))
    return _result("fock_stationarity", worst <= 1e-8, 1e-8 - worst, start, 5.0, max_distance=worst)


def random_pairs(M, count, rng):
    """Random ``(gamma, phi)`` pairs; half Ginibre, half mixtures close to ``p``."""
    dim = M + 1
    for i in range(count):
        phi = random_unit_vector(dim, rng)
        rho = random_density(dim, rng)
        if i % 2:
            s = rng.uniform(0.0, 0.2) ** 2
            rho = (1.0 - s) * np.outer(phi, phi.conj()) + s * rho
        yield rho, phi


def check_sandwich(seed=0):
    start = time.perf_counter()
    rng = make_rng(seed)
    worst = math.inf
    for M in (1, 2, 4, 8):
        for gamma, phi in random_pairs(M, 100, rng):
            proj = projectors(phi)
            tq = q_moment(gamma, proj, 0)
            tn = trace_norm_distance(gamma, proj)
            worst = min(worst, tn - 2.0 * tq, 2.0 * math.sqrt(2.0) * math.sqrt(max(tq, 0.0)) - tn)
    return _result("trace_norm_sandwich", worst >= -1e-10, worst, start, 5.0, min_slack=worst)


def check_iterated_cs(seed=0):
    start = time.perf_counter()
    rng = make_rng(seed + 1)
    worst = math.inf
    for i, (gamma, phi) in enumerate(random_pairs(6, 100, rng)):
        k = 1 + i % 2
        proj = projectors(phi)
        lhs = q_moment(gamma, proj, k)
        rhs = 2.0 * density_moment(gamma, k) + 2.0 * mf_moment(phi, k)
        worst = min(worst, rhs - lhs)
    return _result("iterated_cauchy_schwarz", worst >= -1e-10, worst, start, 5.0, min_slack=worst)


def check_moment_bounds(seed=0, run=None):
    start = time.perf_counter()
    H, exact, mf, series = run or standard_compare()
    mf_report = moment_bound_report(mf, (1, 2, 4), STANDARD.J)
    ex_report = moment_bound_report(exact, (1, 2), STANDARD.J, H.lattice, H.cutoff, series.times)
    margin = min(e["margin"] for e in mf_report["entries"] + ex_report["entries"])
    return _result("moment_bounds", mf_report["passed"] and ex_report["passed"], margin, start, 30.0,
                   meanfield=[(e["k"], e["bound_name"], e["margin"]) for e in mf_report["entries"]],
                   exact=[(e["k"], e["bound_name"], e["margin"]) for e in ex_report["entries"]])


def check_energy_identity(seed=0):
    start = time.perf_counter()
    rng = make_rng(seed + 2)
    lattice, M = Lattice(2, 2), 2
    H = build_hamiltonian(STANDARD, lattice, M)
    worst = 0.0
    for _ in range(10):
        psi = random_unit_vector(H.dim, rng)
        lhs = rdm_energy(reduce_one_site(psi, lattice, M), reduce_two_site(psi, lattice, M), STANDARD)
        worst = max(worst, abs(lhs - energy(H, psi) / lattice.num_sites))
    return _result("rdm_energy_identity", worst <= 1e-9, 1e-9 - worst, start, 10.0, max_error=worst)


def check_excitation(seed=0, run=None):
    start = time.perf_counter()
    H, exact, mf, series = run or standard_compare()
    g0 = abs(series.g[0])
    slack = series.equivalence_slack(STANDARD.U)
    phi0 = mf.phis[0]
    min_C = max(
        minimal_passing_C(f, g, q, series.c, STANDARD, phi0, H.lattice.d)
        for f, g, q in zip(series.f, series.g, series.tr_gamma_q)
    )
    return _result("excitation_functionals", g0 <= 1e-12 and slack >= 0.0, min(1e-12 - g0, slack), start, 30.0,
                   g0=g0, min_slack=slack, c=series.c, minimal_C=min_C,
                   derivative_check=series.derivative_check)


def trend_sweep(seed=0):
    base = {
        "params": STANDARD, "L": 2, "M": 2, "t_final": 0.5, "n_samples": 11,
        "phi0": pad(HALF, 2), "M_by_d": {4: 1},
    }
    return d_sweep(base, (1, 2, 3, 4), seeds=(seed,))


def check_theorem_trend(seed=0):
    start = time.perf_counter()
    sweep = trend_sweep(seed)
    rows = sorted(sweep.ok_rows(), key=lambda r: r.d)
    q = [r.sup_tr_gamma_q for r in rows]
    tn = [r.sup_trace_norm for r in rows]
    complete = [r.d for r in rows] == [1, 2, 3, 4]
    margin = min(min(a - b for a, b in zip(q, q[1:])), min(a - b for a, b in zip(tn, tn[1:])))
    table = [
        {"d": r.d, "M": r.M, "sup_tr_gamma_q": r.sup_tr_gamma_q, "sup_trace_norm": r.sup_trace_norm,
         "ratio_to_inv_d": r.ratio_to_inv_d}
        for r in rows
    ]
    return _result("theorem_trend", complete and margin > 0.0, margin, start, 900.0, table=table)


def check_refinement(seed=0):
    start = time.perf_counter()
    phi0 = np.array([1.0, 1.0, 1.0 / math.sqrt(2.0)])
    phi0 = phi0 / np.linalg.norm(phi0)
    report = truncation_refine(phi0, ModelParams(1.0, 0.0, 1.0), 1.0, (8, 12, 16, 24))
    final = report.truncation_error
    ok = report.decreasing and final <= 1e-6
    margin = min(1e-6 - final, min(a - b for a, b in zip(report.vector_deltas, report.vector_deltas[1:])))
    return _result("truncation_refinement", ok, margin, start, 10.0,
                   vector_deltas=report.vector_deltas, projector_deltas=report.projector_deltas)


REPRO_CONFIG = {
    "model": {"J": 1.0, "mu": 0.5, "U": 1.0},
    "lattice": {"L": 2, "d": 1},
    "cutoff": {"M": 2},
    "time": {"t_final": 1.0, "dt": 1e-3, "n_samples": 11, "krylov_tol": 1e-10},
    "initial": {"gutzwiller": "random"},
    "diagnostics": {"c_constant_C": 1.0, "k_moments": [1, 2]},
}


def check_reproducibility(seed=0):
    from .cli import run

    start = time.perf_counter()
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        cfg = tmp / "run.yaml"
        cfg.write_text(yaml.safe_dump(REPRO_CONFIG))
        codes = []
        for name in ("a", "b"):
            for sub in ("exact", "meanfield", "compare"):
                codes.append(run(sub, cfg, seed=seed, threads=1, out=tmp / name))
        files = sorted(p.name for p in (tmp / "a").iterdir())
        match, mismatch, errors = filecmp.cmpfiles(tmp / "a", tmp / "b", files, shallow=False)
    ok = all(c == 0 for c in codes) and not mismatch and not errors and len(match) == len(files) > 0
    return _result("reproducibility", ok, 0.0 if ok else -1.0, start, 60.0,
                   files=files, mismatched=mismatch + errors)


ALL_CHECKS = (
    check_ladder,
    check_exact_conservation,
    check_oracle,
    check_mf_conservation,
    check_onset,
    check_fock_stationarity,
    check_sandwich,
    check_iterated_cs,
    check_moment_bounds,
    check_energy_identity,
    check_excitation,
    check_theorem_trend,
    check_refinement,
    check_reproducibility,
)


def run_all(seed=0):
    run = standard_compare()
    results = []
    for check in ALL_CHECKS:
        if check in (check_moment_bounds, check_excitation):
            results.append(check(seed, run=run))
        else:
            results.append(check(seed))
    return results
