"""Command line front end: ``hubbard-mf-lab <subcommand> --config PATH``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config
from .diagnostics import (
    alpha_micro,
    compare_run,
    d_sweep,
    decay_constant,
    default_c,
    minimal_passing_C,
    moment_bound_report,
)
from .errors import ConfigError, NumericalError, ResourceError
from .fock import fock_state, pad
from .lattice import Lattice
from .manybody import build_hamiltonian, check_budget, energy, evolve_exact, fock_product, product_state, total_number
from .meanfield import evolve_mf, mf_energy, mf_moment, order_parameter
from .reduced import make_rng, random_unit_vector, reduce_one_site

log = logging.getLogger("hubbard_mf_lab")

EXIT_OK, EXIT_CONFIG, EXIT_RESOURCE, EXIT_NUMERICAL = 0, 2, 3, 4
SUBCOMMANDS = ("exact", "meanfield", "compare", "sweep", "check")


def fmt(x) -> str:
    """Shortest round-trip decimal."""
    return repr(float(x))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def write_csv(path: Path, columns, rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def initial_states(cfg: RunConfig, lattice: Lattice):
    """Return ``(psi0, phi0)``; ``phi0`` is None when no product matches."""
    init = cfg.initial
    if init.kind == "gutzwiller":
        if init.amplitudes is None:
            phi0 = random_unit_vector(cfg.M + 1, make_rng(cfg.seed))
        else:
            phi0 = pad(init.amplitudes, cfg.M)
        return product_state(phi0, lattice), phi0
    if init.kind == "perturbed_gutzwiller":
        phi0 = pad(init.amplitudes, cfg.M)
        perp = pad(init.perp_amplitudes, cfg.M)
        psi0 = product_state(phi0, lattice, perp, range(init.num_perturbed_sites))
        return psi0, phi0
    occ = init.occupations
    psi0 = fock_product(occ, lattice, cfg.M)
    phi0 = fock_state(occ[0], cfg.M) if len(set(occ)) == 1 else None
    return psi0, phi0


def _require_phi(phi0):
    if phi0 is None:
        raise ConfigError("initial.fock_tuple", "mean-field runs need a site-uniform occupation")
    return phi0


def run_exact(cfg, out: Path) -> int:
    lattice = Lattice(cfg.L, cfg.d)
    check_budget(lattice, cfg.M, cfg.memory_cap_bytes)
    psi0, _ = initial_states(cfg, lattice)
    H = build_hamiltonian(cfg.params, lattice, cfg.M, cap=cfg.memory_cap_bytes)
    states = evolve_exact(H, psi0, cfg.times, tol=cfg.krylov_tol)
    rows = []
    for t, psi in zip(cfg.times, states):
        am = alpha_micro(psi, lattice, cfg.M)
        rows.append((t, np.linalg.norm(psi), total_number(psi, lattice, cfg.M),
                     energy(H, psi) / lattice.num_sites, am.real, am.imag))
    write_csv(out / "exact.csv", ("t", "exact_norm", "exact_total_n", "energy_exact_per_site",
                                  "alpha_micro_re", "alpha_micro_im"), rows)
    moments = moment_bound_report(states, cfg.k_moments, cfg.params.J, lattice, cfg.M, cfg.times)
    col = list(zip(*rows))
    write_json(out / "exact_summary.json", {
        "dimension": H.dim,
        "norm_drift": float(np.max(np.abs(np.array(col[1]) - 1.0))),
        "total_n_drift": float(np.ptp(col[2])),
        "energy_drift": float(np.ptp(col[3])),
        "moment_bounds": moments,
        "decay_constant_a1": decay_constant(reduce_one_site(psi0, lattice, cfg.M)),
    })
    return EXIT_OK


def run_meanfield(cfg, out: Path) -> int:
    lattice = Lattice(cfg.L, cfg.d)
    _, phi0 = initial_states(cfg, lattice)
    phi0 = _require_phi(phi0)
    traj = evolve_mf(phi0, cfg.params, cfg.M, cfg.times, dt=cfg.dt)
    rows = []
    for t, phi in zip(traj.times, traj.phis):
        alpha = order_parameter(phi)
        rows.append((t, np.linalg.norm(phi), mf_moment(phi, 1), mf_energy(phi, cfg.params), alpha.real, alpha.imag))
    write_csv(out / "meanfield.csv", ("t", "mf_norm", "mf_n", "energy_mf", "alpha_mf_re", "alpha_mf_im"), rows)
    col = list(zip(*rows))
    write_json(out / "meanfield_summary.json", {
        "norm_drift": traj.norm_drift,
        "n_drift": float(np.ptp(col[2])),
        "energy_drift": float(np.ptp(col[3])),
        "richardson_error": traj.richardson_error,
        "moment_bounds": moment_bound_report(traj, cfg.k_moments, cfg.params.J),
        "decay_constant_a1": decay_constant(phi0),
    })
    return EXIT_OK


def run_compare(cfg, out: Path) -> int:
    lattice = Lattice(cfg.L, cfg.d)
    check_budget(lattice, cfg.M, cfg.memory_cap_bytes)
    psi0, phi0 = initial_states(cfg, lattice)
    phi0 = _require_phi(phi0)
    c = default_c(cfg.params, phi0, cfg.c_constant_C) if cfg.params.U > 0 else 0.0
    H, exact, mf, series = compare_run(cfg.params, lattice, cfg.M, psi0, phi0, cfg.times,
                                       dt=cfg.dt, tol=cfg.krylov_tol, c=c)
    write_csv(out / "compare.csv", series.CSV_COLUMNS, series.rows())
    summary = {
        "c": c,
        "sandwich_min_slack": series.sandwich_slack(),
        "derivative_check": series.derivative_check,
        "sup_tr_gamma_q": float(np.max(series.tr_gamma_q)),
        "sup_trace_norm": float(np.max(series.trace_norm)),
        "hs_deviation": series.hs_deviation,
        "kinetic_average": series.kinetic_average,
        "moment_bounds_meanfield": moment_bound_report(mf, cfg.k_moments, cfg.params.J),
        "moment_bounds_exact": moment_bound_report(exact, cfg.k_moments, cfg.params.J, lattice, cfg.M, cfg.times),
        "richardson_error": mf.richardson_error,
    }
    if cfg.params.U > 0:
        slack = series.equivalence_slack(cfg.params.U)
        summary["equivalence_min_slack"] = slack
        summary["equivalence_passed"] = slack >= 0.0
        summary["equivalence_minimal_C"] = max(
            minimal_passing_C(f, g, q, c, cfg.params, phi0, lattice.d)
            for f, g, q in zip(series.f, series.g, series.tr_gamma_q)
        )
    write_json(out / "compare_summary.json", summary)
    return EXIT_OK


def run_sweep(cfg, out: Path, threads: int) -> int:
    base = {
        "params": cfg.params, "L": cfg.L, "M": cfg.M, "t_final": cfg.t_final,
        "n_samples": cfg.n_samples, "dt": cfg.dt, "tol": cfg.krylov_tol,
        "M_by_d": cfg.M_by_d, "memory_cap": cfg.memory_cap_bytes,
    }
    if cfg.initial.kind != "gutzwiller":
        raise ConfigError("initial", "sweeps use Gutzwiller initial data")
    base["phi0"] = None if cfg.initial.amplitudes is None else pad(cfg.initial.amplitudes, cfg.M)
    d_list = cfg.d_list or (cfg.d,)
    result = d_sweep(base, d_list, cfg.seeds, workers=threads)
    write_json(out / "sweep.json", {
        "meta": result.meta,
        "rows": [vars(r) for r in result.rows],
        "sup_tr_gamma_q_strictly_decreasing": result.strictly_decreasing("sup_tr_gamma_q"),
        "sup_trace_norm_strictly_decreasing": result.strictly_decreasing("sup_trace_norm"),
    })
    return EXIT_NUMERICAL if result.has_failures() else EXIT_OK


def run_check(seed: int, out: Path) -> int:
    from .checks import run_all

    results = run_all(seed=seed)
    write_json(out / "check.json", {"seed": seed, "results": results,
                                    "passed": all(r["passed"] for r in results)})
    for r in results:
        print(f"[{'PASS' if r['passed'] else 'FAIL'}] {r['name']}: margin={r['margin']}")
    return EXIT_OK if all(r["passed"] for r in results) else EXIT_NUMERICAL


def run(subcommand, config_path=None, seed=None, threads=1, out=None) -> int:
    try:
        if subcommand == "check":
            if config_path is not None:
                cfg = load_config(config_path)
                seed = cfg.seed if seed is None else seed
                out = out or cfg.output
            outdir = Path(out or "out")
            outdir.mkdir(parents=True, exist_ok=True)
            return run_check(0 if seed is None else seed, outdir)
        if config_path is None:
            raise ConfigError("--config", f"required for {subcommand}")
        cfg = load_config(config_path)
        if seed is not None:
            cfg.seed = int(seed)
        outdir = Path(out or cfg.output)
        outdir.mkdir(parents=True, exist_ok=True)
        if subcommand == "exact":
            return run_exact(cfg, outdir)
        if subcommand == "meanfield":
            return run_meanfield(cfg, outdir)
        if subcommand == "compare":
            return run_compare(cfg, outdir)
        if subcommand == "sweep":
            return run_sweep(cfg, outdir, max(1, int(threads)))
        raise ConfigError("<subcommand>", f"unknown subcommand {subcommand!r}")
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except ResourceError as exc:
        log.error("resource rejection: %s", exc)
        return EXIT_RESOURCE
    except NumericalError as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="hubbard-mf-lab", description=__doc__)
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    return run(args.subcommand, args.config, args.seed, args.threads, args.out)


if __name__ == "__main__":
    sys.exit(main())
