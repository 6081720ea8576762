"""Monitors comparing exact lattice dynamics with the mean-field flow."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ResourceError
from .fock import as_cutoff, build_ladder, number_diagonal, pad
from .lattice import Lattice
from .manybody import (
    KRYLOV_DIM,
    ModelParams,
    apply_site,
    build_hamiltonian,
    check_budget,
    energy,
    evolve_exact,
    product_state,
    total_number,
)
from .meanfield import evolve_mf, mf_energy, mf_generator, mf_moment, order_parameter
from .reduced import (
    density_moment,
    make_rng,
    projectors,
    q_moment,
    random_unit_vector,
    reduce_one_site,
    reduce_two_site,
    trace_norm_distance,
)

SANDWICH_SLACK = 1e-10
GRONWALL_FD_STEP = 1e-3
GRONWALL_FD_RTOL = 0.10


def alpha_micro(psi, lattice: Lattice, cutoff) -> complex:
    """Site average of ``<psi, a_x psi>``."""
    a, _, _ = build_ladder(as_cutoff(cutoff))
    return complex(np.trace(reduce_one_site(psi, lattice, cutoff) @ a))


def hopping_correlations(psi, lattice: Lattice, cutoff) -> np.ndarray:
    """Matrix ``G[y, x] = <psi, a*_y a_x psi>`` over all site pairs."""
    a, _, _ = build_ladder(as_cutoff(cutoff))
    W = np.array([apply_site(a, psi, x, lattice, cutoff) for x in range(lattice.num_sites)])
    return W.conj() @ W.T


def particle_density_remark(psi, gamma2, alpha_mf, lattice, cutoff) -> tuple[float, float]:
    """Return ``(hs_deviation, kinetic_average)``.

    ``hs_deviation = |Lambda|^-2 sum_{x,y} |<a*_y a_x> - |alpha|^2|^2`` uses all
    site pairs, so it is computed from ``psi`` directly. ``kinetic_average`` is
    ``Tr(gamma2 a* (x) a)``, the bond average of ``Re <a*_x a_y>``; both tend
    to ``|alpha|^2`` in the large-d limit.
    """
    G = hopping_correlations(psi, lattice, cutoff)
    target = abs(alpha_mf) ** 2
    hs = float(np.sum(np.abs(G - target) ** 2) / lattice.num_sites**2)
    a, ad, _ = build_ladder(as_cutoff(cutoff))
    kinetic = float(np.trace(gamma2 @ np.kron(ad, a)).real)
    return hs, kinetic


def excitation_functionals(psi, phi, params, c, lattice, cutoff, gamma1=None, energy_per_site=None):
    """Return ``(f, g)`` for the state ``psi`` against the product ``phi``.

    ``g = Tr(gamma1 (q N^2 q + q))`` and
    ``f = <H>/|Lambda| + Tr(gamma1 (q h q - h + c q))`` with ``h = h^phi``.
    """
    cutoff = as_cutoff(cutoff)
    if gamma1 is None:
        gamma1 = reduce_one_site(psi, lattice, cutoff)
    if energy_per_site is None:
        H = build_hamiltonian(params, lattice, cutoff)
        energy_per_site = energy(H, psi) / lattice.num_sites
    proj = projectors(pad(phi, cutoff))
    q = proj.q
    n2 = np.diag(number_diagonal(cutoff) ** 2)
    g = float(np.trace(gamma1 @ (q @ n2 @ q + q)).real)
    h = mf_generator(proj.phi, params, cutoff)
    f = energy_per_site + float(np.trace(gamma1 @ (q @ h @ q - h + c * q)).real)
    return f, g


def c_structure(params: ModelParams, phi0) -> float:
    """Factor multiplying the universal constant in the default ``c``.

    ``(1 + J^2 + (J - mu - U/2)^2) (1 + 1/eps + <N>_0^2)`` with ``eps = U/4``.
    """
    if params.U <= 0:
        raise ValueError("the f/g equivalence needs U > 0")
    eps = params.U / 4.0
    n0 = mf_moment(phi0, 1)
    return (1.0 + params.J**2 + (params.J - params.mu - params.U / 2.0) ** 2) * (1.0 + 1.0 / eps + n0**2)


def default_c(params: ModelParams, phi0, C: float = 1.0) -> float:
    return C * c_structure(params, phi0) + params.U / 4.0


def equivalence_slack(f, g, params, d) -> float:
    """``f - (U/4 g - 1/d)``; nonnegative when the lower bound holds."""
    return f - (params.U / 4.0 * g - 1.0 / d)


def minimal_passing_C(f, g, tr_q, c_used, params, phi0, d) -> float:
    """Smallest universal constant making the lower bound hold at one time.

    ``f`` depends on ``c`` only through ``c * Tr(gamma1 q)``.
    """
    f0 = f - c_used * tr_q
    need = params.U / 4.0 * g - 1.0 / d - f0 - params.U / 4.0 * tr_q
    if need <= 0.0:
        return 0.0
    if tr_q <= 0.0:
        return math.inf
    return need / (c_structure(params, phi0) * tr_q)


def sandwich_bounds(tr_gamma_q: float) -> tuple[float, float]:
    """Lower and upper trace-norm bounds ``2 Tr(gamma q)`` and ``2 sqrt(2 Tr(gamma q))``."""
    return 2.0 * tr_gamma_q, 2.0 * math.sqrt(2.0) * math.sqrt(max(tr_gamma_q, 0.0))


def gronwall_rhs(J, tr_p_n, tr_gamma_q, tr_gamma_qn1q, d) -> float:
    """Right-hand side of the derivative bound for ``Tr(gamma1 q)``."""
    return abs(J) * math.sqrt(tr_p_n + 1.0) * (
        8.0 * math.sqrt(tr_p_n) * tr_gamma_q
        + 4.0 * math.sqrt(max(tr_gamma_q, 0.0)) * math.sqrt(max(tr_gamma_qn1q, 0.0))
        + math.sqrt(tr_p_n) / d
    )


@dataclass
class ComparisonSeries:
    times: np.ndarray
    tr_gamma_q: np.ndarray
    trace_norm: np.ndarray
    alpha_micro: np.ndarray
    alpha_mf: np.ndarray
    energy_exact_per_site: np.ndarray
    energy_mf: np.ndarray
    f: np.ndarray
    g: np.ndarray
    exact_norm: np.ndarray
    exact_total_n: np.ndarray
    mf_norm: np.ndarray
    mf_n: np.ndarray
    hs_deviation: np.ndarray
    kinetic_average: np.ndarray
    c: float
    d: int
    derivative_check: dict | None = None

    CSV_COLUMNS = (
        "t", "tr_gamma_q", "trace_norm", "alpha_micro_re", "alpha_micro_im",
        "alpha_mf_re", "alpha_mf_im", "energy_exact_per_site", "energy_mf",
        "f", "g", "exact_norm", "exact_total_n", "mf_norm", "mf_n",
    )

    def rows(self):
        for i, t in enumerate(self.times):
            yield (
                t, self.tr_gamma_q[i], self.trace_norm[i],
                self.alpha_micro[i].real, self.alpha_micro[i].imag,
                self.alpha_mf[i].real, self.alpha_mf[i].imag,
                self.energy_exact_per_site[i], self.energy_mf[i],
                self.f[i], self.g[i], self.exact_norm[i], self.exact_total_n[i],
                self.mf_norm[i], self.mf_n[i],
            )

    def sandwich_slack(self) -> float:
        """Smallest slack of both trace-norm inequalities over the series."""
        lo, hi = zip(*(sandwich_bounds(v) for v in self.tr_gamma_q))
        return float(min(np.min(self.trace_norm - np.array(lo)), np.min(np.array(hi) - self.trace_norm)))

    def equivalence_slack(self, U: float) -> float:
        return float(np.min(self.f - (U / 4.0 * self.g - 1.0 / self.d)))


def gronwall_track(H, exact_states, mf_traj, c, derivative_check=True, tol=1e-10) -> ComparisonSeries:
    """Per-time comparison record of an exact run against a mean-field run.

    Both runs must share the time grid and the cutoff. With
    ``derivative_check`` and a grid starting at ``t = 0`` the derivative
    bound for ``Tr(gamma1 q)`` is verified there by a centred difference.
    """
    lattice, cutoff, params = H.lattice, H.cutoff, H.params
    times = np.asarray(mf_traj.times)
    if len(exact_states) != times.size:
        raise ValueError("exact and mean-field runs have different time grids")
    if as_cutoff(mf_traj.cutoff) != cutoff:
        raise ValueError("exact and mean-field runs use different cutoffs")
    cols = {k: [] for k in (
        "tr_gamma_q", "trace_norm", "alpha_micro", "alpha_mf", "energy_exact_per_site",
        "energy_mf", "f", "g", "exact_norm", "exact_total_n", "mf_norm", "mf_n",
        "hs_deviation", "kinetic_average",
    )}
    a, _, _ = build_ladder(cutoff)
    for psi, phi in zip(exact_states, mf_traj.phis):
        gamma1 = reduce_one_site(psi, lattice, cutoff)
        gamma2 = reduce_two_site(psi, lattice, cutoff)
        proj = projectors(phi)
        e_site = energy(H, psi) / lattice.num_sites
        f, g = excitation_functionals(psi, phi, params, c, lattice, cutoff, gamma1, e_site)
        alpha_mf = order_parameter(phi)
        hs, kin = particle_density_remark(psi, gamma2, alpha_mf, lattice, cutoff)
        cols["tr_gamma_q"].append(q_moment(gamma1, proj, 0))
        cols["trace_norm"].append(trace_norm_distance(gamma1, proj))
        cols["alpha_micro"].append(complex(np.trace(gamma1 @ a)))
        cols["alpha_mf"].append(alpha_mf)
        cols["energy_exact_per_site"].append(e_site)
        cols["energy_mf"].append(mf_energy(phi, params))
        cols["f"].append(f)
        cols["g"].append(g)
        cols["exact_norm"].append(float(np.linalg.norm(psi)))
        cols["exact_total_n"].append(total_number(psi, lattice, cutoff))
        cols["mf_norm"].append(float(np.linalg.norm(phi)))
        cols["mf_n"].append(mf_moment(phi, 1))
        cols["hs_deviation"].append(hs)
        cols["kinetic_average"].append(kin)
    series = ComparisonSeries(times=times, c=c, d=lattice.d, **{k: np.array(v) for k, v in cols.items()})
    if derivative_check and times.size and times[0] == 0.0:
        series.derivative_check = gronwall_start_check(
            H, exact_states[0], mf_traj.phis[0], dt=mf_traj.dt, tol=tol
        )
    return series


def gronwall_start_check(H, psi0, phi0, h=GRONWALL_FD_STEP, dt=1e-3, tol=1e-10, rtol=GRONWALL_FD_RTOL) -> dict:
    """Centred difference of ``Tr(gamma1 q)`` at ``t = 0`` against its bound."""
    lattice, cutoff, params = H.lattice, H.cutoff, H.params
    grid = [-h, h]
    exact = evolve_exact(H, psi0, grid, tol=tol)
    mf = evolve_mf(phi0, params, cutoff, grid, dt=min(dt, h), richardson=False)
    vals = [
        q_moment(reduce_one_site(psi, lattice, cutoff), projectors(phi), 0)
        for psi, phi in zip(exact, mf.phis)
    ]
    derivative = (vals[1] - vals[0]) / (2.0 * h)
    gamma0 = reduce_one_site(psi0, lattice, cutoff)
    proj = projectors(pad(phi0, cutoff))
    n1 = np.diag(number_diagonal(cutoff) + 1.0)
    rhs = gronwall_rhs(
        params.J,
        mf_moment(proj.phi, 1),
        q_moment(gamma0, proj, 0),
        float(np.trace(gamma0 @ proj.q @ n1 @ proj.q).real),
        lattice.d,
    )
    return {
        "derivative": derivative,
        "bound": rhs,
        "passed": bool(abs(derivative) <= (1.0 + rtol) * rhs + 1e-12),
    }


def mf_moment_bound_1(moment0_k, n0, J, k, t):
    return (moment0_k + k**k / math.e) * np.exp(2.0 * math.e * abs(J) * k * math.sqrt(n0) * np.asarray(t))


def mf_moment_bound_2(phi0, J, k, t):
    """Finite-sum bound for integer or half-integer ``k >= 1``."""
    phi0 = np.asarray(phi0, dtype=complex)
    n = np.arange(phi0.size, dtype=float)
    w = np.abs(phi0) ** 2
    s = abs(J) * math.sqrt(mf_moment(phi0, 1)) * np.asarray(t, dtype=float)
    total = np.zeros_like(s)
    for l in range(int(round(2 * (k - 1))) + 1):
        binom = math.gamma(2 * k + 1) / (math.gamma(l + 1) * math.gamma(2 * k - l + 1))
        total = total + binom * s**l * float(np.dot(w, (n + l) ** (k - l / 2)))
    return total


def exact_moment_bound(moment0_k, J, k, t):
    return (moment0_k + k**k / math.e) * np.exp(2.0 * math.e * abs(J) * k * np.asarray(t))


def moment_bound_report(trajectory, k_list, J, lattice=None, cutoff=None, times=None) -> dict:
    """Measured moments against the propagation bounds.

    ``trajectory`` is either an ``MfTrajectory`` or a list of many-body states
    (then ``lattice``, ``cutoff`` and ``times`` are required).
    """
    if hasattr(trajectory, "phis"):
        kind, times = "meanfield", np.asarray(trajectory.times)
        phi0 = trajectory.phis[0]
        n0 = mf_moment(phi0, 1)
        moments = {k: np.array([mf_moment(p, k) for p in trajectory.phis]) for k in k_list}
    else:
        kind, times = "exact", np.asarray(times)
        gammas = [reduce_one_site(psi, lattice, cutoff) for psi in trajectory]
        moments = {k: np.array([density_moment(g, k) for g in gammas]) for k in k_list}
    entries = []
    for k in k_list:
        measured = moments[k]
        if kind == "meanfield":
            bounds = {"bound_1": mf_moment_bound_1(measured[0], n0, J, k, times)}
            if k >= 2:
                bounds["bound_2"] = mf_moment_bound_2(phi0, J, k, times)
        else:
            bounds = {"bound": exact_moment_bound(measured[0], J, k, times)}
        for name, bound in bounds.items():
            margin = float(np.min(bound - measured))
            slack = 1e-9 * max(1.0, float(np.max(np.abs(bound))))
            entries.append({
                "k": k, "bound_name": name, "measured": measured.tolist(),
                "bound": np.asarray(bound).tolist(), "margin": margin,
                "passed": bool(margin >= -slack),
            })
    return {"kind": kind, "times": times.tolist(), "entries": entries,
            "passed": all(e["passed"] for e in entries)}


def decay_constant(phi_or_gamma, a=1.0) -> float:
    """Smallest ``c`` with ``P(N = n) <= c exp(-n/a)`` for all ``n``."""
    x = np.asarray(phi_or_gamma)
    w = np.abs(x) ** 2 if x.ndim == 1 else np.diag(x).real
    return float(np.max(w * np.exp(np.arange(w.size) / a)))


@dataclass
class SweepPoint:
    d: int
    L: int
    M: int
    seed: int
    status: str
    sup_tr_gamma_q: float | None = None
    sup_trace_norm: float | None = None
    ratio_to_inv_d: float | None = None
    alpha_gap_final: float | None = None
    required_bytes: int | None = None
    message: str = ""


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def ok_rows(self):
        return [r for r in self.rows if r.status == "ok"]

    def strictly_decreasing(self, key) -> bool:
        vals = [getattr(r, key) for r in sorted(self.ok_rows(), key=lambda r: r.d)]
        return all(b < a for a, b in zip(vals, vals[1:]))

    def has_failures(self) -> bool:
        return any(r.status not in ("ok", "resource_rejected") for r in self.rows)


def compare_run(params, lattice, cutoff, psi0, phi0, t_grid, dt=1e-3, tol=1e-10, c=None,
                derivative_check=True):
    """Evolve both dynamics on ``t_grid`` and build the comparison series."""
    cutoff = as_cutoff(cutoff)
    H = build_hamiltonian(params, lattice, cutoff)
    exact = evolve_exact(H, psi0, t_grid, tol=tol)
    mf = evolve_mf(phi0, params, cutoff, t_grid, dt=dt)
    if c is None:
        c = default_c(params, phi0) if params.U > 0 else 0.0
    return H, exact, mf, gronwall_track(H, exact, mf, c, derivative_check=derivative_check, tol=tol)


def _sweep_point(args):
    base, d, seed = args
    L = base["L"]
    M = base.get("M_by_d", {}).get(d, base["M"])
    lattice = Lattice(L, d)
    point = SweepPoint(d=d, L=L, M=M, seed=seed, status="ok")
    try:
        check_budget(lattice, M, base.get("memory_cap"))
    except ResourceError as exc:
        point.status, point.required_bytes, point.message = "resource_rejected", exc.required_bytes, str(exc)
        return point
    params = base["params"]
    if base.get("phi0") is not None:
        phi0 = pad(base["phi0"], M)
    else:
        phi0 = random_unit_vector(M + 1, make_rng(seed))
    t_grid = np.linspace(0.0, base["t_final"], base.get("n_samples", 11))
    try:
        _, _, _, series = compare_run(
            params, lattice, M, product_state(phi0, lattice), phi0, t_grid,
            dt=base.get("dt", 1e-3), tol=base.get("tol", 1e-10), c=0.0, derivative_check=False,
        )
    except NumericalError as exc:
        point.status, point.message = "numerical_failure", str(exc)
        return point
    point.sup_tr_gamma_q = float(np.max(series.tr_gamma_q))
    point.sup_trace_norm = float(np.max(series.trace_norm))
    point.ratio_to_inv_d = point.sup_tr_gamma_q * d
    point.alpha_gap_final = float(abs(series.alpha_micro[-1] - series.alpha_mf[-1]))
    return point


def d_sweep(base: dict, d_list, seeds=(0,), workers: int = 1) -> SweepResult:
    """Exact-vs-mean-field error metrics across lattice dimensions.

    ``base`` holds ``params``, ``L``, ``M``, ``t_final`` and optionally
    ``n_samples``, ``dt``, ``tol``, ``phi0`` (random per seed when absent),
    ``M_by_d`` (per-dimension cutoff override) and ``memory_cap``. Oversize
    points are recorded as ``resource_rejected``; the sweep continues.
    """
    jobs = [(base, int(d), int(s)) for d in d_list for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_sweep_point, jobs))
    else:
        points = [_sweep_point(job) for job in jobs]
    points.sort(key=lambda p: (p.d, p.L, p.M, p.seed))
    meta = {"krylov_dim": KRYLOV_DIM, "d_list": [int(d) for d in d_list], "seeds": [int(s) for s in seeds]}
    return SweepResult(points, meta)
