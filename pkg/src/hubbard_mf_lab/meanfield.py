"""One-site Gutzwiller mean-field dynamics on the truncated Fock space."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError
from .fock import FockCutoff, as_cutoff, build_ladder, number_diagonal, pad

NORM_DRIFT_LIMIT = 1e-6


def order_parameter(phi) -> complex:
    """``alpha = <phi, a phi> = sum_n sqrt(n+1) conj(phi[n]) phi[n+1]``."""
    phi = np.asarray(phi, dtype=complex)
    n = np.arange(1, phi.size)
    return complex(np.sum(np.sqrt(n) * phi[:-1].conj() * phi[1:]))


def diagonal_part(params, cutoff) -> np.ndarray:
    """Eigenvalues of ``(J - mu) N + U/2 N (N - 1)``."""
    n = number_diagonal(cutoff)
    return (params.J - params.mu) * n + 0.5 * params.U * n * (n - 1.0)


def mf_generator(phi, params, cutoff) -> np.ndarray:
    """Dense matrix of the nonlinear one-site generator ``h^phi``."""
    cutoff = as_cutoff(cutoff)
    a, ad, _ = build_ladder(cutoff)
    alpha = order_parameter(phi)
    h = -params.J * (alpha * ad + np.conj(alpha) * a - abs(alpha) ** 2 * np.eye(cutoff.dim))
    return h + np.diag(diagonal_part(params, cutoff))


def mf_energy(phi, params) -> float:
    phi = np.asarray(phi, dtype=complex)
    n = np.arange(phi.size, dtype=float)
    w = np.abs(phi) ** 2
    N1 = float(np.dot(w, n))
    alpha = order_parameter(phi)
    return params.J * (N1 - abs(alpha) ** 2) - params.mu * N1 + 0.5 * params.U * float(np.dot(w, n * (n - 1.0)))


def mf_moment(phi, k) -> float:
    """``<phi, N^k phi>``; half-integer ``k`` is fine since ``N`` is diagonal."""
    if abs(2 * k - round(2 * k)) > 1e-12 or k < 0:
        raise ValueError("moment order must be a nonnegative multiple of 1/2")
    phi = np.asarray(phi, dtype=complex)
    n = np.arange(phi.size, dtype=float)
    return float(np.dot(np.abs(phi) ** 2, n**k))


@dataclass(frozen=True)
class MfState:
    phi: np.ndarray
    t: float
    alpha: complex = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "alpha", order_parameter(self.phi))


@dataclass
class MfTrajectory:
    times: np.ndarray
    phis: np.ndarray
    params: object
    cutoff: FockCutoff
    dt: float
    norm_drift: float
    richardson_error: float | None = None

    def __len__(self):
        return self.times.size

    def __getitem__(self, i) -> MfState:
        return MfState(self.phis[i], float(self.times[i]))

    @property
    def alphas(self) -> np.ndarray:
        return np.array([order_parameter(p) for p in self.phis])


def _lawson_rk4(phi, h, params, diag, sqrt_n):
    """One RK4 step in the interaction picture of the diagonal part.

    With ``psi(s) = exp(i s A) phi(s)`` the equation becomes
    ``dpsi/ds = -i exp(i s A) F(exp(-i s A) psi)``; the phase is exact.
    """
    J = params.J

    def hopping(v):
        alpha = np.sum(sqrt_n * v[:-1].conj() * v[1:])
        out = (J * abs(alpha) ** 2) * v
        out[1:] -= J * alpha * sqrt_n * v[:-1]
        out[:-1] -= J * np.conj(alpha) * sqrt_n * v[1:]
        return out

    half = np.exp(-0.5j * h * diag)
    full = half * half
    # stage vectors expressed in the picture anchored at the step start
    k1 = -1j * hopping(phi)
    k2 = -1j * np.conj(half) * hopping(half * (phi + 0.5 * h * k1))
    k3 = -1j * np.conj(half) * hopping(half * (phi + 0.5 * h * k2))
    k4 = -1j * np.conj(full) * hopping(full * (phi + h * k3))
    return full * (phi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))


def _integrate(phi0, params, cutoff, times, dt):
    diag = diagonal_part(params, cutoff)
    sqrt_n = np.sqrt(np.arange(1, cutoff.dim, dtype=float))
    phi = phi0.copy()
    now = 0.0
    out = np.empty((times.size, cutoff.dim), dtype=complex)
    for i, t in enumerate(times):
        span = t - now
        steps = int(np.ceil(abs(span) / dt - 1e-9)) if span != 0.0 else 0
        h = span / steps if steps else 0.0
        for _ in range(steps):
            phi = _lawson_rk4(phi, h, params, diag, sqrt_n)
        now = t
        if not np.all(np.isfinite(phi)):
            raise NumericalError(f"non-finite mean-field state at t={t}")
        out[i] = phi
    return out


def evolve_mf(phi0, params, cutoff, t_grid, dt=1e-3, richardson=True) -> MfTrajectory:
    """Integrate ``i dphi/dt = h^phi phi`` from ``phi0`` at ``t = 0``.

    Steps are at most ``dt`` and land exactly on every grid time. The norm is
    never renormalised; a drift above 1e-6 raises ``NumericalError``. With
    ``richardson`` the run is repeated at ``dt/2`` and the largest vector
    difference on the grid is stored as ``richardson_error``.
    """
    cutoff = as_cutoff(cutoff)
    if not 0.0 < dt <= 1e-2:
        raise ValueError("dt must lie in (0, 1e-2]")
    phi0 = pad(phi0, cutoff)
    if abs(np.linalg.norm(phi0) - 1.0) > 1e-10:
        raise ValueError("initial mean-field state must be normalized")
    times = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be strictly increasing")
    phis = _integrate(phi0, params, cutoff, times, dt)
    drift = float(np.max(np.abs(np.linalg.norm(phis, axis=1) - 1.0), initial=0.0))
    if drift > NORM_DRIFT_LIMIT:
        raise NumericalError(f"mean-field norm drift {drift:.2e} exceeds {NORM_DRIFT_LIMIT}; retry with dt < {dt / 2}")
    richardson_error = None
    if richardson:
        fine = _integrate(phi0, params, cutoff, times, dt / 2)
        richardson_error = float(np.max(np.linalg.norm(fine - phis, axis=1), initial=0.0))
    return MfTrajectory(times, phis, params, cutoff, dt, drift, richardson_error)


def projector_distance(u, v) -> float:
    """Trace norm of ``|u><u| - |v><v|`` for vectors of possibly different length."""
    size = max(u.size, v.size)
    u, v = pad(u, size - 1), pad(v, size - 1)
    diff = np.outer(u, u.conj()) - np.outer(v, v.conj())
    return float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


@dataclass
class RefinementReport:
    schedule: tuple
    times: np.ndarray
    vector_deltas: list
    projector_deltas: list

    @property
    def truncation_error(self) -> float:
        return self.vector_deltas[-1]

    @property
    def decreasing(self) -> bool:
        d = self.vector_deltas
        return all(b < a for a, b in zip(d, d[1:]))


def truncation_refine(phi0, params, t_final, M_schedule, dt=1e-3, n_samples=21) -> RefinementReport:
    """Compare mean-field runs at increasing cutoffs.

    For each consecutive pair ``M < M'`` reports the sup over the sample grid
    of ``||phi_M - phi_M'||`` (after zero padding) and of the projector trace
    distance.
    """
    schedule = tuple(int(M) for M in M_schedule)
    if len(schedule) < 2 or any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("cutoff schedule must be strictly increasing with at least two entries")
    phi0 = np.asarray(phi0, dtype=complex)
    times = np.linspace(0.0, t_final, n_samples)
    runs = [
        evolve_mf(pad(phi0, M), params, M, times, dt=dt, richardson=False).phis for M in schedule
    ]
    vec, proj = [], []
    for (M, coarse), fine in zip(zip(schedule, runs), runs[1:]):
        top = fine.shape[1] - 1
        vec.append(max(float(np.linalg.norm(pad(c, top) - f)) for c, f in zip(coarse, fine)))
        proj.append(max(projector_distance(c, f) for c, f in zip(coarse, fine)))
    return RefinementReport(schedule, times, vec, proj)
