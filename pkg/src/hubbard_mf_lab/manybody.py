"""Many-body Bose-Hubbard dynamics on the truncated Fock product space.

Basis states are occupation tuples ``(n_0, ..., n_{N-1})`` encoded in mixed
radix ``D = M + 1`` with site 0 varying fastest::

    index = sum_x n_x * D**x

A state is a plain complex vector of length ``D**N``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import NumericalError, ResourceError
from .fock import FockCutoff, as_cutoff
from .lattice import Lattice

DEFAULT_MEMORY_CAP = 2 * 1024**3
MEMORY_CAP_ENV = "HUBBARD_MF_LAB_MEMORY_CAP"
KRYLOV_DIM = 30
DENSE_ORACLE_MAX_DIM = 512


@dataclass(frozen=True)
class ModelParams:
    J: float
    mu: float
    U: float

    def __post_init__(self):
        for name in ("J", "mu", "U"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ValueError(f"model parameter {name} must be finite")
            object.__setattr__(self, name, value)


def memory_cap() -> int:
    """Byte cap for many-body work, overridable through the environment."""
    raw = os.environ.get(MEMORY_CAP_ENV)
    return int(float(raw)) if raw else DEFAULT_MEMORY_CAP


def hilbert_dim(lattice: Lattice, cutoff) -> int:
    return as_cutoff(cutoff).dim ** lattice.num_sites


def workspace_bytes(lattice: Lattice, cutoff, krylov_dim: int = KRYLOV_DIM) -> int:
    """Upper estimate of the peak memory of one exact run.

    With ``dim = (M+1)**(L**d)`` and ``B = d * L**d`` bonds the estimate is::

        occupations   dim * L**d                      (uint8 digit table)
        assembly      dim * (1 + 2B) * 24             (COO row, col, value)
        CSR matrix    dim * (1 + 2B) * 16 + 8 * dim   (value, int64 col, indptr)
        vectors       dim * 16 * (krylov_dim + 4)     (Lanczos basis + 4 work)
    """
    dim = hilbert_dim(lattice, cutoff)
    nnz = dim * (1 + 2 * lattice.num_bonds)
    return int(
        dim * lattice.num_sites
        + nnz * 24
        + nnz * 16
        + 8 * dim
        + dim * 16 * (krylov_dim + 4)
    )


def check_budget(lattice: Lattice, cutoff, cap: int | None = None) -> int:
    cap = memory_cap() if cap is None else int(cap)
    need = workspace_bytes(lattice, cutoff)
    if need > cap:
        raise ResourceError(need, cap)
    return need


def occupations(lattice: Lattice, cutoff) -> np.ndarray:
    """Digit table ``occ[index, x] = n_x``."""
    D = as_cutoff(cutoff).dim
    N = lattice.num_sites
    idx = np.arange(D**N, dtype=np.int64)
    occ = np.empty((idx.size, N), dtype=np.uint8)
    for x in range(N):
        occ[:, x] = (idx // D**x) % D
    return occ


def site_axes(psi: np.ndarray, lattice: Lattice, cutoff) -> np.ndarray:
    """View ``psi`` as a tensor whose axis ``x`` is lattice site ``x``."""
    D = as_cutoff(cutoff).dim
    N = lattice.num_sites
    return psi.reshape((D,) * N).transpose(tuple(range(N - 1, -1, -1)))


def product_state(phi, lattice: Lattice, perp=None, perturbed_sites=()) -> np.ndarray:
    """Gutzwiller product of ``phi``; sites in ``perturbed_sites`` carry ``perp``."""
    phi = np.asarray(phi, dtype=complex)
    if abs(np.linalg.norm(phi) - 1.0) > 1e-12:
        raise ValueError("site wavefunction must be normalized")
    perturbed = set(int(x) for x in perturbed_sites)
    if perturbed:
        if perp is None:
            raise ValueError("perturbed sites given without a perpendicular state")
        perp = np.asarray(perp, dtype=complex)
        if perp.shape != phi.shape or abs(np.linalg.norm(perp) - 1.0) > 1e-12:
            raise ValueError("perpendicular state must be normalized with the same cutoff")
        if not perturbed <= set(range(lattice.num_sites)):
            raise ValueError("perturbed site outside the lattice")
    state = np.ones(1, dtype=complex)
    for x in range(lattice.num_sites):
        factor = perp if x in perturbed else phi
        state = np.kron(factor, state)
    return state


def fock_product(occupation, lattice: Lattice, cutoff) -> np.ndarray:
    """Basis vector of the occupation tuple ``occupation`` (site order)."""
    D = as_cutoff(cutoff).dim
    if len(occupation) != lattice.num_sites:
        raise ValueError("one occupation per site required")
    if any(not 0 <= int(n) < D for n in occupation):
        raise ValueError("occupation outside 0..M")
    psi = np.zeros(D**lattice.num_sites, dtype=complex)
    psi[sum(int(n) * D**x for x, n in enumerate(occupation))] = 1.0
    return psi


@dataclass(frozen=True)
class SparseHamiltonian:
    matrix: sp.csr_matrix
    params: ModelParams
    lattice: Lattice
    cutoff: FockCutoff

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, v):
        return self.matrix @ v


def build_hamiltonian(params: ModelParams, lattice: Lattice, cutoff, cap=None) -> SparseHamiltonian:
    """Assemble the Bose-Hubbard Hamiltonian in CSR form.

    Every directed bond adds ``-J/(2d) (a*_x a_y + a*_y a_x)``; each site adds
    ``(J - mu) N_x + U/2 N_x (N_x - 1)`` on the diagonal.
    """
    cutoff = as_cutoff(cutoff)
    check_budget(lattice, cutoff, cap)
    D, M = cutoff.dim, cutoff.M
    occ = occupations(lattice, cutoff)
    dim = occ.shape[0]
    n = occ.astype(float)
    diag = ((params.J - params.mu) * n + 0.5 * params.U * n * (n - 1.0)).sum(axis=1)

    rows, cols, vals = [np.arange(dim)], [np.arange(dim)], [diag]
    coef = -params.J / (2.0 * lattice.d)
    if coef != 0.0 and M > 0:
        idx = np.arange(dim, dtype=np.int64)
        for x, y in lattice.bonds:
            # a*_x a_y and its transpose a*_y a_x
            ok = (occ[:, y] > 0) & (occ[:, x] < M)
            src = idx[ok]
            dst = src + D**x - D**y
            amp = coef * np.sqrt((n[ok, x] + 1.0) * n[ok, y])
            rows += [dst, src]
            cols += [src, dst]
            vals += [amp, amp]
    matrix = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    ).tocsr()
    matrix.sum_duplicates()
    matrix.eliminate_zeros()
    return SparseHamiltonian(matrix, params, lattice, cutoff)


def _lanczos(matvec, v, m):
    """Lanczos with full reorthogonalisation; stops early on breakdown.

    Returns ``(V, alpha, beta, beta_next)``; ``beta_next`` is the residual norm
    after the last vector (0 means an invariant subspace was found).
    """
    dim = v.size
    V = np.empty((m, dim), dtype=complex)
    alpha, beta = [], []
    V[0] = v
    scale = None
    for j in range(m):
        w = matvec(V[j])
        a = np.vdot(V[j], w).real
        w -= a * V[j]
        if j > 0:
            w -= beta[-1] * V[j - 1]
        w -= V[: j + 1].T @ (V[: j + 1].conj() @ w)
        b = np.linalg.norm(w)
        alpha.append(a)
        if scale is None:
            scale = max(abs(a), b, 1.0)
        if b <= 1e-13 * scale:
            return V[: j + 1], np.array(alpha), np.array(beta), 0.0
        if j + 1 < m:
            V[j + 1] = w / b
            beta.append(b)
        else:
            return V, np.array(alpha), np.array(beta), b
    raise AssertionError("unreachable")


def _krylov_step(matvec, v, dt, tol, m):
    """Advance ``v`` by at most ``dt``; returns ``(new_v, taken, err)``."""
    norm = np.linalg.norm(v)
    V, alpha, beta, beta_next = _lanczos(matvec, v / norm, m)
    if alpha.size == 1:
        evals, evecs = alpha, np.ones((1, 1))
    else:
        evals, evecs = scipy.linalg.eigh_tridiagonal(alpha, beta)
    first = evecs[0]

    def small_exp(tau):
        return evecs @ (np.exp(-1j * tau * evals) * first)

    tau = dt
    while True:
        c = small_exp(tau)
        err = norm * beta_next * abs(c[-1])
        if err <= tol or beta_next == 0.0:
            break
        tau *= 0.5
        if abs(tau) < 1e-14 * max(abs(dt), 1.0):
            raise NumericalError("Krylov step size underflow")
    return norm * (c @ V), tau, err


def evolve_exact(H, psi0, t_grid, tol=1e-10, krylov_dim=KRYLOV_DIM):
    """Propagate ``i dpsi/dt = H psi`` from ``psi0`` at ``t = 0`` to each grid time.

    Each substep uses a Lanczos approximation of ``exp(-i tau H)`` and halves
    ``tau`` until the a-posteriori error estimate is at most ``tol``.
    """
    if not 1e-14 <= tol <= 1e-6:
        raise ValueError("tol must lie in [1e-14, 1e-6]")
    matrix = H.matrix if isinstance(H, SparseHamiltonian) else H
    times = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be strictly increasing")
    psi = np.asarray(psi0, dtype=complex).copy()
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise ValueError("initial state must be normalized")

    def matvec(v):
        return matrix @ v

    m = max(1, min(krylov_dim, psi.size))
    out = []
    now = 0.0
    for t in times:
        remaining = t - now
        while remaining != 0.0:
            psi, taken, _ = _krylov_step(matvec, psi, remaining, tol, m)
            now += taken
            remaining = t - now
            if abs(remaining) <= 1e-14 * max(1.0, abs(t)):
                now, remaining = t, 0.0
        if not np.all(np.isfinite(psi)):
            raise NumericalError(f"non-finite amplitudes at t={t}")
        out.append(psi.copy())
    return out


def evolve_dense(H, psi0, t_grid, max_dim=DENSE_ORACLE_MAX_DIM):
    """Reference propagation by full diagonalisation (small spaces only)."""
    matrix = H.matrix if isinstance(H, SparseHamiltonian) else H
    if matrix.shape[0] > max_dim:
        raise ValueError(f"dense oracle limited to dimension {max_dim}")
    dense = matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix)
    evals, evecs = np.linalg.eigh(dense)
    coeffs = evecs.conj().T @ np.asarray(psi0, dtype=complex)
    return [evecs @ (np.exp(-1j * t * evals) * coeffs) for t in np.asarray(t_grid, dtype=float)]


def apply_site(op, psi, x, lattice, cutoff):
    """``op`` acting on site ``x`` of ``psi`` (returns a new vector)."""
    T = site_axes(psi, lattice, cutoff)
    out = np.moveaxis(np.tensordot(op, T, axes=([1], [x])), 0, x)
    N = lattice.num_sites
    return out.transpose(tuple(range(N - 1, -1, -1))).reshape(-1)


@dataclass(frozen=True)
class SiteObservable:
    x: int
    op: np.ndarray


@dataclass(frozen=True)
class BondObservable:
    """Two-site operator in ``slot1 (x) slot2`` order acting on sites ``x, y``."""

    x: int
    y: int
    op: np.ndarray


class TotalNumber:
    pass


TOTAL_NUMBER = TotalNumber()


def expectation(psi, observable, lattice: Lattice, cutoff, hermitian=True):
    """``<psi, O psi>`` without forming the full operator ``O``."""
    cutoff = as_cutoff(cutoff)
    psi = np.asarray(psi, dtype=complex)
    if psi.size != hilbert_dim(lattice, cutoff):
        raise ValueError("state dimension does not match lattice and cutoff")
    if isinstance(observable, SparseHamiltonian):
        if observable.lattice != lattice or observable.cutoff != cutoff:
            raise ValueError("Hamiltonian built for a different lattice or cutoff")
        value = np.vdot(psi, observable.matrix @ psi)
    elif isinstance(observable, TotalNumber):
        occ = occupations(lattice, cutoff).sum(axis=1)
        value = complex(np.dot(np.abs(psi) ** 2, occ))
    elif isinstance(observable, SiteObservable):
        _check_op(observable.op, cutoff.dim)
        value = np.vdot(psi, apply_site(observable.op, psi, observable.x, lattice, cutoff))
    elif isinstance(observable, BondObservable):
        D = cutoff.dim
        _check_op(observable.op, D * D)
        if observable.x == observable.y:
            raise ValueError("bond observable needs two distinct sites")
        T = site_axes(psi, lattice, cutoff)
        T = np.moveaxis(T, (observable.x, observable.y), (0, 1)).reshape(D * D, -1)
        value = np.vdot(T, observable.op @ T)
    else:
        raise TypeError(f"unsupported observable {observable!r}")
    if hermitian and abs(value.imag) > 1e-10:
        raise NumericalError(f"Hermitian expectation has imaginary part {value.imag:.3e}")
    return complex(value)


def _check_op(op, dim):
    if np.shape(op) != (dim, dim):
        raise ValueError(f"operator shape {np.shape(op)} does not match site dimension {dim}")


def total_number(psi, lattice, cutoff) -> float:
    return expectation(psi, TOTAL_NUMBER, lattice, cutoff).real


def energy(H: SparseHamiltonian, psi) -> float:
    return expectation(psi, H, H.lattice, H.cutoff).real
