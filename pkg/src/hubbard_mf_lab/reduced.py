"""Reduced one- and two-site density matrices and the p/q projector algebra."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .fock import as_cutoff, build_ladder, number_diagonal
from .lattice import Lattice
from .manybody import hilbert_dim, site_axes


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox generator; streams are identical across platforms."""
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(frozen=True)
class Projectors:
    phi: np.ndarray
    p: np.ndarray
    q: np.ndarray


def projectors(phi) -> Projectors:
    phi = np.asarray(phi, dtype=complex)
    p = np.outer(phi, phi.conj())
    return Projectors(phi, p, np.eye(phi.size) - p)


def _as_projector_matrix(p):
    return p.p if isinstance(p, Projectors) else np.asarray(p)


def _check_state(psi, lattice, cutoff):
    if np.asarray(psi).size != hilbert_dim(lattice, cutoff):
        raise ValueError("state dimension does not match lattice and cutoff")


def site_density(psi, x, lattice: Lattice, cutoff) -> np.ndarray:
    """Partial trace of ``|psi><psi|`` over every site except ``x``."""
    D = as_cutoff(cutoff).dim
    A = np.moveaxis(site_axes(psi, lattice, cutoff), x, 0).reshape(D, -1)
    return A @ A.conj().T


def pair_density(psi, x, y, lattice: Lattice, cutoff) -> np.ndarray:
    """Partial trace onto sites ``(x, y)`` in ``slot1 (x) slot2`` order."""
    D = as_cutoff(cutoff).dim
    B = np.moveaxis(site_axes(psi, lattice, cutoff), (x, y), (0, 1)).reshape(D * D, -1)
    return B @ B.conj().T


def reduce_one_site(psi, lattice: Lattice, cutoff) -> np.ndarray:
    """Site average of the single-site partial traces."""
    _check_state(psi, lattice, cutoff)
    gamma = sum(site_density(psi, x, lattice, cutoff) for x in range(lattice.num_sites))
    return gamma / lattice.num_sites


def swap_slots(gamma2: np.ndarray) -> np.ndarray:
    D = int(round(np.sqrt(gamma2.shape[0])))
    return gamma2.reshape(D, D, D, D).transpose(1, 0, 3, 2).reshape(D * D, D * D)


def reduce_two_site(psi, lattice: Lattice, cutoff) -> np.ndarray:
    """Bond average normalised by the ``2d|Lambda|`` interacting pairs.

    Each directed bond contributes its pair density in both slot orders.
    """
    _check_state(psi, lattice, cutoff)
    acc = 0
    for x, y in lattice.bonds:
        acc = acc + pair_density(psi, x, y, lattice, cutoff)
    acc = acc + swap_slots(acc)
    return acc / (2 * lattice.num_bonds)


def partial_trace_slot(gamma2: np.ndarray, slot: int) -> np.ndarray:
    """Trace out slot ``slot`` (1 or 2) of a two-site operator."""
    D = int(round(np.sqrt(gamma2.shape[0])))
    T = gamma2.reshape(D, D, D, D)
    if slot == 1:
        return np.einsum("abad->bd", T)
    if slot == 2:
        return np.einsum("abcb->ac", T)
    raise ValueError("slot must be 1 or 2")


def trace_norm(A: np.ndarray) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    A = 0.5 * (A + A.conj().T)
    try:
        evals = np.linalg.eigvalsh(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("eigensolver failed in trace norm") from exc
    return float(np.sum(np.abs(evals)))


def trace_norm_distance(gamma, p) -> float:
    """``||gamma - p||_1``."""
    P = _as_projector_matrix(p)
    if np.shape(gamma) != np.shape(P):
        raise ValueError("density and projector dimensions differ")
    return trace_norm(np.asarray(gamma) - P)


def q_moment(gamma, p, k: int) -> float:
    """``Tr(gamma q N^k q)`` for ``k >= 1`` and ``Tr(gamma q)`` for ``k = 0``."""
    P = _as_projector_matrix(p)
    dim = P.shape[0]
    q = np.eye(dim) - P
    if k == 0:
        value = np.trace(gamma @ q).real
    else:
        nk = np.diag(number_diagonal(dim - 1) ** k)
        value = np.trace(gamma @ q @ nk @ q).real
    return float(value)


def density_moment(gamma, k) -> float:
    """``Tr(gamma N^k)``."""
    n = number_diagonal(gamma.shape[0] - 1)
    return float(np.dot(np.diag(gamma).real, n**k))


def rdm_energy(gamma1, gamma2, params) -> float:
    """Energy per site from the one- and two-site densities.

    ``Tr(gamma1 ((J - mu) N + U/2 N (N - 1))) - J Tr(gamma2 a* (x) a)``
    """
    D = gamma1.shape[0]
    a, ad, _ = build_ladder(D - 1)
    n = number_diagonal(D - 1)
    onsite = np.dot(np.diag(gamma1).real, (params.J - params.mu) * n + 0.5 * params.U * n * (n - 1.0))
    hop = np.trace(gamma2 @ np.kron(ad, a))
    return float(onsite - params.J * hop.real)


def density_report(gamma) -> dict:
    """Hermiticity, trace and positivity residuals of a density matrix."""
    gamma = np.asarray(gamma)
    return {
        "hermiticity": float(np.max(np.abs(gamma - gamma.conj().T))),
        "trace_error": float(abs(np.trace(gamma) - 1.0)),
        "min_eigenvalue": float(np.min(np.linalg.eigvalsh(0.5 * (gamma + gamma.conj().T)))),
    }


def random_density(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Full-rank Ginibre density ``G G^dagger / Tr``."""
    G = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_unit_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)
