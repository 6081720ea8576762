"""Truncated single-site Fock space |0>, ..., |M>."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FockCutoff:
    """Maximum occupation ``M`` kept on one lattice site."""

    M: int

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 0:
            raise ValueError(f"cutoff M must be a nonnegative integer, got {self.M!r}")

    @property
    def dim(self) -> int:
        return self.M + 1


def as_cutoff(cutoff) -> FockCutoff:
    return cutoff if isinstance(cutoff, FockCutoff) else FockCutoff(int(cutoff))


def annihilator(cutoff) -> np.ndarray:
    """Matrix of ``a`` with ``a[n-1, n] = sqrt(n)``.

    Matrix truncation already removes every entry that would lead above ``M``,
    so this is at the same time the truncated operator ``a_M``.
    """
    cutoff = as_cutoff(cutoff)
    return np.diag(np.sqrt(np.arange(1, cutoff.dim, dtype=float)), k=1).astype(complex)


def build_ladder(cutoff) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(a, a_dagger, N)`` on the truncated site space.

    ``N`` is written down as ``diag(0, ..., M)`` rather than computed as
    ``a_dagger @ a``; the product carries rounding (``sqrt(3)**2 != 3``).
    """
    a = annihilator(cutoff)
    ad = a.conj().T.copy()
    n = np.diag(number_diagonal(cutoff)).astype(complex)
    return a, ad, n


def number_diagonal(cutoff) -> np.ndarray:
    """Occupations ``0, 1, ..., M`` as floats (diagonal of ``N``)."""
    return np.arange(as_cutoff(cutoff).dim, dtype=float)


def fock_state(n: int, cutoff) -> np.ndarray:
    cutoff = as_cutoff(cutoff)
    if not 0 <= n <= cutoff.M:
        raise ValueError(f"occupation {n} outside 0..{cutoff.M}")
    v = np.zeros(cutoff.dim, dtype=complex)
    v[n] = 1.0
    return v


def pad(phi: np.ndarray, cutoff) -> np.ndarray:
    """Zero-pad a site vector to the dimension of ``cutoff``."""
    cutoff = as_cutoff(cutoff)
    phi = np.asarray(phi, dtype=complex)
    if phi.size > cutoff.dim:
        if np.any(phi[cutoff.dim:] != 0):
            raise ValueError("vector has weight above the cutoff")
        return phi[: cutoff.dim].copy()
    out = np.zeros(cutoff.dim, dtype=complex)
    out[: phi.size] = phi
    return out


def is_hermitian(op: np.ndarray, atol: float = 1e-14) -> bool:
    return bool(np.max(np.abs(op - op.conj().T), initial=0.0) <= atol)
