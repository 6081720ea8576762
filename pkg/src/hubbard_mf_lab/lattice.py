"""Periodic hypercubic lattice (Z/LZ)^d and its directed bond list."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Lattice:
    """Periodic grid with sites in lexicographic order.

    Site index is the row-major rank of the coordinate tuple, first coordinate
    most significant. ``bonds`` holds one directed pair ``(x, x + e_i)`` per
    site and direction, so there are exactly ``d * L**d`` of them. For ``L = 2``
    the two directions along an axis land on the same neighbour; that pair then
    appears twice, which keeps the coordination number at ``2d``.
    """

    L: int
    d: int
    sites: tuple = field(init=False, repr=False)
    bonds: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 2:
            raise ValueError(f"lattice length L must be an integer >= 2, got {self.L!r}")
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"dimension d must be an integer >= 1, got {self.d!r}")
        sites = tuple(itertools.product(range(self.L), repeat=self.d))
        bonds = []
        for x, coord in enumerate(sites):
            for i in range(self.d):
                target = list(coord)
                target[i] = (target[i] + 1) % self.L
                bonds.append((x, self.index(target)))
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "bonds", np.array(bonds, dtype=np.int64).reshape(-1, 2))

    @property
    def num_sites(self) -> int:
        return self.L**self.d

    @property
    def num_bonds(self) -> int:
        return self.d * self.num_sites

    def index(self, coord) -> int:
        idx = 0
        for c in coord:
            idx = idx * self.L + (int(c) % self.L)
        return idx

    def coordinate(self, index: int) -> tuple:
        return self.sites[index]


def build_lattice(L: int, d: int) -> Lattice:
    return Lattice(L, d)
