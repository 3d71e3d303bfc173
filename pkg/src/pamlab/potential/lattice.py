"""Boxes ``Q_R = [-R, R]^d ∩ Z^d`` with a fixed lexicographic site order."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..errors import ParameterError, RangeError


@dataclass(frozen=True)
class LatticeBox:
    """Centred lattice box.

    Sites are enumerated lexicographically with the *first* coordinate most
    significant, i.e. ``index = sum_i (x_i + R) * (2R+1)**(d-1-i)``.  This is
    C order on an array of shape ``(2R+1,)*d``.
    """

    d: int
    R: int

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ParameterError("d", f"dimension must be a positive integer, got {self.d}")
        if int(self.R) != self.R or self.R < 0:
            raise ParameterError("R", f"radius must be a nonnegative integer, got {self.R}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "R", int(self.R))

    @property
    def side(self) -> int:
        return 2 * self.R + 1

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.side,) * self.d

    @property
    def n_sites(self) -> int:
        return self.side**self.d

    @cached_property
    def coords(self) -> np.ndarray:
        """``(n_sites, d)`` integer coordinates in enumeration order."""
        axes = [np.arange(-self.R, self.R + 1)] * self.d
        grid = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grid], axis=1).astype(np.int64)

    def contains(self, x) -> bool:
        x = np.asarray(x)
        return bool(np.all(np.abs(x) <= self.R))

    def index_of(self, x) -> int | np.ndarray:
        """Site index of coordinate(s) ``x``; accepts shape ``(d,)`` or ``(k, d)``."""
        x = np.asarray(x, dtype=np.int64)
        if x.shape[-1] != self.d:
            raise RangeError(f"expected {self.d}-dimensional coordinates, got shape {x.shape}")
        if np.any(np.abs(x) > self.R):
            raise RangeError(f"coordinate {x.tolist()} outside Q_{self.R}")
        shifted = x + self.R
        strides = self.side ** np.arange(self.d - 1, -1, -1, dtype=np.int64)
        idx = shifted @ strides
        return int(idx) if idx.ndim == 0 else idx

    def coord_of(self, index) -> np.ndarray:
        index = np.asarray(index, dtype=np.int64)
        if np.any((index < 0) | (index >= self.n_sites)):
            raise RangeError(f"site index out of range for {self.n_sites} sites")
        return self.coords[index]

    @cached_property
    def neighbors(self) -> np.ndarray:
        """``(n_sites, 2d)`` neighbour indices, ``-1`` where the neighbour
        lies outside the box.  Column ``2i`` is ``+e_i``, ``2i+1`` is ``-e_i``."""
        c = self.coords
        out = np.full((self.n_sites, 2 * self.d), -1, dtype=np.int64)
        strides = self.side ** np.arange(self.d - 1, -1, -1, dtype=np.int64)
        idx = np.arange(self.n_sites)
        for i in range(self.d):
            up = c[:, i] < self.R
            out[up, 2 * i] = idx[up] + strides[i]
            dn = c[:, i] > -self.R
            out[dn, 2 * i + 1] = idx[dn] - strides[i]
        return out

    def neighbor_lists(self) -> list[list[int]]:
        return [[int(j) for j in row if j >= 0] for row in self.neighbors]

    def edges(self) -> np.ndarray:
        """Undirected nearest-neighbour edges ``(i, j)`` with ``i < j``."""
        nb = self.neighbors
        rows = []
        for i in range(self.d):
            col = nb[:, 2 * i]
            ok = col >= 0
            rows.append(np.stack([np.nonzero(ok)[0], col[ok]], axis=1))
        return np.concatenate(rows, axis=0) if rows else np.empty((0, 2), np.int64)

    def window_indices(self, center, radius: int) -> np.ndarray:
        """Indices (in this box) of ``center + Q_radius``, in that window's own
        lexicographic order."""
        center = np.asarray(center, dtype=np.int64)
        if np.any(np.abs(center) + radius > self.R):
            raise RangeError(
                f"window {center.tolist()}+Q_{radius} not inside Q_{self.R}"
            )
        sub = LatticeBox(self.d, radius)
        return self.index_of(sub.coords + center)
