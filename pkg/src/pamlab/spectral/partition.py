"""Smooth periodic partition of unity and its localisation potential.

``phi(x) = sin^2(pi (x+1)/2)`` on ``[-1, 0]`` (0 below, 1 above) satisfies
``phi(-1-x) = 1 - phi(x)``.  With
``zeta(x) = sqrt(phi(1/2 + x/R) (1 - phi(-3/2 + x/R)))`` the translates
``zeta(x - 2Rk)`` square-sum to one, ``zeta = 1`` on ``[-R/2, R/2]`` and
``zeta = 0`` off ``(-3R/2, 3R/2)``.  ``eta_k`` is the product over coordinates.

The potential uses the edge form
``Phi(z) = (kappa/2) sum_{y~z} sum_k (eta_k(y) - eta_k(z))^2``, which is what
makes ``sum_k E(eta_k g) <= E(g) + (g^2, Phi/kappa)`` hold on the lattice.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConstructionError, ParameterError

SQRT_PHI_LIP = math.pi / 2.0  # sup |(sqrt phi)'| = sup |(sqrt(1-phi))'|


def phi(x):
    x = np.asarray(x, dtype=float)
    return np.where(x <= -1.0, 0.0, np.where(x >= 0.0, 1.0, np.sin(np.pi * (x + 1.0) / 2.0) ** 2))


def zeta(x, R: float):
    x = np.asarray(x, dtype=float)
    return np.sqrt(phi(0.5 + x / R) * (1.0 - phi(-1.5 + x / R)))


def zeta_k(x, k, R):
    return zeta(np.asarray(x, dtype=float) - 2.0 * R * k, R)


def _k_range(x, R):
    c = np.floor_divide(np.asarray(x, dtype=np.int64) + R, 2 * R)
    return [c - 1, c, c + 1]


def zeta_sq_sum_1d(x, R):
    """``sum_k zeta_k(x)^2``; only three translates can be nonzero."""
    return sum(zeta_k(x, k, R) ** 2 for k in _k_range(x, R))


def edge_defect_1d(x, R):
    """``D(x) = sum_k (zeta_k(x+1) - zeta_k(x))^2``."""
    x = np.asarray(x, dtype=np.int64)
    out = np.zeros(x.shape)
    c = np.floor_divide(x + R, 2 * R)
    for dk in (-2, -1, 0, 1, 2):
        k = c + dk
        out += (zeta_k(x + 1, k, R) - zeta_k(x, k, R)) ** 2
    return out


@dataclass(frozen=True)
class PartitionPotential:
    R: int
    kappa: float
    d: int
    cell: np.ndarray  # Phi on [0, 2R)^d, C order

    @property
    def constant(self) -> float:
        """Constructive ``C`` with ``||Phi||_inf <= C / R^2``."""
        return 4.0 * self.d * self.kappa * SQRT_PHI_LIP**2

    def __call__(self, coords) -> np.ndarray:
        c = np.mod(np.atleast_2d(np.asarray(coords, dtype=np.int64)), 2 * self.R)
        return self.cell[tuple(c.T)]

    @property
    def sup(self) -> float:
        return float(self.cell.max())

    def eta(self, k, coords) -> np.ndarray:
        c = np.atleast_2d(np.asarray(coords, dtype=float))
        out = np.ones(c.shape[0])
        for i in range(self.d):
            out *= zeta_k(c[:, i], k[i], self.R)
        return out

    def eta_sq_sum(self, coords) -> np.ndarray:
        """``sum_{k in Z^d} eta_k(z)^2`` by explicit summation over the
        translates that can be nonzero."""
        c = np.atleast_2d(np.asarray(coords, dtype=np.int64))
        total = np.zeros(c.shape[0])
        base = np.floor_divide(c + self.R, 2 * self.R)
        for off in itertools.product((-1, 0, 1), repeat=self.d):
            k = base + np.asarray(off)
            term = np.ones(c.shape[0])
            for i in range(self.d):
                term *= zeta_k(c[:, i], k[:, i], self.R) ** 2
            total += term
        return total


def partition_potential_1d(R: int, kappa: float, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    return 0.5 * kappa * (edge_defect_1d(x, R) + edge_defect_1d(x - 1, R))


def build_partition_potential(R: int, kappa: float, d: int) -> PartitionPotential:
    if int(R) != R or R < 2:
        raise ParameterError("R", "must be an integer >= 2")
    if d < 1:
        raise ParameterError("d", "must be positive")
    R = int(R)
    x = np.arange(2 * R)
    # sum over k of the product collapses coordinatewise because
    # sum_k zeta_k^2 = 1 in every other coordinate
    per_axis = 0.5 * kappa * (edge_defect_1d(x, R) + edge_defect_1d(x - 1, R))
    cell = np.zeros((2 * R,) * d)
    for i in range(d):
        shape = [1] * d
        shape[i] = 2 * R
        cell = cell + per_axis.reshape(shape)
    pp = PartitionPotential(R, float(kappa), int(d), cell)
    _verify(pp)
    return pp


def _verify(pp: PartitionPotential):
    R, d = pp.R, pp.d
    x = np.arange(-2 * R, 2 * R)
    s1 = zeta_sq_sum_1d(x, R)
    if np.max(np.abs(s1 - 1.0)) > 1e-12:
        raise ConstructionError("partition of unity fails")
    if pp.sup * R * R > pp.constant * (1 + 1e-12):
        raise ConstructionError("localisation potential exceeds its bound")
    half = np.arange(-(R // 2), R // 2 + 1)
    if np.any(zeta(half, R) != 1.0):
        raise ConstructionError("bump is not identically one on the inner box")
