"""Dirichlet spectra of ``kappa*Lap + V`` on boxes and windows."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg, sparse
from scipy.sparse import linalg as spla

from ..errors import NumericError
from ..operator import dense_generator, generator
from ..potential.field import PotentialField

DENSE_LIMIT = 2000
_SMALL = 400


@dataclass
class DirichletSpectrum:
    """Eigenpairs on the active sites, eigenvalues in descending order."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # (n_active, k), columns orthonormal
    active: np.ndarray
    field: PotentialField
    kappa: float

    @property
    def lambda_1(self) -> float:
        return float(self.eigenvalues[0]) if self.eigenvalues.size else -np.inf

    def full_vector(self, k: int = 0) -> np.ndarray:
        out = np.zeros(self.field.box.n_sites)
        out[self.active] = self.eigenvectors[:, k]
        return out


def rayleigh(field: PotentialField, kappa: float, g: np.ndarray) -> float:
    """``(V, g^2) - kappa ||grad g||^2`` for ``g`` on the box (zero at traps
    and outside); edges to outside sites count with ``g = 0`` there."""
    g = np.where(field.trap, 0.0, g)
    box = field.box
    nb = box.neighbors
    energy = 0.0
    for i in range(box.d):
        j = nb[:, 2 * i]
        inner = j >= 0
        energy += np.sum((g[j[inner]] - g[inner]) ** 2)
        energy += np.sum(g[~inner] ** 2)
        jm = nb[:, 2 * i + 1]
        energy += np.sum(g[jm < 0] ** 2)
    return float(np.sum(field.values * g**2) - kappa * energy)


def dirichlet_spectrum(V: PotentialField, kappa: float, k_max: int | None = None) -> DirichletSpectrum:
    n = V.n_active
    if n == 0:
        raise NumericError("no active sites", active=0)
    if n <= DENSE_LIMIT:
        A, act = dense_generator(V, kappa)
        if k_max is None or k_max >= n:
            lam, E = linalg.eigh(A)
        else:
            lam, E = linalg.eigh(A, subset_by_index=[n - k_max, n - 1])
    else:
        A, act = generator(V, kappa)
        k = 6 if k_max is None else min(k_max, n - 1)
        try:
            lam, E = spla.eigsh(A, k=k, which="LA", tol=1e-13, v0=np.ones(n), maxiter=50 * n)
        except spla.ArpackNoConvergence as exc:
            raise NumericError("iterative eigensolver did not converge", converged=len(exc.eigenvalues)) from exc
        res = np.linalg.norm(A @ E - E * lam, axis=0)
        if np.any(res > 1e-8):
            raise NumericError("eigenpair residuals too large", residuals=res.tolist())
    order = np.argsort(lam)[::-1]
    return DirichletSpectrum(lam[order], E[:, order], act, V, float(kappa))


def grid_operator(grid: np.ndarray, kappa: float):
    """Sparse generator for a d-dimensional array of potential values
    (``-inf`` = trap), Dirichlet outside the array."""
    act = np.isfinite(grid)
    n = int(act.sum())
    pos = np.full(grid.shape, -1, dtype=np.int64)
    pos[act] = np.arange(n)
    rows, cols = [], []
    for ax in range(grid.ndim):
        a = [slice(None)] * grid.ndim
        b = [slice(None)] * grid.ndim
        a[ax] = slice(0, -1)
        b[ax] = slice(1, None)
        pa, pb = pos[tuple(a)], pos[tuple(b)]
        ok = (pa >= 0) & (pb >= 0)
        rows += [pa[ok], pb[ok]]
        cols += [pb[ok], pa[ok]]
    r = np.concatenate(rows) if rows else np.empty(0, np.int64)
    c = np.concatenate(cols) if cols else np.empty(0, np.int64)
    diag = grid[act] - 2 * grid.ndim * kappa
    A = sparse.csr_matrix((np.full(r.size, float(kappa)), (r, c)), shape=(n, n)) + sparse.diags(diag)
    return A.tocsr(), n


def principal_from_grid(grid: np.ndarray, kappa: float) -> float:
    """Largest eigenvalue on the array; ``-inf`` if every site is a trap."""
    A, n = grid_operator(np.asarray(grid, dtype=float), kappa)
    if n == 0:
        return -np.inf
    if n <= _SMALL:
        return float(linalg.eigvalsh(A.toarray(), subset_by_index=[n - 1, n - 1])[0])
    try:
        lam = spla.eigsh(A, k=1, which="LA", tol=1e-13, v0=np.ones(n), return_eigenvectors=False, maxiter=50 * n)
    except spla.ArpackNoConvergence as exc:
        raise NumericError("principal eigenvalue did not converge") from exc
    return float(lam[0])


def principal_eigenvalue(V: PotentialField, kappa: float) -> float:
    return principal_from_grid(V.grid(), kappa)


def shifted_principal_eigenvalue(V: PotentialField, z, R: int, kappa: float) -> float:
    """``lambda_1`` on the window ``z + Q_R`` of the ambient field."""
    return principal_eigenvalue(V.restrict(z, R), kappa)
