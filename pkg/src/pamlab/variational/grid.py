"""Grid functions on ``[-R, R]^d`` and the discretised functionals.

Nodes ``x_i = -R + i h``, ``h = 2R/m``, ``i = 0..m`` per axis.  Integrals use
trapezoid weights; the Dirichlet energy uses forward differences, i.e. the
gradient is evaluated at edge midpoints.  Support measures (gamma = 0)
count the cells lying entirely inside the support.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg, sparse
from scipy.sparse import linalg as spla

from ..errors import DomainError, NumericError, ParameterError


@dataclass
class GridFunction:
    R: float
    m: int
    d: int
    values: np.ndarray  # shape (m+1,)*d
    normalized: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.m + 1,) * self.d:
            raise ParameterError("values", f"expected shape {(self.m + 1,) * self.d}, got {self.values.shape}")

    @property
    def h(self) -> float:
        return 2.0 * self.R / self.m

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.R, self.R, self.m + 1)

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*[self.axis] * self.d, indexing="ij")

    @property
    def weights(self) -> np.ndarray:
        return trapezoid_weights(self.m, self.h, self.d)

    def integral(self, values=None) -> float:
        v = self.values if values is None else values
        return float(np.sum(self.weights * v))

    @classmethod
    def from_function(cls, fn, R: float, m: int, d: int = 1, normalize: bool = False):
        axis = np.linspace(-R, R, m + 1)
        mesh = np.meshgrid(*[axis] * d, indexing="ij")
        gf = cls(R, m, d, np.asarray(fn(*mesh), dtype=float) * np.ones((m + 1,) * d))
        return gf.normalize() if normalize else gf

    def normalize(self) -> "GridFunction":
        s = self.integral()
        if not s > 0:
            raise NumericError("cannot normalise a function with zero integral")
        return GridFunction(self.R, self.m, self.d, self.values / s, True)

    def with_values(self, values, normalized=False) -> "GridFunction":
        return GridFunction(self.R, self.m, self.d, values, normalized)


def trapezoid_weights(m: int, h: float, d: int) -> np.ndarray:
    w1 = np.full(m + 1, h)
    w1[0] = w1[-1] = h / 2
    w = w1
    for _ in range(d - 1):
        w = np.multiply.outer(w, w1)
    return w


def dirichlet_energy(g: np.ndarray, h: float) -> float:
    """``sum over edges (g_i - g_j)^2 h^{d-2}``."""
    d = g.ndim
    return float(sum(np.sum(np.diff(g, axis=ax) ** 2) for ax in range(d)) * h ** (d - 2))


def support_measure(mask: np.ndarray, h: float) -> float:
    """Volume of the grid cells whose corner nodes all lie in ``mask``."""
    m = np.asarray(mask, dtype=bool)
    for ax in range(m.ndim):
        m = m[(slice(None),) * ax + (slice(1, None),)] & m[(slice(None),) * ax + (slice(None, -1),)]
    return float(np.count_nonzero(m)) * h**mask.ndim


def functional_I(f: GridFunction, kappa: float) -> float:
    if np.any(f.values < 0):
        raise DomainError("f must be nonnegative")
    return kappa * dirichlet_energy(np.sqrt(f.values), f.h)


def functional_H_R(f: GridFunction, gamma: float, H1: float) -> float:
    if not (0.0 <= gamma < 1.0):
        raise DomainError(f"gamma must lie in [0, 1), got {gamma}")
    if gamma == 0:
        return H1 * support_measure(f.values > 0, f.h)
    return H1 * float(np.sum(f.weights * np.maximum(f.values, 0.0) ** gamma))


def legendre_density(psi: np.ndarray, gamma: float, H1: float) -> np.ndarray:
    """Pointwise ``sup_{y >= 0} (y psi - H1 y^gamma)``; zero where ``psi = 0``
    (those cells are outside the support) and where ``psi = -inf``."""
    a = -H1
    out = np.zeros_like(psi, dtype=float)
    neg = (psi < 0) & np.isfinite(psi)
    if gamma == 0:
        out[neg] = a
        out[np.isneginf(psi)] = a
        return out
    q = gamma / (1.0 - gamma)
    c = (gamma * a) ** (1.0 / (1.0 - gamma)) * (1.0 / gamma - 1.0)
    out[neg] = c * np.abs(psi[neg]) ** (-q)
    return out


def legendre_L_R(psi: GridFunction, gamma: float, H1: float) -> float:
    if not (0.0 <= gamma < 1.0):
        raise DomainError(f"gamma must lie in [0, 1), got {gamma}")
    if np.any(psi.values > 0):
        raise DomainError("psi must be nonpositive")
    if gamma == 0:
        return -H1 * support_measure(psi.values < 0, psi.h)
    return float(np.sum(psi.weights * legendre_density(psi.values, gamma, H1)))


def interior_laplacian(n: int, d: int):
    """``K = -Lap`` (unit spacing, Dirichlet) on ``n^d`` interior nodes."""
    T = sparse.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1])
    eye = sparse.identity(n)
    K = sparse.csr_matrix((n**d, n**d))
    for ax in range(d):
        mats = [eye] * d
        mats[ax] = T
        term = mats[0]
        for M in mats[1:]:
            term = sparse.kron(term, M)
        K = K + term
    return K.tocsr()


def principal_pair(diag: np.ndarray, kappa: float, h: float, shape, active=None, vectors: bool = True):
    """Top eigenpair of ``kappa*Lap_h + diag`` on the active interior nodes
    (inactive nodes are Dirichlet).  Returns ``(lam, v)`` with ``v`` on the
    full interior shape, unit Euclidean norm; ``(-inf, None)`` if empty."""
    diag = np.asarray(diag, dtype=float).reshape(shape)
    if active is None:
        active = np.ones(shape, dtype=bool)
    n_act = int(active.sum())
    if n_act == 0:
        return -np.inf, None
    d = len(shape)
    c = kappa / h**2
    if d == 1:
        idx = np.flatnonzero(active)
        dv = diag[idx] - 2 * c
        off = np.where(np.diff(idx) == 1, c, 0.0)
        if idx.size == 1:
            lam, vec = dv[0], np.ones(1)
        else:
            w, V = linalg.eigh_tridiagonal(dv, off, select="i", select_range=(idx.size - 1, idx.size - 1))
            lam, vec = w[0], V[:, 0]
        full = np.zeros(shape)
        full[idx] = vec
        return float(lam), (np.abs(full) if vectors else None)
    K = interior_laplacian(shape[0], d)
    A = -c * K + sparse.diags(diag.ravel())
    act = active.ravel()
    A = A[act][:, act]
    if n_act <= 600:
        w, V = linalg.eigh(A.toarray(), subset_by_index=[n_act - 1, n_act - 1])
        lam, vec = w[0], V[:, 0]
    else:
        try:
            w, V = spla.eigsh(A, k=1, which="LA", tol=1e-12, v0=np.ones(n_act), maxiter=100 * n_act)
        except spla.ArpackNoConvergence as exc:
            raise NumericError("principal eigenpair did not converge") from exc
        lam, vec = w[0], V[:, 0]
    full = np.zeros(int(np.prod(shape)))
    full[act] = vec
    return float(lam), np.abs(full).reshape(shape)


def continuum_eigenvalue(psi: GridFunction, kappa: float, support_restricted: bool = False) -> float:
    """Principal eigenvalue of ``kappa*Lap + psi`` with Dirichlet conditions on
    the box (and on the complement of ``{psi < 0}`` when restricted)."""
    inner = tuple(slice(1, -1) for _ in range(psi.d))
    vals = psi.values[inner]
    if vals.size == 0:
        return -np.inf
    active = np.isfinite(vals)
    if support_restricted:
        active &= vals < 0
    if not active.any():
        return -np.inf
    lam, _ = principal_pair(np.where(active, vals, 0.0), kappa, psi.h, vals.shape, active, vectors=False)
    return lam


def scaling_transform(psi: GridFunction, b: float) -> GridFunction:
    """``psi_b(x) = psi(x/b)/b^2`` on ``[-bR, bR]^d``; the node count is kept,
    so node ``i`` of the result sits at ``b`` times node ``i`` of ``psi``."""
    if not b > 0:
        raise ParameterError("b", "must be positive")
    return GridFunction(b * psi.R, psi.m, psi.d, psi.values / b**2, psi.normalized)


def richardson(values, order: float = 2.0) -> float:
    """Extrapolate ``v(h), v(h/2), v(h/4)`` assuming error ``~ h^order``."""
    v = list(values)
    if len(v) == 1:
        return float(v[0])
    r = 2.0**order
    a, b = v[-2], v[-1]
    return float(b + (b - a) / (r - 1.0))


def write_grid_csv(f: GridFunction, path) -> None:
    mesh = f.mesh()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{i + 1}" for i in range(f.d)] + ["value"])
        for idx in np.ndindex(f.values.shape):
            w.writerow([repr(float(mesh[k][idx])) for k in range(f.d)] + [repr(float(f.values[idx]))])
