"""Matrix of ``kappa*Laplacian + V`` on the active sites of a box.

Dirichlet conditions: neighbours outside the box or at hard traps are
absent, so every active site keeps the full diagonal drain ``-2 d kappa``.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse

from .potential.field import PotentialField


def active_sites(field: PotentialField) -> np.ndarray:
    return np.flatnonzero(~field.trap)


def generator(field: PotentialField, kappa: float, fmt: str = "csr"):
    """Return ``(A, active)``: sparse ``A`` indexed by position in ``active``."""
    box = field.box
    act = active_sites(field)
    pos = np.full(box.n_sites, -1, dtype=np.int64)
    pos[act] = np.arange(act.size)
    nb = box.neighbors[act]
    rows, cols = [], []
    for c in range(nb.shape[1]):
        j = nb[:, c]
        ok = j >= 0
        ok[ok] = pos[j[ok]] >= 0
        rows.append(np.flatnonzero(ok))
        cols.append(pos[j[ok]])
    rows = np.concatenate(rows) if rows else np.empty(0, np.int64)
    cols = np.concatenate(cols) if cols else np.empty(0, np.int64)
    diag = field.values[act] - 2 * box.d * kappa
    A = sparse.coo_matrix(
        (np.full(rows.size, float(kappa)), (rows, cols)), shape=(act.size, act.size)
    ) + sparse.diags(diag)
    return A.asformat(fmt), act


def dense_generator(field: PotentialField, kappa: float):
    A, act = generator(field, kappa)
    return A.toarray(), act
