"""Level-set clusters ``{xi >= -K}`` and chemical distances."""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .. import _jit
from ..errors import DomainError, ParameterError
from ..potential.field import PotentialField
from ..potential.lattice import LatticeBox

# site percolation thresholds on Z^d (numerical estimates from the literature)
SITE_PC = {1: 1.0, 2: 0.592746, 3: 0.311608, 4: 0.196889, 5: 0.14081, 6: 0.1090}


def open_sites(field: PotentialField, K: float) -> np.ndarray:
    if not (K >= 0):
        raise ParameterError("K", "threshold must be >= 0 or +inf")
    if math.isinf(K):
        return ~field.trap
    return ~field.trap & (field.values >= -K)


@_jit.njit
def _union_find_nb(is_open, nb):
    n = is_open.size
    parent = np.arange(n)
    for i in range(n):
        if not is_open[i]:
            continue
        for c in range(0, nb.shape[1], 2):
            j = nb[i, c]
            if j < 0 or not is_open[j]:
                continue
            # find with path halving
            a = i
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            b = j
            while parent[b] != b:
                parent[b] = parent[parent[b]]
                b = parent[b]
            if a != b:
                if a < b:
                    parent[b] = a
                else:
                    parent[a] = b
    labels = np.full(n, -1, dtype=np.int64)
    nxt = 0
    root_id = np.full(n, -1, dtype=np.int64)
    for i in range(n):
        if not is_open[i]:
            continue
        a = i
        while parent[a] != a:
            a = parent[a]
        if root_id[a] < 0:
            root_id[a] = nxt
            nxt += 1
        labels[i] = root_id[a]
    return labels


def _labels_np(is_open, box: LatticeBox):
    lab, _ = ndimage.label(is_open.reshape(box.shape))
    lab = lab.ravel().astype(np.int64) - 1
    # renumber by first appearance in site order
    on = lab >= 0
    _, first = np.unique(lab[on], return_index=True)
    order = np.argsort(first)
    remap = np.empty(order.size, dtype=np.int64)
    remap[order] = np.arange(order.size)
    out = np.full(lab.size, -1, dtype=np.int64)
    out[on] = remap[lab[on]]
    return out


@dataclass
class ClusterLabeling:
    box: LatticeBox
    K: float
    is_open: np.ndarray
    labels: np.ndarray  # -1 closed, else cluster id numbered by first site
    sizes: np.ndarray
    largest: int
    spanning: np.ndarray  # bool per cluster
    selected: int
    selection: str  # "spanning" or "largest" or "none"

    @property
    def n_clusters(self) -> int:
        return int(self.sizes.size)

    def cluster_of(self, x) -> int:
        return int(self.labels[self.box.index_of(x)])

    def in_selected(self, x) -> bool:
        return self.selected >= 0 and self.cluster_of(x) == self.selected

    def density(self) -> float:
        """Fraction of sites in the largest cluster."""
        return float(self.sizes[self.largest]) / self.box.n_sites if self.largest >= 0 else 0.0


def label_clusters(field: PotentialField, K: float = math.inf, use_numba: bool | None = None) -> ClusterLabeling:
    """Nearest-neighbour clusters of the open sites."""
    box = field.box
    is_open = open_sites(field, K)
    use = _jit.USE_NUMBA if use_numba is None else use_numba
    labels = _union_find_nb(is_open, box.neighbors) if use else _labels_np(is_open, box)
    k = int(labels.max()) + 1 if labels.size else 0
    sizes = np.bincount(labels[labels >= 0], minlength=k).astype(np.int64)
    spanning = np.zeros(k, dtype=bool)
    c = box.coords
    for i in range(box.d):
        lo = np.unique(labels[(c[:, i] == -box.R) & (labels >= 0)])
        hi = np.unique(labels[(c[:, i] == box.R) & (labels >= 0)])
        spanning[np.intersect1d(lo, hi)] = True
    largest = int(np.argmax(sizes)) if k else -1
    if spanning.any():
        span_ids = np.nonzero(spanning)[0]
        selected = int(span_ids[np.argmax(sizes[span_ids])])
        how = "spanning"
    elif k:
        selected, how = largest, "largest"
    else:
        selected, how = -1, "none"
    return ClusterLabeling(box, float(K), is_open, labels, sizes, largest, spanning, selected, how)


def bfs_distances(lab: ClusterLabeling, x) -> np.ndarray:
    """Graph distances from ``x`` inside its cluster; ``-1`` elsewhere."""
    box = lab.box
    i = box.index_of(x)
    if not lab.is_open[i]:
        raise DomainError(f"site {np.asarray(x).tolist()} is closed")
    nb = box.neighbors
    dist = np.full(box.n_sites, -1, dtype=np.int64)
    dist[i] = 0
    front = np.array([i])
    step = 0
    while front.size:
        step += 1
        cand = nb[front].ravel()
        cand = np.unique(cand[cand >= 0])
        cand = cand[lab.is_open[cand] & (dist[cand] < 0)]
        dist[cand] = step
        front = cand
    return dist


def chemical_distance(lab: ClusterLabeling, x, z):
    """Shortest open path length from ``x`` to ``z``; ``None`` if they lie in
    different clusters."""
    box = lab.box
    ix, iz = box.index_of(x), box.index_of(z)
    for s, i in ((x, ix), (z, iz)):
        if not lab.is_open[i]:
            raise DomainError(f"site {np.asarray(s).tolist()} is closed")
    if lab.labels[ix] != lab.labels[iz]:
        return None
    if ix == iz:
        return 0
    # plain BFS with early exit; the vectorised sweep above covers many targets
    nb = box.neighbors
    seen = {ix: 0}
    q = deque([ix])
    while q:
        a = q.popleft()
        for b in nb[a]:
            if b < 0 or not lab.is_open[b] or b in seen:
                continue
            seen[b] = seen[a] + 1
            if b == iz:
                return seen[b]
            q.append(b)
    return None  # pragma: no cover - same label implies connected


def distance_ratio(lab: ClusterLabeling, x, targets) -> float:
    """``max d_*(x, z) / |x - z|_1`` over the targets in the cluster of x."""
    x = np.asarray(x, dtype=np.int64)
    if not lab.in_selected(x):
        raise DomainError("x must lie in the selected cluster")
    targets = np.atleast_2d(np.asarray(targets, dtype=np.int64))
    if targets.size == 0:
        raise DomainError("empty target sample")
    dist = bfs_distances(lab, x)
    idx = lab.box.index_of(targets)
    l1 = np.abs(targets - x).sum(axis=1)
    ok = (dist[idx] >= 0) & (l1 > 0)
    if not ok.any():
        raise DomainError("no target in the cluster of x")
    return float(np.max(dist[idx][ok] / l1[ok]))


def suggest_K(values, d: int, margin: float = 0.05) -> float:
    """Smallest K with empirical ``P(xi >= -K) >= p_c(d) + margin``.

    ``values`` is a sample of the potential (``-inf`` for traps)."""
    if d not in SITE_PC:
        raise ParameterError("d", f"no tabulated threshold for d={d}")
    target = SITE_PC[d] + margin
    if target >= 1.0:
        raise DomainError(f"no supercritical level set in d={d}")
    v = np.sort(np.asarray(values, dtype=float))[::-1]
    k = int(math.ceil(target * v.size)) - 1
    if k >= v.size or not np.isfinite(v[k]):
        raise DomainError("finite-valued sites are too rare for a supercritical level")
    return float(max(0.0, -v[k]))


def write_labeling_csv(lab: ClusterLabeling, path) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["site_index", "open", "cluster_id"])
        for i, (o, c) in enumerate(zip(lab.is_open, lab.labels)):
            w.writerow([i, int(o), int(c)])
