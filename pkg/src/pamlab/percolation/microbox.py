"""Scan for microboxes where the field dominates a scaled shape, and the
one-dimensional screening constant."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from ..errors import DomainError, ParameterError
from ..potential.field import PotentialField
from ..potential.scaling import ScalingProfile
from ..variational.grid import GridFunction, legendre_L_R
from .clusters import label_clusters


@dataclass
class MicroboxQuery:
    psi: GridFunction
    eps: float
    t: float
    profile: ScalingProfile

    def __post_init__(self):
        if not self.eps > 0:
            raise ParameterError("eps", "must be positive")
        if np.any(self.psi.values > 0):
            raise DomainError("shape must be nonpositive")

    @property
    def alpha(self) -> float:
        return float(self.profile.alpha(self.profile.b(self.t)))

    @property
    def stride(self) -> int:
        a = float(self.profile.alpha(self.profile.b(math.e * self.t)))
        return max(1, int(math.floor(3 * self.psi.R * a)))

    @property
    def L(self) -> float:
        return legendre_L_R(self.psi, self.profile.gamma, self.profile.H1)

    def targets(self):
        """Offsets ``z`` of ``Q^(t)`` and thresholds
        ``psi_t(z) - eps / (2 alpha^2)``."""
        a = self.alpha
        if a < 1:
            raise DomainError(f"alpha(b_t) = {a:.4g} < 1; t too small")
        r = int(math.floor(self.psi.R * a))
        axis = np.arange(-r, r + 1)
        Z = np.stack([g.ravel() for g in np.meshgrid(*[axis] * self.psi.d, indexing="ij")], axis=1)
        interp = RegularGridInterpolator((self.psi.axis,) * self.psi.d, self.psi.values, bounds_error=False, fill_value=0.0)
        psi_t = interp(Z / a) / a**2
        if self.profile.gamma == 0:
            keep = psi_t < 0
            Z, psi_t = Z[keep], psi_t[keep]
        return Z, psi_t - self.eps / (2 * a * a), r


def hit_mask(field: PotentialField, offsets, thresholds, reach: int) -> np.ndarray:
    """Boolean grid over centres ``y`` with ``|y| <= R_field - reach``:
    ``xi(y+z) >= threshold(z)`` for every offset."""
    G = field.grid()
    R = field.box.R
    n = 2 * (R - reach) + 1
    if n <= 0:
        return np.zeros((0,) * field.box.d, dtype=bool)
    ok = np.ones((n,) * field.box.d, dtype=bool)
    for z, thr in zip(offsets, thresholds):
        sl = tuple(slice(reach + zi, reach + zi + n) for zi in z)
        ok &= G[sl] >= thr
    return ok


def microbox_scan(field: PotentialField, query: MicroboxQuery, require_cluster: bool = False, K: float = math.inf) -> dict:
    """First hit on the coarse lattice of spacing ``stride`` (lexicographic),
    else the first hit of the dense scan.  ``hits`` always counts the dense
    hit set, so it is monotone in ``eps``."""
    Z, thr, reach = query.targets()
    d, R = field.box.d, field.box.R
    ok = hit_mask(field, Z, thr, reach)
    if require_cluster and ok.size:
        lab = label_clusters(field, K)
        inner = tuple(slice(reach, 2 * R + 1 - reach) for _ in range(d))
        ok &= (lab.labels.reshape(field.box.shape) == lab.selected)[inner] & (lab.selected >= 0)
    s = query.stride
    rr = R - reach
    out = {"t": float(query.t), "found": False, "center": None, "hits": int(ok.sum()), "stride": s,
           "phase": None, "alpha": query.alpha, "L_R": query.L, "n_offsets": int(len(Z))}
    if not ok.any():
        return out
    coarse = np.arange(-(rr // s) * s, rr + 1, s) + rr  # array positions on the coarse lattice
    sub = ok[np.ix_(*[coarse] * d)]
    if sub.any():
        pos = np.array(np.unravel_index(np.argmax(sub.ravel()), sub.shape))
        center, phase = coarse[pos] - rr, "coarse"
    else:
        center, phase = np.array(np.unravel_index(np.argmax(ok.ravel()), ok.shape)) - rr, "dense"
    out.update(found=True, center=[int(c) for c in center], phase=phase)
    return out


def write_scan_json(report: dict, path) -> None:
    keys = ("t", "found", "center", "hits", "stride")
    Path(path).write_text(json.dumps({k: report[k] for k in keys}, sort_keys=True) + "\n")


def screening_constant(field: PotentialField) -> float:
    """``sup_{y != 0} |y|^-1 sum log(-xi(x) v 1)`` over the ``|y|`` sites
    ``x`` strictly after 0 up to and including ``y``."""
    if field.box.d != 1:
        raise DomainError("screening constant is defined in d=1")
    if field.trap.any():
        return math.inf
    R = field.box.R
    if R == 0:
        return 0.0
    ell = np.log(np.maximum(-field.values, 1.0))
    right = np.cumsum(ell[R + 1:]) / np.arange(1, R + 1)
    left = np.cumsum(ell[R - 1::-1]) / np.arange(1, R + 1)
    return float(max(right.max(), left.max()))
