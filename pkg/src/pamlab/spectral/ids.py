"""Integrated density of states of ``-kappa*Lap - xi`` and Lifshitz fits."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np
from scipy import linalg

from .. import rng
from ..errors import FitError, ParameterError
from ..operator import dense_generator
from ..potential.distributions import PotentialDistribution
from ..potential.field import PotentialField, sample_field
from ..potential.lattice import LatticeBox
from .dirichlet import DirichletSpectrum


def energies(field: PotentialField, kappa: float) -> np.ndarray:
    """Ascending eigenvalues of ``-kappa*Lap - xi`` on the active sites.

    This is the only place where the sign flip between the generator
    ``kappa*Lap + V`` and the Schrodinger convention happens."""
    if field.n_active == 0:
        return np.empty(0)
    if field.box.d == 1:
        act = np.flatnonzero(~field.trap)
        diag = 2 * kappa - field.values[act]
        off = np.where(np.diff(act) == 1, -float(kappa), 0.0)
        return linalg.eigvalsh_tridiagonal(diag, off) if act.size > 1 else diag
    A, _ = dense_generator(field, kappa)
    return np.sort(-linalg.eigvalsh(A))


@dataclass
class IDSHistogram:
    E: np.ndarray
    sizes: list[int]
    n: np.ndarray  # (len(sizes), len(E)) averaged N_R(E)/(2R)^d
    n_samples: list[int]
    dist_tag: str
    d: int
    kappa: float
    total_sites: list[int] = dc_field(default_factory=list)

    def row(self, R: int | None = None) -> np.ndarray:
        i = len(self.sizes) - 1 if R is None else self.sizes.index(R)
        return self.n[i]


def _counts(ev: np.ndarray, E: np.ndarray) -> np.ndarray:
    return np.searchsorted(ev, E, side="right").astype(float)


def ids_estimate(dist: PotentialDistribution, kappa: float, sizes, E, n_samples: int, seed: int, d: int = 1) -> IDSHistogram:
    """Average of ``N_R(E)/(2R)^d`` over ``n_samples`` fields per radius.

    Sample ``j`` of radius ``R`` uses the field seed ``stream_key(seed, R, j)``."""
    E = np.asarray(E, dtype=float)
    if np.any(E < 0):
        raise ParameterError("E", "energy grid must be nonnegative")
    sizes = [int(R) for R in sizes]
    out = np.zeros((len(sizes), E.size))
    totals = []
    for i, R in enumerate(sizes):
        box = LatticeBox(d, R)
        base = int(rng.stream_key(seed, R))
        acc = np.zeros(E.size)
        for j in range(n_samples):
            f = sample_field(dist, box, int(rng.stream_key(base, j)))
            acc += _counts(energies(f, kappa), E)
        out[i] = acc / (n_samples * (2.0 * R) ** d)
        totals.append(n_samples * box.n_sites)
    return IDSHistogram(E, sizes, out, [int(n_samples)] * len(sizes), dist.tag(), d, float(kappa), totals)


def laplace_transform_ids(obj, t: float, R: int | None = None) -> float:
    """``(1/#Q_R) sum_k exp(t lambda_k)`` for a spectrum; for a histogram the
    Stieltjes sum ``sum_i (n(E_i) - n(E_{i-1})) exp(-t E_i)``."""
    if t < 0:
        raise ParameterError("t", "must be nonnegative")
    if isinstance(obj, DirichletSpectrum):
        lam = obj.eigenvalues
        return float(np.sum(np.exp(t * lam)) / obj.field.box.n_sites)
    n = obj.row(R)
    dn = np.diff(np.concatenate([[0.0], n]))
    return float(np.sum(dn * np.exp(-t * obj.E)))


def default_window(h: IDSHistogram, R: int | None = None):
    """Lowest decade of E on which ``n >= 10 / (total sites sampled)``."""
    i = len(h.sizes) - 1 if R is None else h.sizes.index(R)
    n = h.n[i]
    thresh = 10.0 / h.total_sites[i]
    ok = np.flatnonzero(n >= thresh)
    if ok.size == 0:
        raise FitError("no energy with enough counts", threshold=thresh)
    lo = h.E[ok[0]]
    if lo <= 0:
        raise FitError("window would start at E = 0", threshold=thresh)
    return float(lo), float(10.0 * lo)


def lifshitz_fit(h: IDSHistogram, profile=None, window=None, R: int | None = None, chi: float | None = None) -> dict:
    """Slope of ``log(-log n)`` against ``log(1/E)`` on the window."""
    n = h.row(R)
    if window is None:
        window = default_window(h, R)
    lo, hi = window
    sel = (h.E >= lo) & (h.E <= hi)
    if not np.any(sel):
        raise FitError("empty energy window", window=list(window))
    En, nn = h.E[sel], n[sel]
    if np.any(nn <= 0) or np.any(En <= 0):
        raise FitError("zero counts in window", window=list(window))
    if np.any(nn >= 1):
        raise FitError("n(E) >= 1 in window; log(-log n) undefined", window=list(window))
    if En.size < 3:
        raise FitError("fewer than three points in window", window=list(window), points=int(En.size))
    x = np.log(1.0 / En)
    y = np.log(-np.log(nn))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss if ss > 0 else 1.0
    out = {
        "window": [float(lo), float(hi)],
        "points": int(En.size),
        "slope": float(slope),
        "intercept": float(intercept),
        "r2": r2,
    }
    if profile is not None:
        beta = profile.beta
        out["target_exponent"] = 1.0 / beta
        ainv = np.array([profile.alpha.inverse(e ** -0.5) for e in En])
        out["scaled_limit"] = float(np.mean(np.log(nn) / (En * ainv)))
        if chi is not None:
            nu = profile.nu
            # Legendre dual of log L(t) ~ -chi t / alpha_t^2
            out["target_scaled_limit"] = -(2 * nu / (1 - 2 * nu)) * ((1 - 2 * nu) * chi) ** (1 / (2 * nu))
    return out


def write_ids_csv(h: IDSHistogram, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["box_R", "E", "n_estimate", "n_samples"])
        for i, R in enumerate(h.sizes):
            for E, v in zip(h.E, h.n[i]):
                w.writerow([R, repr(float(E)), repr(float(v)), h.n_samples[i]])


def write_fit_json(fit: dict, path) -> None:
    Path(path).write_text(json.dumps(fit, indent=2, sort_keys=True) + "\n")
