"""Finite-box solutions of ``du/dt = kappa*Lap u + V u`` and their
Feynman–Kac representation."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np
from scipy import integrate, linalg

from ..errors import DomainError, NumericError, ParameterError, RangeError
from ..operator import dense_generator, generator
from ..potential.field import PotentialField
from ..potential.lattice import LatticeBox
from .krylov import expm_action
from .walks import fk_weights, walk_path

METHODS = ("auto", "expm", "eigen", "rk")
DENSE_LIMIT = 2000


@dataclass
class SolutionGrid:
    box: LatticeBox
    t: float
    values: np.ndarray
    kappa: float
    method: str
    source: tuple | None = None
    diagnostics: dict = dc_field(default_factory=dict)

    def at(self, z) -> float:
        return float(self.values[self.box.index_of(z)])

    @property
    def origin(self) -> float:
        return self.at(np.zeros(self.box.d, dtype=np.int64))


def _check(kappa, t):
    if not kappa > 0:
        raise ParameterError("kappa", "must be positive")
    if t < 0:
        raise DomainError(f"time must be nonnegative, got {t}")


def _propagate(field: PotentialField, kappa: float, t: float, u0: np.ndarray, method: str):
    """Evolve ``u0`` (given on active sites) and return the full-box vector."""
    if method not in METHODS:
        raise ParameterError("method", f"expected one of {METHODS}, got {method!r}")
    n_all = field.box.n_sites
    act = np.flatnonzero(~field.trap)
    out = np.zeros(n_all)
    diag: dict = {"active_sites": int(act.size)}
    if act.size == 0 or t == 0:
        out[act] = u0
        return out, diag
    if method == "auto":
        method = "eigen" if act.size <= DENSE_LIMIT else "expm"
    diag["method_used"] = method
    if method == "eigen":
        A, _ = dense_generator(field, kappa)
        lam, E = linalg.eigh(A)
        w = E @ (np.exp(t * lam) * (E.T @ u0))
        diag["lambda_1"] = float(lam[-1])
    elif method == "expm":
        A, _ = generator(field, kappa)
        w, info = expm_action(A, u0, t)
        diag.update(info)
    else:
        A, _ = generator(field, kappa)
        sol = integrate.solve_ivp(
            lambda _s, y: A @ y, (0.0, t), u0, method="DOP853", rtol=1e-13, atol=1e-15
        )
        if not sol.success:
            raise NumericError("adaptive integrator failed", message=sol.message, nfev=sol.nfev, t_reached=float(sol.t[-1]))
        w = sol.y[:, -1]
        diag["nfev"] = int(sol.nfev)
    neg = float(min(0.0, w.min()))
    diag["clipped_negative"] = neg
    out[act] = np.maximum(w, 0.0)
    return out, diag


def solve_dirichlet(V: PotentialField, kappa: float, t: float, method: str = "auto") -> SolutionGrid:
    """``u_R^V(t, .)`` with ``u(0) = 1`` on the box and zero outside."""
    _check(kappa, t)
    u0 = np.ones(V.n_active)
    vals, diag = _propagate(V, kappa, t, u0, method)
    return SolutionGrid(V.box, float(t), vals, float(kappa), method, None, diag)


def fundamental_solution(V: PotentialField, kappa: float, t: float, z, method: str = "auto") -> SolutionGrid:
    """``p_R^V(t, ., z)``: solution started from the indicator of ``z``."""
    _check(kappa, t)
    iz = V.box.index_of(z)
    act = np.flatnonzero(~V.trap)
    u0 = (act == iz).astype(float)
    vals, diag = _propagate(V, kappa, t, u0, method)
    return SolutionGrid(V.box, float(t), vals, float(kappa), method, tuple(int(c) for c in np.atleast_1d(z)), diag)


# random walks --------------------------------------------------------------


@dataclass
class WalkRecord:
    start: np.ndarray
    t: float
    jump_times: np.ndarray
    sites: np.ndarray  # (n_jumps + 1, d), visited sites in order
    exit_time: float | None  # first exit from the guard box, None if never
    guard: int | None

    @property
    def terminal(self) -> np.ndarray:
        return self.sites[-1]

    @property
    def exited(self) -> bool:
        return self.exit_time is not None

    @property
    def holding(self) -> np.ndarray:
        """Time spent at each entry of ``sites``; the last one is cut at t."""
        edges = np.concatenate([[0.0], self.jump_times, [self.t]])
        return np.diff(edges)

    def local_times(self) -> dict[tuple, float]:
        out: dict[tuple, float] = {}
        for s, h in zip(map(tuple, self.sites.tolist()), self.holding):
            out[s] = out.get(s, 0.0) + h
        return out

    def integral(self, fn) -> float:
        """``int_0^t fn(X(s)) ds`` along the path."""
        return float(sum(fn(np.asarray(s)) * h for s, h in zip(self.sites, self.holding)))


def simulate_walk(kappa: float, z, t: float, box: int | LatticeBox | None = None, seed: int = 0, walk_index: int = 0) -> WalkRecord:
    """One path of the walk with generator ``kappa*Lap``; ``kappa = 0``
    gives the walk that never jumps."""
    if kappa < 0:
        raise ParameterError("kappa", "must be nonnegative")
    z = np.atleast_1d(np.asarray(z, dtype=np.int64))
    d = z.size
    guard = box.R if isinstance(box, LatticeBox) else (-1 if box is None else int(box))
    times, dirs, exit_time = walk_path(d, 2 * d * kappa, t, z, seed, walk_index, guard)
    steps = np.zeros((dirs.size, d), dtype=np.int64)
    steps[np.arange(dirs.size), dirs // 2] = np.where(dirs % 2 == 0, 1, -1)
    sites = np.vstack([z[None, :], z[None, :] + np.cumsum(steps, axis=0)])
    return WalkRecord(z, float(t), times, sites, None if exit_time < 0 else exit_time, None if guard < 0 else guard)


def feynman_kac_estimate(V: PotentialField, kappa: float, t: float, z, n_walks: int, seed: int,
                         dirichlet_box: int | LatticeBox | None = None, use_numba=None) -> dict:
    """Monte Carlo mean of ``exp(int_0^t V(X_s) ds)`` (times ``1{tau_R > t}``)."""
    if n_walks < 1:
        raise ParameterError("n_walks", "need at least one walk")
    if not kappa > 0:
        raise ParameterError("kappa", "must be positive")
    z = np.atleast_1d(np.asarray(z, dtype=np.int64))
    if z.size != V.box.d:
        raise ParameterError("z", "dimension mismatch")
    r = -1
    if dirichlet_box is not None:
        r = dirichlet_box.R if isinstance(dirichlet_box, LatticeBox) else int(dirichlet_box)
        if r > V.box.R:
            raise RangeError("Dirichlet box exceeds the field box")
    w = fk_weights(V.values, V.trap, V.box.R, r, 2 * V.box.d * kappa, t, z, n_walks, seed, use_numba)
    mean = float(w.mean())
    se = float(w.std(ddof=1) / math.sqrt(n_walks)) if n_walks > 1 else float("nan")
    return {"mean": mean, "std_error": se, "n_walks": int(n_walks)}


def scaled_local_times(record: WalkRecord, alpha: float, x) -> float:
    """``(alpha^d / t) l_t(floor(x alpha))``."""
    if not record.t > 0:
        raise ParameterError("t", "must be positive")
    z = tuple(np.floor(np.atleast_1d(np.asarray(x, dtype=float)) * alpha).astype(np.int64).tolist())
    d = record.start.size
    return alpha**d / record.t * record.local_times().get(z, 0.0)


def exit_bound(kappa: float, d: int, r: int, t: float) -> float:
    """``2^{d+1} exp(-r (log(r/(d kappa t)) - 1))``."""
    return 2.0 ** (d + 1) * math.exp(-r * (math.log(r / (d * kappa * t)) - 1.0))


def check_exit_bound(kappa: float, d: int, r: int, t: float, n_walks: int, seed: int) -> dict:
    if r <= 0 or t <= 0:
        raise ParameterError("r", "need r > 0 and t > 0")
    zero = PotentialField.constant(LatticeBox(d, r), 0.0)
    est = feynman_kac_estimate(zero, kappa, t, np.zeros(d, dtype=np.int64), n_walks, seed, dirichlet_box=r)
    emp = 1.0 - est["mean"]
    bound = exit_bound(kappa, d, r, t)
    return {"empirical": emp, "std_error": est["std_error"], "bound": bound, "holds": emp <= bound}


# output --------------------------------------------------------------------


def write_solution_csv(sol: SolutionGrid, path) -> None:
    d = sol.box.d
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["site_index"] + [f"x{i + 1}" for i in range(d)] + ["u_value"])
        for i, (c, u) in enumerate(zip(sol.box.coords, sol.values)):
            w.writerow([i, *c.tolist(), repr(float(u))])


def write_solution_meta(sol: SolutionGrid, path, seed: int | None = None) -> None:
    meta = {
        "seed": seed,
        "kappa": sol.kappa,
        "t": sol.t,
        "method": sol.method,
        "d": sol.box.d,
        "R": sol.box.R,
        "source": list(sol.source) if sol.source is not None else None,
        "residuals": sol.diagnostics,
    }
    Path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
