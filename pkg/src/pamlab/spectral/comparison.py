"""Localisation inequalities: the windowed eigenvalue comparison and the
compact-box bound for the solution at the origin."""

from __future__ import annotations

import heapq
import math

import numpy as np

from ..errors import ParameterError
from ..potential.field import PotentialField
from .dirichlet import principal_from_grid
from .partition import build_partition_potential

TOL = 1e-9


class _Windows:
    """Principal eigenvalues of axis-aligned windows of an ambient grid,
    given by inclusive coordinate bounds; memoised."""

    def __init__(self, field: PotentialField, kappa: float):
        self.grid = field.grid()
        self.R = field.box.R
        self.kappa = kappa
        self.cache: dict = {}
        self.evaluations = 0

    def __call__(self, lo, hi) -> float:
        key = (tuple(lo), tuple(hi))
        if key not in self.cache:
            sl = tuple(slice(a + self.R, b + self.R + 1) for a, b in zip(lo, hi))
            self.cache[key] = principal_from_grid(self.grid[sl], self.kappa)
            self.evaluations += 1
        return self.cache[key]


def max_window_eigenvalue(field: PotentialField, kappa: float, reach: int, radius: int, seeds=None):
    """``max_{|z|_inf <= reach} lambda_1(z + Q_radius)`` by branch and bound.

    A block of centres is bounded above by the eigenvalue of the union of
    its windows (domain monotonicity).  Returns ``(value, argmax, evaluations)``.
    """
    d = field.box.d
    win = _Windows(field, kappa)
    best, arg = -np.inf, None
    for z in seeds if seeds is not None else []:
        z = np.asarray(z, dtype=np.int64)
        v = win(z - radius, z + radius)
        if v > best:
            best, arg = v, z
    lo0 = np.full(d, -reach, dtype=np.int64)
    hi0 = np.full(d, reach, dtype=np.int64)
    heap = [(-win(lo0 - radius, hi0 + radius), 0, lo0, hi0)]
    counter = 1
    while heap:
        negb, _, lo, hi = heapq.heappop(heap)
        bound = -negb
        if bound <= best + 1e-13 * max(1.0, abs(best)):
            break
        if np.all(lo == hi):
            if bound > best:
                best, arg = bound, lo
            continue
        ax = int(np.argmax(hi - lo))
        mid = (lo[ax] + hi[ax]) // 2
        for a, b in ((lo[ax], mid), (mid + 1, hi[ax])):
            l2, h2 = lo.copy(), hi.copy()
            l2[ax], h2[ax] = a, b
            v = win(l2 - radius, h2 + radius)
            if v > best:
                heapq.heappush(heap, (-v, counter, l2, h2))
                counter += 1
    return best, arg, win.evaluations


def check_eigenvalue_comparison(V: PotentialField, kappa: float, r: int, R: int) -> dict:
    """``lambda_r(V - Phi_R)`` against ``max_{z in Q_{r+2R}} lambda_{z;2R}(V)``.

    The ambient field must cover ``Q_{r+4R}``; a smaller field is extended
    by hard traps, which is itself an admissible potential."""
    if not (r > R >= 2):
        raise ParameterError("r", "need r > R >= 2")
    need = r + 4 * R
    padded = V.box.R < need
    W = V.embed(need, fill=-np.inf) if padded else V
    pp = build_partition_potential(R, kappa, V.box.d)
    inner = W.restrict(np.zeros(V.box.d, dtype=np.int64), r)
    shifted = inner.as_array() - pp(inner.box.coords)
    lhs = principal_from_grid(shifted.reshape(inner.box.shape), kappa)
    reach = r + 2 * R
    ks = np.arange(-(reach // (2 * R)), reach // (2 * R) + 1) * 2 * R
    seeds = np.stack(np.meshgrid(*[ks] * V.box.d, indexing="ij"), -1).reshape(-1, V.box.d)
    rhs, arg, evals = max_window_eigenvalue(W, kappa, reach, 2 * R, seeds)
    if lhs == -np.inf:
        holds, gap = True, -np.inf if rhs > -np.inf else float("nan")
    else:
        gap = lhs - rhs
        holds = bool(lhs <= rhs + TOL)
    return {
        "lhs": float(lhs),
        "rhs": float(rhs),
        "gap": float(gap),
        "holds": bool(holds),
        "argmax": None if arg is None else [int(c) for c in arg],
        "window_solves": int(evals),
        "padded": bool(padded),
    }


def check_compact_bound(V: PotentialField, kappa: float, t: float, R: int, cap: int | None = None) -> dict:
    """Solution at the origin against ``e^{-t} + e^{C t/R^2} (3 r(t))^d``
    with ``r(t) = t log t`` and the constructive ``C``."""
    from ..solver.pam import solve_dirichlet

    if t <= 1:
        raise ParameterError("t", "need t > 1 so that r(t) > 0")
    d = V.box.d
    r_t = t * math.log(t)
    want = max(1, math.ceil(r_t))
    radius = min(want, V.box.R, cap if cap is not None else want)
    capped = radius < want
    sub = V.restrict(np.zeros(d, dtype=np.int64), radius)
    lhs = solve_dirichlet(sub, kappa, t).origin
    C = build_partition_potential(max(int(R), 2), kappa, d).constant
    rhs = math.exp(-t) + math.exp(C * t / R**2) * (3.0 * r_t) ** d
    return {"lhs": lhs, "rhs": rhs, "holds": bool(lhs <= rhs), "C": C, "radius": radius, "capped": bool(capped)}
