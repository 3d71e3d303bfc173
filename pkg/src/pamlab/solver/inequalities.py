"""Box-truncation inequalities for the solution at the origin, with both
sides computed by exact solves."""

from __future__ import annotations

import math

import numpy as np

from ..errors import ParameterError
from ..potential.field import PotentialField
from ..potential.lattice import LatticeBox
from .pam import solve_dirichlet


def _origin(V: PotentialField, kappa: float, t: float, radius: int) -> float:
    sub = V.restrict(np.zeros(V.box.d, dtype=np.int64), int(radius))
    return solve_dirichlet(sub, kappa, t).origin


def check_box_monotonicity(V: PotentialField, kappa: float, t: float, radii) -> dict:
    """``u_r(t,0) <= u_R(t,0)`` along increasing radii (largest = proxy for u)."""
    radii = sorted(int(r) for r in radii)
    vals = [_origin(V, kappa, t, r) for r in radii]
    ok = all(a <= b * (1 + 1e-12) + 1e-300 for a, b in zip(vals, vals[1:]))
    return {"radii": radii, "values": vals, "holds": bool(ok)}


def exit_probability(kappa: float, d: int, r: int, t: float) -> float:
    """``P_0(tau_r <= t)`` exactly, as ``1 - u_r(t,0)`` for the zero potential."""
    return 1.0 - solve_dirichlet(PotentialField.constant(LatticeBox(d, int(r)), 0.0), kappa, t).origin


def check_finite_box(V: PotentialField, kappa: float, t: float, r: int | None = None) -> dict:
    """``u(t,0) <= e^{-t} + u_r(t,0)``.

    The bound is only claimed for large t: it follows once
    ``P_0(tau_r <= t) <= e^{-t}``.  ``in_regime`` reports that condition,
    evaluated exactly; outside it the inequality can fail.

    ``u(t,0)`` is replaced by the exact solve on the whole field box of radius
    ``R``; since ``V <= 0`` the replacement error is at most
    ``P_0(tau_R <= t)``, computed exactly and reported as ``proxy_error``.  ``r`` defaults to ``ceil(t log t)``.
    """
    if t <= 1:
        raise ParameterError("t", "need t > 1")
    if r is None:
        r = math.ceil(t * math.log(t))
    R = V.box.R
    if r >= R:
        raise ParameterError("r", f"truncation radius {r} must be below the field radius {R}")
    u_big = _origin(V, kappa, t, R)
    u_r = _origin(V, kappa, t, r)
    d = V.box.d
    err = max(0.0, exit_probability(kappa, d, R, t))
    rhs = math.exp(-t) + u_r
    p_exit = exit_probability(kappa, d, r, t)
    return {
        "lhs": u_big,
        "rhs": rhs,
        "r": int(r),
        "R": int(R),
        "proxy_error": err,
        "exit_probability": p_exit,
        "in_regime": bool(p_exit <= math.exp(-t)),
        "holds": bool(u_big <= rhs),
        "holds_with_proxy_error": bool(u_big + err <= rhs),
    }
