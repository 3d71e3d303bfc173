"""Solvers for chi_R, chi, chi*, chi#, chi~ and the dual cross-check."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np
from scipy import linalg, optimize, special

from ..errors import DomainError, ParameterError
from .grid import (
    GridFunction,
    continuum_eigenvalue,
    dirichlet_energy,
    functional_I,
    interior_laplacian,
    legendre_density,
    principal_pair,
    richardson,
)

GOLDEN_TOL = 1e-9


@dataclass
class VariationalResult:
    problem: str
    gamma: float
    d: int
    kappa: float
    value: float
    extrapolated: float
    minimizer: GridFunction | None
    R_star: float
    grids: list = dc_field(default_factory=list)
    grid_values: list = dc_field(default_factory=list)
    iterations: int = 0
    converged: bool = True
    history: list = dc_field(default_factory=list)
    diagnostics: dict = dc_field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "problem": self.problem,
            "gamma": self.gamma,
            "d": self.d,
            "kappa": self.kappa,
            "value": self.value,
            "extrapolated": self.extrapolated,
            "R_star": self.R_star,
            "grids": list(self.grids),
            "grid_values": list(self.grid_values),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
        }


def write_result_json(res: VariationalResult, path) -> None:
    Path(path).write_text(json.dumps(res.to_json(), indent=2, sort_keys=True) + "\n")


def _check_gamma(gamma):
    if not (0.0 <= gamma < 1.0):
        raise DomainError(f"gamma must lie in [0, 1), got {gamma}")


def ball_volume(d: int, rho: float = 1.0) -> float:
    return math.pi ** (d / 2) / special.gamma(d / 2 + 1) * rho**d


# radial problems --------------------------------------------------------------


def radial_operator(d: int, n: int, rho: float = 1.0):
    """Symmetric form of ``-Lap`` for radial functions on the ball of radius
    ``rho``: cell-centred nodes ``r_i = (i+1/2) h``, ghost-node Dirichlet at
    ``r = rho``.  Returns ``(S, W, r)`` with the generalised problem
    ``S u = mu W u``."""
    h = rho / n
    r = (np.arange(n) + 0.5) * h
    rp = (np.arange(n) + 1.0) * h  # r_{i+1/2}
    wp = rp ** (d - 1)
    W = r ** (d - 1) * h
    main = np.zeros(n)
    main[:-1] += wp[:-1] / h
    main[1:] += wp[:-1] / h
    main[-1] += 2 * wp[-1] / h  # ghost value -u_{n-1}
    off = -wp[:-1] / h
    return main, off, W, r


def radial_eigen(d: int, n: int, rho: float = 1.0):
    """Smallest Dirichlet eigenvalue of ``-Lap`` on ``B_rho`` and its radial
    profile (normalised so that ``int u^2 = 1`` over the ball)."""
    main, off, W, r = radial_operator(d, n, rho)
    s = 1.0 / np.sqrt(W)
    # similarity transform to a standard symmetric tridiagonal problem
    w, V = linalg.eigh_tridiagonal(main * s * s, off * s[:-1] * s[1:], select="i", select_range=(0, 0))
    u = np.abs(V[:, 0]) * s
    area = d * ball_volume(d) if d > 1 else 2.0  # surface measure of the unit sphere
    u /= math.sqrt(area * np.sum(W * u * u))
    return float(w[0]), u, r


def golden(fn, lo, hi, tol=GOLDEN_TOL, max_iter=200):
    """Golden-section minimisation on ``[lo, hi]``; returns ``(x, f(x), iters)``."""
    res = optimize.minimize_scalar(fn, bounds=(lo, hi), method="bounded", options={"xatol": tol * max(1.0, abs(hi)), "maxiter": max_iter})
    return float(res.x), float(res.fun), int(res.nfev)


def _radial_to_grid(u, r, rho, R, m, d):
    axis = np.linspace(-R, R, m + 1)
    mesh = np.meshgrid(*[axis] * d, indexing="ij")
    rr = np.sqrt(sum(x * x for x in mesh))
    prof = np.interp(rr, np.concatenate([[0.0], r, [rho]]), np.concatenate([[u[0]], u, [0.0]]), right=0.0)
    return GridFunction(R, m, d, prof**2).normalize()


def _chi_gamma0(d, kappa, a, R, m, levels):
    """Faber–Krahn reduction: support is a ball of radius rho <= R."""
    vals, mus, rhos = [], [], []
    for lv in range(levels):
        n = max(8, m // 2) * 2**lv
        mu1, u, r = radial_eigen(d, n)
        hi = R if R is not None else 10.0 * (2 * kappa * mu1 / (d * a * ball_volume(d))) ** (1 / (d + 2))
        x, fx, _ = golden(lambda rho: kappa * mu1 / rho**2 + a * ball_volume(d, rho), 1e-6 * hi, hi)
        vals.append(fx)
        mus.append(mu1)
        rhos.append(x)
    return vals, mus, rhos, u, r


def _chi_cross(d, kappa, a, R, m, eps, levels):
    """``chi#``: inner ``inf I(f)`` with ``f <= eps`` outside ``B_rho``, by
    projected descent on the radial grid; outer minimisation over rho."""
    vals = []
    for lv in range(levels):
        n = max(16, m) * 2**lv
        main, off, W, r = radial_operator(d, n, R)
        area = d * ball_volume(d) if d > 1 else 2.0
        W = W * area
        main, off = main * area, off * area

        def inner(rho):
            cap = np.where(r > rho, math.sqrt(eps), np.inf)
            return _box_rayleigh(main, off, W, cap) * kappa

        x, fx, _ = golden(lambda rho: inner(rho) + a * ball_volume(d, rho), R / n, R, tol=1e-6)
        vals.append(fx)
    return vals, x


def _box_rayleigh(main, off, W, cap, max_iter=50000, tol=1e-13, window=50):
    """``min u'Su`` over ``u'Wu = 1`` with ``0 <= u <= cap``, by projected
    Barzilai–Borwein steps with a nonmonotone Armijo safeguard."""
    s = 1.0 / np.sqrt(W)
    lam, V = linalg.eigh_tridiagonal(main * s * s, off * s[:-1] * s[1:], select="i", select_range=(0, 0))
    u = np.abs(V[:, 0]) * s
    if np.all(u <= cap):
        return float(lam[0])

    def Su(v):
        out = main * v
        out[:-1] += off * v[1:]
        out[1:] += off * v[:-1]
        return out

    def project(v):
        v = np.clip(v, 0.0, None)
        fixed = np.zeros(v.size, dtype=bool)
        for _ in range(100):
            free_mass = np.sum(W[~fixed] * v[~fixed] ** 2)
            budget = 1.0 - np.sum(W[fixed] * cap[fixed] ** 2)
            if free_mass <= 0 or budget <= 0:
                break
            v = np.where(fixed, cap, v * math.sqrt(budget / free_mass))
            over = (v > cap) & ~fixed
            if not over.any():
                break
            fixed |= over
        return np.minimum(v, cap)

    def grad(v):
        g = 2.0 * Su(v) / W  # gradient in the W inner product
        return g - np.sum(W * g * v) * v

    u = project(u)
    val = float(u @ Su(u))
    G = grad(u)
    step = 0.25 / np.max(np.abs(main) / W)
    recent, trace = [val], [val]
    for it in range(1, max_iter + 1):
        while True:
            y = project(u - step * G)
            nv = float(y @ Su(y))
            dy = y - u
            if nv <= max(recent) - 1e-4 * float(np.sum(W * dy * dy)) / step or step < 1e-300:
                break
            step *= 0.5
        Gy = grad(y)
        denom = float(np.sum(W * dy * (Gy - G)))
        step = float(np.sum(W * dy * dy)) / denom if denom > 0 else 2 * step
        u, val, G = y, nv, Gy
        recent.append(val)
        if len(recent) > 10:
            recent.pop(0)
        trace.append(min(val, trace[-1]))
        if it >= window and trace[-window - 1] - trace[-1] <= tol * abs(val):
            break
    return trace[-1]


# Cartesian projected gradient -----------------------------------------------


class SphereProblem:
    """``J(x) = kappa h^-2 x'Kx + a h^d sum phi_delta(x h^{-d/2})`` on the
    unit sphere of the interior node values ``x = h^{d/2} g``, ``g = sqrt f``.

    ``phi_delta(g) = (min(g^2, M) + delta^2)^gamma - delta^{2 gamma}``.
    """

    def __init__(self, R, m, d, kappa, a, gamma, M=None):
        self.R, self.m, self.d = float(R), int(m), int(d)
        self.kappa, self.a, self.gamma = kappa, a, gamma
        self.M = np.inf if M is None else float(M)
        self.h = 2 * self.R / self.m
        self.n = self.m - 1
        self.K = interior_laplacian(self.n, self.d)
        self.delta = 0.0

    @property
    def shape(self):
        return (self.n,) * self.d

    def _phi(self, g):
        d2 = self.delta**2
        f = np.minimum(g * g, self.M)
        return (f + d2) ** self.gamma - d2**self.gamma

    def _dphi(self, g):
        d2 = self.delta**2
        f = g * g
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if d2 == 0:
                out = np.where(g > 0, 2 * self.gamma * g ** (2 * self.gamma - 1), 0.0)
            else:
                out = 2 * self.gamma * g * (f + d2) ** (self.gamma - 1)
        return np.where(f < self.M, out, 0.0)

    def parts(self, x):
        h, d = self.h, self.d
        Kx = self.K @ x
        I = self.kappa / h**2 * float(x @ Kx)
        P = self.a * h**d * float(np.sum(self._phi(x * h ** (-d / 2))))
        return I, P, Kx

    def value(self, x):
        I, P, _ = self.parts(x)
        return I + P

    def value_grad(self, x):
        h, d = self.h, self.d
        I, P, Kx = self.parts(x)
        grad = 2 * self.kappa / h**2 * Kx + self.a * h ** (d / 2) * self._dphi(x * h ** (-d / 2))
        return I + P, grad

    def exact_parts(self, x):
        saved, self.delta = self.delta, 0.0
        try:
            I, P, _ = self.parts(x)
        finally:
            self.delta = saved
        return I, P

    def to_grid(self, x) -> GridFunction:
        g = np.zeros((self.m + 1,) * self.d)
        g[tuple(slice(1, -1) for _ in range(self.d))] = (x * self.h ** (-self.d / 2)).reshape(self.shape)
        return GridFunction(self.R, self.m, self.d, g * g, True)


def pgd_sphere(prob: SphereProblem, x0, max_iter=20000, tol=1e-11, window=50):
    """Projected Barzilai–Borwein descent on ``{x >= 0, |x| = 1}`` with a
    nonmonotone Armijo safeguard.  Stops once the objective decreased by less
    than ``tol * |J|`` over the last ``window`` iterations.  Returns
    ``(x, J, iterations, converged)``."""
    x = np.maximum(np.asarray(x0, dtype=float), 0.0)
    x /= np.linalg.norm(x)
    J, G = prob.value_grad(x)
    Gr = G - (G @ x) * x
    step = prob.h**2 / (8 * prob.d * prob.kappa)
    recent = [J]
    trace = [J]
    for it in range(1, max_iter + 1):
        while True:
            y = np.maximum(x - step * Gr, 0.0)
            ny = np.linalg.norm(y)
            if ny == 0:
                step *= 0.5
                continue
            y /= ny
            Jy, Gy = prob.value_grad(y)
            dx = y - x
            if Jy <= max(recent) - 1e-4 * (dx @ dx) / step or step < 1e-300:
                break
            step *= 0.5
        Gry = Gy - (Gy @ y) * y
        denom = float(dx @ (Gry - Gr))
        step_bb = float(dx @ dx) / denom if denom > 0 else 2 * step
        x, J, Gr = y, Jy, Gry
        recent.append(J)
        if len(recent) > 10:
            recent.pop(0)
        trace.append(min(J, trace[-1]))
        step = min(max(step_bb, 1e-12 * prob.h**2), 1e6 * prob.h**2)
        if it >= window and trace[-window - 1] - trace[-1] <= tol * max(1.0, abs(J)):
            return x, J, it, True
    return x, J, max_iter, False


SMOOTHING = (1e-1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-8, 0.0)


def _continuation(prob: SphereProblem, x0, levels=SMOOTHING, max_iter=20000):
    """Descend through decreasing smoothing levels; the last level is the
    unsmoothed objective unless ``levels`` says otherwise."""
    scale = 1.0 / math.sqrt((2 * prob.R) ** prob.d)
    total, conv = 0, True
    x = x0
    for delta in levels:
        prob.delta = delta * scale
        x, _, it, conv = pgd_sphere(prob, x, max_iter=max_iter)
        total += it
    prob.delta = 0.0
    return x, prob.value(x), total, conv


def _initial_guesses(prob: SphereProblem, n_random: int, seed: int):
    axis = np.linspace(-prob.R, prob.R, prob.m + 1)[1:-1]
    mesh = np.meshgrid(*[axis] * prob.d, indexing="ij")
    r2 = sum(x * x for x in mesh)
    bump = np.exp(-r2 / (2 * (prob.R / 4) ** 2)).ravel()
    out = [bump]
    gen = np.random.default_rng(seed)
    for _ in range(n_random):
        c = gen.uniform(-prob.R / 3, prob.R / 3, size=prob.d)
        w = gen.uniform(prob.R / 8, prob.R / 2)
        rr = sum((x - ci) ** 2 for x, ci in zip(mesh, c))
        out.append((np.exp(-rr / (2 * w * w)) * gen.uniform(0.5, 1.5, size=rr.shape)).ravel())
    return out


def _prolong(x, prob_from: SphereProblem, prob_to: SphereProblem):
    g = np.zeros((prob_from.m + 1,) * prob_from.d)
    g[tuple(slice(1, -1) for _ in range(prob_from.d))] = x.reshape(prob_from.shape)
    old = np.linspace(-prob_from.R, prob_from.R, prob_from.m + 1)
    new = np.linspace(-prob_to.R, prob_to.R, prob_to.m + 1)
    for ax in range(g.ndim):
        g = np.apply_along_axis(lambda v: np.interp(new, old, v), ax, g)
    y = g[tuple(slice(1, -1) for _ in range(g.ndim))].ravel()
    return y / np.linalg.norm(y)


def _multistart(prob: SphereProblem, n_random: int, seed: int):
    best = None
    runs = []
    # screen every start through the smoothed stages, finish the best one
    for k, x0 in enumerate(_initial_guesses(prob, n_random, seed)):
        x, J, it, conv = _continuation(prob, x0, SMOOTHING[:4])
        I, _ = prob.exact_parts(x)
        runs.append((J, I, k, x, it, conv))
    runs.sort(key=lambda r: (round(r[0], 10), r[1], r[2]))
    J0, I0, k, x, it, _ = runs[0]
    x, J, it2, conv = _continuation(prob, x, SMOOTHING[3:])
    I, _ = prob.exact_parts(x)
    best = (J, I, k, x, it + it2, conv)
    return best, runs


def support_radius(f: GridFunction, rel: float = 1e-6) -> float:
    """Largest coordinate modulus of a node where ``f > rel * max f``."""
    mesh = f.mesh()
    on = f.values > rel * f.values.max()
    return float(max(np.abs(x[on]).max() for x in mesh)) if on.any() else 0.0


def solve_chi_R(R, gamma, H1, kappa, m=64, d=1, M_cap=None, eps_cross=None, n_random=8, seed=0, levels=3) -> VariationalResult:
    """``chi_R`` (or ``chi*_R(M)``, ``chi#_R(eps)``) with Richardson over
    ``m, 2m, 4m``."""
    _check_gamma(gamma)
    if m < 16:
        raise ParameterError("m", "need at least 16 cells")
    if not H1 < 0:
        raise ParameterError("H1", "must be negative")
    a = -H1
    grids = [m * 2**k for k in range(levels)]
    if gamma == 0 and eps_cross is None:
        vals, mus, rhos, u, r = _chi_gamma0(d, kappa, a, R, m, levels)
        box = R if R is not None else 1.25 * rhos[-1]
        f = _radial_to_grid(u, r * rhos[-1], rhos[-1], box, grids[-1], d)
        return VariationalResult("chi_R", 0.0, d, kappa, vals[-1], richardson(vals), f, float(box), grids, vals,
                                 diagnostics={"rho": rhos[-1], "mu1_unit_ball": mus})
    if gamma == 0:
        vals, rho = _chi_cross(d, kappa, a, R, m, eps_cross, levels)
        return VariationalResult("chi_cross", 0.0, d, kappa, vals[-1], richardson(vals), None, float(R), grids, vals,
                                 diagnostics={"rho": rho, "eps": eps_cross})
    if eps_cross is not None:
        raise ParameterError("eps_cross", "only defined for gamma = 0")
    prob = SphereProblem(R, m, d, kappa, a, gamma, M_cap)
    (J, I, k, x, it, conv), runs = _multistart(prob, n_random, seed)
    vals, total, history = [J], it, [[r[0] for r in runs]]
    for mm in grids[1:]:
        nxt = SphereProblem(R, mm, d, kappa, a, gamma, M_cap)
        x = _prolong(x, prob, nxt)
        x, J, it2, conv = _continuation(nxt, x)
        vals.append(J)
        total += it2
        prob = nxt
    name = "chi_star" if M_cap is not None else "chi_R"
    return VariationalResult(name, gamma, d, kappa, vals[-1], richardson(vals), prob.to_grid(x), float(R), grids, vals,
                             total, conv, history, {"best_start": int(k), "M": M_cap})


def _scale_guess(gamma, a, kappa, d):
    q = d * (1.0 - gamma)
    return (2 * kappa / (a * q)) ** (1.0 / (2 + q))


def solve_chi(gamma, H1, kappa, d=1, m=64, n_random=8, seed=0, levels=3) -> VariationalResult:
    """``chi = inf_R chi_R``.  gamma = 0: ball radius minimised without a cap.
    gamma > 0: minimisers have compact support, so ``chi_R`` is constant once
    R exceeds it; R is fitted to 1.15 times the support of a coarse solve."""
    _check_gamma(gamma)
    a = -H1
    if gamma == 0:
        res = solve_chi_R(None, 0.0, H1, kappa, m, d, levels=levels)
        res.problem = "chi"
        res.R_star = float(res.diagnostics["rho"])
        return res
    R = 3.0 * _scale_guess(gamma, a, kappa, d)
    for _ in range(8):
        coarse = solve_chi_R(R, gamma, H1, kappa, m, d, n_random=n_random, seed=seed, levels=1)
        s = support_radius(coarse.minimizer)
        if s < 0.9 * R:
            break
        R *= 2.0
    R_fit = 1.15 * s
    res = solve_chi_R(R_fit, gamma, H1, kappa, m, d, n_random=n_random, seed=seed, levels=levels)
    res.problem = "chi"
    res.diagnostics["support"] = s
    res.diagnostics["R_coarse"] = R
    return res


# dual formulations -------------------------------------------------------------


def _psi_cap(kappa, h):
    return 1e4 * kappa / h**2


def _eig_of_psi(psi_int, kappa, h, shape, cap):
    active = np.isfinite(psi_int) & (psi_int > -cap)
    lam, v = principal_pair(np.where(active, psi_int, 0.0), kappa, h, shape, active)
    return lam, v, active


def chi_dual(gamma, H1, kappa, d, R, m) -> dict:
    """``inf {L_R(psi) - lambda_R(psi)}`` at fixed R by alternating between
    the principal eigenfunction of ``psi`` and the pointwise Legendre
    maximiser ``psi = -a gamma f^{gamma-1}``; each sweep does not increase the
    objective.  gamma = 0: ball supports on the Cartesian grid."""
    _check_gamma(gamma)
    a = -H1
    axis = np.linspace(-R, R, m + 1)
    mesh = np.meshgrid(*[axis] * d, indexing="ij")
    rr = np.sqrt(sum(x * x for x in mesh))
    base = GridFunction(R, m, d, np.zeros((m + 1,) * d))
    w = base.weights
    if gamma == 0:
        def D(rho):
            psi = np.where(rr < rho, -1e-12, 0.0)
            lam = continuum_eigenvalue(base.with_values(psi), kappa, support_restricted=True)
            return a * float(np.sum(w * (psi < 0))) - lam if np.isfinite(lam) else np.inf

        rho, val, nfev = golden(D, 2 * base.h, R, tol=1e-6)
        return {"value": val, "rho": rho, "iterations": nfev}
    h = base.h
    inner = tuple(slice(1, -1) for _ in range(d))
    shape = (m - 1,) * d
    cap = _psi_cap(kappa, h)
    psi = -(1.0 + (rr / (R / 3)) ** 2)[inner]
    prev, history = np.inf, []
    for it in range(5000):
        lam, v, active = _eig_of_psi(psi, kappa, h, shape, cap)
        full = np.zeros((m + 1,) * d)
        full[inner] = np.where(active, psi, -np.inf)
        L = float(np.sum(w * legendre_density(np.where(full == 0, 0.0, full), gamma, H1)))
        # boundary nodes are outside the support
        val = L - lam
        history.append(val)
        if abs(prev - val) <= 1e-12 * abs(val):
            break
        prev = val
        f = v * v / (h**d)  # unit Euclidean norm -> trapezoid-normalised
        with np.errstate(divide="ignore"):
            psi = np.where(f > 0, -a * gamma * f ** (gamma - 1.0), -np.inf)
    return {"value": val, "iterations": it + 1, "history": history}


def _chi_tilde_fixed_R(gamma, H1, kappa, d, R, m, psi0=None, max_iter=5000):
    a = -H1
    axis = np.linspace(-R, R, m + 1)
    mesh = np.meshgrid(*[axis] * d, indexing="ij")
    base = GridFunction(R, m, d, np.zeros((m + 1,) * d))
    w = base.weights
    h = base.h
    inner = tuple(slice(1, -1) for _ in range(d))
    shape = (m - 1,) * d
    cap = _psi_cap(kappa, h)
    q = gamma / (1.0 - gamma)
    c = (gamma * a) ** (1.0 / (1.0 - gamma)) * (1.0 / gamma - 1.0)
    w_in = w[inner]

    def project(p):
        fin = np.isfinite(p) & (p < 0)
        L = float(np.sum(w_in[fin] * c * np.abs(p[fin]) ** (-q)))
        s = (L / d) ** (1.0 / q)  # L(s psi) = s^{-q} L(psi)
        return p * s

    if psi0 is None:
        rr2 = sum(x * x for x in mesh)[inner]
        psi0 = -(1.0 + rr2 / (R / 3) ** 2)
    psi = project(psi0)
    prev = -np.inf
    for it in range(max_iter):
        lam, v, active = _eig_of_psi(psi, kappa, h, shape, cap)
        if lam - prev <= 1e-13 * abs(lam) and it > 0:
            break
        prev = lam
        with np.errstate(divide="ignore"):
            psi = np.where(v > 0, -(v ** (-2.0 * (1.0 - gamma))), -np.inf)
        psi = project(psi)
    full = np.zeros((m + 1,) * d)
    full[inner] = psi
    return lam, GridFunction(R, m, d, full), it + 1


def solve_chi_tilde(gamma, H1, kappa, d=1, m=64, levels=3) -> VariationalResult:
    """``chi~ = -sup_R sup{lambda_R(psi): L_R(psi) <= d}``.

    gamma = 0: the Legendre transform only sees the support, so the optimum
    is the ball of measure ``d/a`` with ``psi -> 0-`` on it.  gamma > 0:
    monotone ascent alternating the principal eigenfunction ``v`` and the
    constrained maximiser ``psi ~ -v^{-2(1-gamma)}``, rescaled in amplitude
    so that ``L_R(psi) = d`` exactly."""
    _check_gamma(gamma)
    a = -H1
    grids = [m * 2**k for k in range(levels)]
    if gamma == 0:
        rho = (d / (a * ball_volume(d))) ** (1.0 / d)
        vals = []
        for lv in range(levels):
            mu1, _, _ = radial_eigen(d, max(8, m // 2) * 2**lv)
            vals.append(kappa * mu1 / rho**2)
        return VariationalResult("chi_tilde", 0.0, d, kappa, vals[-1], richardson(vals), None, rho, grids, vals,
                                 diagnostics={"rho": rho})
    R = 2.0
    for _ in range(12):
        lam, psi, _ = _chi_tilde_fixed_R(gamma, H1, kappa, d, R, m)
        inside = np.isfinite(psi.values) & (psi.values > -_psi_cap(kappa, psi.h) / 10) & (psi.values < 0)
        mesh = psi.mesh()
        s = float(max(np.abs(x[inside]).max() for x in mesh)) if inside.any() else R
        if s > 0.9 * R:
            R *= 2.0
        elif s < 0.4 * R:
            R = max(1.15 * s, 2 * psi.h)
        else:
            break
    R_fit = 1.15 * s
    vals, total = [], 0
    for mm in grids:
        lam, psi, it = _chi_tilde_fixed_R(gamma, H1, kappa, d, R_fit, mm)
        vals.append(-lam)
        total += it
    return VariationalResult("chi_tilde", gamma, d, kappa, vals[-1], richardson(vals), psi, R_fit, grids, vals, total,
                             True, diagnostics={"support": s})


def chi_tilde_from_chi(chi, gamma, d):
    """``chi^{1/(1-2nu)} (1-2nu) (2nu/d)^beta``."""
    nu = (1.0 - gamma) / (d + 2.0 - d * gamma)
    beta = 2 * nu / (1 - 2 * nu)
    return chi ** (1 / (1 - 2 * nu)) * (1 - 2 * nu) * (2 * nu / d) ** beta


def intermittency_gap(p, q, nu, chi):
    if not (p > 0 and q > 0):
        raise ParameterError("p", "p and q must be positive")
    return chi * (q ** (-2 * nu) - p ** (-2 * nu))
