"""Scale functions of the gamma-class.

``alpha_t`` is fixed by the normalization ``H~_t(1) = target`` where
``H~_t(y) = (alpha^{d+2}/t) H(t y / alpha^d)``.  With ``l = t/alpha^d`` this
reads ``alpha^2 H(l)/l``; since ``H(l)/l`` is a chord slope of a convex
function through the origin, its modulus grows as ``l`` shrinks, so the left
side is strictly monotone in ``alpha`` and the root is unique.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize

from ..errors import CalibrationError, ParameterError, ProfileError, RangeError
from .distributions import BernoulliTrap, PotentialDistribution, cumulant_H
from .field import PotentialField


def nu_of(gamma: float, d: int) -> float:
    return (1.0 - gamma) / (d + 2.0 - d * gamma)


def beta_of(gamma: float, d: int) -> float:
    nu = nu_of(gamma, d)
    return 2.0 * nu / (1.0 - 2.0 * nu)


def _alpha_value(alpha, t):
    return float(alpha(t)) if callable(alpha) else float(alpha)


def scaled_cumulant(dist: PotentialDistribution, t: float, alpha, y: float, d: int | None = None) -> float:
    """``H~_t(y)``.  ``alpha`` is a number or a scale function; ``d`` is taken
    from the scale function when it carries one."""
    if t <= 0:
        raise ParameterError("t", "must be positive")
    if y <= 0:
        raise ParameterError("y", "must be positive")
    if d is None:
        d = getattr(alpha, "d", None)
        if d is None:
            raise ParameterError("d", "dimension required for a plain alpha")
    a = _alpha_value(alpha, t)
    return a ** (d + 2) / t * cumulant_H(dist, t * y / a**d)


class ScaleFunction:
    """Calibrated ``alpha_t``; callable on scalars, memoised per ``t``."""

    def __init__(self, dist: PotentialDistribution, d: int, target: float, rtol: float = 1e-13):
        self.dist = dist
        self.d = int(d)
        self.target = float(target)
        self.rtol = rtol
        self._cache: dict[float, float] = {}

    def _G(self, log_a: float, t: float) -> float:
        a = math.exp(log_a)
        return a ** (self.d + 2) / t * cumulant_H(self.dist, t / a**self.d) - self.target

    def __call__(self, t: float) -> float:
        t = float(t)
        if t in self._cache:
            return self._cache[t]
        if not (t > 0 and math.isfinite(t)):
            raise ParameterError("t", f"must be positive and finite, got {t}")
        if isinstance(self.dist, BernoulliTrap):
            # H is constant on (0, inf): alpha^{d+2} log p / t = target
            val = (t * self.target / math.log(self.dist.p)) ** (1.0 / (self.d + 2))
        else:
            val = self._bisect(t)
        self._cache[t] = val
        return val

    def _bisect(self, t: float) -> float:
        # G(alpha) decreases from -target > 0 (alpha -> 0) to -inf
        lo = hi = math.log(t) / (self.d + 2)
        step = 1.0
        while self._G(lo, t) < 0:
            lo -= step
            step *= 2
            if lo < -700:
                raise CalibrationError("no sign change below", t=t)
        step = 1.0
        while self._G(hi, t) >= 0:
            hi += step
            step *= 2
            if hi > 700:
                raise CalibrationError("no sign change above", t=t)
        while hi - lo > self.rtol:
            mid = 0.5 * (lo + hi)
            if self._G(mid, t) >= 0:
                lo = mid
            else:
                hi = mid
        return math.exp(0.5 * (lo + hi))

    def inverse(self, a: float) -> float:
        """``t`` with ``alpha_t = a``; alpha is increasing in t."""
        if isinstance(self.dist, BernoulliTrap):
            return a ** (self.d + 2) * math.log(self.dist.p) / self.target
        lo, hi = 1e-300, 1.0
        while self(hi) < a:
            hi *= 10.0
        lo = hi / 10.0
        while self(lo) > a and lo > 1e-200:
            lo /= 10.0
        return math.exp(
            optimize.brentq(lambda s: math.log(self(math.exp(s))) - math.log(a), math.log(lo), math.log(hi), xtol=1e-13)
        )


def calibrate_alpha(dist: PotentialDistribution, d: int, gamma: float, target: float) -> ScaleFunction:
    if not target < 0:
        raise ParameterError("target", "must be negative")
    if abs(dist.gamma_class - gamma) > 1e-12:
        raise ParameterError("gamma", f"distribution is in class {dist.gamma_class}, not {gamma}")
    return ScaleFunction(dist, d, target)


class PowerScale:
    """``alpha_t = c t^e``; handy explicit scale functions."""

    def __init__(self, exponent: float, c: float = 1.0, d: int | None = None):
        self.exponent, self.c, self.d = exponent, c, d

    def __call__(self, t):
        return self.c * float(t) ** self.exponent

    def inverse(self, a):
        return (a / self.c) ** (1.0 / self.exponent)


@dataclass
class ScalingProfile:
    gamma: float
    H1: float
    d: int
    alpha: Callable[[float], float]
    _b_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not (0.0 <= self.gamma < 1.0):
            raise ParameterError("gamma", "must lie in [0, 1)")
        if not self.H1 < 0:
            raise ParameterError("H1", "must be negative")

    @classmethod
    def for_distribution(cls, dist: PotentialDistribution, d: int, H1: float | None = None):
        if H1 is None:
            H1 = math.log(dist.p) if isinstance(dist, BernoulliTrap) else -1.0
        g = float(dist.gamma_class)
        return cls(g, H1, d, calibrate_alpha(dist, d, g, H1))

    @property
    def nu(self) -> float:
        return nu_of(self.gamma, self.d)

    @property
    def beta(self) -> float:
        return beta_of(self.gamma, self.d)

    def b(self, t: float) -> float:
        return scale_b(self, t)

    def gamma_t(self, t: float) -> float:
        return t / self.alpha(self.b(t)) ** 3


def scale_b(profile: ScalingProfile, t: float) -> float:
    """Solve ``b / alpha(b)^2 = log t``."""
    if not t > math.e:
        raise ParameterError("t", "must exceed e")
    if t in profile._b_cache:
        return profile._b_cache[t]
    L = math.log(t)

    def g(s):
        b = math.exp(s)
        return math.log(b) - 2.0 * math.log(profile.alpha(b)) - math.log(L)

    lo, hi = 0.0, max(1.0, math.log(L) * 2.0)
    while g(hi) < 0:
        lo, hi = hi, 2.0 * hi + 1.0
        if hi > 700:
            raise ProfileError("b_t bracket exceeded double range")
    while g(lo) > 0:
        lo -= 1.0
        if lo < -700:
            raise ProfileError("b_t bracket exceeded double range")
    s = optimize.brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    # a few points to detect non-monotonicity of b / alpha(b)^2
    probe = np.linspace(lo, hi, 9)
    vals = [g(x) for x in probe]
    if np.any(np.diff(vals) <= 0):
        raise ProfileError("t / alpha_t^2 is not increasing on the bracket")
    b = math.exp(s)
    profile._b_cache[t] = b
    return b


def scale_field(field: PotentialField, alpha: float, x) -> float:
    """``alpha^2 xi(floor(x alpha))``."""
    z = np.floor(np.asarray(x, dtype=float) * alpha).astype(np.int64)
    if not field.box.contains(z):
        raise RangeError(f"floor(x*alpha) = {z.tolist()} outside the field box")
    v = field.value_at(z)
    return -np.inf if v == -np.inf else alpha**2 * v
