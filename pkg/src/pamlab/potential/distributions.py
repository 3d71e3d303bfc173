"""Single-site laws of the potential and their cumulant generating functions.

All laws live on ``[-inf, 0]`` with essential supremum 0.  The positive
variable ``X = -xi(0)`` is what the formulas below talk about.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from ..errors import NumericError, ParameterError


class PotentialDistribution:
    """Base class.  Subclasses implement ``tag``, ``from_uniform`` and
    ``cumulant``.  ``gamma_class`` is the exponent of the limiting
    rescaled cumulant."""

    gamma_class: float = 0.0
    has_atom_at_zero: bool = False

    def tag(self) -> str:
        raise NotImplementedError

    def from_uniform(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Map uniforms to ``(finite_values, trap_mask)``."""
        raise NotImplementedError

    def cumulant(self, ell: float) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class BernoulliTrap(PotentialDistribution):
    """``xi = 0`` with probability ``p``, ``-inf`` otherwise."""

    p: float

    def __post_init__(self):
        if not (0.0 < self.p <= 1.0):
            raise ParameterError("p", f"must lie in (0, 1], got {self.p}")

    gamma_class = 0.0
    has_atom_at_zero = True

    def tag(self) -> str:
        return f"bernoulli:p={self.p!r}"

    def from_uniform(self, u):
        trap = u >= self.p
        return np.zeros_like(u), trap

    def cumulant(self, ell):
        return 0.0 if ell == 0 else math.log(self.p)


@dataclass(frozen=True)
class StretchedTail(PotentialDistribution):
    """``Prob(xi > -x) = exp(-A x^{-gamma/(1-gamma)})`` for all ``x > 0``.

    ``X = -xi`` is Fréchet distributed with shape ``gamma/(1-gamma)`` and
    scale ``A^{(1-gamma)/gamma}``; no hard traps.
    """

    A: float
    gamma: float

    def __post_init__(self):
        if not self.A > 0:
            raise ParameterError("A", f"must be positive, got {self.A}")
        if not (0.0 < self.gamma < 1.0):
            raise ParameterError("gamma", f"must lie in (0, 1), got {self.gamma}")

    @property
    def gamma_class(self):  # type: ignore[override]
        return self.gamma

    @property
    def shape(self) -> float:
        return self.gamma / (1.0 - self.gamma)

    def tag(self) -> str:
        return f"stretched:A={self.A!r},gamma={self.gamma!r}"

    def from_uniform(self, u):
        x = (self.A / -np.log(u)) ** (1.0 / self.shape)
        return -x, np.zeros(u.shape, dtype=bool)

    def cumulant(self, ell):
        if ell == 0:
            return 0.0
        a, A = self.shape, self.A
        # E e^{-l X} = int l e^{-l x} F(x) dx with F(x) = exp(-A x^-a); in s = log x
        # the log-integrand g(s) = log l - l e^s - A e^{-a s} + s is concave.
        lg = math.log(ell)

        def g(s):
            return lg - math.exp(s + lg) - A * math.exp(-a * s) + s

        def dg(s):
            return -math.exp(s + lg) + a * A * math.exp(-a * s) + 1.0

        lo = hi = (math.log(a * A) - lg) / (a + 1.0)
        step = 1.0
        while dg(lo) <= 0:
            lo -= step
            step *= 2
        step = 1.0
        while dg(hi) >= 0:
            hi += step
            step *= 2
        s0 = optimize.brentq(dg, lo, hi, xtol=1e-14)
        g0 = g(s0)
        # cut where the decaying term has grown by 800 over its value at the peak
        right = math.log(math.exp(s0 + lg) + 800.0) - lg
        left = -math.log((A * math.exp(-a * s0) + 800.0) / A) / a
        val, err = 0.0, 0.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            for u, v in ((left, s0), (s0, right)):
                q, e = integrate.quad(lambda s: math.exp(g(s) - g0), u, v, epsabs=0.0, epsrel=1e-11, limit=500)
                val, err = val + q, err + e
        if not (val > 0) or err > 1e-8 * val:
            raise NumericError(
                "cumulant quadrature did not converge", achieved=err / val if val > 0 else np.inf
            )
        return min(0.0, g0 + math.log(val))


@dataclass(frozen=True)
class DensityTail(PotentialDistribution):
    """Density ``(sigma+1) x^sigma / L^{sigma+1}`` for ``X`` on ``[0, L]``.

    ``L = lower`` truncates the support (default 1); no atoms, no traps."""

    sigma: float
    lower: float = 1.0

    def __post_init__(self):
        if not self.sigma > -1:
            raise ParameterError("sigma", f"must exceed -1, got {self.sigma}")
        if not self.lower > 0:
            raise ParameterError("lower", f"must be positive, got {self.lower}")

    gamma_class = 0.0

    def tag(self) -> str:
        return f"density:sigma={self.sigma!r},lower={self.lower!r}"

    def from_uniform(self, u):
        x = self.lower * u ** (1.0 / (self.sigma + 1.0))
        return -x, np.zeros(u.shape, dtype=bool)

    def cumulant(self, ell):
        if ell == 0:
            return 0.0
        s1 = self.sigma + 1.0
        z = ell * self.lower
        if z < 1.0:
            # (s+1) int_0^1 u^s e^{-zu} du = sum_k (-z)^k/k! (s+1)/(s+1+k)
            total, term, k = 0.0, 1.0, 0
            while True:
                add = term * s1 / (s1 + k)
                total += add
                if abs(add) < 1e-17 * abs(total) or k > 200:
                    break
                k += 1
                term *= -z / k
            return math.log(total)
        return special.gammaln(s1 + 1.0) - s1 * math.log(z) + math.log(special.gammainc(s1, z))


def parse_tag(tag: str) -> PotentialDistribution:
    """Inverse of ``PotentialDistribution.tag``."""
    kind, _, params = tag.partition(":")
    kv = {}
    for item in filter(None, params.split(",")):
        k, _, v = item.partition("=")
        kv[k.strip()] = float(v)
    if kind == "bernoulli":
        return BernoulliTrap(**kv)
    if kind == "stretched":
        return StretchedTail(**kv)
    if kind == "density":
        return DensityTail(**kv)
    raise ParameterError("dist", f"unknown distribution tag {tag!r}")


def cumulant_H(dist: PotentialDistribution, ell: float) -> float:
    """``H(l) = log <exp(l xi(0))>`` for ``l >= 0``."""
    if ell < 0 or not np.isfinite(ell):
        raise ParameterError("ell", f"must be finite and nonnegative, got {ell}")
    return float(dist.cumulant(float(ell)))
