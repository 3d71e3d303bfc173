"""Counter-based random numbers.

Every random draw is a pure function of ``(key, counter)``:

    state  = key + (counter + 1) * 0x9E3779B97F4A7C15   (mod 2**64)
    output = splitmix64_finalizer(state)

which is SplitMix64 with random access.  Keys for independent streams are
derived as ``stream_key(seed, index) = mix(seed ^ mix(index + C))`` so a site
or a walk gets its own stream regardless of the order in which streams are
consumed.  Uniforms use the top 53 bits, shifted by half an ulp so that both
0 and 1 are excluded.
"""

from __future__ import annotations

import numpy as np

from ._jit import njit

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_STREAM_SALT = np.uint64(0xD1B54A32D192ED03)
_TWO53_INV = 1.0 / 9007199254740992.0

MASK64 = (1 << 64) - 1


def _as_u64(x) -> np.ndarray:
    return np.asarray(x).astype(np.uint64)


def mix64(z):
    """SplitMix64 finaliser on uint64 arrays (wrapping arithmetic)."""
    z = _as_u64(z)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def stream_key(seed, index):
    seed = _as_u64(int(seed) & MASK64) if np.isscalar(seed) else _as_u64(seed)
    with np.errstate(over="ignore"):
        salted = _as_u64(index) + _STREAM_SALT
    return mix64(seed ^ mix64(salted))


def raw(key, counter):
    key = _as_u64(key)
    counter = _as_u64(counter)
    with np.errstate(over="ignore"):
        state = key + (counter + np.uint64(1)) * GOLDEN
    return mix64(state)


def uniform(key, counter) -> np.ndarray:
    """Uniform doubles in the open interval (0, 1)."""
    r = raw(key, counter)
    return ((r >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO53_INV


def site_uniforms(seed: int, n: int, draw: int = 0) -> np.ndarray:
    """One uniform per site index ``0..n-1``; ``draw`` selects the counter."""
    keys = stream_key(seed, np.arange(n, dtype=np.uint64))
    return uniform(keys, np.full(n, draw, dtype=np.uint64))


# scalar versions for jitted kernels -------------------------------------


@njit
def mix64_scalar(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@njit
def stream_key_scalar(seed, index):
    return mix64_scalar(seed ^ mix64_scalar(index + _STREAM_SALT))


@njit
def uniform_scalar(key, counter):
    r = mix64_scalar(key + (counter + np.uint64(1)) * GOLDEN)
    return (np.float64(r >> np.uint64(11)) + 0.5) * _TWO53_INV
