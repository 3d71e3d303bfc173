"""Potential realizations on a box.

Hard traps are carried by a boolean mask; the float array holds 0 at trap
sites and is never read there.  ``as_array`` produces the ``-inf`` view for
code that wants a single array.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .. import rng
from ..errors import ParameterError, RangeError
from .distributions import PotentialDistribution, parse_tag
from .lattice import LatticeBox

HEADER = "PAMFIELD v1"


@dataclass(frozen=True, eq=False)
class PotentialField:
    box: LatticeBox
    values: np.ndarray
    trap: np.ndarray
    seed: int = 0
    dist_tag: str = "explicit"

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        tr = np.ascontiguousarray(self.trap, dtype=bool)
        if v.shape != (self.box.n_sites,) or tr.shape != v.shape:
            raise ParameterError("values", "one value per site required")
        v = np.where(tr, 0.0, v)
        if np.any(~np.isfinite(v)):
            raise ParameterError("values", "non-trap values must be finite")
        if np.any(v > 0):
            raise ParameterError("values", "potential must be nonpositive")
        v.setflags(write=False)
        tr.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "trap", tr)

    # construction ------------------------------------------------------

    @classmethod
    def from_array(cls, box: LatticeBox, arr, seed: int = 0, dist_tag: str = "explicit"):
        """Build from a flat (site order) or ``box.shape`` array; ``-inf`` marks traps."""
        a = np.asarray(arr, dtype=np.float64).reshape(-1)
        trap = np.isneginf(a)
        return cls(box, np.where(trap, 0.0, a), trap, seed, dist_tag)

    @classmethod
    def constant(cls, box: LatticeBox, c: float):
        return cls.from_array(box, np.full(box.n_sites, c))

    # views ---------------------------------------------------------------

    @property
    def active(self) -> np.ndarray:
        return ~self.trap

    @property
    def n_active(self) -> int:
        return int(np.count_nonzero(~self.trap))

    def as_array(self) -> np.ndarray:
        out = self.values.copy()
        out[self.trap] = -np.inf
        return out

    def grid(self) -> np.ndarray:
        return self.as_array().reshape(self.box.shape)

    def value_at(self, z) -> float:
        i = self.box.index_of(z)
        return -np.inf if self.trap[i] else float(self.values[i])

    def restrict(self, center, radius: int) -> "PotentialField":
        """Field on the window ``center + Q_radius`` (must lie in the box)."""
        idx = self.box.window_indices(center, radius)
        sub = LatticeBox(self.box.d, int(radius))
        return PotentialField(sub, self.values[idx], self.trap[idx], self.seed, self.dist_tag)

    def embed(self, R: int, fill: float = 0.0) -> "PotentialField":
        """Centered copy on the larger box ``Q_R``, padded with ``fill``."""
        if R < self.box.R:
            raise RangeError(f"cannot embed radius {self.box.R} into {R}")
        big = LatticeBox(self.box.d, int(R))
        a = np.full(big.shape, fill, dtype=np.float64)
        off = R - self.box.R
        sl = tuple(slice(off, off + self.box.side) for _ in range(self.box.d))
        a[sl] = self.grid()
        return PotentialField.from_array(big, a, self.seed, self.dist_tag)

    def __eq__(self, other):
        if not isinstance(other, PotentialField):
            return NotImplemented
        return (
            self.box == other.box
            and np.array_equal(self.trap, other.trap)
            and np.array_equal(self.values.view(np.uint64), other.values.view(np.uint64))
        )

    __hash__ = None  # type: ignore[assignment]


def sample_field(dist: PotentialDistribution, box: LatticeBox, seed: int) -> PotentialField:
    """I.i.d. field; site ``i`` uses the stream ``(seed, i)``."""
    u = rng.site_uniforms(seed, box.n_sites)
    vals, trap = dist.from_uniform(u)
    return PotentialField(box, vals, trap, int(seed), dist.tag())


def write_field(f: PotentialField, path) -> None:
    lines = [f"{HEADER} d={f.box.d} R={f.box.R} dist={f.dist_tag} seed={f.seed}"]
    for v, t in zip(f.values, f.trap):
        lines.append("-inf" if t else repr(float(v)))
    Path(path).write_text("\n".join(lines) + "\n")


def read_field(path) -> PotentialField:
    text = Path(path).read_text().splitlines()
    head = text[0]
    if not head.startswith(HEADER):
        raise ParameterError("path", f"not a field file: {path}")
    kv = dict(tok.split("=", 1) for tok in head[len(HEADER):].split())
    box = LatticeBox(int(kv["d"]), int(kv["R"]))
    arr = np.array([float(s) for s in text[1 : 1 + box.n_sites]])
    if arr.size != box.n_sites:
        raise ParameterError("path", f"expected {box.n_sites} values, found {arr.size}")
    return PotentialField.from_array(box, arr, int(kv["seed"]), kv["dist"])


def field_distribution(f: PotentialField) -> PotentialDistribution:
    return parse_tag(f.dist_tag)
