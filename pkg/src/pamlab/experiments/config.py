"""Experiment configuration: an INI file with one ``[experiment]`` section.

Lists are comma separated.  Example::

    [experiment]
    kind = moments
    distribution = bernoulli:p=0.6
    d = 1
    t_grid = 4, 8, 16, 32
    samples = 200
    seed = 7
"""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from ..errors import ParameterError
from ..potential.distributions import parse_tag

KINDS = ("solve", "moments", "almost-sure", "lifshitz", "chi-tables", "scaling-checks", "percolation")

# keys that do not change results and stay out of the hash
_UNHASHED = ("out", "threads")


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "moments"
    distribution: str = "bernoulli:p=0.6"
    kappa: float = 1.0
    d: int = 1
    orders: tuple = (1.0, 2.0)
    t_grid: tuple = (4.0, 8.0, 16.0, 32.0)
    samples: int = 100
    seed: int = 0
    # box policy: radius min(ceil(box_c * alpha), box_cap), site budget max_sites
    box_c: float = 6.0
    box_cap: int = 60
    max_sites: int = 250_000
    # almost-sure runs
    realizations: int = 5
    max_resamples: int = 50
    as_box_c: float = 2.0
    K: float = float("inf")
    # lifshitz runs
    sizes: tuple = (250, 1000, 1999)
    e_min: float = 1e-3
    e_max: float = 4.0
    n_energies: int = 200
    fit_band: tuple = (0.3, 0.7)
    planted: float = 0.5
    # variational
    chi_cases: tuple = ("0:1", "0.5:1", "0:2")
    chi_m: int = 64
    rel_tol: float = 0.05
    trend_points: int = 3
    # single solve / percolation
    R: int = 20
    t: float = 5.0
    method: str = "auto"
    out: str = "results"
    threads: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError("kind", f"expected one of {KINDS}, got {self.kind!r}")
        parse_tag(self.distribution)
        if self.kappa <= 0:
            raise ParameterError("kappa", "must be positive")
        if self.d < 1:
            raise ParameterError("d", "must be >= 1")
        ts = list(self.t_grid)
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ParameterError("t_grid", "must be increasing")
        if any(p <= 0 for p in self.orders):
            raise ParameterError("orders", "moment orders must be positive")
        if self.samples < 1 or self.realizations < 1:
            raise ParameterError("samples", "need at least one sample")
        if not (0 <= self.seed < 2**64):
            raise ParameterError("seed", "must be an unsigned 64-bit integer")

    def to_dict(self) -> dict:
        out = asdict(self)
        for k, v in out.items():
            if isinstance(v, tuple):
                out[k] = list(v)
        if out["K"] == float("inf"):
            out["K"] = "inf"
        return out

    def config_hash(self) -> str:
        payload = {k: v for k, v in self.to_dict().items() if k not in _UNHASHED}
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    @property
    def dist(self):
        return parse_tag(self.distribution)


def _convert(name: str, raw: str, default):
    raw = raw.strip()
    try:
        if isinstance(default, tuple):
            items = [x.strip() for x in raw.split(",") if x.strip()]
            if default and isinstance(default[0], str):
                return tuple(items)
            if default and isinstance(default[0], int) and not isinstance(default[0], bool):
                return tuple(int(x) for x in items)
            return tuple(float(x) for x in items)
        if isinstance(default, bool):
            return raw.lower() in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError as exc:
        raise ParameterError(name, f"cannot parse {raw!r}: {exc}") from None
    return raw


def load_config(path=None, **overrides) -> ExperimentConfig:
    """Read ``[experiment]`` from ``path`` (if given) and apply overrides."""
    values = {}
    if path is not None:
        cp = configparser.ConfigParser()
        with open(Path(path)) as fh:
            try:
                cp.read_file(fh)
            except configparser.Error as exc:
                raise ParameterError("config", f"malformed file {path}: {exc}") from None
        if "experiment" not in cp:
            raise ParameterError("config", f"{path}: missing [experiment] section")
        defaults = {f.name: f.default for f in fields(ExperimentConfig)}
        for key, raw in cp["experiment"].items():
            if key not in defaults:
                raise ParameterError(key, "unknown configuration key")
            values[key] = _convert(key, raw, defaults[key])
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)
