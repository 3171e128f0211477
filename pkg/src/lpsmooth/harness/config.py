"""Experiment configuration and the parameter gate.

A config is a flat JSON object.  Every key is optional; missing ones take
the per-experiment defaults in :data:`DEFAULTS`.  Parameters ``i, r, s`` are
checked against ``r > max(s, i - 1)`` and ``-1/2 < s <= i`` as soon as the
config is built, so a bad triple never reaches an experiment.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from ..cover import IntervalFamily, load_family
from ..errors import ConfigError, DomainError

EXPERIMENTS = (
    "decomp-check",
    "bound-scan",
    "counterexample",
    "rf-inequality",
    "shift-lip",
    "kernel-decay",
    "dump-profile",
)

DEFAULT_FAMILY = ((1.0, 2.0), (3.0, 8.0), (-6.0, -4.0))

# (i, s, r): BMO, Lip_{1/2}, Zygmund
DEFAULT_TRIPLES = ((1, 0.0, 1), (1, 0.5, 1), (2, 1.0, 2))

DEFAULTS = {
    "decomp-check": dict(n=4096, period=64.0, trials=100),
    "bound-scan": dict(n=2048, period=16.0, trials=50),
    "counterexample": dict(n=0, period=1.0, trials=1),
    "rf-inequality": dict(n=2048, period=16.0, trials=100),
    "shift-lip": dict(n=1024, period=1.0, trials=20),
    "kernel-decay": dict(n=8192, period=1.0, trials=1),
    "dump-profile": dict(n=1024, period=1.0, trials=1),
}


def check_triple(i: int, r: int, s: float):
    """Raise :class:`ConfigError` naming the violated constraint."""
    if i < 1 or r < 1:
        raise ConfigError(f"i and r must be positive integers, got i={i}, r={r}")
    if not r > max(s, i - 1):
        raise ConfigError(f"constraint r > max{{s, i-1}} violated: r={r}, s={s}, i={i}")
    if not -0.5 < s <= i:
        raise ConfigError(f"constraint s in (-1/2, i] violated: s={s}, i={i}")


@dataclass(frozen=True)
class Params:
    i: int = 1
    r: int = 1
    s: float = 0.0
    p: float = 2.0
    A: float = 1.03
    D: int = 100
    nu: int | None = None
    sigma_max: int = 8

    def __post_init__(self):
        check_triple(self.i, self.r, self.s)
        if not self.p >= 1:
            raise ConfigError(f"p must be >= 1, got {self.p}")
        if not self.A > 1:
            raise ConfigError(f"A must exceed 1, got {self.A}")
        if self.D < 1:
            raise ConfigError(f"D must be at least 1, got {self.D}")
        if self.sigma_max < 4:
            raise ConfigError(f"sigma_max must be at least 4, got {self.sigma_max}")

    @property
    def triple(self) -> tuple[int, float, int]:
        return (self.i, self.s, self.r)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n: int
    period: float
    seed: int = 0
    trials: int = 1
    family: tuple | None = None
    params: Params = field(default_factory=Params)
    triples: tuple | None = None
    profile: str = "phi"
    kernel: str = "smooth3"
    max_intervals: int | None = None
    workers: int = 1
    out: str | None = None
    format: str = "json"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.n < 0 or (self.n and self.n & (self.n - 1)):
            raise ConfigError(f"n must be a power of two, got {self.n}")
        if not self.period > 0:
            raise ConfigError(f"period must be positive, got {self.period}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must fit in an unsigned 64-bit integer, got {self.seed}")
        if self.trials < 1:
            raise ConfigError(f"trials must be at least 1, got {self.trials}")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"format must be json or csv, got {self.format!r}")
        if self.kernel not in ("smooth1", "smooth2", "smooth3"):
            raise ConfigError(f"kernel must be smooth1, smooth2 or smooth3, got {self.kernel!r}")
        if self.max_intervals is not None and self.max_intervals < 1:
            raise ConfigError(f"max_intervals must be at least 1, got {self.max_intervals}")
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers}")
        if self.triples is not None:
            for t in self.triples:
                i, s, r = t
                check_triple(int(i), int(r), float(s))

    def interval_family(self) -> IntervalFamily:
        try:
            return IntervalFamily(self.family if self.family is not None else DEFAULT_FAMILY)
        except DomainError as exc:
            raise ConfigError(f"interval family: {exc}") from exc

    def scan_triples(self) -> tuple:
        return tuple(self.triples) if self.triples is not None else DEFAULT_TRIPLES

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("out")
        d.pop("format")
        d.pop("workers")
        if d["family"] is not None:
            d["family"] = [list(iv) for iv in d["family"]]
        if d["triples"] is not None:
            d["triples"] = [list(t) for t in d["triples"]]
        return d

    def with_(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)


_PARAM_TYPES = {"i": int, "r": int, "s": float, "p": float, "A": float, "D": int,
                "nu": int, "sigma_max": int}


def parse_params(text: str) -> dict:
    """``"i=1,r=2,s=0.5"`` -> ``{"i": 1, "r": 2, "s": 0.5}``."""
    out = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        key, sep, value = part.partition("=")
        key = key.strip()
        if not sep or key not in _PARAM_TYPES:
            raise ConfigError(f"bad parameter {part!r}; expected one of {sorted(_PARAM_TYPES)}")
        try:
            out[key] = _PARAM_TYPES[key](value)
        except ValueError as exc:
            raise ConfigError(f"parameter {key}: cannot parse {value!r}") from exc
    return out


def _family_from(value) -> tuple:
    try:
        if isinstance(value, (str, Path)):
            return load_family(value).intervals
        return IntervalFamily(tuple(
            (iv["a"], iv["b"]) if isinstance(iv, dict) else tuple(iv) for iv in value)).intervals
    except (DomainError, KeyError, TypeError, ValueError, OSError) as exc:
        raise ConfigError(f"interval family: {exc}") from exc


def build_config(experiment: str, file_data: dict | None = None, **overrides) -> ExperimentConfig:
    """Merge defaults, a JSON mapping and explicit overrides (``None`` = unset)."""
    if experiment not in DEFAULTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    merged = dict(DEFAULTS[experiment])
    data = dict(file_data or {})
    params = dict(data.pop("params", {}) or {})
    data.pop("experiment", None)
    for k, v in overrides.items():
        if v is None:
            continue
        if k == "params":
            params.update(v)
        elif k in _PARAM_TYPES:
            params[k] = v
        else:
            data[k] = v
    for k in list(data):
        if k in _PARAM_TYPES:
            params[k] = data.pop(k)
    unknown = set(data) - {f for f in ExperimentConfig.__dataclass_fields__} - {"intervals"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "intervals" in data:
        data["family"] = data.pop("intervals")
    if data.get("family") is not None:
        data["family"] = _family_from(data["family"])
    if data.get("triples") is not None:
        data["triples"] = tuple(tuple(t) for t in data["triples"])
    merged.update(data)
    try:
        p = Params(**{k: _PARAM_TYPES[k](v) if v is not None else None
                      for k, v in params.items()})
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    # an explicit triple narrows the bound scan to that triple
    if experiment == "bound-scan" and merged.get("triples") is None and \
            {"i", "r", "s"} & set(params):
        merged["triples"] = ((p.i, p.s, p.r),)
    if not isinstance(merged.get("seed", 0), int) or isinstance(merged.get("seed", 0), bool):
        raise ConfigError(f"seed must be an integer, got {merged.get('seed')!r}")
    for key in ("n", "trials"):
        if not float(merged[key]).is_integer():
            raise ConfigError(f"{key} must be an integer, got {merged[key]!r}")
        merged[key] = int(merged[key])
    if not math.isfinite(float(merged["period"])):
        raise ConfigError("period must be finite")
    return ExperimentConfig(experiment=experiment, params=p, **merged)


def load_config(path) -> dict:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return data
