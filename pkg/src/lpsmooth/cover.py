"""Interval bookkeeping for the decomposition of smoothed projections.

Given disjoint frequency intervals ``[a_m, b_m]`` this module builds, for
each interval ``m`` and geometric scale ``v``:

* the scale interval ``[A**(v-1), A**(v+1)]``,
* an approximating interval ``J_{k,j} = [j 2**k, (j+8) 2**k]`` whose
  concentric 3/4-shrink contains ``a_m + [A**(v-1), A**(v+1)]``,
* the shift ``delta = j 2**k - a_m`` and a residue class ``d`` such that
  the ``J`` intervals inside one class are pairwise disjoint.

Disjointness only holds for ``A`` close enough to 1, so it is checked at
construction time and reported as :class:`CoverError` when it fails.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CoverError, DomainError

__all__ = [
    "IntervalFamily",
    "CoverEntry",
    "CoverAssignment",
    "n_index",
    "approximate_interval",
    "default_v_min",
    "build_cover",
    "load_family",
    "random_family",
]

DEFAULT_A = 1.03
DEFAULT_D = 100


@dataclass(frozen=True)
class IntervalFamily:
    intervals: tuple

    def __post_init__(self):
        ivs = tuple((float(a), float(b)) for a, b in self.intervals)
        for a, b in ivs:
            if not b > a:
                raise DomainError(f"interval [{a}, {b}] has non-positive length")
            if a < 0 < b:
                raise DomainError(f"interval [{a}, {b}] contains the origin")
        order = sorted(ivs)
        for (a0, b0), (a1, b1) in zip(order, order[1:]):
            if a1 < b0:
                raise DomainError(f"intervals [{a0}, {b0}] and [{a1}, {b1}] overlap")
        object.__setattr__(self, "intervals", ivs)

    def __len__(self):
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    @property
    def lengths(self):
        return [b - a for a, b in self.intervals]

    def mirrored(self) -> "IntervalFamily":
        """Reflect every interval through the origin."""
        return IntervalFamily(tuple((-b, -a) for a, b in self.intervals))


def load_family(path) -> IntervalFamily:
    """Read ``[{"a": .., "b": ..}, ...]`` from a JSON file."""
    data = json.loads(Path(path).read_text())
    if not isinstance(data, list):
        raise DomainError(f"{path}: expected a JSON array of intervals")
    return IntervalFamily(tuple((item["a"], item["b"]) for item in data))


def random_family(rng: np.random.Generator, max_count: int = 16,
                  min_length: float = 0.05, decades: float = 3.0,
                  lo: float = -16.0, hi: float = 16.0,
                  gap: float = 0.0) -> IntervalFamily:
    """Disjoint intervals with log-uniform lengths, none containing 0.

    Intervals are laid left to right with random gaps of at least ``gap``;
    the result is clipped to ``[lo, hi]``.
    """
    count = int(rng.integers(1, max_count + 1))
    lengths = min_length * 10.0 ** rng.uniform(0.0, decades, size=count)
    out = []
    x = lo + rng.uniform(0, 1)
    for length in lengths:
        a = x
        b = a + length
        if a < 0 < b:
            a, b = gap, gap + length
        if b > hi:
            break
        out.append((a, b))
        x = b + gap + rng.exponential(1.0)
    if not out:
        out.append((1.0, 2.0))
    return IntervalFamily(tuple(out))


def n_index(interval, A: float) -> int:
    """Index of the rightmost scale interval meeting [0, (2/3) l]."""
    a, b = interval
    length = b - a
    if not (A > 1 and length > 0):
        raise DomainError("need A > 1 and a positive length")
    x = 2.0 * length / 3.0
    v = math.floor(math.log(x) / math.log(A)) + 1
    # log rounding can be off by one at exact powers of A
    while A ** (v - 1) > x:
        v -= 1
    while A ** v <= x:
        v += 1
    return v


def approximate_interval(interval) -> tuple[int, int]:
    """(k, j) with 2**k <= |I| < 2**(k+1) and I inside (3/4) J_{k,j}."""
    a, b = float(interval[0]), float(interval[1])
    length = b - a
    if not length > 0:
        raise DomainError(f"degenerate interval {interval}")
    k = math.floor(math.log2(length))
    while 2.0 ** k > length:
        k -= 1
    while 2.0 ** (k + 1) <= length:
        k += 1
    # largest j with (j+1) 2**k < a; a / 2**k is exact
    j = math.ceil(a / 2.0 ** k) - 2
    return k, j


def _shrunk(k: int, j: int) -> tuple[float, float]:
    step = 2.0 ** k
    return (j + 1) * step, (j + 7) * step


@dataclass(frozen=True)
class CoverEntry:
    m: int
    v: int
    k: int
    j: int
    a_mv: float
    delta: float
    cls: int

    @property
    def key(self):
        return (self.m, self.v)

    @property
    def J(self) -> tuple[float, float]:
        step = 2.0 ** self.k
        return self.j * step, (self.j + 8) * step


@dataclass(frozen=True)
class CoverAssignment:
    family: IntervalFamily
    A: float
    D: int
    v_min: int
    entries: tuple

    @property
    def keys(self):
        return tuple(e.key for e in self.entries)

    def n_max(self, m: int) -> int:
        return n_index(self.family.intervals[m], self.A)

    def for_interval(self, m: int):
        return [e for e in self.entries if e.m == m]

    def residue_class(self, d: int):
        return [e for e in self.entries if e.cls == d]

    def classes(self):
        return sorted({e.cls for e in self.entries})

    def arrays(self) -> dict:
        cols = ("m", "v", "k", "j", "a_mv", "delta", "cls")
        return {c: np.array([getattr(e, c) for e in self.entries]) for c in cols}

    def dump_csv(self, path):
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["m", "v", "k", "j", "a_mv", "delta", "class"])
            for e in self.entries:
                w.writerow([e.m, e.v, e.k, e.j, repr(e.a_mv), repr(e.delta), e.cls])


def default_v_min(frequency_step: float, A: float) -> int:
    """Largest v with A**v < frequency_step / 4."""
    target = frequency_step / 4.0
    v = math.floor(math.log(target) / math.log(A))
    while A ** v >= target:
        v -= 1
    while A ** (v + 1) < target:
        v += 1
    return v


def _check_classes(entries, D):
    collisions = []
    origin = []
    for d in sorted({e.cls for e in entries}):
        group = sorted((e for e in entries if e.cls == d), key=lambda e: e.J[0])
        origin += [e.key for e in group if e.J[0] <= 0.0 <= e.J[1]]
        reach = None
        for e in group:
            if reach is not None and e.J[0] < reach.J[1]:
                collisions.append((reach.key, e.key))
            if reach is None or e.J[1] > reach.J[1]:
                reach = e
    if collisions:
        raise CoverError(
            f"{len(collisions)} overlapping J intervals within residue classes, "
            f"first {collisions[0]}",
            collisions, "decrease A or increase D")
    if origin:
        raise CoverError(f"J interval of {origin[0]} contains the origin",
                         [(k, k) for k in origin], "decrease A")


def build_cover(family: IntervalFamily, A: float = DEFAULT_A, D: int = DEFAULT_D,
                v_min: int | None = None, frequency_step: float | None = None,
                check: bool = True) -> CoverAssignment:
    """Assign (k, j, delta, class) to every (m, v) with v_min <= v <= N_m.

    ``check=False`` skips the class-disjointness and shift invariants, which
    is only useful for inspecting a cover that is known to be broken.
    """
    if not A > 1:
        raise DomainError(f"A must exceed 1, got {A}")
    if D < 1:
        raise DomainError(f"D must be at least 1, got {D}")
    if v_min is None:
        if frequency_step is None:
            raise DomainError("give either v_min or frequency_step")
        v_min = default_v_min(frequency_step, A)
    entries = []
    bad_shift = []
    for m, (a_m, b_m) in enumerate(family.intervals):
        l_m = b_m - a_m
        top = n_index((a_m, b_m), A)
        for v in range(v_min, top + 1):
            lo, hi = A ** (v - 1), A ** (v + 1)
            k, j = approximate_interval((a_m + lo, a_m + hi))
            a_mv = j * 2.0 ** k
            delta = a_mv - a_m
            s_lo, s_hi = _shrunk(k, j)
            if not (s_lo <= a_m + lo and a_m + hi <= s_hi):
                raise CoverError(f"scale interval of {(m, v)} escapes (3/4)J",
                                 [((m, v), (m, v))])
            if not 0.0 <= delta <= l_m:
                bad_shift.append(((m, v), delta, l_m))
            entries.append(CoverEntry(m, v, k, j, a_mv, delta, (top - v) % D + 1))
    if check:
        _check_classes(entries, D)
    if check and bad_shift:
        key, delta, l_m = bad_shift[0]
        raise CoverError(f"shift delta={delta!r} of {key} outside [0, {l_m}]",
                         [(b[0], b[0]) for b in bad_shift], "decrease A")
    return CoverAssignment(family, float(A), int(D), int(v_min), tuple(entries))
