"""Sampled signals on a periodic grid and their discrete Fourier transforms.

The real line is modelled by a torus of period ``T`` sampled at ``N`` points.
Frequencies are stored centred, ``n / T`` for ``n`` in ``[-N/2, N/2)``.

A signal may carry a frequency ``offset``: its samples are those of
``exp(2 pi i offset x) * p(x)`` with ``p`` periodic, so its spectrum lives on
the shifted frequency set ``n / T + offset``.  This is what makes modulation
by an arbitrary real frequency exact: modulating only moves the offset and
leaves the coefficient array untouched.

Normalisation of the transform::

    c_n = (T / N) * sum_k f(x_k) exp(-2 pi i (n/T + offset) x_k)

so that ``sum |f|^2 * T/N == sum |c|^2 / T`` (discrete Plancherel).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Sequence

import numpy as np

from .errors import DomainError, StructuralError

__all__ = [
    "SampleGrid",
    "SampledSignal",
    "Spectrum",
    "VectorSignal",
    "transform",
    "inverse",
    "transform_many",
    "inverse_many",
    "modulate",
    "norm_lp",
    "random_bandlimited",
    "pure_tone",
    "direct_dft",
    "write_signal_csv",
    "read_signal_csv",
    "write_vector_csv",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SampleGrid:
    period: float
    size: int

    def __post_init__(self):
        if not self.period > 0:
            raise DomainError(f"period must be positive, got {self.period}")
        n = int(self.size)
        if n < 2 or n & (n - 1):
            raise DomainError(f"grid size must be a power of two, got {self.size}")
        object.__setattr__(self, "size", n)
        object.__setattr__(self, "period", float(self.period))

    @property
    def spacing(self) -> float:
        return self.period / self.size

    @property
    def frequency_step(self) -> float:
        return 1.0 / self.period

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.size) * self.spacing

    @property
    def indices(self) -> np.ndarray:
        """Signed frequency indices ``n`` in centred order."""
        return np.arange(self.size) - self.size // 2

    @property
    def frequencies(self) -> np.ndarray:
        return self.indices / self.period

    def refine(self, factor: int = 2) -> "SampleGrid":
        """Same period, ``factor`` times as many samples."""
        return SampleGrid(self.period, self.size * factor)


@dataclass(frozen=True)
class SampledSignal:
    grid: SampleGrid
    values: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128)
        if v.ndim != 1 or v.shape[0] != self.grid.size:
            raise StructuralError(
                f"expected {self.grid.size} samples, got shape {v.shape}")
        object.__setattr__(self, "values", _frozen(v))
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def from_function(cls, grid: SampleGrid, fn, offset: float = 0.0):
        return cls(grid, fn(grid.points), offset)

    def __add__(self, other: "SampledSignal") -> "SampledSignal":
        _check_same_grid(self.grid, other.grid)
        if not math.isclose(self.offset, other.offset, rel_tol=0, abs_tol=1e-12):
            raise StructuralError("cannot add signals with different offsets")
        return SampledSignal(self.grid, self.values + other.values, self.offset)

    def scale(self, c: complex) -> "SampledSignal":
        return SampledSignal(self.grid, c * self.values, self.offset)


@dataclass(frozen=True)
class Spectrum:
    grid: SampleGrid
    coefficients: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=np.complex128)
        if c.ndim != 1 or c.shape[0] != self.grid.size:
            raise StructuralError(
                f"expected {self.grid.size} coefficients, got shape {c.shape}")
        object.__setattr__(self, "coefficients", _frozen(c))
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def frequencies(self) -> np.ndarray:
        return self.grid.frequencies + self.offset

    def energy(self) -> float:
        """``sum |c|^2 / T``; equals ``norm_lp(inverse(self), 2) ** 2``."""
        return float(np.sum(np.abs(self.coefficients) ** 2) / self.grid.period)


@dataclass(frozen=True)
class VectorSignal:
    """Finitely many signals on one grid, keyed by an index.

    Stored as a ``(K, N)`` array so banks can be applied in one shot.
    """

    grid: SampleGrid
    keys: tuple
    values: np.ndarray
    offsets: np.ndarray = field(default=None)

    def __post_init__(self):
        keys = tuple(self.keys)
        v = np.array(self.values, dtype=np.complex128)
        if v.ndim == 1 and len(keys) == 0:
            v = v.reshape(0, self.grid.size)
        if v.ndim != 2 or v.shape != (len(keys), self.grid.size):
            raise StructuralError(
                f"values shape {v.shape} does not match {len(keys)} keys "
                f"x {self.grid.size} samples")
        off = (np.zeros(len(keys)) if self.offsets is None
               else np.array(self.offsets, dtype=float).reshape(len(keys)))
        object.__setattr__(self, "keys", keys)
        object.__setattr__(self, "values", _frozen(v))
        object.__setattr__(self, "offsets", _frozen(off))

    def __len__(self):
        return len(self.keys)

    def index(self, key: Hashable) -> int:
        return self.keys.index(key)

    def component(self, key: Hashable) -> SampledSignal:
        i = self.index(key)
        return SampledSignal(self.grid, self.values[i], self.offsets[i])

    def magnitude(self) -> np.ndarray:
        """Pointwise l^2 magnitude over components."""
        if len(self.keys) == 0:
            return np.zeros(self.grid.size)
        return np.sqrt(np.sum(np.abs(self.values) ** 2, axis=0))

    @classmethod
    def from_components(cls, grid: SampleGrid, items: Sequence[tuple]):
        keys = [k for k, _ in items]
        sigs = [s for _, s in items]
        for s in sigs:
            _check_same_grid(grid, s.grid)
        vals = (np.stack([s.values for s in sigs]) if sigs
                else np.zeros((0, grid.size), complex))
        return cls(grid, keys, vals, [s.offset for s in sigs])

    def __sub__(self, other: "VectorSignal") -> "VectorSignal":
        _check_same_grid(self.grid, other.grid)
        if self.keys != other.keys:
            raise StructuralError("component keys differ")
        return VectorSignal(self.grid, self.keys, self.values - other.values,
                            self.offsets)


def _check_same_grid(a: SampleGrid, b: SampleGrid):
    if a != b:
        raise StructuralError(f"grid mismatch: {a} vs {b}")


def _carrier(grid: SampleGrid, offset) -> np.ndarray:
    off = np.asarray(offset, dtype=float)
    return np.exp(2j * np.pi * off[..., None] * grid.points)


def transform(signal: SampledSignal) -> Spectrum:
    g = signal.grid
    v = signal.values
    if signal.offset != 0.0:
        v = v * _carrier(g, -signal.offset)
    c = np.fft.fftshift(np.fft.fft(v)) * g.spacing
    return Spectrum(g, c, signal.offset)


def inverse(spec: Spectrum) -> SampledSignal:
    g = spec.grid
    v = np.fft.ifft(np.fft.ifftshift(spec.coefficients)) * (g.size / g.period)
    if spec.offset != 0.0:
        v = v * _carrier(g, spec.offset)
    return SampledSignal(g, v, spec.offset)


def transform_many(vs: VectorSignal) -> np.ndarray:
    """Coefficient matrix ``(K, N)`` of every component (offsets as stored)."""
    g = vs.grid
    v = vs.values
    if np.any(vs.offsets != 0.0):
        v = v * _carrier(g, -vs.offsets)
    return np.fft.fftshift(np.fft.fft(v, axis=-1), axes=-1) * g.spacing


def inverse_many(grid: SampleGrid, keys, coeffs: np.ndarray, offsets) -> VectorSignal:
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    offsets = np.broadcast_to(np.asarray(offsets, dtype=float), (coeffs.shape[0],))
    if coeffs.shape[0] == 0:
        return VectorSignal(grid, keys, np.zeros((0, grid.size)), offsets)
    v = np.fft.ifft(np.fft.ifftshift(coeffs, axes=-1), axis=-1)
    v *= grid.size / grid.period
    if np.any(offsets != 0.0):
        v = v * _carrier(grid, offsets)
    return VectorSignal(grid, keys, v, offsets)


def modulate(signal: SampledSignal, freq: float) -> SampledSignal:
    """Multiply by ``exp(2 pi i freq x)``; the spectrum moves by ``freq``."""
    return SampledSignal(signal.grid,
                         signal.values * _carrier(signal.grid, freq),
                         signal.offset + freq)


def direct_dft(signal: SampledSignal) -> np.ndarray:
    """O(N^2) summation of the transform; used as an independent oracle."""
    g = signal.grid
    x = g.points
    xi = g.frequencies + signal.offset
    kernel = np.exp(-2j * np.pi * np.outer(xi, x))
    return (kernel @ signal.values) * g.spacing


def norm_lp(signal, p: float = 2.0) -> float:
    """Riemann-sum L^p norm; vector signals use the pointwise l^2 magnitude."""
    if isinstance(signal, VectorSignal):
        mag = signal.magnitude()
    else:
        mag = np.abs(signal.values)
    if p == math.inf:
        return float(mag.max()) if mag.size else 0.0
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")
    return float((np.sum(mag ** p) * signal.grid.spacing) ** (1.0 / p))


def random_bandlimited(seed: int, grid: SampleGrid, band: tuple[float, float],
                       decay: float = 1.0) -> SampledSignal:
    """Random signal whose spectrum is supported in ``band``.

    The coefficients depend only on ``seed``, the period and the band, never
    on the sample count, so refining the grid resamples the same function.
    ``decay=inf`` gives a unit-amplitude tone at the band frequency closest
    to the origin.
    """
    lo, hi = float(band[0]), float(band[1])
    T = grid.period
    n_lo, n_hi = math.ceil(lo * T - 1e-9), math.floor(hi * T + 1e-9)
    if hi < lo or n_hi < n_lo:
        raise DomainError(f"band {band} contains no grid frequency")
    if n_lo < -grid.size // 2 or n_hi >= grid.size // 2:
        raise DomainError(f"band {band} exceeds the grid's frequency range")
    n = np.arange(n_lo, n_hi + 1)
    coeffs = np.zeros(grid.size, complex)
    pos = n + grid.size // 2
    if decay == math.inf:
        coeffs[pos[np.argmin(np.abs(n))]] = T
    else:
        rng = np.random.default_rng(seed)
        z = (rng.standard_normal(n.size) + 1j * rng.standard_normal(n.size)) / math.sqrt(2)
        coeffs[pos] = T * z * (1.0 + np.abs(n)) ** (-float(decay))
    return inverse(Spectrum(grid, coeffs))


def pure_tone(grid: SampleGrid, freq: float, amplitude: complex = 1.0) -> SampledSignal:
    """``amplitude * exp(2 pi i freq x)``; exact for any real ``freq``."""
    return SampledSignal(grid, amplitude * _carrier(grid, freq), freq)


def write_signal_csv(path, signal: SampledSignal):
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(f"# period={signal.grid.period!r}\n# size={signal.grid.size}\n"
                 f"# offset={signal.offset!r}\n")
        w = csv.writer(fh)
        w.writerow(["index", "real", "imag"])
        for k, z in enumerate(signal.values):
            w.writerow([k, repr(float(z.real)), repr(float(z.imag))])


def read_signal_csv(path) -> SampledSignal:
    header = {}
    rows = []
    with Path(path).open() as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                header[key.strip()] = val.strip()
                continue
            rows.append(line)
    if "period" not in header or "size" not in header:
        raise StructuralError(f"{path}: missing period/size header")
    grid = SampleGrid(float(header["period"]), int(header["size"]))
    reader = csv.DictReader(rows)
    vals = np.zeros(grid.size, complex)
    count = 0
    for row in reader:
        k = int(row["index"])
        if not 0 <= k < grid.size:
            raise StructuralError(f"{path}: sample index {k} out of range")
        vals[k] = complex(float(row["real"]), float(row["imag"]))
        count += 1
    if count != grid.size:
        raise StructuralError(f"{path}: expected {grid.size} rows, got {count}")
    return SampledSignal(grid, vals, float(header.get("offset", 0.0)))


def write_vector_csv(path, vs: VectorSignal):
    """Long format: component, index, real, imag."""
    with Path(path).open("w", newline="") as fh:
        fh.write(f"# period={vs.grid.period!r}\n# size={vs.grid.size}\n")
        w = csv.writer(fh)
        w.writerow(["component", "offset", "index", "real", "imag"])
        for key, off, row in zip(vs.keys, vs.offsets, vs.values):
            label = ":".join(map(str, key)) if isinstance(key, tuple) else str(key)
            for k, z in enumerate(row):
                w.writerow([label, repr(float(off)), k, repr(float(z.real)),
                            repr(float(z.imag))])
