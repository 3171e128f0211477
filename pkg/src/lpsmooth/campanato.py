"""Morrey-Campanato machinery on sampled signals.

Windows ("cubes") are contiguous, non-wrapping runs of samples of dyadic
length 2, 4, ..., N/2.  The infimum over polynomials of degree < i is the
discrete least-squares fit on the window; for vector signals the fit is made
componentwise and residual energies are summed (the l^2 norm inside the
window mean).

The p = 2 scans run on :func:`lpsmooth._backend.window_residuals`; other p
fall back to an explicit per-window projection and are flagged as surrogates.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre
from scipy.ndimage import maximum_filter1d

from . import _backend
from .errors import DomainError
from .signal_core import SampleGrid, SampledSignal, VectorSignal

__all__ = [
    "PolyWindow",
    "PolyCoeffs",
    "MaximalProfile",
    "poly_project",
    "window_residual_table",
    "maximal_function",
    "maximal_brute_force",
    "campanato_norm",
    "bmo_norm",
    "lip_seminorm",
    "diff_seminorm",
    "poly_norm_comparison_check",
    "projection_shift_check",
    "dyadic_lengths",
]


def _rows(h) -> tuple[SampleGrid, np.ndarray]:
    if isinstance(h, VectorSignal):
        return h.grid, np.asarray(h.values)
    if isinstance(h, SampledSignal):
        return h.grid, np.asarray(h.values)[None, :]
    raise TypeError(f"expected a SampledSignal or VectorSignal, got {type(h).__name__}")


@dataclass(frozen=True)
class PolyWindow:
    start: int
    length: int
    grid: SampleGrid

    def __post_init__(self):
        if not 1 <= self.length <= self.grid.size // 2:
            raise DomainError(f"window length {self.length} outside [1, N/2]")
        if not 0 <= self.start <= self.grid.size - self.length:
            raise DomainError(f"window [{self.start}, {self.start + self.length}) wraps")

    @property
    def stop(self) -> int:
        return self.start + self.length

    @property
    def center(self) -> int:
        return self.start + self.length // 2

    @property
    def measure(self) -> float:
        return self.length * self.grid.spacing

    def local_coordinate(self) -> np.ndarray:
        """Sample positions mapped affinely onto [-1, 1]."""
        if self.length == 1:
            return np.zeros(1)
        return 2.0 * np.arange(self.length) / (self.length - 1) - 1.0

    def doubled(self) -> "PolyWindow":
        """Concentric window of twice the length."""
        return PolyWindow(self.start - self.length // 2, 2 * self.length, self.grid)


@dataclass(frozen=True)
class PolyCoeffs:
    """Legendre coefficients (one row per component) on a window."""

    window: PolyWindow
    degree_bound: int
    coefficients: np.ndarray

    def evaluate(self, window: PolyWindow | None = None) -> np.ndarray:
        """Values on ``window`` (default: the fitting window), shape (K, len)."""
        K = self.coefficients.shape[0]
        target = window or self.window
        if self.degree_bound == 0:
            return np.zeros((K, target.length), complex)
        z = self._coordinate(target)
        V = legendre.legvander(z, self.degree_bound - 1)
        return self.coefficients @ V.T

    def _coordinate(self, target: PolyWindow) -> np.ndarray:
        w = self.window
        if w.length == 1:
            return np.zeros(target.length)
        idx = np.arange(target.start, target.stop)
        return 2.0 * (idx - w.start) / (w.length - 1) - 1.0

    def sup_on(self, window: PolyWindow) -> float:
        vals = self.evaluate(window)
        return float(np.sqrt(np.sum(np.abs(vals) ** 2, axis=0)).max())


def poly_project(h, window: PolyWindow, i: int) -> PolyCoeffs:
    """Least-squares projection of ``h`` on the window onto degree < i."""
    if i < 0:
        raise DomainError(f"degree bound must be >= 0, got {i}")
    _, rows = _rows(h)
    K = rows.shape[0]
    if i == 0:
        return PolyCoeffs(window, 0, np.zeros((K, 0), complex))
    if i > window.length:
        raise DomainError(f"degree bound {i} exceeds window length {window.length}")
    z = window.local_coordinate()
    V = legendre.legvander(z, i - 1)
    data = rows[:, window.start:window.stop].T
    coef, *_ = np.linalg.lstsq(V, data, rcond=None)
    return PolyCoeffs(window, i, coef.T)


def dyadic_lengths(N: int, minimum: int = 2) -> list[int]:
    out = []
    L = max(2, minimum)
    L = 1 << (L - 1).bit_length()
    while L <= N // 2:
        out.append(L)
        L *= 2
    return out


_ROUNDOFF = 1e-13


def _residual_p(rows: np.ndarray, L: int, i: int, p: float) -> np.ndarray:
    """Mean |h - P|_{l2}^p over every window of length L (explicit fits)."""
    K, N = rows.shape
    if i == 0:
        resid = np.lib.stride_tricks.sliding_window_view(rows, L, axis=1)
    else:
        z = 2.0 * np.arange(L) / (L - 1) - 1.0
        V = legendre.legvander(z, i - 1)
        Q, _ = np.linalg.qr(V)
        win = np.lib.stride_tricks.sliding_window_view(rows, L, axis=1)
        resid = win - (win @ Q.conj()) @ Q.T
    mag = np.sqrt(np.sum(np.abs(resid) ** 2, axis=0))
    return np.mean(mag ** p, axis=-1)


def window_residual_table(h, i: int, p: float = 2.0, lengths=None) -> dict[int, np.ndarray]:
    """For each window length L, ``mean_Q |h - P_Q|^p`` indexed by start."""
    grid, rows = _rows(h)
    lengths = lengths or dyadic_lengths(grid.size)
    table = {}
    for L in lengths:
        if L <= i:
            table[L] = np.zeros(grid.size - L + 1)
        elif p == 2.0:
            if i == 0:
                linv = np.zeros((0, 0))
            else:
                linv = _backend.window_gram_factor(L, i)
            resid = _backend.window_residuals(rows, L, linv)
            # the scan subtracts projected energy from total energy, so an
            # exact fit leaves roundoff of order eps * energy; clear it
            energy = np.cumsum(np.sum(np.abs(rows) ** 2, axis=0))
            energy = np.concatenate([[0.0], energy])
            window_energy = energy[L:] - energy[:-L]
            resid[resid <= _ROUNDOFF * window_energy] = 0.0
            table[L] = resid / L
        else:
            table[L] = _residual_p(rows, L, i, p)
    return table


@dataclass(frozen=True)
class MaximalProfile:
    values: np.ndarray
    i: int
    p: float
    s: float
    variant: str
    surrogate: bool = False
    meta: dict = field(default_factory=dict)

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("index,value\n")
            for k, val in enumerate(self.values):
                fh.write(f"{k},{float(val)!r}\n")


def _check_params(i, p, s):
    if not 1 <= p < math.inf:
        raise DomainError(f"p must lie in [1, inf), got {p}")
    if not (-1.0 / p < s <= i):
        raise DomainError(f"s={s} outside (-1/p, i] = ({-1.0 / p}, {i}]")


def _scaled(table, grid, p, s):
    return {L: (r ** (1.0 / p)) * (L * grid.spacing) ** (-s) for L, r in table.items()}


def maximal_function(h, i: int, p: float = 2.0, s: float = 0.0,
                     variant: str = "M") -> MaximalProfile:
    """Per-sample Campanato maximal function over dyadic windows.

    ``variant="M"`` takes every window containing the point, ``"M~"`` only the
    windows centred at it (start = x - L/2).
    """
    _check_params(i, p, s)
    if variant not in ("M", "M~"):
        raise DomainError(f"unknown variant {variant!r}")
    grid, _ = _rows(h)
    N = grid.size
    vals = _scaled(window_residual_table(h, i, p), grid, p, s)
    out = np.zeros(N)
    for L, v in vals.items():
        if variant == "M~":
            x = np.arange(N)
            start = x - L // 2
            ok = (start >= 0) & (start <= N - L)
            cand = np.zeros(N)
            cand[ok] = v[start[ok]]
        else:
            # windows containing x have start in [x - L + 1, x]
            padded = np.concatenate([np.full(L - 1, -np.inf), v, np.full(L - 1, -np.inf)])
            runmax = maximum_filter1d(padded, size=L, origin=(L - 1) // 2)
            cand = runmax[L - 1:L - 1 + N]
        np.maximum(out, cand, out=out)
    return MaximalProfile(out, i, p, s, variant, surrogate=(p != 2.0 and i > 0))


def maximal_brute_force(h, i: int, p: float = 2.0, s: float = 0.0,
                        variant: str = "M") -> np.ndarray:
    """Enumerate every contiguous window and fit each one explicitly.

    Independent of the scan kernels; quadratic in N, meant for N <= 64.
    """
    _check_params(i, p, s)
    grid, rows = _rows(h)
    N = grid.size
    admissible = set(dyadic_lengths(N))
    out = np.zeros(N)
    for start in range(N):
        for stop in range(start + 1, N + 1):
            L = stop - start
            if L not in admissible:
                continue
            seg = rows[:, start:stop]
            if i > 0:
                V = (np.arange(L) / L)[:, None] ** np.arange(min(i, L))
                coef, *_ = np.linalg.lstsq(V, seg.T, rcond=None)
                seg = seg - (V @ coef).T
            mag = np.sqrt(np.sum(np.abs(seg) ** 2, axis=0))
            val = np.mean(mag ** p) ** (1.0 / p) * (L * grid.spacing) ** (-s)
            if variant == "M":
                pts = range(start, stop)
            else:
                pts = [start + L // 2]
            for x in pts:
                out[x] = max(out[x], val)
    return out


def campanato_norm(f, i: int, p: float = 2.0, s: float = 0.0) -> float:
    """Sup over all dyadic windows of ``|Q|^-s (mean_Q |f - P_Q|^p)^(1/p)``."""
    _check_params(i, p, s)
    grid, _ = _rows(f)
    vals = _scaled(window_residual_table(f, i, p), grid, p, s)
    return float(max(v.max() for v in vals.values()))


def bmo_norm(f) -> float:
    return campanato_norm(f, 1, 2.0, 0.0)


def lip_seminorm(f, s: float = 1.0) -> float:
    """Discrete Hoelder seminorm over sample pairs at distance <= T/2.

    Pairs are never taken across the periodic seam.
    """
    if not 0 < s <= 1:
        raise DomainError(f"s must lie in (0, 1], got {s}")
    grid, rows = _rows(f)
    N = grid.size
    best = 0.0
    for d in range(1, N // 2 + 1):
        diff = rows[:, d:] - rows[:, :-d]
        mag = np.sqrt(np.sum(np.abs(diff) ** 2, axis=0))
        best = max(best, float(mag.max()) / (d * grid.spacing) ** s)
    return best


def diff_seminorm(f, alpha: int, s: float) -> float:
    """sup |Delta_h^alpha f(x)| / |h|^s over h = d * spacing, alpha * d <= N/2."""
    if alpha < 1:
        raise DomainError(f"alpha must be >= 1, got {alpha}")
    if not 0 < s <= alpha:
        raise DomainError(f"s must lie in (0, alpha], got {s}")
    grid, rows = _rows(f)
    N = grid.size
    weights = [(-1) ** (alpha - q) * math.comb(alpha, q) for q in range(alpha + 1)]
    best = 0.0
    for d in range(1, N // (2 * alpha) + 1):
        span = alpha * d
        acc = np.zeros((rows.shape[0], N - span), complex)
        for q, w in enumerate(weights):
            acc += w * rows[:, q * d:q * d + N - span]
        mag = np.sqrt(np.sum(np.abs(acc) ** 2, axis=0))
        best = max(best, float(mag.max()) / (d * grid.spacing) ** s)
    return best


def _fraction_window(grid: SampleGrid, lo: float, length: float) -> PolyWindow:
    start = int(round(lo * grid.size))
    L = max(1, int(round(length * grid.size)))
    return PolyWindow(start, L, grid)


def poly_norm_comparison_check(i: int, trials: int = 200, seed: int = 0,
                               sizes=(512, 1024)) -> dict:
    """Observed constant in ||p||_inf(Q1) <= C (|Q1|/|Q|)^i (mean_Q |p|^2)^(1/2).

    Random polynomials of degree < i and random nested windows, drawn once in
    continuous coordinates and sampled at each grid size in ``sizes``.
    """
    rng = np.random.default_rng(seed)
    draws = []
    for _ in range(trials):
        outer_len = rng.uniform(0.05, 0.45)
        outer_lo = rng.uniform(0.0, 1.0 - outer_len)
        inner_len = outer_len * rng.uniform(0.1, 1.0)
        inner_lo = outer_lo + rng.uniform(0.0, outer_len - inner_len)
        coef = rng.standard_normal(max(i, 1)) + 1j * rng.standard_normal(max(i, 1))
        draws.append((outer_lo, outer_len, inner_lo, inner_len, coef[:max(i, 1)]))
    maxima = {}
    for N in sizes:
        grid = SampleGrid(1.0, N)
        x = grid.points
        worst = 0.0
        for outer_lo, outer_len, inner_lo, inner_len, coef in draws:
            q1 = _fraction_window(grid, outer_lo, outer_len)
            q = _fraction_window(grid, inner_lo, inner_len)
            centre = x[q.start:q.stop].mean()
            vals = np.polynomial.polynomial.polyval(x - centre, coef)
            sup = np.abs(vals[q1.start:q1.stop]).max()
            mean2 = np.sqrt(np.mean(np.abs(vals[q.start:q.stop]) ** 2))
            ratio = sup / ((q1.length / q.length) ** i * mean2)
            worst = max(worst, float(ratio))
        maxima[N] = worst
    vals = list(maxima.values())
    spread = max(vals) / min(vals) - 1.0
    return {"i": i, "trials": trials, "max_ratio": maxima,
            "relative_spread": spread, "finite": all(map(math.isfinite, vals)),
            "stable": spread <= 0.25}


def projection_shift_check(i: int, trials: int = 100, seed: int = 0,
                           sizes=(512, 1024)) -> dict:
    """Observed C in (mean_I |f_2I - f_I|^2)^(1/2) <= C (mean_2I |f - f_2I|^2)^(1/2).

    ``f_I`` is the least-squares projection on I onto degree < i.
    """
    from .signal_core import random_bandlimited
    rng = np.random.default_rng(seed)
    draws = [(int(rng.integers(1 << 30)), rng.uniform(0.02, 0.2), rng.uniform(0.25, 0.75))
             for _ in range(trials)]
    maxima = {}
    for N in sizes:
        grid = SampleGrid(1.0, N)
        worst = 0.0
        for fseed, frac, centre in draws:
            f = random_bandlimited(fseed, grid, (-40.0, 40.0), decay=1.0)
            L = max(2 * max(i, 1), 2 * int(round(frac * N / 2)))
            I = PolyWindow(int(round(centre * N)) - L // 2, L, grid)
            I2 = I.doubled()
            fI = poly_project(f, I, i)
            f2I = poly_project(f, I2, i)
            num = np.sqrt(np.mean(np.abs(f2I.evaluate(I) - fI.evaluate(I)) ** 2))
            seg = np.asarray(f.values)[None, I2.start:I2.stop]
            den = np.sqrt(np.mean(np.abs(seg - f2I.evaluate(I2)) ** 2))
            if den > 0:
                worst = max(worst, float(num / den))
        maxima[N] = worst
    vals = list(maxima.values())
    spread = max(vals) / min(vals) - 1.0
    return {"i": i, "trials": trials, "max_ratio": maxima,
            "relative_spread": spread, "stable": spread <= 0.25}


def norm_json(f, i: int, p: float = 2.0, s: float = 0.0, variant: str = "M") -> str:
    value = campanato_norm(f, i, p, s)
    return json.dumps({"i": i, "p": p, "s": s, "value": value, "variant": variant},
                      sort_keys=True)
