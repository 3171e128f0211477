"""Frequency-domain multiplier banks.

Every operator here is "multiply the spectrum, then demodulate".  Because a
signal's spectrum lives on ``n / T + offset``, demodulating by any real
frequency only moves the offset, and a multiplier is always evaluated at the
exact frequencies where the coefficients live.  The decomposition identity
below therefore holds to roundoff rather than to a discretisation error.

Double-indexed families (``g``, ``Phi g``) are kept in the spectral domain as
:class:`DoubleIndexed`; the time domain is materialised only on request.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cover import CoverAssignment, IntervalFamily
from .errors import DomainError, StructuralError
from .profiles import (PHI_PLATEAU, build_bump_pair, build_psi_tilde, dilate_phi,
                       profile_kernel, psi_sigma_m, theta_hat_v, build_theta)
from .signal_core import (SampledSignal, SampleGrid, Spectrum, VectorSignal,
                          inverse, inverse_many, norm_lp, transform, transform_many)

__all__ = [
    "BankEntry",
    "MultiplierBank",
    "DoubleIndexed",
    "sharp_projection",
    "square_function",
    "s_bank",
    "apply_S",
    "truncation_multiplier",
    "g_bank",
    "g_components",
    "phi_matrix",
    "phi_bank",
    "merge_R",
    "h_bank",
    "rf_operator_H",
    "decomposition_residual",
    "DecompositionChecker",
    "annihilation_check",
]

_OFFSET_TOL = 1e-9


@dataclass(frozen=True)
class BankEntry:
    """``f -> exp(-2 pi i shift x) (f_hat * multiplier)^v``.

    ``multiplier`` is evaluated at the absolute input frequencies.
    """

    key: object
    multiplier: Callable[[np.ndarray], np.ndarray]
    shift: float = 0.0


@dataclass
class MultiplierBank:
    entries: tuple
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.entries = tuple(self.entries)

    @property
    def keys(self):
        return tuple(e.key for e in self.entries)

    def matrix(self, grid: SampleGrid, offset: float = 0.0) -> np.ndarray:
        """Multiplier values ``(K, N)`` at ``grid.frequencies + offset``; cached."""
        tag = (grid, float(offset))
        if tag not in self._cache:
            xi = grid.frequencies + offset
            rows = [np.asarray(e.multiplier(xi), dtype=float) for e in self.entries]
            mat = np.stack(rows) if rows else np.zeros((0, grid.size))
            mat.setflags(write=False)
            self._cache[tag] = mat
        return self._cache[tag]

    def shifts(self) -> np.ndarray:
        return np.array([e.shift for e in self.entries], dtype=float)

    def apply(self, f: SampledSignal) -> "DoubleIndexed":
        spec = transform(f)
        coeffs = self.matrix(f.grid, f.offset) * spec.coefficients[None, :]
        return DoubleIndexed(f.grid, self.keys, coeffs, f.offset - self.shifts())


@dataclass(frozen=True)
class DoubleIndexed:
    """Keyed family of signals stored by their spectra."""

    grid: SampleGrid
    keys: tuple
    coefficients: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        keys = tuple(self.keys)
        c = np.asarray(self.coefficients, dtype=np.complex128).reshape(len(keys), self.grid.size)
        off = np.broadcast_to(np.asarray(self.offsets, dtype=float), (len(keys),)).copy()
        c.setflags(write=False)
        off.setflags(write=False)
        object.__setattr__(self, "keys", keys)
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "offsets", off)

    def __len__(self):
        return len(self.keys)

    @classmethod
    def from_vector(cls, vs: VectorSignal) -> "DoubleIndexed":
        return cls(vs.grid, vs.keys, transform_many(vs), vs.offsets)

    def to_vector(self) -> VectorSignal:
        return inverse_many(self.grid, self.keys, self.coefficients, self.offsets)

    def energy(self) -> np.ndarray:
        """Per-component squared L^2 norm (Plancherel)."""
        return np.sum(np.abs(self.coefficients) ** 2, axis=1) / self.grid.period

    def norm(self) -> float:
        """L^2(l^2) norm of the family."""
        return float(math.sqrt(self.energy().sum()))


def _as_family(x) -> DoubleIndexed:
    if isinstance(x, DoubleIndexed):
        return x
    if isinstance(x, VectorSignal):
        return DoubleIndexed.from_vector(x)
    raise TypeError(f"expected DoubleIndexed or VectorSignal, got {type(x).__name__}")


def _realign(coeffs: np.ndarray, offset: float, target: float, period: float) -> np.ndarray:
    """Re-express a spectrum on ``n / T + target``; offsets must differ by k / T."""
    steps = (offset - target) * period
    k = round(steps)
    if abs(steps - k) > _OFFSET_TOL * max(1.0, abs(steps)):
        raise StructuralError(
            f"offsets {offset!r} and {target!r} do not differ by a multiple of 1/T")
    if k == 0:
        return coeffs
    out = np.zeros_like(coeffs)
    if k > 0:
        out[..., k:] = coeffs[..., :-k]
    else:
        out[..., :k] = coeffs[..., -k:]
    return out


# --- sharp projections -------------------------------------------------------

def sharp_projection(f: SampledSignal, interval) -> SampledSignal:
    """``(f_hat * indicator)^v``; endpoints included."""
    a, b = float(interval[0]), float(interval[1])
    spec = transform(f)
    xi = spec.frequencies
    tol = 1e-9 * max(1.0, abs(a), abs(b))
    mask = (xi >= a - tol) & (xi <= b + tol)
    return inverse(Spectrum(f.grid, spec.coefficients * mask, f.offset))


def square_function(f: SampledSignal, family: IntervalFamily) -> np.ndarray:
    """Pointwise ``(sum_m |M_m f|^2)^(1/2)``."""
    spec = transform(f)
    xi = spec.frequencies
    rows = []
    for a, b in family:
        tol = 1e-9 * max(1.0, abs(a), abs(b))
        rows.append(spec.coefficients * ((xi >= a - tol) & (xi <= b + tol)))
    vs = inverse_many(f.grid, list(range(len(rows))), np.array(rows), f.offset)
    return vs.magnitude()


# --- smoothed projections ----------------------------------------------------

def truncation_multiplier(eta, nu: int, top: int, A: float) -> np.ndarray:
    """``sum_{v=nu}^{top} theta_hat_v(eta)``, in closed (telescoped) form."""
    from .profiles import smooth_step
    eta = np.asarray(eta, dtype=float)
    out = np.zeros(eta.shape)
    pos = eta > 0
    tau = np.log(eta[pos]) / math.log(A)
    out[pos] = smooth_step(tau - nu + 1.0) - smooth_step(tau - top)
    return out


def _validate_sigma(sigma):
    if sigma not in (1, 2):
        raise DomainError(f"sigma must be 1 or 2, got {sigma!r}")


def s_bank(family: IntervalFamily, sigma: int = 1, nu: int | None = None,
           A: float = 1.03) -> MultiplierBank:
    """Bank realising ``S^sigma`` (optionally with the nu-truncated bumps).

    sigma=2 is built from the sigma=1 bumps of the mirrored family:
    ``psi2_m(xi) = psi1_m'(-xi)`` where ``m'`` is the reflected interval.
    """
    _validate_sigma(sigma)
    from .cover import n_index
    psi1, _ = build_bump_pair()
    entries = []
    mirrored = family.mirrored() if sigma == 2 else family
    sign = 1.0 if sigma == 1 else -1.0
    for m, (a, b) in enumerate(mirrored):
        bump = psi_sigma_m(psi1, (a, b))
        top = n_index((a, b), A)

        def mult(xi, bump=bump, a=a, top=top):
            x = sign * xi
            out = bump(x)
            if nu is not None:
                out = out * truncation_multiplier(x - a, nu, top, A)
            return out
        # sigma=1 demodulates by a_m, sigma=2 by b_m = -a_m'
        entries.append(BankEntry(m, mult, sign * a))
    return MultiplierBank(entries)


def apply_S(f: SampledSignal, family: IntervalFamily, cover: CoverAssignment | None = None,
            sigma: int = 1, nu: int | None = None, bank: MultiplierBank | None = None
            ) -> VectorSignal:
    """Components ``exp(-2 pi i c_m x) (f_hat psi^sigma_m)^v`` with c_m = a_m or b_m."""
    _validate_sigma(sigma)
    if bank is None:
        A = cover.A if cover is not None else 1.03
        bank = s_bank(family, sigma, nu, A)
    return bank.apply(f).to_vector()


# --- g, Phi, R -------------------------------------------------------------------

def g_bank(cover: CoverAssignment, plateau=PHI_PLATEAU, min_v: int | None = None
           ) -> MultiplierBank:
    entries = []
    phis = {}
    for e in cover.entries:
        if min_v is not None and e.v < min_v:
            continue
        if e.k not in phis:
            phis[e.k] = dilate_phi(e.k, plateau)
        phi = phis[e.k]
        entries.append(BankEntry(e.key, lambda xi, phi=phi, a=e.a_mv: phi(xi - a), e.a_mv))
    return MultiplierBank(entries)


def g_components(f: SampledSignal, cover: CoverAssignment, bank: MultiplierBank | None = None
                 ) -> DoubleIndexed:
    """``g_{m,v} = phi_k * (exp(-2 pi i a_{m,v} .) f)``."""
    bank = bank or g_bank(cover)
    return bank.apply(f)


def _entry_map(cover: CoverAssignment):
    return {e.key: e for e in cover.entries}


def _check_keys(keys, cover):
    table = _entry_map(cover)
    missing = [k for k in keys if k not in table]
    if missing:
        raise StructuralError(f"components {missing[:3]} are not in the cover")
    return table


def phi_matrix(grid: SampleGrid, keys, offsets, cover: CoverAssignment) -> np.ndarray:
    """Rows ``psi_tilde((xi + delta_{m,v}) / l_m)`` on each component's lattice."""
    table = _check_keys(keys, cover)
    psi_t = build_psi_tilde()
    lengths = cover.family.lengths
    xi0 = grid.frequencies
    out = np.empty((len(keys), grid.size))
    for row, (key, off) in enumerate(zip(keys, offsets)):
        e = table[key]
        out[row] = psi_t((xi0 + off + e.delta) / lengths[e.m])
    return out


def phi_bank(gs, cover: CoverAssignment, matrix: np.ndarray | None = None) -> DoubleIndexed:
    """Multiply component (m, v) by ``psi_tilde((xi + delta_{m,v}) / l_m)``.

    ``matrix`` may carry a precomputed :func:`phi_matrix` for these offsets.
    """
    gs = _as_family(gs)
    if matrix is None:
        matrix = phi_matrix(gs.grid, gs.keys, gs.offsets, cover)
    return DoubleIndexed(gs.grid, gs.keys, gs.coefficients * matrix, gs.offsets)


def merge_R(hs, cover: CoverAssignment) -> VectorSignal:
    """``R(h)_m = sum_v theta_v * (exp(2 pi i delta_{m,v} .) h_{m,v})``.

    Terms for one m must share a frequency lattice after modulation.
    """
    hs = _as_family(hs)
    table = _check_keys(hs.keys, cover)
    grid = hs.grid
    xi0 = grid.frequencies
    M = len(cover.family)
    acc = np.zeros((M, grid.size), complex)
    base = [None] * M
    for row, key in enumerate(hs.keys):
        c = hs.coefficients[row]
        if not np.any(c):
            continue
        e = table[key]
        off = hs.offsets[row] + e.delta
        if base[e.m] is None:
            base[e.m] = off
        else:
            c = _realign(c, off, base[e.m], grid.period)
        acc[e.m] += c * theta_hat_v(xi0 + base[e.m], e.v, cover.A)
    offsets = [0.0 if b is None else b for b in base]
    return inverse_many(grid, list(range(M)), acc, offsets)


# --- Rubio de Francia operator -------------------------------------------------

def _validate_kj(kj_list):
    spans = []
    for k, j in kj_list:
        lo, hi = j * 2.0 ** k, (j + 8) * 2.0 ** k
        if lo <= 0.0 <= hi:
            raise DomainError(f"J_({k},{j}) = [{lo}, {hi}] contains the origin")
        spans.append((lo, hi, (k, j)))
    spans.sort()
    for (lo0, hi0, kj0), (lo1, hi1, kj1) in zip(spans, spans[1:]):
        if lo1 < hi0:
            raise DomainError(f"J_{kj0} and J_{kj1} overlap")


def h_bank(kj_list, plateau=PHI_PLATEAU) -> MultiplierBank:
    kj_list = [tuple(map(int, kj)) for kj in kj_list]
    _validate_kj(kj_list)
    entries = []
    for k, j in kj_list:
        phi = dilate_phi(k, plateau)
        shift = j * 2.0 ** k
        entries.append(BankEntry((k, j), lambda xi, phi=phi, s=shift: phi(xi - s), shift))
    return MultiplierBank(entries)


def rf_operator_H(f: SampledSignal, kj_list, bank: MultiplierBank | None = None
                  ) -> VectorSignal:
    """Component (k, j) is ``phi_k * (exp(-2 pi i j 2**k .) f)``."""
    bank = bank or h_bank(kj_list)
    return bank.apply(f).to_vector()


# --- decomposition identity ----------------------------------------------------

class DecompositionChecker:
    """Precomputes both sides' banks once, then checks many signals.

    The left side is ``apply_S(sigma=1, nu)``; the right side is
    ``merge_R(phi_bank(g_components(f)))`` with the v-sum starting at ``nu``.
    """

    def __init__(self, family: IntervalFamily, cover: CoverAssignment,
                 nu: int | None = None, plateau=PHI_PLATEAU):
        self.family = family
        self.cover = cover
        self.nu = cover.v_min if nu is None else int(nu)
        if self.nu < cover.v_min:
            raise DomainError(f"nu={self.nu} below v_min={cover.v_min}")
        self.lhs = s_bank(family, 1, self.nu, cover.A)
        self.g = g_bank(cover, plateau, min_v=self.nu)
        self._phi = {}

    def sides(self, f: SampledSignal) -> tuple[VectorSignal, VectorSignal]:
        lhs = self.lhs.apply(f).to_vector()
        gs = self.g.apply(f)
        tag = (f.grid, f.offset)
        if tag not in self._phi:
            self._phi[tag] = phi_matrix(f.grid, gs.keys, gs.offsets, self.cover)
        rhs = merge_R(phi_bank(gs, self.cover, self._phi[tag]), self.cover)
        return lhs, rhs

    def residual(self, f: SampledSignal) -> float:
        total = norm_lp(f, 2)
        if total == 0.0:
            return 0.0
        lhs, rhs = self.sides(f)
        if lhs.keys != rhs.keys:
            raise StructuralError("side mismatch")
        diff = np.empty_like(lhs.values)
        for m in range(len(lhs)):
            r = rhs.values[m]
            if not np.allclose(rhs.offsets[m], lhs.offsets[m], atol=_OFFSET_TOL, rtol=0):
                if np.any(r):
                    r = rhs.component(m)
                    spec = transform(r)
                    c = _realign(spec.coefficients, r.offset, lhs.offsets[m], f.grid.period)
                    r = inverse(Spectrum(f.grid, c, lhs.offsets[m])).values
            diff[m] = lhs.values[m] - r
        return norm_lp(VectorSignal(f.grid, lhs.keys, diff, lhs.offsets), 2) / total


def decomposition_residual(f: SampledSignal, family: IntervalFamily,
                           cover: CoverAssignment, nu: int | None = None) -> float:
    """Relative L^2(l^2) gap between the two sides of the decomposition identity."""
    return DecompositionChecker(family, cover, nu).residual(f)


# --- polynomial annihilation by direct quadrature ---------------------------------

def _tail_envelope(profile, ramp: float, nodes: int) -> tuple[float, float]:
    """Fit ``log |K(u)| <= a - c sqrt(u ramp)`` above the roundoff floor.

    Kernels of exp(-1/t)-type profiles decay like exp(-c sqrt(u)); the fit
    uses the per-bin maxima of |K| so it tracks the upper envelope.
    """
    w = np.linspace(1.5, 10.0, 35)       # sqrt of u * ramp
    u = w ** 2 / ramp
    probes = u[:, None] + np.linspace(0.0, 1.0, 17)[None, :] * (2.0 * w / ramp)[:, None]
    lo, hi = profile.support
    nodes = max(nodes, int(8 * (hi - lo) * probes.max()))
    mags = np.abs(profile_kernel(profile, probes, nodes=nodes)).max(axis=1)
    keep = mags > 1e-12 * mags.max()
    if keep.sum() < 3:
        raise StructuralError("kernel envelope has too few samples above roundoff")
    slope, icpt = np.polyfit(w[keep], np.log(mags[keep]), 1)
    # lift the intercept so the line sits above every kept sample
    icpt += float(np.max(np.log(mags[keep]) - (slope * w[keep] + icpt)))
    return float(icpt), float(-slope)


def annihilation_check(kind: str, degree: int, cover: CoverAssignment | None = None,
                       key=None, kj=(0, 2), points: int = 64, reach: float | None = None,
                       nodes: int = 2048) -> dict:
    """Apply a modulated kernel to ``q(y) = y**degree`` by direct quadrature.

    ``kind="H"``: ``int phi_k(t - y) exp(-2 pi i j 2**k y) q(y) dy``.
    ``kind="R"``: ``int theta_v(t - y) exp(2 pi i delta_{m,v} y) q(y) dy``.

    Polynomials are not periodic, so this runs on the line for ``t`` in
    [-1, 1].  The kernel is truncated to ``|u| <= reach`` (default 120 ramp
    widths of the profile) and sampled finely enough that the trapezoid rule
    has no aliasing.  ``relative_output`` divides by the gross integral
    ``int |K(u)| |q(t-u)| du``.  ``tail_bound`` bounds the neglected
    ``int_{|u|>reach} |K| |q|`` through a fitted exp(a - c sqrt(u)) envelope.
    """
    from scipy.integrate import quad
    from .profiles import MultiplierProfile
    if kind == "H":
        k, j = kj
        profile = dilate_phi(k)
        freq = -j * 2.0 ** k
        ramp = 2.0 ** k
    elif kind == "R":
        if cover is None:
            raise DomainError("kind='R' needs a cover")
        e = _entry_map(cover)[key]
        theta = build_theta(cover.A)
        scale = cover.A ** e.v
        profile = MultiplierProfile(lambda xi: theta.fn(xi / scale),
                                    (theta.support[0] * scale, theta.support[1] * scale))
        freq = e.delta
        ramp = scale * math.log(cover.A)
    else:
        raise DomainError(f"unknown kind {kind!r}")
    if reach is None:
        reach = 120.0 / ramp
    lo, hi = profile.support
    band = max(abs(lo + freq), abs(hi + freq), abs(lo), abs(hi))
    du = 1.0 / (2.0 * band)
    n = int(math.ceil(reach / du))
    u = du * np.arange(-n, n + 1)
    ker = profile_kernel(profile, u, nodes=nodes)
    t = np.linspace(-1.0, 1.0, points)
    y = t[:, None] - u[None, :]
    qy = y ** degree
    out = du * (np.exp(2j * np.pi * freq * y) * qy) @ ker
    gross = du * (np.abs(qy) @ np.abs(ker))
    a, c = _tail_envelope(profile, ramp, nodes)
    if c <= 0:
        raise StructuralError("kernel envelope does not decay")
    # substitute w = sqrt(u ramp): both tails, |q(t - u)| <= (1 + u)**degree
    w0 = math.sqrt(reach * ramp)
    tail, _ = quad(lambda w: 2.0 * math.exp(a - c * w) * (1.0 + w * w / ramp) ** degree
                   * 2.0 * w / ramp, w0, w0 + 200.0 / c, limit=200)
    return {"kind": kind, "degree": degree,
            "max_output": float(np.abs(out).max()),
            "relative_output": float(np.max(np.abs(out) / gross)),
            "tail_bound": float(tail), "relative_tail": float(tail / gross.min()),
            "reach": float(reach)}
