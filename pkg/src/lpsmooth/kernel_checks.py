"""Numerical checks of the Calderon-Zygmund smoothness estimates.

Kernels are the inverse transforms of compactly supported profiles:

* ``theta_v``   with transform ``theta_hat(xi / A**v)``,
* ``phi_k``     with transform ``phi_hat(xi / 2**k)``,
* ``Phi_{m,v}`` with transform ``psi_tilde((xi + delta) / l)``.

The Taylor remainder of a kernel ``K`` about ``u0`` at step ``h`` is computed
directly in frequency,

    K(u0 + h) - sum_{a<r} K^(a)(u0) h^a / a!
        = int K_hat(xi) exp(2 pi i xi u0) E_r(2 pi i xi h) dxi,

with ``E_r(z) = exp(z) - sum_{a<r} z^a / a!`` summed as a series for small
``|z|``.  This avoids the cancellation of subtracting a Taylor polynomial
from a kernel value.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh

from .errors import DomainError, ResolutionError
from .profiles import (MultiplierProfile, build_phi_hat, build_psi_tilde, build_theta,
                       profile_kernel)

__all__ = [
    "theta_kernel_profile",
    "phi_kernel_profile",
    "Phi_kernel_profile",
    "taylor_remainder",
    "KernelApproximant",
    "taylor_approximant",
    "DecayReport",
    "fit_slope",
    "smooth1_profile",
    "smooth2_profile",
    "smooth2_constant",
    "smooth2_uniformity",
    "smooth3_decay",
    "crossover_check",
]

ROUNDOFF_FLOOR = 1e-14


# --- kernel profiles -----------------------------------------------------------

def theta_kernel_profile(A: float, v: int) -> MultiplierProfile:
    theta = build_theta(A)
    scale = A ** v
    lo, hi = theta.support
    return MultiplierProfile(lambda xi: theta.fn(xi / scale), (lo * scale, hi * scale),
                             f"theta_{v}[A={A:g}]")


def phi_kernel_profile(k: int) -> MultiplierProfile:
    phi = build_phi_hat()
    scale = 2.0 ** k
    lo, hi = phi.support
    return MultiplierProfile(lambda xi: phi.fn(xi / scale), (lo * scale, hi * scale),
                             f"phi_{k}")


def Phi_kernel_profile(length: float, delta: float) -> MultiplierProfile:
    """Transform ``psi_tilde((xi + delta) / length)`` of ``exp(-2 pi i delta t) phi_m(t)``."""
    psi_t = build_psi_tilde()
    lo, hi = psi_t.support
    return MultiplierProfile(lambda xi: psi_t.fn((xi + delta) / length),
                             (lo * length - delta, hi * length - delta),
                             f"Phi[l={length:g},delta={delta:g}]")


# --- Taylor remainders ------------------------------------------------------------

def _exp_remainder(z: np.ndarray, r: int) -> np.ndarray:
    """``exp(z) - sum_{a<r} z^a / a!`` without cancellation for small |z|."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < 2.0
    if small.any():
        zs = z[small]
        term = zs ** r / math.factorial(r)
        acc = term.copy()
        for a in range(r + 1, r + 40):
            term = term * zs / a
            acc += term
        out[small] = acc
    if (~small).any():
        zb = z[~small]
        poly = np.zeros_like(zb)
        term = np.ones_like(zb)
        for a in range(r):
            poly += term
            term = term * zb / (a + 1)
        out[~small] = np.exp(zb) - poly
    return out


def _nodes(profile: MultiplierProfile, reach: float, minimum: int = 256) -> tuple[np.ndarray, np.ndarray]:
    """Trapezoid nodes resolving oscillations up to ``reach`` without aliasing."""
    lo, hi = profile.support
    width = hi - lo
    n = max(minimum, int(math.ceil(width * reach + 400)) + 1)
    xi = np.linspace(lo, hi, n)
    w = np.full(n, width / (n - 1))
    w[0] = w[-1] = 0.5 * w[0]
    return xi, w * profile(xi)


_BLOCK = 32


def _phase_sum(weights: np.ndarray, xi: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """``weights @ exp(2 pi i xi Y)`` for equispaced ``xi``.

    Nodes are taken in blocks ``xi_a + j dxi`` (j < B), so the phase factors
    into ``exp(2 pi i xi_a Y) exp(2 pi i j dxi Y)``: two exactly evaluated
    exponentials per product instead of one per node.
    """
    n = xi.size
    dxi = (xi[-1] - xi[0]) / (n - 1)
    steps = np.exp(2j * np.pi * dxi * np.outer(np.arange(_BLOCK), Y))
    out = np.zeros((weights.shape[0], Y.size), complex)
    for a in range(0, n, _BLOCK):
        b = min(a + _BLOCK, n)
        anchor = np.exp(2j * np.pi * (xi[0] + a * dxi) * Y)
        out += (weights[:, a:b] @ steps[:b - a]) * anchor[None, :]
    return out


def taylor_remainder(profile: MultiplierProfile, h, Y, r: int, resolved: bool = False
                     ) -> np.ndarray:
    """``K(Y + h) - (degree r-1 Taylor polynomial of K at Y)(Y + h)``.

    ``h`` and ``Y`` are 1-d arrays; the result has shape ``(len(h), len(Y))``.

    For large ``|xi h|`` the quadrature weights are much larger than the
    remainder they sum to, which leaves an absolute roundoff floor of about
    ``eps * sum |weights|``, growing slowly with the phase range.  With
    ``resolved=True`` entries below that floor are returned as exact zeros.
    """
    if r < 0:
        raise DomainError(f"r must be >= 0, got {r}")
    h = np.atleast_1d(np.asarray(h, dtype=float))
    Y = np.atleast_1d(np.asarray(Y, dtype=float))
    reach = float(np.max(np.abs(Y), initial=0.0) + np.max(np.abs(h), initial=0.0))
    xi, w = _nodes(profile, reach)
    weights = w[None, :] * _exp_remainder(2j * np.pi * np.outer(h, xi), r)
    out = np.empty((h.size, Y.size), complex)
    chunk = max(1, 2 ** 20 // _BLOCK)
    for s in range(0, Y.size, chunk):
        out[:, s:s + chunk] = _phase_sum(weights, xi, Y[s:s + chunk])
    if resolved:
        out[np.abs(out) <= _roundoff_floor(weights, xi, Y)] = 0.0
    return out


def _roundoff_floor(weights, xi, Y) -> np.ndarray:
    # calibrated against 40-digit sums: observed errors stay below a
    # quarter of this bound
    phase = 2.0 * np.pi * np.max(np.abs(xi)) * np.abs(Y)
    return (np.finfo(float).eps * np.abs(weights).sum(axis=1)[:, None]
            * (64.0 + 2.0 * np.sqrt(phase))[None, :])


@dataclass(frozen=True)
class KernelApproximant:
    """``p(x, tau) = sum_{a<r} K^(a)(x0 - tau) (x - x0)^a / a!``."""

    profile: MultiplierProfile
    x0: float
    r: int

    def derivatives(self, tau) -> np.ndarray:
        """``K^(a)(x0 - tau)`` for a < r, shape ``(r, len(tau))``."""
        u = self.x0 - np.atleast_1d(np.asarray(tau, dtype=float))
        reach = float(np.max(np.abs(u)))
        return np.stack([profile_kernel(self.profile, u, order=a,
                                        nodes=_nodes(self.profile, reach)[0].size)
                         for a in range(self.r)])

    def __call__(self, x, tau) -> np.ndarray:
        """Values on the outer grid ``len(x) x len(tau)``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        d = self.derivatives(tau)
        powers = np.stack([(x - self.x0) ** a / math.factorial(a) for a in range(self.r)])
        return powers.T @ d

    def kernel(self, u) -> np.ndarray:
        u = np.atleast_1d(np.asarray(u, dtype=float))
        return profile_kernel(self.profile, u,
                              nodes=_nodes(self.profile, float(np.max(np.abs(u))))[0].size)


def taylor_approximant(profile: MultiplierProfile, x0: float, r: int) -> KernelApproximant:
    if r < 1:
        raise DomainError(f"r must be >= 1, got {r}")
    return KernelApproximant(profile, float(x0), int(r))


# --- reports ----------------------------------------------------------------------

def fit_slope(x, y) -> tuple[float, float]:
    """Least-squares line through (x, y)."""
    slope, icpt = np.polyfit(np.asarray(x, float), np.asarray(y, float), 1)
    return float(slope), float(icpt)


@dataclass
class DecayReport:
    kind: str
    r: int
    abscissa: list
    lhs: list
    slope: float
    intercept: float
    target: float
    constant: float
    fit_range: tuple
    floor_hits: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def degenerate(self) -> bool:
        return len(self.floor_hits) >= len(self.lhs) - 1

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, default=float)

    def to_csv(self, path):
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["kind", "r", "abscissa", "lhs", "floor"])
            for x, y in zip(self.abscissa, self.lhs):
                w.writerow([self.kind, self.r, repr(float(x)), repr(float(y)),
                            int(x in self.floor_hits)])


def _log_fit(dist, vals, lo, hi):
    dist = np.asarray(dist, float)
    vals = np.asarray(vals, float)
    floor = vals <= ROUNDOFF_FLOOR * vals.max()
    keep = (dist >= lo) & (dist <= hi) & ~floor
    # drop the end points: preasymptotic at one end, closest to roundoff at the other
    idx = np.flatnonzero(keep)
    if idx.size >= 4:
        keep[idx[[0, -1]]] = False
    if keep.sum() < 2:
        return math.nan, math.nan, [float(d) for d in dist[floor]]
    s, c = fit_slope(np.log2(dist[keep]), np.log2(vals[keep]))
    return s, c, [float(d) for d in dist[floor]]


# --- Smooth1: the theta_v family ------------------------------------------------

def _theta_v_range(A, r, length, dmin, dmax):
    # small v: terms ~ A^{v(r+1)}; large v: kernel decay at A^v d
    lo = math.floor(math.log(1e-9 / dmax) / math.log(A) - 40.0 / ((r + 1) * math.log(A)))
    hi = math.ceil(math.log(4000.0 / dmin) / math.log(A))
    return range(lo, hi + 1)


def theta_remainders(A: float, r: int, h, dists) -> tuple[np.ndarray, np.ndarray]:
    """Per-v remainders ``|theta_v(x - tau) - p_{v,I}(x, tau)|``.

    Uses ``theta_v(u) = A^v theta(A^v u)``: one base profile, rescaled
    arguments.  Returns ``(vs, R)`` with ``R`` of shape
    ``(len(vs), len(h), len(dists))``.
    """
    h = np.atleast_1d(np.asarray(h, float))
    dists = np.atleast_1d(np.asarray(dists, float))
    base = build_theta(A)
    vs = np.array(list(_theta_v_range(A, r, 1.0, dists.min(), dists.max())))
    scales = A ** vs.astype(float)
    out = np.zeros((vs.size, h.size, dists.size))
    # tau = x0 + d, so x0 - tau = -d
    for i, s in enumerate(scales):
        Y = -s * dists
        live = np.abs(Y) < 6000.0
        if not live.any():
            continue
        rem = taylor_remainder(base, s * h, Y[live], r, resolved=True)
        out[i][:, live] = s * np.abs(rem)
    return vs, out


def smooth1_profile(r: int, A: float = 1.03, length: float = 1.0, dists=None,
                    probes: int = 3) -> DecayReport:
    """``(sum_v |theta_v(x - tau) - p_{v,I}(x, tau)|^2)^(1/2)`` against |tau - x0|.

    The modulation ``exp(2 pi i delta tau)`` has modulus one and drops out.
    ``x`` ranges over ``probes`` points of I; distances default to
    ``|I| * 2**[1, 8]``.
    """
    if r < 1:
        raise DomainError(f"r must be >= 1, got {r}")
    if dists is None:
        dists = length * 2.0 ** np.linspace(1.0, 8.0, 15)
    dists = np.asarray(dists, float)
    h = np.linspace(0.0, 0.5 * length, probes + 1)[1:]
    vs, R = theta_remainders(A, r, h, dists)
    lhs = np.sqrt(np.sum(R ** 2, axis=0)).max(axis=0)
    bound = length ** r / dists ** (r + 1)
    slope, icpt, floor = _log_fit(dists, lhs, 2 * length, 2 ** 8 * length)
    tail = R[:2].max() if vs.size else 0.0
    return DecayReport("smooth1", r, dists.tolist(), lhs.tolist(), slope, icpt,
                       -(r + 1.0), float(np.max(lhs / bound)),
                       (2 * length, 2 ** 8 * length), floor,
                       {"A": A, "length": length, "v_range": [int(vs[0]), int(vs[-1])],
                        "truncation_term": float(tail)})


def crossover_check(r: int, A: float = 1.03, length: float = 1.0, dists=None) -> dict:
    """Where the per-v remainder peaks, against the predicted A^v = 1/|tau - x0|.

    Below the peak the first bound (growth like A^{v(r+1)}) is the sharper
    one and above it the second (decay in A^v |tau - x0|); the peak index
    minus ``log_A(1/d)`` should not drift with d.
    """
    if dists is None:
        dists = length * 2.0 ** np.linspace(1.0, 8.0, 8)
    dists = np.asarray(dists, float)
    vs, R = theta_remainders(A, r, [0.5 * length], dists)
    per_v = R[:, 0, :]
    peaks = vs[np.argmax(per_v, axis=0)]
    predicted = np.log(1.0 / dists) / math.log(A)
    offsets = peaks - predicted
    centre = float(np.median(offsets))
    # calibrated constants of the two bounds over all probes
    c1 = float(np.max(per_v / (A ** (vs[:, None] * (r + 1.0)) * length ** r)))
    c2 = float(np.max(per_v * dists[None, :] ** (r + 2) / (A ** (-vs[:, None] * 1.0) * length ** r)))
    return {"r": r, "A": A, "dists": dists.tolist(), "peak_v": peaks.tolist(),
            "predicted_v": predicted.tolist(), "offset": centre,
            "max_drift": float(np.max(np.abs(offsets - centre))),
            "C1": c1, "C2": c2}


# --- Smooth2: the Phi_{m,v} family ------------------------------------------------

def smooth2_profile(r: int, length: float, delta: float = 0.0, I_len: float | None = None,
                    dists=None, probes: int = 3) -> DecayReport:
    """``|Phi(tau - t) - p(tau, t)|`` for ``tau`` in I against ``|t - tau0|``."""
    if r < 1:
        raise DomainError(f"r must be >= 1, got {r}")
    if not 0.0 <= delta <= length:
        raise DomainError(f"delta={delta} outside [0, l={length}]")
    I_len = 1.0 / length if I_len is None else I_len
    if dists is None:
        dists = I_len * 2.0 ** np.linspace(1.0, 8.0, 15)
    dists = np.asarray(dists, float)
    h = np.concatenate([-np.linspace(0, 0.5 * I_len, probes + 1)[1:],
                        np.linspace(0, 0.5 * I_len, probes + 1)[1:]])
    prof = Phi_kernel_profile(length, delta)
    # tau0 - t = -d or +d; both sides of the window
    rem = np.abs(taylor_remainder(prof, h, np.concatenate([-dists, dists]), r, resolved=True))
    lhs = np.maximum(rem[:, :dists.size], rem[:, dists.size:]).max(axis=0)
    bound = I_len ** r / dists ** (r + 1)
    slope, icpt, floor = _log_fit(dists, lhs, 2 * I_len, 2 ** 8 * I_len)
    live = lhs > ROUNDOFF_FLOOR * lhs.max()
    return DecayReport("smooth2", r, dists.tolist(), lhs.tolist(), slope, icpt,
                       -(r + 1.0), float(np.max((lhs / bound)[live])),
                       (2 * I_len, 2 ** 8 * I_len), floor,
                       {"length": length, "delta": delta, "I_len": I_len})


def smooth2_constant(r: int, length: float, delta: float,
                     scales=(0.25, 0.5, 1.0, 2.0, 4.0)) -> float:
    """Sup of the normalised Smooth2 ratio over windows of length ``scale / l``."""
    return max(smooth2_profile(r, length, delta, I_len=c / length).constant for c in scales)


def smooth2_uniformity(r: int, cover, stride: int = 1) -> dict:
    """Recorded constant of Smooth2 across cover entries (m, v)."""
    lengths = cover.family.lengths
    consts = {}
    for e in cover.entries[::stride]:
        consts[e.key] = smooth2_constant(r, lengths[e.m], e.delta)
    vals = np.array(list(consts.values()))
    return {"r": r, "count": len(vals), "min": float(vals.min()), "max": float(vals.max()),
            "spread": float(vals.max() / vals.min())}


# --- Smooth3: the Rubio de Francia kernel ------------------------------------------

def _top_eigenvalue(E: np.ndarray, weights: np.ndarray, periods: list[int]) -> float:
    """Largest eigenvalue of ``f -> sum_k w_k E_k sum_{y' ~_k y} conj(E_k(y')) f(y')``.

    Levels whose period exceeds the grid only see their own sample, so they
    collapse into one diagonal multiplier.
    """
    K, L = E.shape
    diag = np.zeros(L)
    banded = []
    for k in range(K):
        if periods[k] >= L:
            diag += weights[k] * np.abs(E[k]) ** 2
        elif np.any(E[k]):
            banded.append((weights[k], E[k], E[k].conj(), periods[k]))
    if not banded:
        return float(diag.max())

    def matvec(f):
        f = np.asarray(f).reshape(-1)
        out = diag * f
        for w, e, ec, per in banded:
            s = (ec * f).reshape(L // per, per).sum(axis=0)
            out += w * e * np.tile(s, L // per)
        return out

    op = LinearOperator((L, L), matvec=matvec, dtype=complex)
    full = diag + sum(w * np.abs(e) ** 2 for w, e, _, _ in banded)
    v0 = np.sqrt(full) + 1e-30
    val = eigsh(op, k=1, which="LA", v0=v0, tol=1e-5, ncv=64, maxiter=20000,
                return_eigenvectors=False)
    return float(max(val[0], diag.max()))


def _smooth3_level_range(sigma: int, p: int, r: int) -> tuple[int, int]:
    # 2^k |I| ~ 2^-sigma is the dominant level; lower levels fall off like
    # 2^{k(r+1/2)}, higher ones like exp(-c sqrt(2^{k+sigma}))
    centre = -p - sigma
    return centre - int(math.ceil(24.0 / (r + 0.5))), centre + 7


def smooth3_decay(r: int, sigma_max: int = 8, I_len: float = 1.0,
                  t_probes=(-0.5, 0.25, 0.5), fit=(2, None)) -> DecayReport:
    """Measure both sides of the Smooth3 estimate for sigma = 1 .. sigma_max + 1.

    ``lhs[sigma]`` is the sup over unit ``xi`` in l^2(Z^2) and over the ``t``
    probes (in units of |I|, centred at 0) of the L^2(I_sigma) norm of
    ``<kappa(t, .) - q_I(t, .), xi>``.  The sup over ``xi`` equals the square
    root of the top eigenvalue of T T^*, where summing the exponentials over
    ``j`` turns T T^* into
    ``sum_k 2^-k E_k(y) sum_n conj(E_k(y - n 2^-k)) f(y - n 2^-k)``,
    ``E_k`` being the Taylor remainder of ``phi_k``.  On a dyadic y-grid that
    is a sum over residue classes, so each product costs O(grid) per level.

    ``extra["gamma_sum"]`` tabulates ``sum_k gamma_{k,sigma}``.
    """
    if r < 1:
        raise DomainError(f"r must be >= 1, got {r}")
    if sigma_max < 4:
        raise DomainError(f"sigma_max must be >= 4, got {sigma_max}")
    p = math.log2(I_len)
    if abs(p - round(p)) > 1e-12:
        raise DomainError(f"|I| must be a power of two, got {I_len}")
    p = int(round(p))
    base = build_phi_hat()
    t = np.asarray(t_probes, float) * I_len
    sigmas = list(range(1, sigma_max + 2))
    lhs, gamma_sum = [], []
    for sigma in sigmas:
        k_lo, k_hi = _smooth3_level_range(sigma, p, r)
        q = k_hi + 5                        # grid step 2^-q: 4 samples per period of the top band
        half = 2 ** sigma * I_len
        L = int(round(2 * half * 2 ** q))
        y = -half + np.arange(L) / 2.0 ** q
        shell = np.abs(y) > half / 2
        ys = y[shell]
        levels = list(range(k_lo, k_hi + 1))
        E = np.zeros((len(levels), t.size, L), complex)
        for i, k in enumerate(levels):
            s = 2.0 ** k
            E[i][:, shell] = s * taylor_remainder(base, s * t, -s * ys, r, resolved=True)
        weights = np.array([2.0 ** -k for k in levels])
        periods = [2 ** (q - k) for k in levels]
        best = 0.0
        for ti in range(t.size):
            best = max(best, _top_eigenvalue(E[:, ti, :], weights, periods))
        lhs.append(math.sqrt(best))
        gamma_sum.append(float(np.abs(E).max(axis=(1, 2)).sum()))
    lo = fit[0]
    hi = fit[1] if fit[1] is not None else sigma_max
    sig = np.array(sigmas)
    keep = (sig >= lo) & (sig <= hi)
    for a, b in zip(lhs, lhs[1:]):
        if b > 1.05 * a:
            raise ResolutionError(
                f"Smooth3 LHS grows with sigma ({a:.3e} -> {b:.3e}); increase resolution")
    slope, icpt = fit_slope(sig[keep], np.log2(np.asarray(lhs)[keep]))
    g_slope, g_icpt = fit_slope(sig[keep], np.log2(np.asarray(gamma_sum)[keep]))
    # the top of the sweep, where the Taylor regime has set in; informational
    tail = sig >= sigma_max - 1
    tail_slope, _ = fit_slope(sig[tail], np.log2(np.asarray(lhs)[tail]))
    tail_g_slope, _ = fit_slope(sig[tail], np.log2(np.asarray(gamma_sum)[tail]))
    bound = 2.0 ** (-sig * (r + 0.5)) * I_len ** -0.5
    return DecayReport("smooth3", r, sigmas, lhs, slope, icpt, -(r + 0.5),
                       float(np.max(np.asarray(lhs) / bound)), (lo, hi), [],
                       {"gamma_sum": gamma_sum, "gamma_slope": g_slope,
                        "gamma_intercept": g_icpt, "gamma_target": -(r + 1.0),
                        "local_slopes": np.diff(np.log2(lhs)).tolist(),
                        "gamma_local_slopes": np.diff(np.log2(gamma_sum)).tolist(),
                        "tail_range": [int(sig[tail][0]), int(sig[tail][-1])],
                        "tail_slope": tail_slope, "tail_gamma_slope": tail_g_slope,
                        "I_len": I_len, "t_probes": list(map(float, t_probes))})
