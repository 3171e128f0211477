"""Smooth, exactly supported frequency profiles.

Every cutoff is assembled from one C-infinity step

    s(t) = b(t) / (b(t) + b(1 - t)),   b(t) = exp(-1/t) for t > 0, else 0,

which is 0 on (-inf, 0], 1 on [1, inf) and satisfies s(t) + s(1 - t) = 1.
That symmetry makes every partition identity below hold up to roundoff.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import DomainError

__all__ = [
    "MultiplierProfile",
    "smooth_step",
    "build_bump_pair",
    "psi_sigma_m",
    "build_theta",
    "theta_hat_v",
    "build_phi_hat",
    "build_psi_tilde",
    "dilate_phi",
    "dilate_varphi",
    "shift_bump",
    "profile_kernel",
    "dump_profile",
]


def _b(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(t):
    """C-infinity step from 0 (t <= 0) to 1 (t >= 1)."""
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    out = np.empty_like(t)
    lo = t <= 0.0
    hi = t >= 1.0
    mid = ~(lo | hi)
    out[lo] = 0.0
    out[hi] = 1.0
    if mid.any():
        tm = t[mid]
        # b(t)/(b(t)+b(1-t)) rewritten to avoid underflow near the ends
        with np.errstate(over="ignore"):
            out[mid] = 1.0 / (1.0 + np.exp(1.0 / tm - 1.0 / (1.0 - tm)))
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class MultiplierProfile:
    """A real frequency profile with a declared closed support.

    Evaluation returns a hard zero outside ``support``.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    support: tuple[float, float]
    name: str = ""
    smoothness: float = math.inf

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        scalar = xi.ndim == 0
        xi = np.atleast_1d(xi)
        lo, hi = self.support
        out = np.zeros_like(xi)
        inside = (xi >= lo) & (xi <= hi)
        if inside.any():
            out[inside] = self.fn(xi[inside])
        return float(out[0]) if scalar else out


def _psi2_raw(t):
    return smooth_step(3.0 * t - 1.0)


def _psi1_raw(t):
    return 1.0 - smooth_step(3.0 * t - 1.0)


def build_bump_pair() -> tuple[MultiplierProfile, MultiplierProfile]:
    """psi1 on [0, 2/3] and psi2 on [1/3, 1] with psi1 + psi2 = 1 on [0, 1]."""
    psi1 = MultiplierProfile(_psi1_raw, (0.0, 2.0 / 3.0), "psi1")
    psi2 = MultiplierProfile(_psi2_raw, (1.0 / 3.0, 1.0), "psi2")
    return psi1, psi2


def psi_sigma_m(psi: MultiplierProfile, interval) -> MultiplierProfile:
    """Transplant a bump from [0, 1] onto ``interval = (a, b)``."""
    a, b = float(interval[0]), float(interval[1])
    length = b - a
    if not length > 0:
        raise DomainError(f"degenerate interval {interval}")
    lo, hi = psi.support
    return MultiplierProfile(lambda xi: psi.fn((xi - a) / length),
                             (a + lo * length, a + hi * length),
                             f"{psi.name}[{a:g},{b:g}]")


def _theta_w(tau):
    tau = np.asarray(tau, dtype=float)
    return smooth_step(tau + 1.0) - smooth_step(tau)


def build_theta(A: float) -> MultiplierProfile:
    """Geometric partition profile on [1/A, A]; its A-dilates sum to 1 on (0, inf)."""
    if not A > 1:
        raise DomainError(f"A must exceed 1, got {A}")
    logA = math.log(A)
    return MultiplierProfile(lambda xi: _theta_w(np.log(xi) / logA),
                             (1.0 / A, A), f"theta[A={A:g}]")


def theta_hat_v(xi, v: int, A: float):
    """theta_hat(xi / A**v), vectorised, zero for xi <= 0.

    Computed as w(log_A xi - v) so neighbouring levels share one logarithm.
    """
    xi = np.asarray(xi, dtype=float)
    out = np.zeros(np.broadcast(xi, np.asarray(v)).shape)
    pos = np.broadcast_to(xi > 0, out.shape)
    if pos.any():
        tau = np.log(np.where(xi > 0, xi, 1.0)) / math.log(A) - v
        tau = np.broadcast_to(tau, out.shape)
        keep = pos & (tau > -1.0) & (tau < 1.0)
        out[keep] = _theta_w(tau[keep])
    return out


PHI_PLATEAU = (1.0, 7.0)


def _phi_raw(xi, plateau=PHI_PLATEAU):
    lo, hi = plateau
    return smooth_step(xi - lo + 1.0) * smooth_step(hi + 1.0 - xi)


def build_phi_hat(plateau=PHI_PLATEAU) -> MultiplierProfile:
    """Plateau profile: identically 1 on ``plateau``, ramps of width 1.

    The default plateau [1, 7] gives support [0, 8].
    """
    lo, hi = plateau
    if not hi > lo:
        raise DomainError(f"empty plateau {plateau}")
    return MultiplierProfile(lambda xi: _phi_raw(xi, plateau), (lo - 1.0, hi + 1.0),
                             "phi_hat")


def _psi_tilde_raw(xi):
    return smooth_step(3.0 * xi + 2.0) * (1.0 - smooth_step(3.0 * xi - 1.0))


def build_psi_tilde() -> MultiplierProfile:
    """Extension of psi1: equals psi1 on [0, inf), 1 on [-1/3, 0], 0 below -2/3."""
    return MultiplierProfile(_psi_tilde_raw, (-2.0 / 3.0, 2.0 / 3.0), "psi_tilde")


def dilate_phi(k: int, plateau=PHI_PLATEAU) -> MultiplierProfile:
    """phi_hat(xi / 2**k): support J_{k,0} = [0, 8 * 2**k] for the default plateau."""
    scale = 2.0 ** k
    lo, hi = plateau
    return MultiplierProfile(lambda xi: _phi_raw(xi / scale, plateau),
                             ((lo - 1.0) * scale, (hi + 1.0) * scale), f"phi_hat[k={k}]")


def dilate_varphi(length: float) -> MultiplierProfile:
    """psi_tilde(xi / length)."""
    if not length > 0:
        raise DomainError(f"length must be positive, got {length}")
    return MultiplierProfile(lambda xi: _psi_tilde_raw(xi / length),
                             (-2.0 * length / 3.0, 2.0 * length / 3.0),
                             f"varphi[l={length:g}]")


def shift_bump(lo: float, hi: float) -> MultiplierProfile:
    """Symmetric smooth bump supported on [lo, hi], equal to 1 at the midpoint."""
    if not hi > lo:
        raise DomainError(f"empty bump support [{lo}, {hi}]")
    half = 0.5 * (hi - lo)
    return MultiplierProfile(
        lambda xi: smooth_step((xi - lo) / half) * smooth_step((hi - xi) / half),
        (lo, hi), f"bump[{lo:g},{hi:g}]")


def profile_kernel(profile: MultiplierProfile, u, order: int = 0,
                   nodes: int = 8192) -> np.ndarray:
    """Time-domain kernel ``int profile(xi) (2 pi i xi)**order exp(2 pi i xi u) dxi``.

    Trapezoid rule over the support.  The integrand is smooth and vanishes to
    infinite order at both ends, so the rule converges faster than any power
    of the node count once the nodes resolve the oscillation at ``|u|``.
    """
    lo, hi = profile.support
    xi = np.linspace(lo, hi, nodes)
    w = np.full(nodes, (hi - lo) / (nodes - 1))
    w[0] = w[-1] = 0.5 * w[0]
    weights = w * profile(xi) * (2j * np.pi * xi) ** order
    u = np.asarray(u, dtype=float)
    flat = u.reshape(-1)
    out = np.empty(flat.size, complex)
    chunk = max(1, 2 ** 22 // nodes)
    for s in range(0, flat.size, chunk):
        part = flat[s:s + chunk]
        out[s:s + chunk] = np.exp(2j * np.pi * np.outer(part, xi)) @ weights
    return out.reshape(u.shape)


def dump_profile(profile: MultiplierProfile, lo: float, hi: float, n: int, path):
    xi = np.linspace(lo, hi, n)
    vals = profile(xi)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["xi", "value"])
        for x, y in zip(xi, vals):
            w.writerow([repr(float(x)), repr(float(y))])
