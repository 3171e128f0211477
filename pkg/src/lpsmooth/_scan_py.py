"""NumPy implementation of the window residual scan.

Same contract and algorithm as the compiled ``_scan`` extension; used when
the extension is not built or ``LPSMOOTH_PURE_PYTHON`` is set.

For a window length ``L`` the samples are cut into blocks of ``L``.  Windows
starting in block ``b`` lie inside the segment ``[bL, bL + 2L)``, so their
monomial moments in the block coordinate ``u = (t - bL) / L`` (values in
``[0, 2)``) are differences of short prefix sums.  Moments are then moved
to the window coordinate ``w = (t - s) / L`` by a binomial change of basis
with coefficients bounded by 1, and projected with the Cholesky factor of
the window Gram matrix.
"""

from __future__ import annotations

import numpy as np
from scipy.special import comb


def window_gram_factor(L: int, i: int) -> np.ndarray:
    """Inverse lower Cholesky factor of the monomial Gram matrix on one window."""
    w = np.arange(L) / L
    V = w[:, None] ** np.arange(i)
    G = V.T @ V
    return np.linalg.inv(np.linalg.cholesky(G))


def window_residuals(h: np.ndarray, L: int, linv: np.ndarray) -> np.ndarray:
    """Least-squares residual energy of every length-``L`` window.

    ``h`` has shape ``(K, N)``; the energy is summed over the K rows.
    ``linv`` is ``window_gram_factor(L, i)`` and fixes the degree bound i.
    Returns an array of length ``N - L + 1`` indexed by window start.
    """
    h = np.ascontiguousarray(h, dtype=np.complex128)
    K, N = h.shape
    i = linv.shape[0]
    nstart = N - L + 1
    nblocks = -(-nstart // L)
    padded = np.zeros((K, (nblocks + 1) * L), complex)
    padded[:, :N] = h
    blocks = padded.reshape(K, nblocks + 1, L)
    seg = np.concatenate([blocks[:, :-1], blocks[:, 1:]], axis=2)  # (K, nb, 2L)

    local = np.arange(L)                       # s - bL
    idx_lo = local
    idx_hi = local + L
    prefix = np.zeros((K, nblocks, 2 * L + 1), complex)
    energy = np.zeros((K, nblocks, 2 * L + 1))
    np.cumsum(np.abs(seg) ** 2, axis=2, out=energy[..., 1:])
    s2 = energy[..., idx_hi] - energy[..., idx_lo]          # (K, nb, L)

    out = s2.sum(axis=0)
    if i > 0:
        u = np.arange(2 * L) / L
        o = local / L
        mu = np.empty((i, K, nblocks, L), complex)
        for beta in range(i):
            np.cumsum(seg * u ** beta, axis=2, out=prefix[..., 1:])
            mu[beta] = prefix[..., idx_hi] - prefix[..., idx_lo]
        # nu_g = sum_b C(g, b) (-o)^(g-b) mu_b
        nu = np.zeros_like(mu)
        for g in range(i):
            for beta in range(g + 1):
                nu[g] += comb(g, beta) * (-o) ** (g - beta) * mu[beta]
        c = np.einsum("gb,bkns->gkns", linv, nu)
        out = out - np.sum(np.abs(c) ** 2, axis=(0, 1))
    out = out.reshape(-1)[:nstart]
    return np.maximum(out, 0.0)
