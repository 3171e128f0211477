"""Independent reference implementations used by the tests.

Everything here is deliberately naive (quadratic loops, dense linear
algebra) and shares no code with the package beyond plain NumPy.
"""

import math

import numpy as np


def direct_dft(values, period, offset=0.0):
    """``c_n = (T/N) sum_j v_j exp(-2 pi i (n/T + offset) x_j)`` for n in [-N/2, N/2)."""
    v = np.asarray(values, complex)
    N = v.size
    x = np.arange(N) * period / N
    out = np.empty(N, complex)
    for row, n in enumerate(range(-N // 2, N // 2)):
        out[row] = np.sum(v * np.exp(-2j * np.pi * (n / period + offset) * x)) * period / N
    return out


def direct_idft(coeffs, period, offset=0.0):
    c = np.asarray(coeffs, complex)
    N = c.size
    x = np.arange(N) * period / N
    n = np.arange(-N // 2, N // 2)
    return np.array([np.sum(c * np.exp(2j * np.pi * (n / period + offset) * xj)) / period
                     for xj in x])


def smooth_step(t):
    """Scalar s(t) = b(t) / (b(t) + b(1 - t)), b(t) = exp(-1/t) for t > 0."""
    def b(u):
        return math.exp(-1.0 / u) if u > 0 else 0.0
    return b(t) / (b(t) + b(1.0 - t))


def normal_equations_fit(y, i):
    """Least-squares polynomial of degree < i on a window via dense normal equations.

    Returns the fitted values.  The window is mapped to [0, 1].
    """
    y = np.asarray(y, complex)
    L = y.size
    if i == 0:
        return np.zeros(L, complex)
    x = np.arange(L) / L
    V = np.vander(x, i, increasing=True)
    G = V.T @ V
    c = np.linalg.solve(G, V.T @ y)
    return V @ c


def window_oscillation(rows, start, L, i, p=2.0):
    """``(mean_Q |h - P_Q|_{l2}^p)^(1/p)`` with P_Q from the normal equations, per row."""
    rows = np.atleast_2d(rows)
    if i >= L:
        return 0.0
    resid = np.stack([r[start:start + L] - normal_equations_fit(r[start:start + L], i)
                      for r in rows])
    mag = np.sqrt(np.sum(np.abs(resid) ** 2, axis=0))
    return float(np.mean(mag ** p) ** (1.0 / p))


def brute_maximal(rows, i, s, spacing, variant="M", p=2.0):
    """Every dyadic window containing (M) or centred at (M~) each point."""
    rows = np.atleast_2d(rows)
    N = rows.shape[1]
    out = np.zeros(N)
    L = 2
    while L <= N // 2:
        for start in range(N - L + 1):
            val = window_oscillation(rows, start, L, i, p) / (L * spacing) ** s
            if variant == "M":
                pts = range(start, start + L)
            else:
                pts = [start + L // 2]
            for x in pts:
                out[x] = max(out[x], val)
        L *= 2
    return out


def brute_campanato(rows, i, s, spacing, p=2.0):
    return float(brute_maximal(rows, i, s, spacing, "M", p).max())


def pair_lipschitz(values, spacing, s=1.0):
    """Max over all sample pairs at distance <= N/2 of |f(x) - f(y)| / |x - y|^s."""
    v = np.asarray(values)
    N = v.size
    best = 0.0
    for a in range(N):
        for b in range(a + 1, min(N, a + N // 2 + 1)):
            best = max(best, abs(v[b] - v[a]) / ((b - a) * spacing) ** s)
    return best


def second_difference_sup(values, spacing, s=1.0):
    v = np.asarray(values)
    N = v.size
    best = 0.0
    for d in range(1, N // 4 + 1):
        for x in range(N - 2 * d):
            best = max(best, abs(v[x + 2 * d] - 2 * v[x + d] + v[x]) / (d * spacing) ** s)
    return best


def circular_convolution(kernel, values, spacing):
    """``(k * f)(x_j) = sum_l k(x_j - x_l) f(x_l) dx`` on the torus."""
    k = np.asarray(kernel)
    f = np.asarray(values)
    N = f.size
    return np.array([np.sum(k[(j - np.arange(N)) % N] * f) * spacing for j in range(N)])


def sampled_kernel(profile, period, N):
    """Periodised kernel ``sum_n profile(n/T) exp(2 pi i n x / T) / T`` on the grid."""
    n = np.arange(-N // 2, N // 2)
    x = np.arange(N) * period / N
    w = profile(n / period)
    return np.array([np.sum(w * np.exp(2j * np.pi * n * xj / period)) / period for xj in x])


def harmonic(n):
    return float(np.sum(1.0 / np.arange(1, n + 1)))


def n_index_enumeration(length, A):
    """Largest v with A^(v-1) <= (2/3) l, by walking v."""
    target = 2.0 * length / 3.0
    v = 0
    while A ** (v - 1) <= target:
        v += 1
    while A ** (v - 1) > target:
        v -= 1
    return v


def intervals_overlap(a, b):
    """Closed intervals sharing an interior point."""
    return max(a[0], b[0]) < min(a[1], b[1])


def central_derivative(fn, x, order, h):
    """Central finite difference of ``order`` 0..3 with step h."""
    if order == 0:
        return fn(x)
    if order == 1:
        return (fn(x + h) - fn(x - h)) / (2 * h)
    if order == 2:
        return (fn(x + h) - 2 * fn(x) + fn(x - h)) / h ** 2
    if order == 3:
        return (fn(x + 2 * h) - 2 * fn(x + h) + 2 * fn(x - h) - fn(x - 2 * h)) / (2 * h ** 3)
    raise ValueError(order)
