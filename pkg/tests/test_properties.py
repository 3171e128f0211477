import math

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lpsmooth.campanato import campanato_norm, maximal_function
from lpsmooth.cover import IntervalFamily, approximate_interval, n_index
from lpsmooth.operators import apply_S, sharp_projection
from lpsmooth.profiles import build_bump_pair, build_phi_hat, build_psi_tilde, build_theta
from lpsmooth.signal_core import (
    SampledSignal, SampleGrid, inverse, modulate, norm_lp, transform,
)

GRID = SampleGrid(4.0, 64)
finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
complex_samples = st.builds(
    lambda re, im: re + 1j * im,
    arrays(np.float64, 64, elements=finite),
    arrays(np.float64, 64, elements=finite),
)
fast = settings(max_examples=60, deadline=None,
                suppress_health_check=[HealthCheck.too_slow])


@fast
@given(complex_samples, st.floats(-50, 50))
def test_transform_roundtrip(values, offset):
    f = SampledSignal(GRID, values, offset)
    back = inverse(transform(f))
    scale = max(1.0, np.abs(values).max())
    assert np.abs(back.values - values).max() <= 1e-12 * scale
    assert back.offset == f.offset


@fast
@given(complex_samples, st.floats(-100, 100))
def test_modulation_is_isometric(values, freq):
    f = SampledSignal(GRID, values)
    g = modulate(f, freq)
    assert math.isclose(norm_lp(g, 2), norm_lp(f, 2), rel_tol=1e-12, abs_tol=1e-300)
    assert math.isclose(norm_lp(g, 3), norm_lp(f, 3), rel_tol=1e-12, abs_tol=1e-300)


@fast
@given(complex_samples, st.floats(-8, 7), st.floats(0.25, 4))
def test_sharp_projection_idempotent(values, a, length):
    f = SampledSignal(GRID, values)
    once = sharp_projection(f, (a, a + length))
    twice = sharp_projection(once, (a, a + length))
    scale = max(1.0, np.abs(values).max())
    assert np.abs(once.values - twice.values).max() <= 1e-11 * scale
    assert norm_lp(once, 2) <= norm_lp(f, 2) * (1 + 1e-12) + 1e-300


@fast
@given(st.floats(1e-3, 1e3), st.floats(1.01, 3.0), st.floats(1.0, 2.0))
def test_n_index_monotone(length, A, stretch):
    assert n_index((0.0, length * stretch), A) >= n_index((0.0, length), A)
    v = n_index((0.0, length), A)
    assert A ** (v - 1) <= 2 * length / 3 < A ** v * (1 + 1e-12)


@fast
@given(st.floats(-1e4, 1e4), st.floats(1e-4, 1e3))
def test_approximate_interval_contains(a, length):
    k, j = approximate_interval((a, a + length))
    step = 2.0 ** k
    assert step <= length < 2 * step
    assert (j + 1) * step <= a
    assert a + length <= (j + 7) * step


@fast
@given(arrays(np.float64, 64, elements=st.floats(-10, 10)), st.integers(1, 3),
       st.floats(-5, 5), st.floats(0.1, 5))
def test_maximal_function_affine_invariance(values, i, shift, scale):
    f = SampledSignal(GRID, values)
    g = SampledSignal(GRID, scale * values + shift)
    mf = maximal_function(f, i).values
    mg = maximal_function(g, i).values
    tol = 1e-9 * (1 + np.abs(values).max()) * scale + 1e-6 * abs(shift)
    assert np.abs(mg - scale * mf).max() <= tol


@fast
@given(arrays(np.float64, 64, elements=st.floats(-10, 10)))
def test_degree_monotone(values):
    f = SampledSignal(GRID, values)
    norms = [campanato_norm(f, i) for i in (1, 2, 3, 4)]
    tol = 1e-9 * (1 + np.abs(values).max())
    assert all(b <= a + tol for a, b in zip(norms, norms[1:]))


@fast
@given(st.lists(st.floats(-200, 200), min_size=1, max_size=50))
def test_profiles_bounded(xs):
    xi = np.array(xs)
    psi1, psi2 = build_bump_pair()
    for prof in (psi1, psi2, build_phi_hat(), build_psi_tilde(), build_theta(1.03)):
        v = prof(xi)
        assert np.all(v >= 0) and np.all(v <= 1)


@fast
@given(st.floats(1e-3, 1e3))
def test_theta_partition_of_unity(xi):
    A = 1.03
    theta = build_theta(A)
    v = math.floor(math.log(xi) / math.log(A))
    total = sum(theta(np.array([xi / A ** w]))[0] for w in range(v - 3, v + 4))
    assert abs(total - 1.0) <= 1e-12


@st.composite
def families(draw):
    count = draw(st.integers(1, 4))
    edges = sorted(draw(st.lists(st.floats(0.2, 12.0), min_size=2 * count,
                                 max_size=2 * count, unique=True)))
    ivs = [(edges[2 * q], edges[2 * q + 1]) for q in range(count)]
    ivs = [(a, b) for a, b in ivs if b - a > 0.1]
    signs = draw(st.lists(st.booleans(), min_size=len(ivs), max_size=len(ivs)))
    out = [(a, b) if s else (-b, -a) for (a, b), s in zip(ivs, signs)]
    # mirroring keeps the pieces disjoint: signs differ or both come from sorted edges
    return IntervalFamily(tuple(out or [(1.0, 2.0)]))


@fast
@given(complex_samples, families())
def test_smoothed_projection_contracts(values, family):
    # |psi| <= 1 on pairwise disjoint supports
    f = SampledSignal(GRID, values)
    out = apply_S(f, family)
    assert norm_lp(out, 2) <= norm_lp(f, 2) * (1 + 1e-12) + 1e-300
