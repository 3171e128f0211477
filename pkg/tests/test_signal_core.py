import math

import numpy as np
import pytest

from lpsmooth.errors import DomainError, StructuralError
from lpsmooth.signal_core import (SampledSignal, SampleGrid, Spectrum, VectorSignal, inverse,
                                  modulate, norm_lp, pure_tone, random_bandlimited,
                                  read_signal_csv, transform, write_signal_csv)
from oracles import direct_dft, direct_idft


def test_grid_rejects_non_power_of_two():
    with pytest.raises(DomainError):
        SampleGrid(1.0, 12)
    with pytest.raises(DomainError):
        SampleGrid(0.0, 16)


def test_values_length_must_match_grid():
    with pytest.raises(StructuralError):
        SampledSignal(SampleGrid(1.0, 8), np.ones(7))


def test_constant_transforms_to_zero_frequency():
    g = SampleGrid(1.0, 8)
    c = transform(SampledSignal(g, np.ones(8))).coefficients
    zero = g.size // 2
    assert c[zero] == pytest.approx(1.0, abs=1e-15)
    assert np.all(np.abs(np.delete(c, zero)) < 1e-15)


def test_pure_tone_has_single_coefficient():
    g = SampleGrid(1.0, 64)
    f = SampledSignal.from_function(g, lambda x: np.exp(2j * np.pi * 3 * x))
    spec = transform(f)
    peak = np.argmax(np.abs(spec.coefficients))
    assert spec.frequencies[peak] == 3.0
    assert np.sum(np.abs(spec.coefficients) > 1e-12) == 1


@pytest.mark.parametrize("offset", [0.0, 0.37])
def test_transform_matches_direct_summation(offset):
    rng = np.random.default_rng(0)
    g = SampleGrid(2.5, 16)
    v = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    f = SampledSignal(g, v, offset)
    c = transform(f).coefficients
    ref = direct_dft(v, 2.5, offset)
    assert np.max(np.abs(c - ref)) <= 1e-12 * np.max(np.abs(ref))
    back = inverse(Spectrum(g, c, offset)).values
    assert np.max(np.abs(back - v)) <= 1e-12 * np.max(np.abs(v))
    assert np.max(np.abs(direct_idft(ref, 2.5, offset) - v)) <= 1e-12 * np.max(np.abs(v))


@pytest.mark.parametrize("N", [8, 32, 64])
def test_transform_oracle_equivalence_small_grids(N):
    rng = np.random.default_rng(N)
    g = SampleGrid(1.0, N)
    v = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    c = transform(SampledSignal(g, v)).coefficients
    assert np.allclose(c, direct_dft(v, 1.0), rtol=0, atol=1e-12)


def test_parseval_over_random_signals():
    g = SampleGrid(3.0, 256)
    worst = 0.0
    for seed in range(100):
        f = random_bandlimited(seed, g, (-30, 30), decay=0.5)
        e = norm_lp(f, 2) ** 2
        worst = max(worst, abs(transform(f).energy() - e) / e)
    assert worst <= 1e-10


def test_linearity():
    g = SampleGrid(1.0, 128)
    f = random_bandlimited(1, g, (-20, 20))
    h = random_bandlimited(2, g, (-20, 20))
    a, b = 0.3 - 1.2j, 2.0
    lhs = transform(SampledSignal(g, a * f.values + b * h.values)).coefficients
    rhs = a * transform(f).coefficients + b * transform(h).coefficients
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(rhs))


def test_norms():
    g = SampleGrid(1.0, 256)
    assert norm_lp(SampledSignal(g, 2 * np.ones(256)), 2) == pytest.approx(2.0, abs=1e-14)
    assert norm_lp(pure_tone(g, 1.0), math.inf) == pytest.approx(1.0, abs=1e-14)
    g = SampleGrid(1.0, 1024)
    s = SampledSignal.from_function(g, lambda x: np.sin(2 * np.pi * x))
    assert abs(norm_lp(s, 2) - 1 / math.sqrt(2)) <= 1e-10
    with pytest.raises(DomainError):
        norm_lp(s, 0.5)


def test_vector_norm_uses_pointwise_l2():
    g = SampleGrid(1.0, 64)
    vs = VectorSignal(g, ("a", "b"), np.stack([np.full(64, 3.0), np.full(64, 4.0)]))
    assert norm_lp(vs, math.inf) == pytest.approx(5.0)
    assert norm_lp(vs, 2) == pytest.approx(5.0)


def test_random_bandlimited_support_and_determinism():
    g = SampleGrid(1.0, 1024)
    f = random_bandlimited(1, g, (-100, 100), decay=1.0)
    c = transform(f).coefficients
    outside = np.abs(g.frequencies) > 100
    assert np.max(np.abs(c[outside])) < 1e-12 * np.max(np.abs(c))
    assert np.array_equal(f.values, random_bandlimited(1, g, (-100, 100), decay=1.0).values)


def test_random_bandlimited_refines_to_same_function():
    f = random_bandlimited(4, SampleGrid(2.0, 128), (-10, 10))
    h = random_bandlimited(4, SampleGrid(2.0, 256), (-10, 10))
    assert np.allclose(f.values, h.values[::2], atol=1e-12)


def test_pure_tone_convention_and_empty_band():
    g = SampleGrid(1.0, 64)
    f = random_bandlimited(0, g, (5, 5), decay=math.inf)
    assert np.allclose(f.values, np.exp(2j * np.pi * 5 * g.points), atol=1e-12)
    with pytest.raises(DomainError):
        random_bandlimited(0, g, (5.2, 5.8))


def test_modulation_is_exact_for_irrational_frequency():
    g = SampleGrid(1.0, 64)
    f = random_bandlimited(3, g, (-8, 8))
    a = math.sqrt(2)
    m = modulate(f, a)
    spec = transform(m)
    assert np.allclose(spec.coefficients, transform(f).coefficients, atol=1e-12)
    assert np.allclose(spec.frequencies, transform(f).frequencies + a)


def test_csv_round_trip(tmp_path):
    g = SampleGrid(2.0, 32)
    f = modulate(random_bandlimited(5, g, (-4, 4)), 0.25)
    path = tmp_path / "sig.csv"
    write_signal_csv(path, f)
    back = read_signal_csv(path)
    assert back.grid == g and back.offset == f.offset
    assert np.array_equal(back.values, f.values)


def test_signals_are_immutable():
    f = SampledSignal(SampleGrid(1.0, 8), np.zeros(8))
    with pytest.raises(ValueError):
        f.values[0] = 1.0
