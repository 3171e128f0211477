import json
import math

import numpy as np
import pytest

from lpsmooth.errors import DomainError
from lpsmooth.kernel_checks import (
    DecayReport, Phi_kernel_profile, crossover_check, fit_slope, phi_kernel_profile,
    smooth1_profile, smooth2_constant, smooth2_profile, smooth2_uniformity, smooth3_decay,
    taylor_approximant, taylor_remainder, theta_kernel_profile,
)

from oracles import central_derivative


@pytest.fixture(scope="module")
def theta0():
    return theta_kernel_profile(1.03, 0)


class TestApproximant:
    def test_r1_is_constant(self, theta0):
        ap = taylor_approximant(theta0, 0.3, 1)
        tau = np.array([2.0, 5.0, -7.5])
        vals = ap(np.linspace(-0.2, 0.8, 5), tau)
        assert np.allclose(vals, ap.kernel(0.3 - tau)[None, :], atol=1e-14, rtol=0)

    @pytest.mark.parametrize("r", [1, 2, 3, 4])
    def test_anchor(self, theta0, r):
        ap = taylor_approximant(theta0, 0.0, r)
        tau = np.array([1.5, 4.0, -9.0])
        assert np.allclose(ap([0.0], tau)[0], ap.kernel(-tau), rtol=1e-12, atol=1e-15)

    def test_derivatives_against_finite_differences(self, theta0):
        ap = taylor_approximant(theta0, 0.0, 3)
        tau = np.array([0.7, 2.5, -4.0])
        d = ap.derivatives(tau)
        for a in range(3):
            for col, u0 in enumerate(-tau):
                fd = central_derivative(lambda u: ap.kernel(u)[0], u0, a, 1e-3)
                scale = max(abs(d[a, col]), np.abs(d[a]).max())
                assert abs(fd - d[a, col]) <= 1e-5 * scale

    @pytest.mark.parametrize("r", [1, 2, 3])
    def test_order_r_difference_vanishes(self, r):
        ap = taylor_approximant(phi_kernel_profile(0), 0.1, r)
        h = 0.05
        x = 0.1 + h * np.arange(r + 1)
        vals = ap(x, np.array([3.0, 6.5]))
        weights = np.array([(-1) ** (r - q) * math.comb(r, q) for q in range(r + 1)])
        assert np.all(np.abs(weights @ vals) <= 1e-8 * np.abs(vals).max())

    def test_remainder_matches_subtraction(self, theta0):
        # where no cancellation is severe the direct difference agrees
        ap = taylor_approximant(theta0, 0.0, 2)
        tau = np.array([1.0, 2.0])
        h = np.array([0.3])
        direct = ap.kernel(h[0] - tau) - ap(h, tau)[0]
        rem = taylor_remainder(theta0, h, -tau, 2)[0]
        assert np.allclose(rem, direct, rtol=1e-8, atol=1e-14)

    def test_bad_r(self, theta0):
        with pytest.raises(DomainError):
            taylor_approximant(theta0, 0.0, 0)


class TestSmooth1:
    def test_probe_at_three_lengths(self):
        rep = smooth1_profile(1, dists=[3.0])
        assert math.isfinite(rep.lhs[0]) and rep.lhs[0] <= rep.constant * 1.0 / 3.0 ** 2

    @pytest.mark.parametrize("r", [1, 2, 3])
    def test_slope_with_coarse_partition(self, r):
        rep = smooth1_profile(r, A=2.0)
        assert rep.slope <= -(r + 0.9)

    @pytest.mark.parametrize("r", [1, 2, 3])
    def test_slope_asymptotic(self, r):
        d = 2.0 ** np.linspace(9, 13, 9)
        rep = smooth1_profile(r, dists=d)
        slope, _ = fit_slope(np.log2(d), np.log2(rep.lhs))
        assert slope <= -(r + 0.9)

    @pytest.mark.xfail(strict=True, reason="A=1.03 is preasymptotic below |tau-x0| ~ 2^8 |I|")
    @pytest.mark.parametrize("r", [1, 2, 3])
    def test_slope_fine_partition_short_range(self, r):
        assert smooth1_profile(r).slope <= -(r + 0.9)

    @pytest.mark.parametrize("r", [1, 2, 3])
    def test_doubling_interval(self, r):
        d = [16.0, 32.0, 64.0]
        a = smooth1_profile(r, A=2.0, length=1.0, dists=d)
        b = smooth1_profile(r, A=2.0, length=2.0, dists=d)
        ratio = np.array(b.lhs) / np.array(a.lhs)
        assert np.all(np.abs(ratio / 2 ** r - 1) <= 0.2)

    @pytest.mark.parametrize("r", [1, 2, 3])
    def test_crossover(self, r):
        rep = crossover_check(r, dists=2.0 ** np.arange(7, 14))
        assert rep["max_drift"] <= 2
        assert math.isfinite(rep["C1"]) and math.isfinite(rep["C2"])

    def test_constant_stable_under_refinement(self):
        coarse = smooth1_profile(2, A=2.0, probes=3)
        fine = smooth1_profile(2, A=2.0, probes=6)
        assert fine.constant == pytest.approx(coarse.constant, rel=0.25)


class TestSmooth2:
    @pytest.mark.parametrize("r", [1, 2, 3])
    def test_pure_dilation_decay(self, r):
        rep = smooth2_profile(r, 3.0, delta=0.0)
        assert rep.slope <= -(r + 0.9)

    @pytest.mark.parametrize("r", [1, 2, 3])
    def test_scale_invariance(self, r):
        assert smooth2_constant(r, 6.0, 0.0) == pytest.approx(smooth2_constant(r, 3.0, 0.0),
                                                              rel=1.0)

    def test_bound_at_four_lengths(self):
        I_len = 1.0 / 3.0
        rep = smooth2_profile(1, 3.0, delta=1.0, I_len=I_len, dists=[4 * I_len])
        assert rep.lhs[0] <= rep.constant * I_len / (4 * I_len) ** 2 * (1 + 1e-12)

    def test_modulation_bounded(self):
        # delta <= l keeps the kernel within a fixed family
        consts = [smooth2_constant(2, 2.0, dl * 2.0) for dl in (0.0, 0.3, 0.7, 1.0)]
        assert max(consts) / min(consts) <= 10

    def test_uniform_over_cover(self, cover):
        rep = smooth2_uniformity(1, cover, stride=40)
        assert rep["count"] >= 10 and rep["spread"] <= 10

    def test_delta_domain(self):
        with pytest.raises(DomainError):
            smooth2_profile(1, 2.0, delta=2.5)

    def test_kernel_profile_support(self):
        prof = Phi_kernel_profile(2.0, 0.5)
        lo, hi = prof.support
        assert lo < hi


class TestSmooth3:
    @pytest.mark.slow
    def test_interval_scaling(self):
        a = smooth3_decay(1, sigma_max=4)
        b = smooth3_decay(1, sigma_max=4, I_len=2.0)
        assert np.allclose(np.array(b.lhs) / np.array(a.lhs), 2 ** -0.5, rtol=1e-6)
        assert all(x > y for x, y in zip(a.lhs, a.lhs[1:]))
        assert all(x > y for x, y in zip(a.extra["gamma_sum"], a.extra["gamma_sum"][1:]))

    def test_validation(self):
        with pytest.raises(DomainError):
            smooth3_decay(1, sigma_max=3)
        with pytest.raises(DomainError):
            smooth3_decay(1, I_len=3.0)
        with pytest.raises(DomainError):
            smooth3_decay(0)


class TestDecayReport:
    def test_json_and_csv(self, tmp_path):
        rep = smooth1_profile(1, A=2.0)
        d = json.loads(rep.to_json())
        assert d["r"] == 1 and len(d["lhs"]) == len(d["abscissa"])
        path = tmp_path / "r.csv"
        rep.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "kind,r,abscissa,lhs,floor" and len(lines) == len(rep.lhs) + 1
        assert not rep.degenerate

    def test_floor_flag(self):
        rep = DecayReport("x", 1, [1, 2, 3], [1.0, 1e-20, 1e-21], 0.0, 0.0, -2.0, 1.0, (1, 3),
                          floor_hits=[2, 3])
        assert rep.degenerate
