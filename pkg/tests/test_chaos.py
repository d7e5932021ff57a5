import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from marketdyn import DomainError, GaMapParams, certify_li_yorke, find_period3, ga_map, invariant_interval, simulate_ga
from marketdyn.chaos import (
    CERTIFIED,
    NoPeriod3,
    argmin_map,
    fixed_point,
    ga_csv,
    iterate,
    closed_form_range,
    map_derivative,
    min_chaotic_eta,
    scan_eta,
    sign_value,
)

# high-precision evaluations of the closed forms and of three map iterates
L_075, U_075 = 0.11602540378443865, 0.98205080756887729
L_08, U_08 = 0.094427190999915879, 1.4124611797498107
ORBIT_08 = [0.44721359549995794, 0.094427190999915879, 1.4124611797498107, 0.75405799166036957]
G_XHAT_08, G_U_08 = 0.30684439616041163, -1.0811355653721471
C_ROOT = 3.0091778877047657
# the two 3-cycles of 4x(1-x): sin^2(k pi / 7) and sin^2(k pi / 9), k = 1, 2, 4
LOGISTIC_P3 = [
    [0.18825509907063323, 0.6112604669781572, 0.95048443395120956],
    [0.11697777844051098, 0.41317591116653483, 0.96984631039295419],
]


def iso(eta, alpha=1.0, n=2):
    return GaMapParams(n, alpha, eta)


class TestMap:
    @pytest.mark.parametrize("eta", [0.01, 0.5, 0.8, 3.0])
    def test_fixed_point(self, eta):
        assert ga_map(iso(eta), 0.25) == pytest.approx(0.25, abs=1e-16)

    def test_lower_endpoint(self):
        eta = 0.75
        assert ga_map(iso(eta), math.sqrt(eta) / 2) == pytest.approx(L_075, rel=1e-14)

    def test_nonpositive(self):
        with pytest.raises(DomainError):
            ga_map(iso(0.8), 0.0)
        with pytest.raises(DomainError):
            ga_map(iso(0.8), np.array([0.1, -1.0]))

    @given(st.floats(0.01, 10), st.floats(0.05, 5), st.integers(2, 20))
    def test_power_one_is_isoelastic(self, x, alpha, n):
        a = ga_map(GaMapParams(n, alpha, 0.3), x)
        b = ga_map(GaMapParams(n, alpha, 0.3, gamma=1.0), x)
        assert a == pytest.approx(b, rel=1e-13, abs=1e-13)

    @given(st.floats(0.05, 3), st.floats(0.1, 2.5), st.floats(0.05, 2))
    def test_derivative(self, x, gamma, alpha):
        p = GaMapParams(3, alpha, 0.7, gamma)
        h = 1e-6 * x
        fd = (ga_map(p, x + h) - ga_map(p, x - h)) / (2 * h)
        assert float(map_derivative(p, x)) == pytest.approx(fd, rel=1e-5, abs=1e-6)

    def test_fixed_point_power(self):
        p = GaMapParams(4, 0.7, 0.1, gamma=2.0)
        x = fixed_point(p)
        assert ga_map(p, x) == pytest.approx(x, rel=1e-14)
        assert fixed_point(GaMapParams(2, 1.0, 0.1, gamma=2.0)) is None

    def test_argmin_isoelastic(self):
        p = iso(0.8)
        assert argmin_map(p) == pytest.approx(math.sqrt(0.8) / 2, rel=1e-14)


class TestInterval:
    def test_closed_form_endpoints(self):
        np.testing.assert_allclose(invariant_interval(1.0, 0.75), [L_075, U_075], rtol=1e-14)
        np.testing.assert_allclose(invariant_interval(1.0, 0.8), [L_08, U_08], rtol=1e-14)

    @pytest.mark.parametrize("eta", [0.7, 1.0, 1.2])
    def test_out_of_range(self, eta):
        with pytest.raises(DomainError):
            invariant_interval(1.0, eta)

    def test_two_firms_only(self):
        with pytest.raises(DomainError):
            invariant_interval(1.0, 0.8, n=3)

    @pytest.mark.parametrize("eta", [0.75, 0.8])
    def test_containment_probe(self, eta):
        L, U = invariant_interval(1.0, eta)
        fx = ga_map(iso(eta), np.linspace(L, U, 10_000))
        assert fx.min() >= L - 1e-15 and fx.max() <= U + 1e-15

    @given(st.floats(0.1, 10.0), st.floats(0.0, 0.999))
    @settings(max_examples=60)
    def test_boundary_identities(self, alpha, u):
        lo, hi = closed_form_range(alpha)
        eta = lo + u * (hi - lo)
        L, U = invariant_interval(alpha, eta)
        p = iso(eta, alpha)
        s = math.sqrt(eta)
        assert ga_map(p, s / 2) == pytest.approx(L, rel=1e-12)
        assert ga_map(p, L) == pytest.approx(U, rel=1e-12)
        assert L < 1 / (4 * alpha) < s / 2 < U

    @pytest.mark.parametrize("seed", range(50))
    def test_numeric_agreement(self, seed):
        rng = np.random.default_rng(seed)
        eta = rng.uniform(0.75, 1.0)
        L, U = invariant_interval(1.0, eta)
        fx = ga_map(iso(eta), np.linspace(L, U, 20_001))
        assert L - 1e-9 <= fx.min() and fx.max() <= U + 1e-9


class TestPeriod3:
    def test_orbit_values(self):
        p = iso(0.8)
        xs = [ORBIT_08[0]]
        for _ in range(3):
            xs.append(ga_map(p, xs[-1]))
        np.testing.assert_allclose(xs, ORBIT_08, rtol=1e-13)
        f3 = lambda x: iterate(lambda z: ga_map(p, z), x, 3) - x
        assert f3(ORBIT_08[0]) == pytest.approx(G_XHAT_08, rel=1e-12)
        assert f3(U_08) == pytest.approx(G_U_08, rel=1e-12)

    @pytest.mark.parametrize("bracket", [(0.1, 0.3), (0.15, 0.3), (0.5, 0.7)])
    def test_logistic(self, bracket):
        f = lambda x: 4 * x * (1 - x)
        p = find_period3(f, bracket, exclude=(0.75,))
        assert abs(f(f(f(p))) - p) <= 1e-10
        orbit = sorted([p, f(p), f(f(p))])
        assert any(np.allclose(orbit, known, atol=1e-9) for known in LOGISTIC_P3)

    def test_fixed_point_rejected(self):
        f = lambda x: 4 * x * (1 - x)
        # around the fixed point 3/4 the only root of f^3 - x is 3/4 itself
        with pytest.raises(NoPeriod3) as info:
            find_period3(f, (0.74, 0.76), exclude=(0.75,), grid=1000)
        assert info.value.reason == "trivial"

    def test_no_sign_change(self):
        with pytest.raises(NoPeriod3) as info:
            find_period3(lambda x: 0.5 * x, (1.0, 2.0))
        assert info.value.reason == "no-sign-change"


class TestCertificate:
    def test_eta_08(self):
        c = certify_li_yorke(iso(0.8))
        assert c.status == CERTIFIED and c.source == "analytic"
        np.testing.assert_allclose(c.interval, [L_08, U_08], rtol=1e-14)
        assert c.sign_conditions[0] == pytest.approx(G_XHAT_08, rel=1e-12)
        assert c.sign_conditions[1] == pytest.approx(G_U_08, rel=1e-12)
        assert abs(c.period3_point - 0.25) > 1e-8
        doc = json.loads(c.to_json())
        assert doc["status"] == "certified" and doc["params"]["eta"] == 0.8

    @pytest.mark.parametrize("eta", [0.01, 0.3, 0.6])
    def test_small_steps_not_certified(self, eta):
        assert not certify_li_yorke(iso(eta)).certified

    @pytest.mark.parametrize("eta", np.linspace(0.7523, 0.999, 6))
    def test_soundness(self, eta):
        c = certify_li_yorke(iso(float(eta)))
        assert c.certified
        p = iso(float(eta))
        L, U = c.interval
        fx = ga_map(p, np.linspace(L, U, 100_000))
        assert max(0.0, (L - fx).max(), (fx - U).max()) <= 1e-9
        x = c.period3_point
        assert abs(iterate(lambda z: ga_map(p, z), x, 3) - x) <= 1e-9
        assert abs(ga_map(p, x) - x) > 1e-9

    def test_power_family_numeric_path(self):
        c = certify_li_yorke(GaMapParams(2, 1.0, 1.7, gamma=0.5))
        assert c.source == "numeric"
        assert c.certified

    def test_no_fixed_point(self):
        c = certify_li_yorke(GaMapParams(2, 1.0, 1.0, gamma=2.0))
        assert c.status == "failed" and c.fixed_point is None

    def test_escape(self):
        # huge steps throw the orbit below zero
        c = certify_li_yorke(iso(50.0))
        assert not c.certified

    def test_sign_boundary(self):
        assert sign_value(3.05 / 4) > 0
        assert sign_value(2.95 / 4) < 0
        assert sign_value(C_ROOT / 4 + 1e-9) > 0 > sign_value(C_ROOT / 4 - 1e-9)


class TestMinEta:
    def test_gamma_one(self):
        e = min_chaotic_eta(1.0)
        assert e <= 0.75 + 1e-6
        assert certify_li_yorke(iso(e)).certified
        assert not certify_li_yorke(iso(0.9 * e)).certified

    def test_scaling_in_alpha(self):
        e1 = min_chaotic_eta(1.0, alpha=1.0)
        e2 = min_chaotic_eta(1.0, alpha=2.0)
        assert e2 == pytest.approx(e1 / 4, rel=1e-4)

    def test_many_firms_large_gamma(self):
        for g in (2.0, 3.0):
            e = min_chaotic_eta(g, n=4)
            assert e is not None and math.isfinite(e)
            assert certify_li_yorke(GaMapParams(4, 1.0, e, g)).certified

    def test_scan_windows(self):
        s = scan_eta(1.0, points=61)
        assert s.monotone and len(s.windows) == 1


class TestSimulateGA:
    def test_symmetric_reduction(self):
        n, eta = 5, 0.3
        p = GaMapParams(n, 1.0, eta)
        tr = simulate_ga(1.0, np.full(n, 0.05), eta, 1000)
        x = 0.05
        for t in range(1, 1001):
            x = ga_map(p, x)
            np.testing.assert_allclose(tr.states[t], x, rtol=1e-12)
        assert np.ptp(tr.states, axis=1).max() == 0.0

    def test_small_step_converges(self):
        tr = simulate_ga(1.0, [0.1, 0.4], 1e-2, 20_000)
        np.testing.assert_allclose(tr.final, [0.25, 0.25], rtol=1e-6)

    def test_clamping_flagged(self):
        tr = simulate_ga(1.0, [5.0, 5.0], 10.0, 3)
        assert tr["clamped"].sum() > 0 and tr.message
        assert np.all(tr.states > 0)

    def test_csv(self):
        text = ga_csv(simulate_ga([1.0, 2.0], [0.2, 0.1], 0.1, 2))
        assert text.splitlines()[0] == "t,x_1,x_2,aggregate"
        assert len(text.splitlines()) == 4

    def test_bad_input(self):
        with pytest.raises(DomainError):
            simulate_ga(1.0, [0.1, 0.0], 0.1, 5)
        with pytest.raises(DomainError):
            simulate_ga([1.0, 1.0, 1.0], [0.1, 0.2], 0.1, 5)
