"""Pellet response-curve tests.

The isothermal sphere has a closed-form effectiveness factor, which makes
it the reference for the shooting machinery; nonisothermal profiles are
cross-checked against an independent scipy integration.
"""

import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from effparam import backend, pellet
from effparam.errors import ConfigurationError, NumericError

# analytic values of 3(phi coth phi - 1)/phi^2 on the standard grid
ISO_GRID = np.array([0.5, 1.0, 2.0, 5.0, 10.0])
ISO_ETA = np.array([0.98372048, 0.93910586, 0.80597208, 0.48005447, 0.27000000])


def iso_center(phi):
    # beta = 0 profile is u_c sinh(rho)/rho; u = 1 at rho = phi fixes u_c
    return phi / math.sinh(phi)


class TestIsothermalEta:
    def test_reference_grid(self):
        np.testing.assert_allclose(pellet.isothermal_eta(ISO_GRID), ISO_ETA,
                                   atol=1e-7)

    def test_single_values(self):
        assert pellet.isothermal_eta(1.0) == pytest.approx(0.9391058564, abs=1e-9)
        assert pellet.isothermal_eta(10.0) == pytest.approx(0.2700000012, abs=1e-9)

    def test_series_switch_continuous(self):
        # the direct form sheds roughly 1e-15/phi^2 to cancellation near the
        # handover, so agreement at the 1e-9 level is all it can offer
        lo = pellet.isothermal_eta(0.999e-3)
        hi = pellet.isothermal_eta(1.001e-3)
        assert abs(lo - hi) < 2e-9
        assert pellet.isothermal_eta(1e-6) == pytest.approx(1.0, abs=1e-12)

    def test_strictly_decreasing_and_bounded(self):
        phi = np.logspace(-2, 2, 300)
        eta = pellet.isothermal_eta(phi)
        assert np.all(np.diff(eta) < 0)
        assert np.all((eta > 0) & (eta < 1))

    def test_rejects_nonpositive(self):
        with pytest.raises(ConfigurationError):
            pellet.isothermal_eta(0.0)
        with pytest.raises(ConfigurationError):
            pellet.isothermal_eta(np.array([1.0, -2.0]))


class TestReactionRate:
    def test_surface_value_is_unity(self):
        assert pellet.reaction_rate(1.0, 0.7, 30.0) == pytest.approx(1.0)

    def test_isothermal_reduces_to_linear(self):
        u = np.linspace(0.1, 1.0, 7)
        np.testing.assert_allclose(pellet.reaction_rate(u, 0.0, 20.0), u)

    def test_exothermic_boost_below_surface(self):
        assert pellet.reaction_rate(0.5, 0.2, 20.0) > 0.5


class TestSolveProfile:
    def test_matched_isothermal_centers(self):
        for phi in (0.5, 2.0, 10.0):
            params = pellet.PelletParams(phi=phi, beta=0.0, gamma=1.0)
            u1, eta = pellet.solve_profile(params, iso_center(phi))
            assert u1 == pytest.approx(1.0, abs=2e-7)
            assert eta == pytest.approx(float(pellet.isothermal_eta(phi)),
                                        rel=1e-6)

    def test_overshooting_center(self):
        # u_c = 1 at beta = 0 gives u(r) = sinh(phi r)/(phi r), so the
        # surface value is sinh(1)/1 and flags the mismatch by exceeding 1
        params = pellet.PelletParams(phi=1.0, beta=0.0, gamma=1.0)
        u1, _ = pellet.solve_profile(params, 1.0)
        assert u1 > 1
        assert u1 == pytest.approx(math.sinh(1.0), rel=1e-7)

    def test_against_independent_integration(self):
        beta, gamma, phi, u_c = 0.3, 15.0, 1.2, 0.6

        def rhs(r, y):
            boost = math.exp(gamma * beta * (1 - y[0]) / (1 + beta * (1 - y[0])))
            return [y[1], phi ** 2 * y[0] * boost - 2 * y[1] / r]

        r0 = 1e-6
        R = u_c * math.exp(gamma * beta * (1 - u_c) / (1 + beta * (1 - u_c)))
        y0 = [u_c + phi ** 2 / 6 * R * r0 ** 2, phi ** 2 / 3 * R * r0]
        ref = solve_ivp(rhs, (r0, 1.0), y0, rtol=1e-11, atol=1e-13,
                        dense_output=True)
        u1, eta = pellet.solve_profile(
            pellet.PelletParams(phi=phi, beta=beta, gamma=gamma), u_c)
        assert u1 == pytest.approx(ref.y[0, -1], rel=1e-7)
        assert eta == pytest.approx(3 * ref.y[1, -1] / phi ** 2, rel=1e-7)

    def test_validation(self):
        params = pellet.PelletParams(phi=1.0, beta=0.0, gamma=1.0)
        for bad in (0.0, -0.2, 1.5):
            with pytest.raises(ConfigurationError):
                pellet.solve_profile(params, bad)
        with pytest.raises(ConfigurationError):
            pellet.PelletParams(phi=0.0, beta=0.0, gamma=1.0)
        with pytest.raises(ConfigurationError):
            pellet.PelletParams(phi=1.0, beta=-0.1, gamma=1.0)
        with pytest.raises(ConfigurationError):
            pellet.PelletParams(phi=1.0, beta=0.2, gamma=0.0)


class TestProfileCrossing:
    @pytest.mark.parametrize("phi", [0.1, 1.0, 5.0, 20.0])
    def test_isothermal_roundtrip(self, phi):
        p, eta = pellet.profile_crossing(0.0, 1.0, iso_center(phi))
        assert p == pytest.approx(phi, rel=1e-6)
        assert eta == pytest.approx(float(pellet.isothermal_eta(phi)), rel=1e-6)

    def test_deep_center_values_stay_accurate(self):
        p1, e1 = pellet.profile_crossing(0.2, 20.0, 1e-20)
        p2, e2 = pellet.profile_crossing(0.2, 20.0, 1e-20, rtol=1e-11,
                                         atol=1e-31)
        assert p1 == pytest.approx(p2, rel=1e-6)
        assert e1 == pytest.approx(e2, rel=1e-6)

    def test_validation(self):
        with pytest.raises(ConfigurationError):
            pellet.profile_crossing(0.0, 1.0, 1.0)
        with pytest.raises(ConfigurationError):
            pellet.profile_crossing(0.0, 1.0, 0.0)


@pytest.fixture(scope="module")
def hot_curve():
    grid = np.logspace(np.log10(0.9), 1.0, 105)
    return pellet.trace_curve(0.2, 20.0, grid)


class TestTraceCurve:
    def test_isothermal_matches_closed_form(self):
        grid = np.array([0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0])
        curve = pellet.trace_curve(0.0, 1.0, grid)
        assert curve.gaps == ()
        assert len(curve) == len(grid)
        rel = np.abs(curve.eta - pellet.isothermal_eta(curve.phi))
        rel /= pellet.isothermal_eta(curve.phi)
        assert rel.max() < 1e-6

    def test_isothermal_eta_at_most_one(self):
        grid = np.logspace(-1, np.log10(20.0), 12)
        curve = pellet.trace_curve(0.0, 5.0, grid)
        assert np.all(curve.eta <= 1.0)
        past_one = curve.eta[curve.phi >= 1.0]
        assert np.all(np.diff(past_one) < 0)

    def test_exothermic_exceeds_one(self, hot_curve):
        assert hot_curve.eta.max() > 1.0

    def test_connected_over_grid(self, hot_curve):
        assert hot_curve.gaps == ()
        assert len(hot_curve) == 105

    def test_center_value_strictly_monotone(self, hot_curve):
        assert np.all(np.diff(hot_curve.u_center) < 0)
        assert np.all(np.diff(hot_curve.arclength) > 0)

    def test_not_invertible_in_phi(self, hot_curve):
        # the same effectiveness shows up on the rising and falling branches
        # at well-separated moduli
        level = 1.5
        crossings = np.where(np.diff(np.sign(hot_curve.eta - level)) != 0)[0]
        assert len(crossings) >= 2
        spread = np.log10(hot_curve.phi[crossings[-1]]
                          / hot_curve.phi[crossings[0]])
        assert spread > 0.45

    def test_validation(self):
        with pytest.raises(ConfigurationError):
            pellet.trace_curve(0.0, 1.0, [])
        with pytest.raises(ConfigurationError):
            pellet.trace_curve(0.0, 1.0, [-1.0, 2.0])
        with pytest.raises(ConfigurationError):
            pellet.trace_curve(0.0, 1.0, [1.0], u_c_bounds=(1e-9, 0.9))


class TestDelayPairs:
    def test_zero_offset_is_diagonal(self, hot_curve):
        pairs = pellet.delay_pairs(hot_curve, offset_steps=0)
        assert len(pairs) == len(hot_curve)
        np.testing.assert_array_equal(pairs.pairs[:, 0], pairs.pairs[:, 1])

    def test_count_drops_by_offset(self, hot_curve):
        pairs = pellet.delay_pairs(hot_curve, offset_steps=5)
        assert len(pairs) == len(hot_curve) - 5
        np.testing.assert_array_equal(pairs.pairs[:, 0], hot_curve.eta[:-5])
        np.testing.assert_array_equal(pairs.pairs[:, 1], hot_curve.eta[5:])
        np.testing.assert_array_equal(pairs.phi, hot_curve.phi[:-5])

    def test_offset_from_log_increment(self, hot_curve):
        step = np.log10(hot_curve.phi[1] / hot_curve.phi[0])
        pairs = pellet.delay_pairs(hot_curve, delta=5 * step)
        assert pairs.offset_steps == 5
        assert pairs.delta == pytest.approx(5 * step)

    def test_positive_entries(self, hot_curve):
        pairs = pellet.delay_pairs(hot_curve, offset_steps=7)
        assert np.all(pairs.pairs > 0)

    def test_validation(self, hot_curve):
        step = np.log10(hot_curve.phi[1] / hot_curve.phi[0])
        with pytest.raises(ConfigurationError):
            pellet.delay_pairs(hot_curve, delta=2.3 * step)
        with pytest.raises(ConfigurationError):
            pellet.delay_pairs(hot_curve, offset_steps=len(hot_curve))
        with pytest.raises(ConfigurationError):
            pellet.delay_pairs(hot_curve, offset_steps=-1)
        with pytest.raises(ConfigurationError):
            pellet.delay_pairs(hot_curve)
        with pytest.raises(ConfigurationError):
            pellet.delay_pairs(hot_curve, offset_steps=1, delta=step)
        ragged = pellet.trace_curve(0.0, 1.0, [0.5, 1.0, 1.7, 4.0])
        with pytest.raises(ConfigurationError):
            pellet.delay_pairs(ragged, offset_steps=1)


class TestResponseCurveType:
    def test_rejects_mismatched_lengths(self):
        with pytest.raises(ConfigurationError):
            pellet.ResponseCurve(phi=[1.0, 2.0], eta=[0.5], arclength=[0.0],
                                 u_center=[0.5], beta=0.0, gamma=1.0)

    def test_rejects_nonpositive_eta(self):
        with pytest.raises(ConfigurationError):
            pellet.ResponseCurve(phi=[1.0, 2.0], eta=[0.5, 0.0],
                                 arclength=[0.0, 1.0], u_center=[0.5, 0.4],
                                 beta=0.0, gamma=1.0)

    def test_rejects_stalled_arclength(self):
        with pytest.raises(ConfigurationError):
            pellet.ResponseCurve(phi=[1.0, 2.0], eta=[0.5, 0.4],
                                 arclength=[0.0, 0.0], u_center=[0.5, 0.4],
                                 beta=0.0, gamma=1.0)


@pytest.mark.skipif(not backend.compiled_available(),
                    reason="compiled extension not built")
class TestCompiledEquivalence:
    def test_solve_profile_matches_pure(self, monkeypatch):
        params = pellet.PelletParams(phi=1.2, beta=0.3, gamma=15.0)
        fast = pellet.solve_profile(params, 0.6)
        monkeypatch.setenv("EFFPARAM_PURE_PYTHON", "1")
        slow = pellet.solve_profile(params, 0.6)
        assert fast[0] == pytest.approx(slow[0], rel=1e-10)
        assert fast[1] == pytest.approx(slow[1], rel=1e-10)

    def test_crossing_matches_pure(self, monkeypatch):
        fast = pellet.profile_crossing(0.2, 20.0, 1e-4)
        monkeypatch.setenv("EFFPARAM_PURE_PYTHON", "1")
        slow = pellet.profile_crossing(0.2, 20.0, 1e-4)
        assert fast[0] == pytest.approx(slow[0], rel=1e-9)
        assert fast[1] == pytest.approx(slow[1], rel=1e-9)
