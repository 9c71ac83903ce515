"""Phase-matching geometry: mismatches, bandwidths, thresholds, ridge wavelength."""

import numpy as np
import pytest
from scipy.constants import c as C_LIGHT
from scipy.optimize import brentq

from sfgtools.dispersion import CrystalParams, dispersion_sample
from sfgtools.materials import BBO, Material
from sfgtools.phasematch import (
    PhaseMatchContext,
    bandwidths,
    critical_angle,
    d_inc,
    delta_pdc,
    delta_sfg_pair,
    lambda_inc,
    threshold_lengths,
    tuned_angle,
)

LAM_PUMP = 527.5e-9


@pytest.fixture(scope="module")
def ctx():
    return PhaseMatchContext.collinear(BBO, LAM_PUMP, 4e-3, 1e-3, gain=9.3)


def test_tuned_angle_golden():
    theta = tuned_angle(BBO, LAM_PUMP)
    assert theta == pytest.approx(0.400006268886547, abs=1e-12)
    assert np.degrees(theta) == pytest.approx(22.918670986, abs=1e-8)


def test_tuned_angle_unreachable():
    iso = Material("iso", BBO.ordinary, BBO.ordinary)
    with pytest.raises(ValueError, match="phase-match"):
        tuned_angle(iso, LAM_PUMP)


class TestContext:
    def test_carriers(self, ctx):
        assert ctx.omega_down == ctx.omega_up / 2
        assert ctx.omega_up == pytest.approx(2 * np.pi * C_LIGHT / LAM_PUMP)

    def test_cache_coherence(self, ctx):
        assert ctx.pdc_up == dispersion_sample(BBO, "e", ctx.pdc.theta, ctx.omega_up)
        assert ctx.sfg_down == dispersion_sample(BBO, "o", 0.0, ctx.omega_down)

    def test_gvm_and_walkoff(self, ctx):
        assert ctx.gvm == pytest.approx(8.77538304522022e-11, rel=1e-11)
        assert ctx.walkoff == pytest.approx(0.0559759850687879, rel=1e-11)

    def test_with_sfg_tilt(self, ctx):
        t = ctx.with_sfg_tilt(np.radians(0.5))
        assert t.sfg.theta == pytest.approx(ctx.sfg.theta + np.radians(0.5))
        assert t.pdc == ctx.pdc
        assert ctx.with_sfg_tilt(0.0) is ctx


class TestDeltaPdc:
    def test_zero_at_tuning(self, ctx):
        assert abs(delta_pdc(ctx, 0.0, 0.0, 0.0)) < 1e-6 * ctx.pdc_up.k

    def test_even_in_q(self, ctx):
        q = np.linspace(-4e4, 4e4, 9)
        om = np.linspace(-5e13, 5e13, 7)
        a = delta_pdc(ctx, q[:, None], 0.0, om[None, :])
        b = delta_pdc(ctx, -q[:, None], 0.0, om[None, :])
        assert np.allclose(a, b, rtol=0, atol=1e-9)

    def test_even_in_omega(self, ctx):
        om = np.linspace(1e12, 6e13, 8)
        a = delta_pdc(ctx, 1e4, 2e3, om)
        b = delta_pdc(ctx, 1e4, 2e3, -om)
        assert np.allclose(a, b, rtol=1e-12)

    def test_quadratic_approximation(self, ctx):
        bw = bandwidths(ctx)
        lc = ctx.pdc.length
        const = (2 * ctx.pdc_down.k - ctx.pdc_up.k) * lc
        for fo in (0.0, 0.3, 0.5):
            for fq in (0.0, 0.3, 0.5):
                if fo == fq == 0.0:
                    continue
                om, q = fo * bw.omega_pdc, fq * bw.q_pdc
                exact = delta_pdc(ctx, q, 0.0, om) * lc
                quad = const + (om / bw.omega_pdc) ** 2 - (q / bw.q_pdc) ** 2
                if abs(quad) > 0.05:
                    assert exact == pytest.approx(quad, rel=0.05)

    def test_evanescent_is_nan(self, ctx):
        assert np.isnan(delta_pdc(ctx, 2e7, 0.0, 0.0))


class TestDeltaSfgPair:
    def test_symmetry(self, ctx):
        rng = np.random.default_rng(7)
        for _ in range(5):
            w1 = tuple(rng.uniform(-1, 1, 3) * (3e4, 3e4, 3e13))
            w2 = tuple(rng.uniform(-1, 1, 3) * (3e4, 3e4, 3e13))
            assert delta_sfg_pair(ctx, w1, w2) == pytest.approx(
                delta_sfg_pair(ctx, w2, w1), rel=1e-14
            )

    def test_decomposition_into_single_mode_plus_pair_terms(self, ctx):
        # delta_sfg(w', w - w') = d_inc(w) + [delta_pdc(w') + delta_pdc(w - w')]/2
        # up to cubic terms, which stay tiny against the sinc width 2 pi / l
        rng = np.random.default_rng(0)
        width = 2 * np.pi / ctx.sfg.length
        for _ in range(6):
            w = rng.uniform(-1, 1, 3) * (2e4, 2e4, 1e13)
            wp = rng.uniform(-1, 1, 3) * (2e4, 2e4, 1e13)
            wm = w - wp
            lhs = delta_sfg_pair(ctx, tuple(wp), tuple(wm))
            rhs = d_inc(ctx, *w) + 0.5 * (delta_pdc(ctx, *wp) + delta_pdc(ctx, *wm))
            assert abs(lhs - rhs) < 1e-3 * width


class TestDInc:
    def test_zero_at_origin(self, ctx):
        assert abs(d_inc(ctx, 0.0, 0.0, 0.0)) < 1e-6

    def test_zero_set_slope_near_origin(self, ctx):
        # dq_x/dOmega of the ridge equals gvm/walkoff
        want = ctx.gvm / ctx.walkoff
        for om in (2e12, 8e12):
            qx = brentq(lambda q: d_inc(ctx, q, 0.0, om), 0.0, 3 * want * om)
            assert qx / om == pytest.approx(want, rel=0.02)

    def test_tangency_exponent(self, ctx):
        # residual on the tangent plane grows quadratically over a decade
        slope = ctx.gvm / ctx.walkoff
        oms = np.array([1e12, 2e12, 4e12, 8e12, 1.6e13])
        res = np.array([abs(d_inc(ctx, slope * o, 0.0, o)) for o in oms])
        expo = np.polyfit(np.log(oms), np.log(res), 1)[0]
        assert expo == pytest.approx(2.0, abs=0.1)

    def test_curvature_sign_toward_shorter_wavelengths(self, ctx):
        # on the tangent plane the residual is positive: the exact surface sits
        # at higher detuning, i.e. shorter up-converted wavelength
        slope = ctx.gvm / ctx.walkoff
        for om in (1e12, 4e12, 1.6e13):
            for s in (+1.0, -1.0):
                assert d_inc(ctx, slope * s * om, 0.0, s * om) > 0.0

    def test_tilt_offset_formula(self, ctx):
        dth = np.radians(0.5)
        root = brentq(lambda om: d_inc(ctx, 0.0, 0.0, om, dth), 0.0, 3e14)
        linear = ctx.pdc_up.k * ctx.walkoff * dth / ctx.gvm
        assert root == pytest.approx(linear, rel=0.10)


class TestBandwidths:
    def test_goldens(self, ctx):
        bw = bandwidths(ctx)
        assert bw.omega_pdc == pytest.approx(7.63121191623e13, rel=1e-11)
        assert bw.q_pdc == pytest.approx(49635.3868032, rel=1e-11)
        assert bw.omega_sfg == pytest.approx(1.13955139604e13, rel=1e-11)
        assert bw.q_sfg == pytest.approx(17864.803965, rel=1e-11)

    def test_scaling_with_lengths(self, ctx):
        double_sfg = PhaseMatchContext.collinear(BBO, LAM_PUMP, 4e-3, 2e-3)
        quad_pdc = PhaseMatchContext.collinear(BBO, LAM_PUMP, 16e-3, 1e-3)
        a, b, c = bandwidths(ctx), bandwidths(double_sfg), bandwidths(quad_pdc)
        assert b.omega_sfg == pytest.approx(a.omega_sfg / 2, rel=1e-14)
        assert b.q_sfg == pytest.approx(a.q_sfg / 2, rel=1e-14)
        assert c.omega_pdc == pytest.approx(a.omega_pdc / 2, rel=1e-14)
        assert c.q_pdc == pytest.approx(a.q_pdc / 2, rel=1e-14)

    def test_degenerate_material_rejected(self):
        iso = Material("iso", BBO.ordinary, BBO.ordinary)
        pdc = CrystalParams(iso, 4e-3, 0.4)
        sfg = CrystalParams(iso, 1e-3, 0.4)
        ctx_iso = PhaseMatchContext.create(pdc, sfg, LAM_PUMP)
        with pytest.raises(ValueError, match="walk-off"):
            bandwidths(ctx_iso)


class TestThresholdLengths:
    def test_values(self, ctx):
        tl = threshold_lengths(ctx)
        assert tl.temporal == pytest.approx(149.3277095e-6, rel=1e-9)
        assert tl.spatial == pytest.approx(359.9207162e-6, rel=1e-9)
        # the published rough figures
        assert tl.temporal == pytest.approx(150e-6, rel=0.2)
        assert tl.spatial == pytest.approx(360e-6, rel=0.2)

    def test_defining_equalities(self, ctx):
        tl = threshold_lengths(ctx)
        at_temporal = bandwidths(PhaseMatchContext.collinear(BBO, LAM_PUMP, 4e-3, tl.temporal))
        assert at_temporal.omega_sfg == pytest.approx(at_temporal.omega_pdc, rel=1e-10)
        at_spatial = bandwidths(PhaseMatchContext.collinear(BBO, LAM_PUMP, 4e-3, tl.spatial))
        assert at_spatial.q_sfg == pytest.approx(at_spatial.q_pdc, rel=1e-10)


class TestCriticalAngle:
    def test_golden(self):
        ctx4 = PhaseMatchContext.collinear(BBO, LAM_PUMP, 4e-3, 4e-3, gain=9.3)
        assert np.degrees(critical_angle(ctx4)) == pytest.approx(0.2548975068, abs=1e-8)
        assert np.degrees(critical_angle(ctx4)) == pytest.approx(0.25, rel=0.2)

    def test_zero_gain_limit(self, ctx):
        want = 2 * np.pi / (ctx.walkoff * ctx.sfg_up.k * ctx.sfg.length)
        assert critical_angle(ctx, gain=0.0) == pytest.approx(want, rel=1e-14)

    def test_inverse_length_scaling(self):
        a = PhaseMatchContext.collinear(BBO, LAM_PUMP, 4e-3, 1e-3, gain=9.3)
        b = PhaseMatchContext.collinear(BBO, LAM_PUMP, 4e-3, 2e-3, gain=9.3)
        assert critical_angle(a) == pytest.approx(2 * critical_angle(b), rel=1e-14)


class TestLambdaInc:
    def test_untilted(self, ctx):
        assert lambda_inc(ctx, 0.0) == pytest.approx(LAM_PUMP, rel=1e-15)

    def test_slope_matches_closed_form(self, ctx):
        d = np.radians(0.01)
        slope = (lambda_inc(ctx, d) - lambda_inc(ctx, -d)) / (2 * d)
        n0 = ctx.pdc_up.k * C_LIGHT / ctx.omega_up
        closed = -n0 * ctx.walkoff * LAM_PUMP / (C_LIGHT * ctx.gvm)
        assert slope == pytest.approx(closed, rel=0.05)

    def test_sweep_monotone_and_continuous(self, ctx):
        tilts = np.radians(np.arange(-2.0, 2.01, 0.5))
        lams = np.array([lambda_inc(ctx, t) for t in tilts])
        assert np.all(np.diff(lams) < 0.0)
        # no jumps: steps stay within 3x the linear slope per step
        step = np.radians(0.5) * 32.4139e-9 / np.radians(1.0)
        assert np.all(np.abs(np.diff(lams)) < 3 * step)

    def test_tilt_via_context_equals_tilt_argument(self, ctx):
        dth = np.radians(1.0)
        assert lambda_inc(ctx.with_sfg_tilt(dth), 0.0) == pytest.approx(
            lambda_inc(ctx, dth), rel=1e-12
        )

    def test_out_of_window_tilt_raises(self, ctx):
        with pytest.raises(ValueError, match="window"):
            lambda_inc(ctx, np.radians(20.0))
