"""Print the phase-matching numbers that define the two-crystal experiment.

Everything here is closed-form dispersion work: tuned cut angle, spatial
walk-off, group-velocity mismatch, the acceptance bandwidths of both
crystals, the crossover lengths where the up-converter stops resolving the
pair correlations, and the critical tilt that kills the coherent peak.
"""

import numpy as np
from scipy.constants import c as C_LIGHT

from sfgtools.materials import BBO
from sfgtools.phasematch import (
    PhaseMatchContext,
    bandwidths,
    critical_angle,
    lambda_inc,
    threshold_lengths,
)

LAM_PUMP = 527.5e-9


def report(l_pdc, l_sfg, gain):
    ctx = PhaseMatchContext.collinear(BBO, LAM_PUMP, l_pdc, l_sfg, gain=gain)
    bw = bandwidths(ctx)
    th = threshold_lengths(ctx)
    crit = critical_angle(ctx)

    print(f"down-converter {l_pdc * 1e3:g} mm, up-converter {l_sfg * 1e3:g} mm, gain {gain:g}")
    print(f"  tuned cut angle        {np.degrees(ctx.pdc.theta):8.3f} deg")
    print(f"  spatial walk-off       {ctx.walkoff * 1e3:8.3f} mrad")
    print(f"  group-velocity mismatch {ctx.gvm * 1e12:7.4f} ps/m")
    print(f"  ridge slope walkoff/gvm {ctx.walkoff / ctx.gvm:.4g} m/s")
    print(f"  pair bandwidths        dq {bw.q_pdc:.4g} 1/m   dw {bw.omega_pdc:.4g} rad/s")
    print(f"  acceptance bandwidths  dq {bw.q_sfg:.4g} 1/m   dw {bw.omega_sfg:.4g} rad/s")
    print(f"  crossover lengths      temporal {th.temporal * 1e6:.1f} um"
          f"   spatial {th.spatial * 1e6:.1f} um")
    print(f"  critical tilt          {np.degrees(crit):.4f} deg")
    print()


def tilt_curve(ctx, degs):
    print("tilt -> incoherent wavelength (analytic root):")
    for d in degs:
        lam = lambda_inc(ctx, np.radians(d))
        print(f"  {d:+5.2f} deg   {lam * 1e9:9.3f} nm"
              f"   detuning {(lam - LAM_PUMP) * 1e9:+7.3f} nm")
    n0 = ctx.pdc_up.k * C_LIGHT / ctx.omega_up
    closed = -n0 * ctx.walkoff * LAM_PUMP / (C_LIGHT * ctx.gvm)
    print(f"  closed-form slope at zero tilt: {closed * 1e9 * np.radians(1):+.3f} nm/deg")
    print()


if __name__ == "__main__":
    report(4e-3, 1e-3, 9.3)
    report(4e-3, 4e-3, 9.3)
    ctx = PhaseMatchContext.collinear(BBO, LAM_PUMP, 4e-3, 1e-3, gain=9.3)
    tilt_curve(ctx, np.linspace(-2, 2, 9))
