"""Phase mismatches and bandwidth scales for the degenerate type-I cascade.

The cascade is: a pump at carrier w_up down-converts in the first crystal
(extraordinary pump, ordinary daughters at w_up / 2), and the daughters
up-convert in a second crystal that may be tilted off the common tuning angle.
A mode label (qx, qy, dw) always means transverse wavevector plus detuning from
the relevant carrier. Everything is SI.

Three mismatches drive the package:

* down-conversion of a collinear plane-wave pump into the conjugate pair
  (q, dw), (-q, -dw), evaluated in the first crystal:
      delta_pdc = kz_o(q, dw) + kz_o(-q, -dw) - k_up
* up-conversion of an arbitrary pair of down-converted modes in the second:
      delta_sfg = kz_o(w1) + kz_o(w2) - kz_e(w1 + w2)
* the single-mode (incoherent) up-conversion mismatch
      d_inc(w) = k_up_pdc - kz_e(w) + (dk_down) * dw,
  i.e. delta_sfg with the partner photon linearized away: its quadratic
  pieces belong to the pair mismatches, not to the surface geometry.

The zero set of d_inc is the skewed surface along which incoherent
up-converted light concentrates. To linear order it is the plane
dw = (walkoff / gvm) * qx, tilted only along the walk-off direction; the
exact surface bends away from that plane quadratically, toward higher dw
(shorter wavelengths), because the exact extraordinary kz curves slower in
qx than the paraxial estimate.

Mismatch values at non-propagating or out-of-window grid points are NaN so
that accidental use is loud; spectra built on top apply their own masks first.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.constants import c as C_LIGHT
from scipy.optimize import brentq

from .dispersion import (
    CrystalParams,
    DispersionSample,
    KzResult,
    dispersion_sample,
    kz_extraordinary,
    kz_ordinary,
)
from .materials import Material, index_extraordinary, index_ordinary

__all__ = [
    "PhaseMatchContext",
    "Bandwidths",
    "ThresholdLengths",
    "tuned_angle",
    "delta_pdc",
    "delta_sfg_pair",
    "d_inc",
    "bandwidths",
    "threshold_lengths",
    "critical_angle",
    "lambda_inc",
]


def tuned_angle(material: Material, pump_wavelength: float) -> float:
    """Optic-axis angle for collinear degenerate type-I phase matching.

    Solves n_e(theta, lam_pump) = n_o(2 lam_pump), which makes the collinear
    mismatch delta_pdc(0, 0) vanish exactly. Unique in (0, pi/2) for a
    negative uniaxial material whose birefringence covers the target index.
    """
    target = float(index_ordinary(material, 2.0 * pump_wavelength))

    def f(theta):
        return float(index_extraordinary(material, theta, pump_wavelength)) - target

    lo, hi = 1e-6, np.pi / 2 - 1e-6
    if f(lo) < 0.0 or f(hi) > 0.0:
        raise ValueError(
            f"{material.name} cannot collinearly phase-match a {pump_wavelength * 1e9:.1f} nm pump"
        )
    return brentq(f, lo, hi, xtol=1e-14)


@dataclass(frozen=True)
class PhaseMatchContext:
    """Carrier-level description of the two-crystal arrangement.

    Caches one dispersion sample per (crystal, wave): the extraordinary wave at
    the pump carrier and the ordinary wave at half that frequency, in each
    crystal at its own axis angle.
    """

    pdc: CrystalParams
    sfg: CrystalParams
    omega_up: float
    pdc_up: DispersionSample
    pdc_down: DispersionSample
    sfg_up: DispersionSample
    sfg_down: DispersionSample

    @classmethod
    def create(
        cls, pdc: CrystalParams, sfg: CrystalParams, pump_wavelength: float
    ) -> "PhaseMatchContext":
        omega_up = 2.0 * np.pi * C_LIGHT / pump_wavelength
        return cls(
            pdc=pdc,
            sfg=sfg,
            omega_up=omega_up,
            pdc_up=dispersion_sample(pdc.material, "e", pdc.theta, omega_up),
            pdc_down=dispersion_sample(pdc.material, "o", 0.0, omega_up / 2.0),
            sfg_up=dispersion_sample(sfg.material, "e", sfg.theta, omega_up),
            sfg_down=dispersion_sample(sfg.material, "o", 0.0, omega_up / 2.0),
        )

    @classmethod
    def collinear(
        cls,
        material: Material,
        pump_wavelength: float,
        length_pdc: float,
        length_sfg: float,
        gain: float = 0.0,
        sigma: float | None = None,
        dtheta_sfg: float = 0.0,
    ) -> "PhaseMatchContext":
        """Both crystals of the same material at the exact tuning angle.

        ``dtheta_sfg`` tilts only the up-converter off the common angle.
        """
        theta0 = tuned_angle(material, pump_wavelength)
        kw = {} if sigma is None else {"sigma": sigma}
        pdc = CrystalParams(material, length_pdc, theta0, gain=gain, **kw)
        sfg = CrystalParams(material, length_sfg, theta0 + dtheta_sfg, **kw)
        return cls.create(pdc, sfg, pump_wavelength)

    @property
    def omega_down(self) -> float:
        return self.omega_up / 2.0

    @property
    def gvm(self) -> float:
        """Group-slope mismatch between the two carriers in the up-converter (s/m)."""
        return self.sfg_up.dk - self.sfg_down.dk

    @property
    def walkoff(self) -> float:
        return self.sfg_up.walkoff

    def with_sfg_tilt(self, dtheta: float) -> "PhaseMatchContext":
        """Same arrangement with the up-converter tilted by dtheta more."""
        if dtheta == 0.0:
            return self
        sfg = replace(self.sfg, theta=self.sfg.theta + dtheta)
        return PhaseMatchContext.create(self.pdc, sfg, 2.0 * np.pi * C_LIGHT / self.omega_up)

    def kz_down_pdc(self, qx, qy, dw) -> KzResult:
        return kz_ordinary(self.pdc.material, qx, qy, self.omega_down + np.asarray(dw))

    def kz_down_sfg(self, qx, qy, dw) -> KzResult:
        return kz_ordinary(self.sfg.material, qx, qy, self.omega_down + np.asarray(dw))

    def kz_up_sfg(self, qx, qy, dw, dtheta: float = 0.0) -> KzResult:
        return kz_extraordinary(
            self.sfg.material, self.sfg.theta + dtheta, qx, qy, self.omega_up + np.asarray(dw)
        )


def _value(res: KzResult):
    return np.where(res.propagating, res.kz, np.nan)


def delta_pdc(ctx: PhaseMatchContext, qx, qy, dw):
    """Mismatch for down-conversion into the conjugate pair (q, dw), (-q, -dw).

    Even under both q -> -q and dw -> -dw by construction. NaN where either
    member of the pair is evanescent or outside the material window.
    """
    a = ctx.kz_down_pdc(qx, qy, dw)
    b = ctx.kz_down_pdc(-np.asarray(qx), -np.asarray(qy), -np.asarray(dw))
    return _value(a) + _value(b) - ctx.pdc_up.k


def delta_sfg_pair(ctx: PhaseMatchContext, w1, w2, dtheta: float = 0.0):
    """Mismatch for up-converting the pair of down-converted modes w1 + w2.

    Each of ``w1``, ``w2`` is a (qx, qy, dw) triple of broadcastable arrays.
    ``dtheta`` is an extra tilt of the up-converter on top of the one already
    recorded in the context.
    """
    q1x, q1y, dw1 = (np.asarray(a) for a in w1)
    q2x, q2y, dw2 = (np.asarray(a) for a in w2)
    a = ctx.kz_down_sfg(q1x, q1y, dw1)
    b = ctx.kz_down_sfg(q2x, q2y, dw2)
    s = ctx.kz_up_sfg(q1x + q2x, q1y + q2y, dw1 + dw2, dtheta)
    return _value(a) + _value(b) - _value(s)


def d_inc(ctx: PhaseMatchContext, qx, qy, dw, dtheta: float = 0.0):
    """Single-mode up-conversion mismatch whose zero set is the skewed surface.

    Uses the exact extraordinary kz of the up-converted mode but only the
    group-slope (linear) part of the down-converted branch: the pair mismatch
    splits as delta_sfg(w', w - w') ~ d_inc(w) + [delta_pdc(w') +
    delta_pdc(w - w')] / 2, so the quadratic pieces of the daughters are
    accounted for by the pair terms and must not be double counted here.
    """
    s = ctx.kz_up_sfg(qx, qy, dw, dtheta)
    return ctx.pdc_up.k - _value(s) + ctx.sfg_down.dk * np.asarray(dw)


@dataclass(frozen=True)
class Bandwidths:
    """Acceptance scales (rad/s and rad/m) of the two crystals.

    The down-converter emits into a band limited by its own group-velocity
    dispersion and diffraction; the up-converter accepts a band limited by the
    group-slope mismatch and the spatial walk-off between its two carriers.
    """

    omega_pdc: float
    q_pdc: float
    omega_sfg: float
    q_sfg: float


def bandwidths(ctx: PhaseMatchContext) -> Bandwidths:
    if ctx.gvm <= 0.0 or ctx.walkoff <= 0.0:
        raise ValueError("group-slope mismatch and walk-off must be positive")
    return Bandwidths(
        omega_pdc=1.0 / np.sqrt(ctx.pdc_down.d2k * ctx.pdc.length),
        q_pdc=np.sqrt(ctx.pdc_down.k / ctx.pdc.length),
        omega_sfg=1.0 / (ctx.gvm * ctx.sfg.length),
        q_sfg=1.0 / (ctx.walkoff * ctx.sfg.length),
    )


@dataclass(frozen=True)
class ThresholdLengths:
    """Up-converter lengths beyond which it clips the down-converted light."""

    temporal: float
    spatial: float


def threshold_lengths(ctx: PhaseMatchContext) -> ThresholdLengths:
    """Crossover lengths of the up-converting crystal.

    ``temporal`` is where the group-mismatch acceptance 1/(gvm l) narrows to
    the emitted bandwidth 1/sqrt(k'' l_pdc); ``spatial`` is where the walk-off
    acceptance 1/(walkoff l) narrows to the emitted divergence sqrt(k/l_pdc).
    Below both, the up-converter accepts essentially everything it is fed.
    """
    b = bandwidths(ctx)
    return ThresholdLengths(
        temporal=1.0 / (ctx.gvm * b.omega_pdc),
        spatial=1.0 / (ctx.walkoff * b.q_pdc),
    )


def critical_angle(ctx: PhaseMatchContext, gain: float | None = None) -> float:
    """Up-converter tilt that kills the coherent (phase-sensitive) signal.

    Tilting by dtheta slides the up-conversion mismatch of every conjugate
    pair by k_up * walkoff * dtheta. The coherent signal survives only while
    that shift stays inside the first null of the parametric gain profile,
    whose half-width in mismatch is 2 sqrt(gain^2 + pi^2) / length:

        dtheta_c = 2 sqrt(gain^2 + pi^2) / (k_up * walkoff * length_sfg).
    """
    g = ctx.pdc.gain if gain is None else gain
    return 2.0 * np.sqrt(g**2 + np.pi**2) / (ctx.sfg_up.k * ctx.walkoff * ctx.sfg.length)


def lambda_inc(ctx: PhaseMatchContext, dtheta: float = 0.0) -> float:
    """Collinear wavelength of the incoherent ridge for an up-converter tilt.

    Solves d_inc(0, 0, dw, dtheta) = 0 for the detuning and returns the
    up-converted vacuum wavelength 2 pi c / (w_up + dw). Positive tilt (larger
    internal angle) pushes the ridge to shorter wavelengths. Raises if the
    ridge leaves the material window before a root is found.
    """
    total = ctx.sfg.theta + dtheta - ctx.pdc.theta
    if total == 0.0:
        return 2.0 * np.pi * C_LIGHT / ctx.omega_up

    def f(dw):
        val = d_inc(ctx, 0.0, 0.0, dw, dtheta)
        if np.isnan(val):
            raise ValueError(
                f"incoherent ridge for a tilt of {total:.4g} rad leaves the "
                f"{ctx.sfg.material.name} Sellmeier window"
            )
        return float(val)

    # Bracket around the linearized prediction, then widen geometrically;
    # d_inc is monotone in dw over the whole band of interest.
    guess = ctx.pdc_up.k * ctx.walkoff * total / ctx.gvm
    f0 = f(0.0)
    hi = guess if f0 * f(guess) <= 0.0 else 1.6 * guess
    lo = 0.0
    for _ in range(60):
        if f0 * f(hi) <= 0.0:
            break
        lo, hi = hi, hi * 1.6
    else:
        raise ValueError("failed to bracket the incoherent ridge detuning")
    dw = brentq(f, lo, hi, xtol=1e6)
    return 2.0 * np.pi * C_LIGHT / (ctx.omega_up + dw)
