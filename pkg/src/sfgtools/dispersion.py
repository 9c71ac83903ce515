"""Plane-wave dispersion in a uniaxial crystal cut in the x-z plane.

Geometry conventions used throughout the package:

* light propagates toward +z, transverse wavevector q = (qx, qy);
* the optic axis lies in the x-z plane, tilted by theta from +z toward -x,
  i.e. c_hat = (-sin theta, 0, cos theta).

With that choice the extraordinary Poynting walk-off at q = 0 points toward
+x and equals -d(kz)/dqx, matching `materials.walkoff_angle`.

The extraordinary longitudinal wavenumber is the exact root of the uniaxial
Fresnel equation, which for this geometry reduces to a quadratic in kz:

    A kz^2 + B kz + C = 0,
    eps = 1/n_o^2 - 1/n_e^2   (negative for a negative uniaxial crystal),
    A = eps cos^2(theta) + 1/n_e^2 = 1/n^2(theta),
    B = -eps qx sin(2 theta),
    C = eps qx^2 sin^2(theta) + (qx^2 + qy^2)/n_e^2 - (w/c)^2,

taking the forward branch kz = (-B + sqrt(B^2 - 4AC)) / (2A). No paraxial or
slowly-varying expansion is made anywhere; the quadratic keeps the anisotropy
of the transverse curvature that a naive sqrt(k^2 - q^2) would miss.

Frequency derivatives are analytic, via the chain rule through the Sellmeier
form: dk/dw = (n - lam dn/dlam)/c and d2k/dw2 = lam^3 (d2n/dlam2) / (2 pi c^2).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.constants import c as C_LIGHT

from .materials import Material, walkoff_angle

__all__ = [
    "CrystalParams",
    "DispersionSample",
    "KzResult",
    "dispersion_sample",
    "kz_ordinary",
    "kz_extraordinary",
]

DEFAULT_SIGMA = 1e-16  # up-conversion amplitude per meter; sets absolute photon scales only


@dataclass(frozen=True)
class CrystalParams:
    """Geometry and coupling of one crystal: material, length, axis angle.

    ``sigma`` is the sum-frequency coupling amplitude per meter and only fixes
    absolute photon numbers; ``gain`` is the dimensionless parametric gain of
    the down-conversion stage (leave 0 for a pure up-converter).
    """

    material: Material
    length: float
    theta: float
    sigma: float = DEFAULT_SIGMA
    gain: float = 0.0

    def __post_init__(self):
        if not self.length > 0.0:
            raise ValueError(f"crystal length must be positive, got {self.length}")
        if not 0.0 < self.theta < np.pi / 2:
            raise ValueError(f"axis angle must lie in (0, pi/2), got {self.theta}")
        if self.sigma < 0.0 or self.gain < 0.0:
            raise ValueError("sigma and gain must be non-negative")


class KzResult(NamedTuple):
    """Longitudinal wavenumber on a grid plus a propagating-wave mask.

    Entries with ``propagating == False`` (evanescent modes, or frequencies
    outside the Sellmeier validity window) carry kz = 0 and must be discarded
    or zeroed by the caller, never trusted as phases.
    """

    kz: np.ndarray
    propagating: np.ndarray


@dataclass(frozen=True)
class DispersionSample:
    """Collinear dispersion data at one frequency: k, dk/dw, d2k/dw2, walk-off."""

    k: float
    dk: float
    d2k: float
    walkoff: float


def _n_derivs(material: Material, polarization: str, theta: float, lam):
    """Index and its first two wavelength derivatives for 'o' or 'e' waves."""
    if polarization == "o":
        ct2, st2 = 1.0, 0.0
    elif polarization == "e":
        ct2 = np.cos(theta) ** 2
        st2 = 1.0 - ct2
    else:
        raise ValueError(f"polarization must be 'o' or 'e', got {polarization!r}")

    # f = 1/n^2 is a convex combination of the principal 1/n^2 curves.
    f = f1 = f2 = 0.0
    for weight, sell in ((ct2, material.ordinary), (st2, material.extraordinary)):
        if weight == 0.0:
            continue
        s = sell.n_sq(lam)
        s1 = sell.dn_sq(lam)
        s2 = sell.d2n_sq(lam)
        f = f + weight / s
        f1 = f1 - weight * s1 / s**2
        f2 = f2 + weight * (2.0 * s1**2 / s**3 - s2 / s**2)

    n = f ** (-0.5)
    n1 = -0.5 * f ** (-1.5) * f1
    n2 = 0.75 * f ** (-2.5) * f1**2 - 0.5 * f ** (-1.5) * f2
    return n, n1, n2


def dispersion_sample(
    material: Material, polarization: str, theta: float, omega: float
) -> DispersionSample:
    """Sample k(w) and its first two w-derivatives at a single carrier.

    ``theta`` is the propagation angle to the optic axis (ignored for 'o').
    ``omega`` is the absolute angular frequency in rad/s. Raises outside the
    material's Sellmeier window.
    """
    lam = 2.0 * np.pi * C_LIGHT / omega
    material.check_window(lam)
    n, n1, n2 = _n_derivs(material, polarization, theta, lam)
    k = omega * n / C_LIGHT
    dk = (n - lam * n1) / C_LIGHT
    d2k = lam**3 * n2 / (2.0 * np.pi * C_LIGHT**2)
    rho = float(walkoff_angle(material, theta, lam)) if polarization == "e" else 0.0
    return DispersionSample(k=float(k), dk=float(dk), d2k=float(d2k), walkoff=rho)


def _safe_wavelength(material: Material, omega):
    """Vacuum wavelength per grid point, clipped into the Sellmeier window.

    Returns (lam_clipped, in_window). Clipping keeps the Sellmeier evaluation
    away from its UV pole for frequencies that will be masked out anyway.
    """
    omega = np.asarray(omega, dtype=float)
    with np.errstate(divide="ignore"):
        lam = np.where(omega > 0.0, 2.0 * np.pi * C_LIGHT / np.maximum(omega, 1.0), np.inf)
    lo, hi = material.window
    in_window = (lam >= lo) & (lam <= hi)
    return np.clip(lam, lo, hi), in_window


def kz_ordinary(material: Material, qx, qy, omega) -> KzResult:
    """Exact kz of the ordinary wave: sqrt((w n_o/c)^2 - qx^2 - qy^2).

    All arguments broadcast; ``omega`` is absolute (rad/s). The Sellmeier
    evaluation happens on the shape of ``omega`` alone, so frequency axes can
    stay thin while q axes broadcast around them.
    """
    qx = np.asarray(qx, dtype=float)
    qy = np.asarray(qy, dtype=float)
    omega = np.asarray(omega, dtype=float)
    lam, ok = _safe_wavelength(material, omega)
    k = omega * material.ordinary.n(lam) / C_LIGHT
    radicand = k**2 - qx**2 - qy**2
    ok = ok & (radicand > 0.0)
    kz = np.sqrt(np.where(ok, radicand, 0.0))
    return KzResult(kz=np.where(ok, kz, 0.0), propagating=ok)


def kz_extraordinary(material: Material, theta: float, qx, qy, omega) -> KzResult:
    """Exact kz of the extraordinary wave for optic axis (-sin theta, 0, cos theta).

    Forward root of the quadratic documented in the module docstring. All of
    ``qx, qy, omega`` broadcast; ``omega`` is absolute (rad/s).
    """
    qx = np.asarray(qx, dtype=float)
    qy = np.asarray(qy, dtype=float)
    omega = np.asarray(omega, dtype=float)
    lam, ok = _safe_wavelength(material, omega)
    inv_no2 = 1.0 / material.ordinary.n_sq(lam)
    inv_ne2 = 1.0 / material.extraordinary.n_sq(lam)
    eps = inv_no2 - inv_ne2
    ct2 = np.cos(theta) ** 2

    a = eps * ct2 + inv_ne2
    b = -eps * qx * np.sin(2.0 * theta)
    cc = eps * qx**2 * (1.0 - ct2) + (qx**2 + qy**2) * inv_ne2 - (omega / C_LIGHT) ** 2
    disc = b**2 - 4.0 * a * cc
    ok = ok & (disc > 0.0)
    kz = (-b + np.sqrt(np.where(ok, disc, 0.0))) / (2.0 * a)
    ok = ok & (kz > 0.0)
    return KzResult(kz=np.where(ok, kz, 0.0), propagating=ok)
