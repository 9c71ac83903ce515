"""Sellmeier material tables for negative uniaxial crystals.

A material carries one Sellmeier set per principal polarization, each of the
single-pole form

    n^2(u) = a + b / (u^2 - c) - d * u^2,        u = wavelength in micrometers,

together with a validity window. Evaluating an index outside the window is a
hard error, never an extrapolation: the coefficients say nothing about the
material out there. Internally everything is SI (wavelengths in meters); the
micrometer conversion happens only inside the n^2 evaluation.

The built-in BBO set is the widely published one for beta barium borate. Other
sets can be registered at runtime or loaded from a config document.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Sellmeier",
    "Material",
    "BBO",
    "MATERIALS",
    "index_ordinary",
    "index_extraordinary",
    "walkoff_angle",
]


@dataclass(frozen=True)
class Sellmeier:
    """Coefficients of n^2 = a + b/(u^2 - c) - d*u^2 with u in micrometers."""

    a: float
    b: float
    c: float
    d: float

    def n_sq(self, lam):
        """n^2 at vacuum wavelength lam (meters). No window check."""
        u2 = (np.asarray(lam) * 1e6) ** 2
        return self.a + self.b / (u2 - self.c) - self.d * u2

    def n(self, lam):
        return np.sqrt(self.n_sq(lam))

    def dn_sq(self, lam):
        """d(n^2)/dlam in 1/m."""
        u = np.asarray(lam) * 1e6
        return (-2.0 * u * self.b / (u**2 - self.c) ** 2 - 2.0 * self.d * u) * 1e6

    def d2n_sq(self, lam):
        """d^2(n^2)/dlam^2 in 1/m^2."""
        u = np.asarray(lam) * 1e6
        p = u**2 - self.c
        return (self.b * (8.0 * u**2 / p**3 - 2.0 / p**2) - 2.0 * self.d) * 1e12


@dataclass(frozen=True)
class Material:
    """One uniaxial material: ordinary and extraordinary principal indices."""

    name: str
    ordinary: Sellmeier
    extraordinary: Sellmeier
    window: tuple[float, float] = (0.4e-6, 1.4e-6)

    def in_window(self, lam):
        lam = np.asarray(lam)
        return (lam >= self.window[0]) & (lam <= self.window[1])

    def check_window(self, lam):
        lam = np.asarray(lam)
        if not np.all(self.in_window(lam)):
            bad = np.atleast_1d(lam)[~np.atleast_1d(self.in_window(lam))]
            lo, hi = self.window
            raise ValueError(
                f"wavelength {bad.flat[0]:.4g} m outside the {self.name} Sellmeier "
                f"validity window [{lo:.2g}, {hi:.2g}] m"
            )


BBO = Material(
    name="BBO",
    ordinary=Sellmeier(a=2.7359, b=0.01878, c=0.01822, d=0.01354),
    extraordinary=Sellmeier(a=2.3753, b=0.01224, c=0.01667, d=0.01516),
)

MATERIALS: dict[str, Material] = {"BBO": BBO}


def index_ordinary(material: Material, lam):
    """Ordinary refractive index at vacuum wavelength lam (meters)."""
    material.check_window(lam)
    return material.ordinary.n(lam)


def _inv_n_sq_theta(material: Material, theta, lam):
    """1/n^2 of the extraordinary wave propagating at angle theta to the axis."""
    ct2 = np.cos(theta) ** 2
    return ct2 / material.ordinary.n_sq(lam) + (1.0 - ct2) / material.extraordinary.n_sq(lam)


def index_extraordinary(material: Material, theta, lam):
    """Extraordinary-wave index at propagation angle theta (radians) to the optic axis.

    Standard index ellipse: 1/n^2(theta) = cos^2(theta)/n_o^2 + sin^2(theta)/n_e^2.
    """
    material.check_window(lam)
    theta = np.asarray(theta)
    if np.any((theta < 0) | (theta > np.pi / 2)):
        raise ValueError("propagation angle must lie in [0, pi/2]")
    return 1.0 / np.sqrt(_inv_n_sq_theta(material, theta, lam))


def walkoff_angle(material: Material, theta, lam):
    """Poynting walk-off angle (radians) of the extraordinary wave.

    rho(theta) = (1/2) n^2(theta) (1/n_e^2 - 1/n_o^2) sin(2 theta); positive for
    a negative uniaxial crystal with 0 < theta < pi/2, i.e. the beam walks toward
    the transverse direction the optic axis leans away from.
    """
    material.check_window(lam)
    n_sq = 1.0 / _inv_n_sq_theta(material, theta, lam)
    return (
        0.5
        * n_sq
        * (1.0 / material.extraordinary.n_sq(lam) - 1.0 / material.ordinary.n_sq(lam))
        * np.sin(2.0 * theta)
    )
