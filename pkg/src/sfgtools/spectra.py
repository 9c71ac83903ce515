"""Labelled spectral containers shared by the analytic and stochastic paths.

An Axis is a uniform, strictly monotone 1D coordinate with a kind tag; the
Spectrum containers pair real non-negative data with its axes, and
SpectralField carries one complex field of the stochastic model together with
its grid, polarization and z position.

Axis kind vocabulary: "qx", "qy" (transverse wavevector, rad/m), "omega"
(detuning from the relevant carrier, rad/s), "alpha" (propagation angle, rad),
"wavelength" (m), "x", "y" (m), "t" (s).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Axis", "Spectrum2D", "Spectrum3D", "SpectralField"]

_KINDS = {"qx", "qy", "omega", "alpha", "wavelength", "x", "y", "t"}


@dataclass(frozen=True)
class Axis:
    kind: str
    values: np.ndarray

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown axis kind {self.kind!r}; expected one of {sorted(_KINDS)}")
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("axis values must be a non-empty 1D array")
        if v.size > 1:
            d = np.diff(v)
            if not (np.all(d > 0) or np.all(d < 0)):
                raise ValueError(f"axis {self.kind!r} must be strictly monotone")

    def __len__(self):
        return self.values.size

    @property
    def spacing(self) -> float:
        if self.values.size < 2:
            raise ValueError("spacing undefined for a single-point axis")
        return float(self.values[1] - self.values[0])

    def index_of(self, value: float) -> int:
        """Index of the grid point closest to value."""
        return int(np.argmin(np.abs(self.values - value)))


def _check_spectrum(values, axes, ndim):
    if len(axes) != ndim:
        raise ValueError(f"expected {ndim} axes, got {len(axes)}")
    if values.ndim != ndim:
        raise ValueError(f"values must be {ndim}D, got shape {values.shape}")
    shape = tuple(len(a) for a in axes)
    if values.shape != shape:
        raise ValueError(f"values shape {values.shape} does not match axes {shape}")
    if np.any(values < 0.0) or not np.all(np.isfinite(values)):
        raise ValueError("spectrum values must be finite and non-negative")


@dataclass(frozen=True)
class Spectrum2D:
    """Real non-negative data on two labelled axes."""

    values: np.ndarray
    axes: tuple[Axis, Axis]
    normalization: str = "arbitrary"

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        object.__setattr__(self, "axes", tuple(self.axes))
        _check_spectrum(self.values, self.axes, 2)


@dataclass(frozen=True)
class Spectrum3D:
    """Real non-negative data on three labelled axes."""

    values: np.ndarray
    axes: tuple[Axis, Axis, Axis]
    normalization: str = "arbitrary"

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        object.__setattr__(self, "axes", tuple(self.axes))
        _check_spectrum(self.values, self.axes, 3)

    def axis(self, kind: str) -> Axis:
        for a in self.axes:
            if a.kind == kind:
                return a
        raise KeyError(f"spectrum has no {kind!r} axis")


@dataclass
class SpectralField:
    """One complex field of the stochastic model, sampled in (qx, qy, omega).

    ``values`` uses FFT (unshifted) frequency ordering along every axis, which
    is what the split-step propagator works in; ``polarization`` is
    "down" (ordinary wave around the half carrier) or "up" (extraordinary wave
    around the pump carrier). Amplitudes are photons per grid mode with
    symmetric ordering, so vacuum contributes 1/2 photon per mode on average.
    """

    values: np.ndarray
    grid: "GridSpec"  # noqa: F821 - imported lazily to avoid a cycle
    polarization: str
    z: float = 0.0

    def __post_init__(self):
        if self.polarization not in ("down", "up"):
            raise ValueError("polarization must be 'down' or 'up'")
        expected = (self.grid.nx, self.grid.ny, self.grid.nt)
        if self.values.shape != expected:
            raise ValueError(f"field shape {self.values.shape} != grid shape {expected}")
        if self.values.dtype != np.complex128:
            raise ValueError("field values must be complex128")

    def copy(self) -> "SpectralField":
        return SpectralField(self.values.copy(), self.grid, self.polarization, self.z)

    def photon_count(self) -> float:
        """Total photons above the symmetric-ordering vacuum floor."""
        return float(np.sum(np.abs(self.values) ** 2) - 0.5 * self.values.size)
