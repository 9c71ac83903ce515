"""Computational grids and the resolution preconditions they must satisfy.

The stochastic model and the analytic integrals both live on uniform grids in
(x, y, t) or equivalently (qx, qy, omega). A grid is acceptable only when its
spectral spacings resolve the narrowest physical scales of the configured
crystals: spacing at most a quarter of the smaller of the emission and
acceptance bandwidths, per axis. Runs on coarser grids are refused rather than
silently degraded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .phasematch import PhaseMatchContext, bandwidths

__all__ = ["GridSpec", "ResolutionError", "centered_axis", "check_resolution"]


class ResolutionError(ValueError):
    """A grid that cannot resolve the physics it is asked to carry."""


def centered_axis(n: int, spacing: float) -> np.ndarray:
    """Uniform axis of n points with spacing, zero sitting at index n // 2.

    Matches the FFT layout: for even n the axis runs over
    [-n/2, ..., n/2 - 1] * spacing.
    """
    if n < 1 or spacing <= 0.0:
        raise ValueError("need n >= 1 and positive spacing")
    return (np.arange(n) - n // 2) * spacing


def check_resolution(ctx: PhaseMatchContext, dq: float, domega: float) -> None:
    """Refuse spectral spacings coarser than a quarter of the narrowest scale."""
    bw = bandwidths(ctx)
    q_scale = min(bw.q_pdc, bw.q_sfg)
    w_scale = min(bw.omega_pdc, bw.omega_sfg)
    problems = []
    if dq > q_scale / 4:
        problems.append(
            f"transverse spacing {dq:.4g} rad/m exceeds a quarter of the narrowest "
            f"transverse scale min({bw.q_pdc:.4g}, {bw.q_sfg:.4g}) = {q_scale:.4g} rad/m"
        )
    if domega > w_scale / 4:
        problems.append(
            f"frequency spacing {domega:.4g} rad/s exceeds a quarter of the narrowest "
            f"frequency scale min({bw.omega_pdc:.4g}, {bw.omega_sfg:.4g}) = {w_scale:.4g} rad/s"
        )
    if problems:
        raise ResolutionError("; ".join(problems))


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Uniform (x, y, t) box for the stochastic model.

    Spectral spacings follow from the Fourier pairing dq = 2 pi / (n dx);
    sizes must be powers of two (the propagator leans on radix-2 FFTs).
    """

    nx: int
    ny: int
    nt: int
    dx: float
    dy: float
    dt: float

    def __post_init__(self):
        for name in ("nx", "ny", "nt"):
            if not _is_pow2(getattr(self, name)):
                raise ValueError(f"{name} must be a power of two, got {getattr(self, name)}")
        if min(self.dx, self.dy, self.dt) <= 0.0:
            raise ValueError("grid spacings must be positive")

    @property
    def dqx(self) -> float:
        return 2 * np.pi / (self.nx * self.dx)

    @property
    def dqy(self) -> float:
        return 2 * np.pi / (self.ny * self.dy)

    @property
    def domega(self) -> float:
        return 2 * np.pi / (self.nt * self.dt)

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.nx, self.ny, self.nt)

    @property
    def cell_volume(self) -> float:
        return self.dx * self.dy * self.dt

    def qx(self, shifted: bool = False) -> np.ndarray:
        """Transverse wavevector axis, FFT-ordered unless shifted."""
        q = 2 * np.pi * np.fft.fftfreq(self.nx, self.dx)
        return np.fft.fftshift(q) if shifted else q

    def qy(self, shifted: bool = False) -> np.ndarray:
        q = 2 * np.pi * np.fft.fftfreq(self.ny, self.dy)
        return np.fft.fftshift(q) if shifted else q

    def omega(self, shifted: bool = False) -> np.ndarray:
        """Detuning axis around the carrier, FFT-ordered unless shifted.

        Sign convention: a field envelope written as sum of exp(i(q.r - Omega t))
        modes; the FFT index k along t maps to Omega = +2 pi k / (n dt).
        """
        w = 2 * np.pi * np.fft.fftfreq(self.nt, self.dt)
        return np.fft.fftshift(w) if shifted else w

    def validate_against(self, ctx: PhaseMatchContext) -> None:
        check_resolution(ctx, max(self.dqx, self.dqy), self.domega)
