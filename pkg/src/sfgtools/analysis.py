"""Spectrometer-style reduction of far-field spectra.

Mirrors what the imaging spectrometer sees: a slit selects a stripe around
one transverse axis (the walk-off plane keeps (qx, omega), the orthogonal
plane keeps (qy, omega)), the coherent peak at the origin is separated from
the incoherent remainder by a small mask, and the ridge of the incoherent
component is reduced to per-column frequency centroids. Angle sweeps drive
any of the three engines (analytic surface root, plane-wave-pump spectra,
stochastic runs) over a list of up-converter tilts.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.constants import c as C_LIGHT

from . import pwpa
from .phasematch import lambda_inc as _surface_lambda
from .spectra import Axis, Spectrum2D, Spectrum3D

__all__ = [
    "SpectrometerView",
    "RidgeCentroid",
    "SweepResult",
    "slice_spectrum",
    "experimental_to_frequency",
    "split_coherent_incoherent",
    "ridge_centroid",
    "ridge_slope",
    "angle_sweep",
]

_PLANES = {"walkoff": "qx", "orthogonal": "qy"}
_AXIS_MODES = ("frequency", "experimental")


@dataclass(frozen=True)
class SpectrometerView:
    """Which plane the slit selects and how its axes are labelled.

    ``slit_cells`` is the stripe width averaged over; ``axis_mode``
    "experimental" relabels (q, omega) as (angle in degrees, wavelength in m).
    """

    plane: str = "walkoff"
    slit_cells: int = 1
    axis_mode: str = "frequency"

    def __post_init__(self):
        if self.plane not in _PLANES:
            raise ValueError(f"plane must be one of {sorted(_PLANES)}, got {self.plane!r}")
        if self.slit_cells < 1:
            raise ValueError("slit width must be at least one cell")
        if self.axis_mode not in _AXIS_MODES:
            raise ValueError(f"axis_mode must be one of {_AXIS_MODES}, got {self.axis_mode!r}")


def _axis_position(spectrum, kind: str) -> int:
    for i, a in enumerate(spectrum.axes):
        if a.kind == kind:
            return i
    raise KeyError(f"spectrum has no {kind!r} axis")


def slice_spectrum(
    spectrum: Spectrum3D,
    view: SpectrometerView,
    omega_carrier: float | None = None,
) -> Spectrum2D:
    """Average the slit stripe out of a 3D spectrum, keeping (q, omega).

    The slit sits centered on the zero of the collapsed transverse axis. With
    experimental axes the carrier frequency of the spectrum is required to
    place the wavelength scale.
    """
    keep_kind = _PLANES[view.plane]
    drop_kind = "qy" if keep_kind == "qx" else "qx"
    i_keep = _axis_position(spectrum, keep_kind)
    i_drop = _axis_position(spectrum, drop_kind)
    i_omega = _axis_position(spectrum, "omega")

    drop_axis = spectrum.axes[i_drop]
    center = drop_axis.index_of(0.0)
    lo = center - (view.slit_cells - 1) // 2
    hi = lo + view.slit_cells
    if lo < 0 or hi > len(drop_axis):
        raise ValueError(
            f"slit of {view.slit_cells} cells around {drop_kind}=0 falls outside the grid"
        )
    stripe = np.take(spectrum.values, np.arange(lo, hi), axis=i_drop).mean(axis=i_drop)
    # after collapsing, order the plane as (q, omega)
    if i_keep > i_omega:
        stripe = stripe.T
    out = Spectrum2D(
        stripe,
        (spectrum.axes[i_keep], spectrum.axes[i_omega]),
        normalization=spectrum.normalization,
    )
    if view.axis_mode == "frequency":
        return out
    if omega_carrier is None:
        raise ValueError("experimental axes need the carrier frequency of the spectrum")
    q, w = out.axes
    lam0 = 2.0 * np.pi * C_LIGHT / omega_carrier
    alpha = Axis("alpha", np.degrees(q.values * lam0 / (2.0 * np.pi)))
    lam = Axis("wavelength", 2.0 * np.pi * C_LIGHT / (omega_carrier + w.values))
    return Spectrum2D(out.values, (alpha, lam), normalization=out.normalization)


def experimental_to_frequency(spectrum: Spectrum2D, omega_carrier: float) -> Spectrum2D:
    """Invert the experimental axis labelling back to (q, omega)."""
    alpha, lam = spectrum.axes
    if alpha.kind != "alpha" or lam.kind != "wavelength":
        raise ValueError("expected (alpha, wavelength) axes")
    lam0 = 2.0 * np.pi * C_LIGHT / omega_carrier
    q = Axis(
        "qx", np.radians(alpha.values) * 2.0 * np.pi / lam0
    )  # plane identity is display-only; qx is the generic transverse label
    w = Axis("omega", 2.0 * np.pi * C_LIGHT / lam.values - omega_carrier)
    return Spectrum2D(spectrum.values, (q, w), normalization=spectrum.normalization)


def _origin_indices(spectrum) -> tuple[int, ...]:
    idx = []
    for a in spectrum.axes:
        i = a.index_of(0.0)
        half = a.spacing if len(a) > 1 else np.inf
        if abs(a.values[i]) > 0.5 * abs(half):
            raise ValueError(f"axis {a.kind!r} does not contain the origin cell")
        idx.append(i)
    return tuple(idx)


def split_coherent_incoherent(
    spectrum: Spectrum2D | Spectrum3D,
    mask_radius: int = 3,
    truncate: float | None = None,
):
    """Separate the central coherent peak from the incoherent remainder.

    Sums inside a ball of ``mask_radius`` grid cells around the origin count
    as coherent, everything else as incoherent; the returned residual has the
    masked region zeroed and, when ``truncate`` is given, is capped at that
    fraction of the coherent peak (display parity with the reference plots).
    Refuses masks covering more than 10% of the grid.
    """
    if mask_radius < 0:
        raise ValueError("mask radius must be non-negative")
    origin = _origin_indices(spectrum)
    grids = np.ogrid[tuple(slice(0, n) for n in spectrum.values.shape)]
    dist2 = sum((g - i) ** 2 for g, i in zip(grids, origin))
    mask = dist2 <= mask_radius**2
    frac = mask.sum() / mask.size
    if frac > 0.10:
        raise ValueError(
            f"mask radius {mask_radius} covers {100 * frac:.1f}% of the grid; "
            "the coherent/incoherent split would be meaningless"
        )
    vals = spectrum.values
    n_coh = float(vals[mask].sum())
    n_inc = float(vals[~mask].sum())
    residual = np.where(mask, 0.0, vals)
    if truncate is not None:
        peak = float(vals[mask].max()) if mask.any() else 0.0
        residual = np.minimum(residual, truncate * peak)
    out = type(spectrum)(residual, spectrum.axes, normalization=spectrum.normalization)
    return n_coh, n_inc, out


@dataclass(frozen=True)
class RidgeCentroid:
    """Per-column frequency centroids of an incoherent ridge.

    ``valid`` flags columns that carried any weight; ``lambda_inc`` is the
    absolute wavelength of the collinear (q = 0) centroid.
    """

    q: np.ndarray
    centroid: np.ndarray
    mass: np.ndarray
    valid: np.ndarray
    lambda_inc: float


def ridge_centroid(
    spectrum: Spectrum2D, omega_carrier: float, q_bin: int = 1,
    statistic: str = "centroid",
) -> RidgeCentroid:
    """Intensity-weighted omega centroid per q column of a (q, omega) plane.

    Columns may be grouped ``q_bin`` at a time; empty columns are flagged
    invalid and skipped by downstream fits rather than poisoning them.
    ``statistic="argmax"`` takes the brightest cell per column instead of the
    weighted mean, which is robust against asymmetric tails when checking
    parity with the analytic surface root.
    """
    qax, wax = spectrum.axes
    if wax.kind != "omega":
        raise ValueError("ridge extraction expects a (q, omega) spectrum")
    if q_bin < 1:
        raise ValueError("q_bin must be at least 1")
    if statistic not in ("centroid", "argmax"):
        raise ValueError(f"statistic must be 'centroid' or 'argmax', got {statistic!r}")
    vals = spectrum.values
    n = (len(qax) // q_bin) * q_bin
    vals = vals[:n].reshape(-1, q_bin, len(wax)).sum(axis=1)
    q = qax.values[:n].reshape(-1, q_bin).mean(axis=1)

    mass = vals.sum(axis=1)
    valid = mass > 0.0
    centroid = np.full(q.shape, np.nan)
    if statistic == "argmax":
        centroid[valid] = wax.values[np.argmax(vals[valid], axis=1)]
    else:
        centroid[valid] = (vals[valid] * wax.values).sum(axis=1) / mass[valid]

    i0 = int(np.argmin(np.abs(q)))
    lam = np.nan
    if valid[i0]:
        lam = 2.0 * np.pi * C_LIGHT / (omega_carrier + centroid[i0])
    return RidgeCentroid(q=q, centroid=centroid, mass=mass, valid=valid, lambda_inc=lam)


def ridge_slope(profile: RidgeCentroid) -> float:
    """Mass-weighted linear fit d(centroid)/dq through the valid columns."""
    ok = profile.valid & np.isfinite(profile.centroid)
    if ok.sum() < 2:
        raise ValueError("too few valid ridge columns for a slope fit")
    w = np.sqrt(profile.mass[ok])
    a = np.stack([np.ones(ok.sum()), profile.q[ok]], axis=1) * w[:, None]
    coef, *_ = np.linalg.lstsq(a, profile.centroid[ok] * w, rcond=None)
    return float(coef[1])


@dataclass(frozen=True)
class SweepResult:
    """One engine's answers over a swept up-converter tilt, sorted rows."""

    parameter: str
    values: np.ndarray
    lambda_inc: np.ndarray
    n_coherent: np.ndarray
    n_incoherent: np.ndarray
    ridge_slope: np.ndarray
    engine: str
    flags: tuple

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if np.any(np.diff(v) <= 0):
            raise ValueError("sweep rows must be sorted by the swept parameter")
        for name in ("n_coherent", "n_incoherent"):
            arr = getattr(self, name)
            if np.any(arr[np.isfinite(arr)] < 0.0):
                raise ValueError(f"{name} must be non-negative")


_ENGINES = ("analytic", "pwpa", "stochastic")


def _grid_axes(grid):
    return grid.qx(shifted=True), grid.qy(shifted=True), grid.omega(shifted=True)


def _row_pwpa(config, dtheta, workers):
    ctx = config.ctx
    qx, qy, w = _grid_axes(config.grid)
    spec = pwpa.incoherent_spectrum_full(
        ctx,
        qx,
        qy,
        w,
        dtheta=dtheta,
        filter_window=config.filter_window,
        stripe_axis="qy",
        stripe_cells=3,
        workers=workers,
    )
    plane = slice_spectrum(spec, SpectrometerView(plane="walkoff"))
    profile = ridge_centroid(plane, ctx.omega_up)
    amp = pwpa.coherent_amplitude(
        ctx, qx, qy, w, dtheta=dtheta, filter_window=config.filter_window
    )
    n_inc = float(spec.values.sum())
    return profile.lambda_inc, abs(amp) ** 2, n_inc, ridge_slope(profile)


def _row_stochastic(config, dtheta, workers):
    from . import simulator  # deferred: simulator pulls us in for its reductions

    result = simulator.run_experiment(replace(config, dtheta=dtheta), workers=workers)
    _, _, residual = split_coherent_incoherent(
        result.slice_walkoff, config.mask_radius
    )
    slope = ridge_slope(ridge_centroid(residual, config.ctx.omega_up))
    return result.lambda_inc, result.n_coherent, result.n_incoherent, slope


def angle_sweep(config, angles, engine: str = "analytic", workers=None) -> SweepResult:
    """Sweep the up-converter tilt and collect (lambda_inc, N_coh, N_inc, slope).

    The analytic engine reports only the surface root and its fixed slope
    (photon numbers are not in its vocabulary). Failing rows are flagged and
    left as NaN instead of aborting the sweep.
    """
    if engine not in _ENGINES:
        raise ValueError(f"engine must be one of {_ENGINES}, got {engine!r}")
    order = np.argsort(np.asarray(angles, dtype=float))
    values = np.asarray(angles, dtype=float)[order]

    lam = np.full(values.shape, np.nan)
    n_coh = np.full(values.shape, np.nan)
    n_inc = np.full(values.shape, np.nan)
    slope = np.full(values.shape, np.nan)
    flags: list = [None] * len(values)

    ctx = config.ctx
    for i, dtheta in enumerate(values):
        try:
            if engine == "analytic":
                lam[i] = _surface_lambda(ctx, dtheta)
                slope[i] = ctx.walkoff / ctx.gvm
            elif engine == "pwpa":
                lam[i], n_coh[i], n_inc[i], slope[i] = _row_pwpa(config, dtheta, workers)
            else:
                lam[i], n_coh[i], n_inc[i], slope[i] = _row_stochastic(
                    config, dtheta, workers
                )
        except (ValueError, FloatingPointError, KeyError) as exc:
            flags[i] = f"{type(exc).__name__}: {exc}"
    return SweepResult(
        parameter="dtheta",
        values=values,
        lambda_inc=lam,
        n_coherent=n_coh,
        n_incoherent=n_inc,
        ridge_slope=slope,
        engine=engine,
        flags=tuple(flags),
    )
