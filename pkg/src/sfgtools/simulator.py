"""Stochastic 3D+1 model of the two-crystal experiment in the Wigner picture.

The model propagates complex field envelopes on a periodic (x, y, t) box:
the down-converted signal seeded with symmetric-ordering vacuum noise
(half a photon per spectral mode) and the pump / up-converted wave, through
each crystal with a symmetric split-step scheme. Linear half-steps apply the
exact longitudinal wavenumber of `dispersion` in the spectral domain, in a
frame co-moving at the signal group velocity; the nonlinear step integrates
the local three-wave coupling in the direct domain with a midpoint (2nd
order Runge-Kutta) rule.

Normalization. Spectral amplitudes are photons per grid mode (unitary FFTs),
so ensemble means of |amplitude|^2 minus 1/2 are directly comparable with the
plane-wave or analytic spectra of `pwpa`. Matching the continuum coupling
sigma of the up-conversion kernel sigma*l*sinc(...) fixes the discrete
coupling to

    kappa = 2 sigma / sqrt(dx dy dt),

with the pair of equations  d(down)/dz = kappa * up * conj(down)  and
d(up)/dz = -kappa/2 * down^2,  which conserve the Manley-Rowe sum
|down|^2 + 2 |up|^2 cell by cell. The pump peak amplitude that realizes a
requested parametric gain g is then g / (kappa * length), so g stays the
primary control and sigma only sets absolute photon numbers.

The up-converted wave enters its crystal empty by default: its vacuum
fluctuations pass through the (gainless) process unchanged and would only
add sampling noise to the mean spectra, so leaving them out is a pure
variance reduction; photon-number outputs of the empty-input field need no
ordering correction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft
from scipy.constants import c as C_LIGHT

from .dispersion import kz_extraordinary, kz_ordinary
from .grids import GridSpec, centered_axis
from .phasematch import PhaseMatchContext
from .pwpa import DEFAULT_FILTER_WINDOW, band_mask
from .spectra import Axis, Spectrum2D, Spectrum3D, SpectralField

__all__ = [
    "PumpPulse",
    "RunConfig",
    "ExperimentResult",
    "seed_vacuum",
    "pump_field",
    "propagate_pdc",
    "image_4f_and_filter",
    "propagate_sfg",
    "far_field",
    "run_experiment",
]

MIN_STEPS = 100


@dataclass(frozen=True)
class PumpPulse:
    """Gaussian pump envelope: waist (1/e amplitude radius), duration, peak.

    ``amplitude`` is in photons-per-mode units; leave it None to have the
    propagator derive the peak from the crystal's parametric gain.
    """

    waist: float = 500e-6
    duration: float = 1e-12
    amplitude: float | None = None

    def __post_init__(self):
        if self.waist <= 0.0 or self.duration <= 0.0:
            raise ValueError("pump waist and duration must be positive")


@dataclass(frozen=True)
class RunConfig:
    """Everything one stochastic run needs, seeds included."""

    ctx: PhaseMatchContext
    grid: GridSpec
    pump: PumpPulse
    dtheta: float = 0.0
    filter_window: tuple[float, float] | None = DEFAULT_FILTER_WINDOW
    steps: int = 200
    seed: int = 0
    realizations: int = 1
    mask_radius: int = 3

    def __post_init__(self):
        if self.realizations < 1:
            raise ValueError("need at least one realization")
        if self.filter_window is not None:
            lam_min, lam_max = self.filter_window
            if not 0.0 < lam_min < lam_max:
                raise ValueError("filter window must satisfy 0 < lam_min < lam_max")
            for lam in (lam_min, lam_max):
                self.ctx.pdc.material.check_window(lam)
                self.ctx.sfg.material.check_window(lam)
        g = self.grid
        box = (g.nx * g.dx, g.ny * g.dy, g.nt * g.dt)
        scale = (self.pump.waist, self.pump.waist, self.pump.duration)
        for name, have, size in zip(("x", "y", "t"), box, scale):
            # the pump must either fit the periodic box with room to spare or
            # overfill it so far it is effectively a plane wave; anything in
            # between wraps around with an envelope kink at the box edge
            if have < 6.0 * size and size < 2.0 * have:
                word = "duration" if name == "t" else "waist"
                raise ValueError(
                    f"grid {name}-extent {have:.4g} holds neither 6 pump "
                    f"{word}s ({6 * size:.4g}) nor a quasi-uniform pump "
                    f"({word} >= {2 * have:.4g}); periodic wrap-around "
                    "would contaminate the run"
                )


@dataclass(frozen=True)
class ExperimentResult:
    """Averaged far-field products of one run_experiment call."""

    spectrum: Spectrum3D
    slice_walkoff: Spectrum2D
    slice_orthogonal: Spectrum2D
    n_coherent: float
    n_incoherent: float
    lambda_inc: float
    dtheta: float
    seed: int
    realizations: int


def seed_vacuum(grid: GridSpec, seed, polarization: str = "down") -> SpectralField:
    """Independent circular Gaussian noise, half a photon per mode on average.

    ``seed`` may be anything numpy's default_rng accepts; run_experiment
    passes (master_seed, realization_index) so realizations are independent
    streams regardless of scheduling.
    """
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return SpectralField(0.5 * vals, grid, polarization)


def _kappa(sigma: float, grid: GridSpec) -> float:
    return 2.0 * sigma / np.sqrt(grid.cell_volume)


def pump_field(grid: GridSpec, pump: PumpPulse, ctx: PhaseMatchContext) -> SpectralField:
    """Coherent Gaussian pump as a spectral-domain field at the up carrier.

    The peak amplitude defaults to g / (kappa * l_pdc) so the phase-matched
    mode at the pump center sees exactly the configured parametric gain.
    """
    amp = pump.amplitude
    if amp is None:
        g = ctx.pdc.gain
        amp = 0.0 if g == 0.0 else g / (_kappa(ctx.pdc.sigma, grid) * ctx.pdc.length)
    x = centered_axis(grid.nx, grid.dx)[:, None, None]
    y = centered_axis(grid.ny, grid.dy)[None, :, None]
    t = centered_axis(grid.nt, grid.dt)[None, None, :]
    envelope = amp * np.exp(
        -(x**2 + y**2) / pump.waist**2 - t**2 / pump.duration**2
    )
    vals = _to_spectral(envelope.astype(np.complex128), None)
    return SpectralField(vals, grid, "up")


def _to_real(spec: np.ndarray, workers) -> np.ndarray:
    # synthesis of sum B(q, W) exp(i(q.r - W t)): inverse transform over (x, y),
    # forward transform over t, both unitary
    out = sfft.ifftn(spec, axes=(0, 1), norm="ortho", workers=workers)
    return sfft.fft(out, axis=2, norm="ortho", workers=workers, overwrite_x=True)


def _to_spectral(real: np.ndarray, workers) -> np.ndarray:
    out = sfft.fftn(real, axes=(0, 1), norm="ortho", workers=workers)
    return sfft.ifft(out, axis=2, norm="ortho", workers=workers, overwrite_x=True)


def _spectral_axes(grid: GridSpec):
    qx = grid.qx()[:, None, None]
    qy = grid.qy()[None, :, None]
    w = grid.omega()[None, None, :]
    return qx, qy, w


def _half_phase(kzres, reference, dz) -> np.ndarray:
    """exp(i (kz - ref) dz/2) on propagating modes, hard zero elsewhere."""
    phase = np.exp(1j * (kzres.kz - reference) * (0.5 * dz))
    return np.where(kzres.propagating, phase, 0.0)


def _split_step_pair(down, up, ph_down, ph_up, kappa, dz, steps, workers):
    """March the coupled pair through one crystal; arrays are spectral, mutated."""
    full_down = ph_down * ph_down
    full_up = ph_up * ph_up
    down *= ph_down
    up *= ph_up
    for i in range(steps):
        a1 = _to_real(down, workers)
        a0 = _to_real(up, workers)
        # midpoint rule for d(a1)/dz = kappa a0 conj(a1), d(a0)/dz = -kappa/2 a1^2
        m1 = a1 + (0.5 * dz * kappa) * (a0 * np.conj(a1))
        m0 = a0 - (0.25 * dz * kappa) * (a1 * a1)
        a1 += (dz * kappa) * (m0 * np.conj(m1))
        a0 -= (0.5 * dz * kappa) * (m1 * m1)
        if not (np.isfinite(a1).all() and np.isfinite(a0).all()):
            raise FloatingPointError(
                f"field diverged at step {i + 1}/{steps} (z = {(i + 1) * dz:.4g} m); "
                "the parametric gain is too high for this grid and step count"
            )
        down = _to_spectral(a1, workers)
        up = _to_spectral(a0, workers)
        last = i == steps - 1
        down *= ph_down if last else full_down
        up *= ph_up if last else full_up
    return down, up


def _check_steps(steps: int) -> None:
    if steps < MIN_STEPS:
        raise ValueError(f"need at least {MIN_STEPS} z-steps per crystal, got {steps}")


def propagate_pdc(
    signal: SpectralField,
    pump: PumpPulse | SpectralField,
    ctx: PhaseMatchContext,
    steps: int = 200,
    workers: int | None = None,
    return_pump: bool = False,
):
    """Run the down-conversion crystal: vacuum-seeded signal, dynamic pump.

    The pump co-propagates with its own exact extraordinary dispersion
    (walk-off included) and is depleted by the generated signal, although
    depletion is negligible at the configured energies. Returns the signal
    field at the exit face, plus the pump field when ``return_pump`` is set.
    """
    if signal.polarization != "down":
        raise ValueError("signal field must carry the 'down' polarization tag")
    _check_steps(steps)
    grid = signal.grid
    grid.validate_against(ctx)
    if isinstance(pump, PumpPulse):
        pump = pump_field(grid, pump, ctx)

    qx, qy, w = _spectral_axes(grid)
    dz = ctx.pdc.length / steps
    k_ref = ctx.pdc_down.k
    comoving = ctx.pdc_down.dk * w
    ph_down = _half_phase(
        kz_ordinary(ctx.pdc.material, qx, qy, ctx.omega_down + w),
        k_ref + comoving,
        dz,
    )
    ph_up = _half_phase(
        kz_extraordinary(ctx.pdc.material, ctx.pdc.theta, qx, qy, ctx.omega_up + w),
        2.0 * k_ref + comoving,
        dz,
    )
    down, up = _split_step_pair(
        signal.values.copy(),
        pump.values.copy(),
        ph_down,
        ph_up,
        _kappa(ctx.pdc.sigma, grid),
        dz,
        steps,
        workers,
    )
    z = signal.z + ctx.pdc.length
    out = SpectralField(down, grid, "down", z)
    if return_pump:
        return out, SpectralField(up, grid, "up", z)
    return out


def image_4f_and_filter(
    field: SpectralField,
    ctx: PhaseMatchContext,
    window: tuple[float, float] | None = DEFAULT_FILTER_WINDOW,
) -> SpectralField:
    """Ideal unit-magnification imaging plus the pump-removing glass filter.

    Imaging is the identity on the signal envelope; the filter is a hard
    spectral mask keeping only wavelengths inside ``window``. The pump wave is
    simply not part of the output, mirroring its absorption in the glass.
    """
    if field.polarization != "down":
        raise ValueError("the imaging stage carries only the 'down' field")
    keep = band_mask(ctx, field.grid.omega(), window)
    vals = np.where(keep[None, None, :], field.values, 0.0)
    return SpectralField(vals, field.grid, "down", field.z)


def propagate_sfg(
    signal: SpectralField,
    ctx: PhaseMatchContext,
    dtheta: float = 0.0,
    steps: int = 200,
    up_input: SpectralField | None = None,
    workers: int | None = None,
):
    """Run the up-conversion crystal, tilted by ``dtheta`` off the tuned angle.

    The tilt enters only through the extraordinary index ellipse seen by the
    up-converted wave. Returns (fundamental, up-converted) fields at the exit
    face; the up-converted wave starts empty unless ``up_input`` is given.
    """
    if signal.polarization != "down":
        raise ValueError("signal field must carry the 'down' polarization tag")
    _check_steps(steps)
    grid = signal.grid
    grid.validate_against(ctx)
    if up_input is None:
        up0 = np.zeros(grid.shape, dtype=np.complex128)
    else:
        if up_input.polarization != "up":
            raise ValueError("up_input must carry the 'up' polarization tag")
        up0 = up_input.values.copy()

    qx, qy, w = _spectral_axes(grid)
    dz = ctx.sfg.length / steps
    k_ref = ctx.sfg_down.k
    comoving = ctx.sfg_down.dk * w
    ph_down = _half_phase(
        kz_ordinary(ctx.sfg.material, qx, qy, ctx.omega_down + w),
        k_ref + comoving,
        dz,
    )
    ph_up = _half_phase(
        ctx.kz_up_sfg(qx, qy, w, dtheta),
        2.0 * k_ref + comoving,
        dz,
    )
    down, up = _split_step_pair(
        signal.values.copy(),
        up0,
        ph_down,
        ph_up,
        _kappa(ctx.sfg.sigma, grid),
        dz,
        steps,
        workers,
    )
    z = signal.z + ctx.sfg.length
    return SpectralField(down, grid, "down", z), SpectralField(up, grid, "up", z)


def far_field(field: SpectralField, correct_ordering: bool = False) -> Spectrum3D:
    """Photon numbers per mode over ascending (qx, qy, omega) axes.

    With ``correct_ordering`` the symmetric-ordering half photon is subtracted
    and the result floored at zero; on a single realization the floor biases
    empty modes upward, so ensemble averages should be taken on the raw
    intensities first (run_experiment does).
    """
    grid = field.grid
    vals = np.fft.fftshift(np.abs(field.values) ** 2)
    tag = "photons per mode"
    if correct_ordering:
        vals = np.maximum(vals - 0.5, 0.0)
        tag = "photons per mode, ordering corrected"
    axes = (
        Axis("qx", grid.qx(shifted=True)),
        Axis("qy", grid.qy(shifted=True)),
        Axis("omega", grid.omega(shifted=True)),
    )
    return Spectrum3D(vals, axes, normalization=tag)


def run_experiment(config: RunConfig, workers: int | None = None) -> ExperimentResult:
    """Full pipeline: vacuum -> PDC -> imaging/filter -> tilted SFG -> far field.

    Averages the up-converted far-field intensity over the configured
    realizations, then splits it into the coherent peak and the incoherent
    remainder and extracts the collinear incoherent wavelength.
    """
    from . import analysis  # local import: analysis drives sweeps through us

    ctx = config.ctx
    grid = config.grid
    grid.validate_against(ctx)
    pump = pump_field(grid, config.pump, ctx)

    mean = np.zeros(grid.shape)
    for r in range(config.realizations):
        sig = seed_vacuum(grid, (config.seed, r))
        sig = propagate_pdc(sig, pump, ctx, config.steps, workers)
        sig = image_4f_and_filter(sig, ctx, config.filter_window)
        _, up = propagate_sfg(sig, ctx, config.dtheta, config.steps, workers=workers)
        mean += np.abs(up.values) ** 2
    mean /= config.realizations

    axes = (
        Axis("qx", grid.qx(shifted=True)),
        Axis("qy", grid.qy(shifted=True)),
        Axis("omega", grid.omega(shifted=True)),
    )
    spectrum = Spectrum3D(np.fft.fftshift(mean), axes, normalization="photons per mode")

    n_coh, n_inc, residual = analysis.split_coherent_incoherent(
        spectrum, config.mask_radius
    )
    off = analysis.SpectrometerView(plane="walkoff")
    ortho = analysis.SpectrometerView(plane="orthogonal")
    ridge = analysis.ridge_centroid(
        analysis.slice_spectrum(residual, off), ctx.omega_up
    )
    return ExperimentResult(
        spectrum=spectrum,
        slice_walkoff=analysis.slice_spectrum(spectrum, off),
        slice_orthogonal=analysis.slice_spectrum(spectrum, ortho),
        n_coherent=n_coh,
        n_incoherent=n_inc,
        lambda_inc=ridge.lambda_inc,
        dtheta=config.dtheta,
        seed=config.seed,
        realizations=config.realizations,
    )
