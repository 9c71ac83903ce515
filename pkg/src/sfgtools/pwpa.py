"""Analytic spectra for a plane-wave, monochromatic pump.

With an undepleted plane-wave pump the down-conversion stage is diagonal in
(qx, qy, dw): each mode pair (w, -w) undergoes a Bogoliubov transformation
with gain functions U, V built from the pair mismatch delta_pdc. On top of
that, the up-conversion stage acts perturbatively through the kernel
Phi = sigma l e^{i Delta l / 2} sinc(Delta l / 2).

Photon-number outputs:

* pdc_spectrum        |V|^2, photons per mode after the first crystal;
* coherent_amplitude  the up-converted amplitude accumulated coherently into
                      the collinear carrier mode by conjugate pairs;
* incoherent_spectrum_full / _factorized
                      the broadband pedestal from uncorrelated pairs,

the last as the exact double-spectrum integral

    S(w) = (sigma l)^2 / (2 pi)^3 *
           Int d3w' S(w - w') S(w') sinc^2(Delta(w', w - w') l / 2)

or the factorized approximation sinc^2(d_inc l / 2) x self-convolution.

The full integral is evaluated without expanding the mismatch: writing
sinc^2(u/2) = Int_{-1}^{1} (1 - |tau|) e^{i u tau} d tau and using that
Delta(w', w - w') = k1z(w') + k1z(w - w') - k0z(w) is additive, each tau node
turns into one self-convolution of the phase-dressed spectrum
S(w') e^{i k1z(w') l tau}, done by FFT. Gauss-Legendre in tau then gives the
exact integral to quadrature accuracy, with no small-mismatch approximation.

Absolute scales: only the PDC spectrum is a true photon number per mode. The
up-converted spectra carry the unpinned coupling sigma and are tagged
"arbitrary"; compare them in ratios.
"""

from __future__ import annotations

import numpy as np
from scipy import fft as sfft
from scipy.constants import c as C_LIGHT
from typing import NamedTuple

from .grids import ResolutionError, check_resolution
from .phasematch import PhaseMatchContext, d_inc, delta_sfg_pair
from .spectra import Axis, Spectrum2D, Spectrum3D

__all__ = [
    "DEFAULT_FILTER_WINDOW",
    "GainPair",
    "gain_functions",
    "pdc_spectrum",
    "pdc_spectrum_grid",
    "biphoton_amplitude",
    "sfg_kernel",
    "sfg_acceptance",
    "coherent_amplitude",
    "self_convolution",
    "incoherent_spectrum_full",
    "incoherent_spectrum_factorized",
]

# the pump-removing glass window of the modelled experiment
DEFAULT_FILTER_WINDOW = (750e-9, 1300e-9)


class GainPair(NamedTuple):
    """Bogoliubov amplitudes per mode: b(w) = U(w) a(w) + V(w) a_dag(-w)."""

    U: np.ndarray
    V: np.ndarray


def _sinhc(x):
    """sinh(x)/x with the removable singularity filled in; complex-safe."""
    x = np.asarray(x)
    small = np.abs(x) < 1e-6
    safe = np.where(small, 1.0, x)
    return np.where(small, 1.0 + x * x / 6.0, np.sinh(safe) / safe)


def _sinc(x):
    """sin(x)/x (unnormalized), real arguments."""
    return np.sinc(np.asarray(x) / np.pi)


def band_mask(ctx: PhaseMatchContext, dw, window) -> np.ndarray:
    """True where the down-converted wavelength dw sits inside the filter window."""
    if window is None:
        return np.ones(np.shape(dw), dtype=bool)
    lam_min, lam_max = window
    omega = ctx.omega_down + np.asarray(dw)
    with np.errstate(divide="ignore"):
        lam = np.where(omega > 0, 2 * np.pi * C_LIGHT / np.maximum(omega, 1.0), np.inf)
    return (omega > 0) & (lam >= lam_min) & (lam <= lam_max)


def _pair_mismatch(ctx: PhaseMatchContext, qx, qy, dw):
    """delta_pdc over conjugate pairs: (delta, pair mask, kz(w) table).

    delta is zeroed (not NaN) outside the mask so it can feed exponentials.
    """
    a = ctx.kz_down_pdc(qx, qy, dw)
    b = ctx.kz_down_pdc(-np.asarray(qx), -np.asarray(qy), -np.asarray(dw))
    ok = a.propagating & b.propagating
    return np.where(ok, a.kz + b.kz - ctx.pdc_up.k, 0.0), ok, a.kz


def _pair_uv(g: float, phase: float, half):
    """Closed-form U(w)V(-w) from the half mismatch delta l / 2."""
    gamma_l = np.sqrt(g**2 - half**2 + 0j)
    sh = _sinhc(gamma_l)
    return g * np.exp(1j * phase) * sh * (np.cosh(gamma_l) + 1j * half * sh)


def gain_functions(ctx: PhaseMatchContext, qx, qy, dw, gain: float | None = None) -> GainPair:
    """U and V of the down-conversion stage on broadcastable mode arrays.

    Gamma l = sqrt(g^2 - (delta_pdc l / 2)^2) continues through zero as a
    complex square root (positive real inside the gain region, positive
    imaginary outside, where the hyperbolics turn trigonometric).
    Non-propagating modes get the vacuum passthrough U = 1, V = 0.
    """
    g = ctx.pdc.gain if gain is None else gain
    if g < 0:
        raise ValueError("gain must be non-negative")
    lc = ctx.pdc.length
    delta, ok, kz = _pair_mismatch(ctx, qx, qy, dw)

    half = 0.5 * delta * lc
    gamma_l = np.sqrt(g**2 - half**2 + 0j)
    sh = _sinhc(gamma_l)
    ch = np.cosh(gamma_l)
    phase = np.exp(1j * (kz * lc - half))
    u = np.where(ok, phase * (ch + 1j * half * sh), 1.0 + 0j)
    v = np.where(ok, phase * g * sh, 0.0 + 0j)
    return GainPair(U=u, V=v)


def pdc_spectrum(ctx: PhaseMatchContext, qx, qy, dw, gain: float | None = None) -> np.ndarray:
    """|V|^2: photons per mode emitted by the down-converter (zero where evanescent)."""
    return np.abs(gain_functions(ctx, qx, qy, dw, gain).V) ** 2


def pdc_spectrum_grid(
    ctx: PhaseMatchContext,
    q_axis: np.ndarray,
    omega_axis: np.ndarray,
    plane: str = "xw",
    gain: float | None = None,
) -> Spectrum2D:
    """PDC spectrum on a (q, omega) plane through the origin of the other axis."""
    q = np.asarray(q_axis)[:, None]
    w = np.asarray(omega_axis)[None, :]
    if plane == "xw":
        values = pdc_spectrum(ctx, q, 0.0, w, gain)
        kind = "qx"
    elif plane == "yw":
        values = pdc_spectrum(ctx, 0.0, q, w, gain)
        kind = "qy"
    else:
        raise ValueError(f"plane must be 'xw' or 'yw', got {plane!r}")
    return Spectrum2D(
        values=values,
        axes=(Axis(kind, q_axis), Axis("omega", omega_axis)),
        normalization="photons-per-mode",
    )


def biphoton_amplitude(ctx: PhaseMatchContext, qx, qy, dw, gain: float | None = None):
    """The pair amplitude U(w) V(-w), the phase-sensitive output of the PDC stage.

    Evaluated in closed form; equals the product of gain_functions outputs by
    construction (the joint phase collapses to e^{i k_up l}).
    """
    g = ctx.pdc.gain if gain is None else gain
    lc = ctx.pdc.length
    delta, ok, _ = _pair_mismatch(ctx, qx, qy, dw)
    uv = _pair_uv(g, ctx.pdc_up.k * lc, 0.5 * delta * lc)
    return np.where(ok, uv, 0.0 + 0j)


def sfg_kernel(ctx: PhaseMatchContext, w1, w2, dtheta: float = 0.0):
    """Up-conversion kernel sigma l e^{i Delta l / 2} sinc(Delta l / 2) for a mode pair."""
    lp = ctx.sfg.length
    delta = delta_sfg_pair(ctx, w1, w2, dtheta)
    half = 0.5 * np.nan_to_num(delta, nan=0.0) * lp
    out = ctx.sfg.sigma * lp * np.exp(1j * half) * _sinc(half)
    return np.where(np.isnan(delta), 0.0 + 0j, out)


def sfg_acceptance(ctx: PhaseMatchContext, qx, qy, dw, dtheta: float = 0.0) -> np.ndarray:
    """(sigma l)^2 sinc^2(d_inc l / 2): the up-converter acceptance profile.

    Peaks exactly on the skewed surface d_inc = 0; first zeros where
    d_inc l = +-2 pi. The dw axis here is detuning of the up-converted wave
    from the pump carrier.
    """
    lp = ctx.sfg.length
    d = d_inc(ctx, qx, qy, dw, dtheta)
    vals = (ctx.sfg.sigma * lp) ** 2 * _sinc(0.5 * np.nan_to_num(d, nan=0.0) * lp) ** 2
    return np.where(np.isnan(d), 0.0, vals)


def _uniform_spacing(axis, name) -> float:
    axis = np.asarray(axis)
    if axis.ndim != 1 or axis.size < 2:
        raise ValueError(f"{name} axis must be a 1D array with at least 2 points")
    d = np.diff(axis)
    if not np.allclose(d, d[0], rtol=1e-9, atol=0.0) or d[0] <= 0:
        raise ValueError(f"{name} axis must be uniformly increasing")
    return float(d[0])


def coherent_amplitude(
    ctx: PhaseMatchContext,
    qx: np.ndarray,
    qy: np.ndarray,
    omega: np.ndarray,
    gain: float | None = None,
    dtheta: float = 0.0,
    filter_window=DEFAULT_FILTER_WINDOW,
    chunk: int = 128,
) -> complex:
    """Amplitude up-converted into the collinear carrier mode by conjugate pairs.

    A = Int d3w' / (2 pi)^{3/2}  UV(w') Phi(w', -w'), a plain Riemann sum over
    the supplied (qx, qy, omega) axes. A conjugate pair sums to w = 0 exactly,
    so its up-conversion mismatch is delta_pdc(w') shifted by the (scalar)
    carrier mismatch of the tilted up-converter and the integrand needs a
    single kz pass per mode. The filter acts on both photons: modes where
    either w' or -w' falls outside the window drop out.

    Refuses axes whose spacing under-resolves the narrowest gain or acceptance
    scale (quarter rule).
    """
    dqx = _uniform_spacing(qx, "qx")
    dqy = _uniform_spacing(qy, "qy")
    dw = _uniform_spacing(omega, "omega")
    check_resolution(ctx, max(dqx, dqy), dw)
    g = ctx.pdc.gain if gain is None else gain
    lc = ctx.pdc.length
    lp = ctx.sfg.length

    carrier = ctx.kz_up_sfg(0.0, 0.0, 0.0, dtheta)
    if not carrier.propagating:
        raise ValueError("up-converted carrier mode is evanescent at this tilt")
    shift = ctx.pdc_up.k - float(carrier.kz)

    same_medium = ctx.pdc.material == ctx.sfg.material
    acc = 0.0 + 0.0j
    qyg = np.asarray(qy)[:, None]
    for start in range(0, len(omega), chunk):
        wg = np.asarray(omega)[start : start + chunk][None, :]
        pair_ok = band_mask(ctx, wg, filter_window) & band_mask(ctx, -wg, filter_window)
        for qxi in np.asarray(qx):
            delta, ok, _ = _pair_mismatch(ctx, qxi, qyg, wg)
            uv = np.where(ok & pair_ok, _pair_uv(g, ctx.pdc_up.k * lc, 0.5 * delta * lc), 0.0 + 0j)
            if not same_medium:
                # pair mismatch in the up-converter medium differs from delta_pdc
                a = ctx.kz_down_sfg(qxi, qyg, wg)
                b = ctx.kz_down_sfg(-qxi, -qyg, -wg)
                ok = a.propagating & b.propagating
                delta = np.where(ok, a.kz + b.kz - ctx.pdc_up.k, 0.0)
                uv = np.where(ok, uv, 0.0 + 0j)
            half = 0.5 * (delta + shift) * lp
            phi = ctx.sfg.sigma * lp * np.exp(1j * half) * _sinc(half)
            acc += np.sum(uv * phi)
    return complex(acc * dqx * dqy * dw / (2 * np.pi) ** 1.5)


def _conv_axis(axis: np.ndarray) -> np.ndarray:
    axis = np.asarray(axis)
    d = axis[1] - axis[0]
    return 2 * axis[0] + np.arange(2 * axis.size - 1) * d


def _self_conv_full(values: np.ndarray, workers) -> np.ndarray:
    """Full zero-padded self-convolution of a real 3D array."""
    out_shape = tuple(2 * n - 1 for n in values.shape)
    pad = tuple(sfft.next_fast_len(n) for n in out_shape)
    if np.prod(pad) * 16 > 512 * 2**20:
        raise MemoryError(
            f"padded convolution volume {pad} exceeds 512 MiB; "
            "restrict the output with stripe_cells instead"
        )
    spec = sfft.fftn(values, s=pad, workers=workers)
    conv = sfft.ifftn(spec * spec, workers=workers)
    return conv[tuple(slice(0, n) for n in out_shape)]


def _stripe_indices(n: int, cells: int) -> np.ndarray:
    """Output-axis indices of a stripe centered on the convolution zero.

    Input axes are FFT-centered (zero at index n // 2), so the doubled
    coordinate vanishes at convolution index 2 (n // 2).
    """
    if not 1 <= cells <= 2 * n - 1:
        raise ValueError(f"stripe of {cells} cells does not fit a {2 * n - 1}-cell axis")
    return 2 * (n // 2) - cells // 2 + np.arange(cells)


def _self_conv_stripe(values: np.ndarray, hidden: int, idx: np.ndarray, workers):
    """Self-convolution restricted to the given planes of the hidden axis.

    FFT over the two visible axes only; the hidden axis is paired by direct
    summation, which for a thin output stripe is far cheaper than padding the
    full volume.
    """
    v = np.moveaxis(values, hidden, 0)
    nh, na, nb = v.shape
    pa, pb = sfft.next_fast_len(2 * na - 1), sfft.next_fast_len(2 * nb - 1)
    planes = sfft.fft2(v, s=(pa, pb), workers=workers)
    out = np.empty((len(idx), 2 * na - 1, 2 * nb - 1), dtype=complex)
    for n, m in enumerate(idx):
        js = np.arange(max(0, m - nh + 1), min(nh, m + 1))
        prod = np.einsum("jab,jab->ab", planes[js], planes[m - js])
        out[n] = sfft.ifft2(prod, workers=workers)[: 2 * na - 1, : 2 * nb - 1]
    return np.moveaxis(out, 0, hidden)


def self_convolution(spectrum, workers: int | None = None):
    """FFT self-convolution of a Spectrum2D/3D, with the continuous measure.

    Output axes span the doubled coordinate range (2n - 1 cells per axis);
    values approximate Int S(w - w') S(w') d^n w' / (2 pi)^n, i.e. the cell
    measure over (2 pi)^ndim multiplies the discrete convolution.
    """
    values = spectrum.values
    ndim = values.ndim
    out_shape = tuple(2 * n - 1 for n in values.shape)
    pad = tuple(sfft.next_fast_len(n) for n in out_shape)
    spec = sfft.fftn(values, s=pad, workers=workers)
    conv = sfft.ifftn(spec * spec, workers=workers)[tuple(slice(0, n) for n in out_shape)].real
    measure = np.prod([a.spacing for a in spectrum.axes]) / (2 * np.pi) ** ndim
    axes = tuple(Axis(a.kind, _conv_axis(a.values)) for a in spectrum.axes)
    cls = Spectrum2D if ndim == 2 else Spectrum3D
    return cls(values=np.maximum(conv * measure, 0.0), axes=axes, normalization="arbitrary")


def _filtered_pdc(ctx, qx, qy, omega, gain, filter_window):
    """Filtered PDC spectrum and the down-field kz phase table on the 3D mesh."""
    qxg, qyg, wg = qx[:, None, None], qy[None, :, None], omega[None, None, :]
    res = ctx.kz_down_sfg(qxg, qyg, wg)
    s = pdc_spectrum(ctx, qxg, qyg, wg, gain)
    mask = band_mask(ctx, wg, filter_window) & res.propagating
    return np.where(mask, s, 0.0), res.kz


def _output_kz_up(ctx, ox, oy, ow, dtheta):
    res = ctx.kz_up_sfg(ox[:, None, None], oy[None, :, None], ow[None, None, :], dtheta)
    return np.where(res.propagating, res.kz, 0.0), res.propagating


def _tau_nodes_for(dmax_l: float, tau_nodes: int | None) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes on [0, 1], count adapted to the phase range."""
    if tau_nodes is None:
        tau_nodes = int(np.clip(dmax_l / 2 + 16, 16, 160))
    x, w = np.polynomial.legendre.leggauss(tau_nodes)
    return 0.5 * (x + 1.0), 0.5 * w


def incoherent_spectrum_full(
    ctx: PhaseMatchContext,
    qx: np.ndarray,
    qy: np.ndarray,
    omega: np.ndarray,
    gain: float | None = None,
    dtheta: float = 0.0,
    filter_window=DEFAULT_FILTER_WINDOW,
    stripe_axis: str | None = None,
    stripe_cells: int = 3,
    tau_nodes: int | None = None,
    workers: int | None = None,
) -> Spectrum3D:
    """Exact incoherent up-converted spectrum by tau-resolved self-convolutions.

    The (qx, qy, omega) axes describe the down-converted integration grid; the
    output lives on the doubled (summed) axes. With ``stripe_axis`` set to
    "qx" or "qy" only ``stripe_cells`` central cells of that output axis are
    computed, which is the spectrometer-slit geometry and far cheaper than the
    full volume.
    """
    dqx = _uniform_spacing(qx, "qx")
    dqy = _uniform_spacing(qy, "qy")
    dw = _uniform_spacing(omega, "omega")
    check_resolution(ctx, max(dqx, dqy), dw)
    lp = ctx.sfg.length

    s_tilde, k1z = _filtered_pdc(ctx, qx, qy, omega, gain, filter_window)

    ox, oy, ow = _conv_axis(qx), _conv_axis(qy), _conv_axis(omega)
    hidden = idx = None
    if stripe_axis is not None:
        hidden = {"qx": 0, "qy": 1}.get(stripe_axis)
        if hidden is None:
            raise ValueError(f"stripe_axis must be 'qx' or 'qy', got {stripe_axis!r}")
        idx = _stripe_indices(s_tilde.shape[hidden], stripe_cells)
        if hidden == 0:
            ox = ox[idx]
        else:
            oy = oy[idx]
    k0z, out_ok = _output_kz_up(ctx, ox, oy, ow, dtheta)

    # Phase range sets how many tau nodes the quadrature needs. Splitting the
    # mismatch into an output part and two single-mode remainders keeps the
    # bound tight: a crude |2 k1z - k0z| would count the group-velocity term
    # twice and force the node count to its ceiling every time.
    d_out = np.abs(2.0 * ctx.sfg_down.k + ctx.sfg_down.dk * ow[None, None, :] - k0z)
    dmax_l = lp * float(d_out[out_ok].max() if out_ok.any() else 0.0)
    support = s_tilde > 1e-12 * s_tilde.max()
    if support.any():
        r1 = k1z - (ctx.sfg_down.k + ctx.sfg_down.dk * omega[None, None, :])
        dmax_l += 2.0 * lp * float(np.abs(np.broadcast_to(r1, s_tilde.shape)[support]).max())
    taus, weights = _tau_nodes_for(dmax_l, tau_nodes)

    acc = np.zeros(k0z.shape, dtype=complex)
    for t, w in zip(taus, weights):
        f = s_tilde * np.exp(1j * lp * t * k1z)
        if hidden is None:
            conv = _self_conv_full(f, workers)
        else:
            conv = _self_conv_stripe(f, hidden, idx, workers)
        acc += (w * (1.0 - t)) * np.exp(-1j * lp * t * k0z) * conv

    # the tau < 0 half is the complex conjugate, so take twice the real part
    values = 2.0 * acc.real * (ctx.sfg.sigma * lp) ** 2 * dqx * dqy * dw / (2 * np.pi) ** 3
    values = np.where(out_ok, np.maximum(values, 0.0), 0.0)
    axes = (Axis("qx", ox), Axis("qy", oy), Axis("omega", ow))
    return Spectrum3D(values=values, axes=axes, normalization="arbitrary")


def incoherent_spectrum_factorized(
    ctx: PhaseMatchContext,
    qx: np.ndarray,
    qy: np.ndarray,
    omega: np.ndarray,
    gain: float | None = None,
    dtheta: float = 0.0,
    filter_window=DEFAULT_FILTER_WINDOW,
    stripe_axis: str | None = None,
    stripe_cells: int = 3,
    workers: int | None = None,
) -> Spectrum3D:
    """Factorized incoherent spectrum: acceptance profile times self-convolution.

    Valid when the down-converter is much longer than the up-converter; the
    ridge position matches the full integral but fine structure is smoothed.
    Axes behave exactly as in incoherent_spectrum_full.
    """
    dqx = _uniform_spacing(qx, "qx")
    dqy = _uniform_spacing(qy, "qy")
    dw = _uniform_spacing(omega, "omega")
    check_resolution(ctx, max(dqx, dqy), dw)

    s_tilde, _ = _filtered_pdc(ctx, qx, qy, omega, gain, filter_window)
    ox, oy, ow = _conv_axis(qx), _conv_axis(qy), _conv_axis(omega)

    if stripe_axis is None:
        conv = _self_conv_full(s_tilde, workers).real
    else:
        hidden = {"qx": 0, "qy": 1}.get(stripe_axis)
        if hidden is None:
            raise ValueError(f"stripe_axis must be 'qx' or 'qy', got {stripe_axis!r}")
        idx = _stripe_indices(s_tilde.shape[hidden], stripe_cells)
        conv = _self_conv_stripe(s_tilde, hidden, idx, workers).real
        if hidden == 0:
            ox = ox[idx]
        else:
            oy = oy[idx]

    v_factor = np.maximum(conv * dqx * dqy * dw / (2 * np.pi) ** 3, 0.0)
    w_factor = sfg_acceptance(
        ctx, ox[:, None, None], oy[None, :, None], ow[None, None, :], dtheta
    )
    axes = (Axis("qx", ox), Axis("qy", oy), Axis("omega", ow))
    return Spectrum3D(values=w_factor * v_factor, axes=axes, normalization="arbitrary")
