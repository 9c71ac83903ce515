"""Plane-wave-pump spectra: the pair ridge and its up-converted image.

Computes the collinear down-conversion spectrum in the walk-off plane, the
incoherent up-converted stripe (exact and factorized), and the coherent
amplitude as a function of up-converter tilt. Writes PNGs when matplotlib
is importable, CSVs otherwise, into demos/output/.
"""

import csv
import pathlib

import numpy as np

from sfgtools import pwpa
from sfgtools.analysis import SpectrometerView, slice_spectrum
from sfgtools.grids import centered_axis
from sfgtools.materials import BBO
from sfgtools.phasematch import PhaseMatchContext, critical_angle

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

OUT = pathlib.Path(__file__).resolve().parent / "output"
LAM_PUMP = 527.5e-9


def save_plane(name, spec, title):
    q, w = (a.values for a in spec.axes)
    if plt is None:
        with open(OUT / f"{name}.csv", "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["q_per_m"] + [f"{v:.6g}" for v in w])
            for i, qi in enumerate(q):
                wr.writerow([f"{qi:.6g}"] + [f"{v:.6g}" for v in spec.values[i]])
        print(f"wrote {name}.csv")
        return
    fig, ax = plt.subplots(figsize=(5, 4))
    vmax = spec.values.max()
    im = ax.pcolormesh(w * 1e-12, q * 1e-3, spec.values / vmax, cmap="inferno")
    ax.set_xlabel("detuning (rad/ps)")
    ax.set_ylabel("q (rad/mm)")
    ax.set_title(title)
    fig.colorbar(im, ax=ax, label="normalized")
    fig.tight_layout()
    fig.savefig(OUT / f"{name}.png", dpi=150)
    plt.close(fig)
    print(f"wrote {name}.png")


def main():
    OUT.mkdir(exist_ok=True)
    ctx = PhaseMatchContext.collinear(BBO, LAM_PUMP, 4e-3, 1e-3, gain=9.3)

    # pair spectrum in the walk-off plane
    q = centered_axis(96, 3000.0)
    w = centered_axis(128, 1.5e12)
    pdc = pwpa.pdc_spectrum_grid(ctx, q, w, plane="xw")
    save_plane("pdc_walkoff_plane", pdc, "down-converted pairs, walk-off plane")

    # incoherent up-converted stripe: exact vs factorized
    qx = centered_axis(64, 2000.0)
    qy = centered_axis(64, 2000.0)
    om = centered_axis(128, 1.25e12)
    view = SpectrometerView(plane="walkoff", slit_cells=3)
    for name, fn in (
        ("sfg_stripe_full", pwpa.incoherent_spectrum_full),
        ("sfg_stripe_factorized", pwpa.incoherent_spectrum_factorized),
    ):
        spec = fn(ctx, qx, qy, om, stripe_axis="qy", stripe_cells=3)
        save_plane(name, slice_spectrum(spec, view), name.replace("_", " "))

    # coherent peak vs tilt; the critical tilt of a twin 4 mm pair marked
    ctx_twin = PhaseMatchContext.collinear(BBO, LAM_PUMP, 4e-3, 4e-3, gain=9.3)
    crit = np.degrees(critical_angle(ctx_twin))
    aqx = centered_axis(128, 1200.0)
    aqy = centered_axis(128, 1200.0)
    aom = centered_axis(160, 1.1e12)
    tilts = np.linspace(-0.6, 0.6, 25)
    amp = np.array(
        [abs(pwpa.coherent_amplitude(ctx, aqx, aqy, aom, dtheta=np.radians(d))) ** 2
         for d in tilts]
    )
    amp /= amp.max()
    if plt is None:
        with open(OUT / "coherent_vs_tilt.csv", "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["tilt_deg", "normalized_peak"])
            wr.writerows(zip(tilts, amp))
        print("wrote coherent_vs_tilt.csv")
    else:
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.plot(tilts, amp, marker="o", ms=3)
        for s in (+1, -1):
            ax.axvline(s * crit, color="gray", ls="--", lw=0.8)
        ax.set_xlabel("up-converter tilt (deg)")
        ax.set_ylabel("coherent peak, normalized")
        ax.set_yscale("log")
        fig.tight_layout()
        fig.savefig(OUT / "coherent_vs_tilt.png", dpi=150)
        plt.close(fig)
        print("wrote coherent_vs_tilt.png")
    i0 = np.argmin(np.abs(tilts))
    ic = np.argmin(np.abs(tilts - crit))
    print(f"peak suppression at the twin-pair critical tilt {crit:.3f} deg: "
          f"{amp[ic] / amp[i0]:.3f}")


if __name__ == "__main__":
    main()
