"""Tilt sweep of the up-converter with the analytic and plane-wave engines.

The analytic engine just follows the phase-matching root, so it is cheap
enough for a dense curve; the plane-wave engine integrates the incoherent
stripe and the coherent amplitude at each tilt and rides on the default
grid axes. Pass --stochastic to add the full simulator at three tilts
(several minutes).
"""

import argparse
import pathlib
import time

import numpy as np

from sfgtools.analysis import angle_sweep
from sfgtools.config import parse_config

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

OUT = pathlib.Path(__file__).resolve().parent / "output"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--stochastic", action="store_true",
                    help="also run the simulator at three tilts")
    args = ap.parse_args()
    OUT.mkdir(exist_ok=True)

    cfg = parse_config("").run_config()

    dense = np.radians(np.linspace(-2, 2, 41))
    analytic = angle_sweep(cfg, dense, engine="analytic")

    coarse = np.radians(np.linspace(-2, 2, 9))
    t0 = time.time()
    planewave = angle_sweep(cfg, coarse, engine="pwpa")
    print(f"plane-wave sweep: {time.time() - t0:.0f} s")

    rows = [analytic, planewave]
    if args.stochastic:
        t0 = time.time()
        rows.append(angle_sweep(cfg, np.radians([-1.0, 0.0, 1.0]), engine="stochastic"))
        print(f"stochastic sweep: {time.time() - t0:.0f} s")

    for sw in rows:
        degs = np.degrees(sw.values)
        lams = sw.lambda_inc * 1e9
        print(f"{sw.engine} engine:")
        for d, lam, nc, ni in zip(degs, lams, sw.n_coherent, sw.n_incoherent):
            extra = "" if np.isnan(nc) else f"   N_coh {nc:10.4g}   N_inc {ni:10.4g}"
            print(f"  {d:+5.2f} deg   {lam:9.3f} nm{extra}")

    if plt is None:
        print("matplotlib not available; skipping plot")
        return
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(5.5, 6), sharex=True)
    ax1.plot(np.degrees(analytic.values), analytic.lambda_inc * 1e9, label="analytic root")
    ax1.plot(np.degrees(planewave.values), planewave.lambda_inc * 1e9, "o",
             label="plane-wave stripe")
    if args.stochastic:
        sw = rows[-1]
        ax1.plot(np.degrees(sw.values), sw.lambda_inc * 1e9, "s", label="simulator")
    ax1.set_ylabel("incoherent wavelength (nm)")
    ax1.legend()
    ax2.semilogy(np.degrees(planewave.values), planewave.n_coherent, "o-",
                 label="coherent peak")
    ax2.semilogy(np.degrees(planewave.values), planewave.n_incoherent, "s-",
                 label="incoherent total")
    ax2.set_xlabel("up-converter tilt (deg)")
    ax2.set_ylabel("plane-wave photon numbers")
    ax2.legend()
    fig.tight_layout()
    fig.savefig(OUT / "angle_sweep.png", dpi=150)
    plt.close(fig)
    print("wrote angle_sweep.png")


if __name__ == "__main__":
    main()
