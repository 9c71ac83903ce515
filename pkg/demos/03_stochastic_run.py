"""One full stochastic realization of the two-crystal experiment.

Seeds vacuum noise, pumps the down-converter, images the signal onto the
up-converter through the band filter, and looks at the far field of the
up-converted light: a coherent spike at the carrier over the skewed
incoherent ridge. Uses the documented default configuration, so this is
the same run the command line produces with no config file.

Takes about a minute on the default 64 x 64 x 256 grid.
"""

import pathlib
import time

import numpy as np

from sfgtools.config import parse_config
from sfgtools.simulator import run_experiment

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

OUT = pathlib.Path(__file__).resolve().parent / "output"


def main():
    OUT.mkdir(exist_ok=True)
    doc = parse_config("")
    cfg = doc.run_config()
    print(f"grid {cfg.grid.nx} x {cfg.grid.ny} x {cfg.grid.nt}, "
          f"{cfg.steps} steps, seed {cfg.seed}")

    t0 = time.time()
    res = run_experiment(cfg)
    print(f"propagated in {time.time() - t0:.0f} s")
    print(f"coherent photons   {res.n_coherent:10.3f}")
    print(f"incoherent photons {res.n_incoherent:10.3f}")
    print(f"incoherent wavelength {res.lambda_inc * 1e9:.3f} nm")

    if plt is None:
        print("matplotlib not available; skipping plots")
        return
    for name, sl in (("walkoff", res.slice_walkoff), ("orthogonal", res.slice_orthogonal)):
        q, w = (a.values for a in sl.axes)
        fig, ax = plt.subplots(figsize=(5, 4))
        vals = sl.values / sl.values.max()
        im = ax.pcolormesh(w * 1e-12, q * 1e-3, np.log10(vals + 1e-8), cmap="inferno")
        ax.set_xlabel("detuning (rad/ps)")
        ax.set_ylabel("q (rad/mm)")
        ax.set_title(f"up-converted far field, {name} plane (log10)")
        fig.colorbar(im, ax=ax)
        fig.tight_layout()
        fig.savefig(OUT / f"stochastic_{name}.png", dpi=150)
        plt.close(fig)
        print(f"wrote stochastic_{name}.png")


if __name__ == "__main__":
    main()
