"""Command line front end.

Five subcommands cover the workflow: ``phasematch`` prints the analytic
characterization of a crystal pair, ``pwpa-spectrum`` evaluates the analytic
up-converted spectra, ``simulate`` runs the stochastic experiment, ``analyze``
post-processes a stored spectrum, and ``sweep`` scans the up-converter tilt.

Every run writes its outputs plus a ``manifest.json`` recording the full
config echo, its hash, the seed, package versions, and a sha256 per output
file: the manifest is sufficient to reproduce the run exactly. When ``--out``
is omitted the output directory name is derived from the manifest inputs, so
concurrent runs with different settings never write into each other.

Numbers in CSV files carry 9 significant digits with '.' as the decimal
separator regardless of locale; columns are suffixed with their unit.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__, analysis, phasematch, pwpa
from .config import ConfigError, load_config, parse_angles, parse_config
from .gridfile import GridFileError, read_grid, write_grid

__all__ = ["main"]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    v = float(value)
    if not np.isfinite(v):
        return "nan" if np.isnan(v) else ("inf" if v > 0 else "-inf")
    return f"{v:.9g}"


def _write_csv(path: Path, columns, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _spectrum2d_rows(spec):
    qax, wax = spec.axes
    for i, q in enumerate(qax.values):
        for j, w in enumerate(wax.values):
            yield (q, w, spec.values[i, j])


def _load_document(ns):
    if ns.config is None:
        return parse_config("")
    return load_config(ns.config)


def _plane_name(flag: str) -> str:
    return {"xw": "walkoff", "yw": "orthogonal"}[flag]


def _out_dir(ns, doc, extra: str = "") -> Path:
    if ns.out is not None:
        path = Path(ns.out)
    else:
        digest = hashlib.sha256(
            "\n".join([ns.command, doc.sha256, extra, str(getattr(ns, "seed", None))]).encode()
        ).hexdigest()[:12]
        path = Path("runs") / f"{ns.command}-{digest}"
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_manifest(out: Path, ns, doc, t0: float, details: dict) -> None:
    outputs = {}
    for p in sorted(out.iterdir()):
        if p.name == "manifest.json" or not p.is_file():
            continue
        outputs[p.name] = hashlib.sha256(p.read_bytes()).hexdigest()
    manifest = {
        "command": ns.command,
        "argv": list(ns.raw_argv),
        "config_sha256": doc.sha256,
        "config": doc.text,
        "versions": {
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "sfgtools": __version__,
        },
        "runtime_seconds": round(time.monotonic() - t0, 3),
        "outputs": outputs,
    }
    manifest.update(details)
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _run_config(ns, doc):
    rc = doc.run_config()
    if getattr(ns, "seed", None) is not None:
        rc = dataclasses.replace(rc, seed=ns.seed)
    return rc


def cmd_phasematch(ns) -> int:
    doc = _load_document(ns)
    t0 = time.monotonic()
    out = _out_dir(ns, doc)
    ctx = doc.context()
    bw = phasematch.bandwidths(ctx)
    th = phasematch.threshold_lengths(ctx)
    crit = phasematch.critical_angle(ctx)
    rows = [
        ("tuned_angle", ctx.pdc.theta, "rad"),
        ("walkoff_angle", ctx.walkoff, "rad"),
        ("group_velocity_mismatch", ctx.gvm, "s/m"),
        ("bandwidth_omega_pdc", bw.omega_pdc, "rad/s"),
        ("bandwidth_q_pdc", bw.q_pdc, "rad/m"),
        ("bandwidth_omega_sfg", bw.omega_sfg, "rad/s"),
        ("bandwidth_q_sfg", bw.q_sfg, "rad/m"),
        ("threshold_length_temporal", th.temporal, "m"),
        ("threshold_length_spatial", th.spatial, "m"),
        ("critical_angle", crit, "rad"),
        ("critical_angle_deg", np.degrees(crit), "deg"),
    ]
    _write_csv(out / "phasematch.csv", ("quantity", "value", "unit"), rows)
    _write_manifest(out, ns, doc, t0, {"seed": None})
    print(out / "phasematch.csv")
    return 0


def cmd_pwpa_spectrum(ns) -> int:
    doc = _load_document(ns)
    t0 = time.monotonic()
    plane = _plane_name(ns.plane)
    out = _out_dir(ns, doc, extra=plane)
    ctx = doc.context()
    grid = doc.grid()
    tilt = doc["crystals.tilt"]
    window = doc.filter_window()
    qx = grid.qx(shifted=True)
    qy = grid.qy(shifted=True)
    om = grid.omega(shifted=True)

    q_axis = qx if plane == "walkoff" else qy
    pdc = pwpa.pdc_spectrum_grid(ctx, q_axis, om, plane=ns.plane)
    _write_csv(
        out / f"pdc_{plane}.csv",
        ("q_rad_per_m", "omega_rad_per_s", "photons_per_mode"),
        _spectrum2d_rows(pdc),
    )

    stripe_axis = "qy" if plane == "walkoff" else "qx"
    spec3 = pwpa.incoherent_spectrum_full(
        ctx, qx, qy, om, dtheta=tilt, filter_window=window,
        stripe_axis=stripe_axis, stripe_cells=doc["analysis.slit_cells"],
        workers=ns.threads,
    )
    write_grid(out / "sfg_incoherent.sfg", spec3, config_sha256=doc.sha256)
    view = analysis.SpectrometerView(plane=plane, slit_cells=doc["analysis.slit_cells"])
    sl = analysis.slice_spectrum(spec3, view)
    _write_csv(
        out / f"sfg_incoherent_{plane}.csv",
        ("q_rad_per_m", "omega_rad_per_s", "spectral_density"),
        _spectrum2d_rows(sl),
    )

    amp = pwpa.coherent_amplitude(ctx, qx, qy, om, dtheta=tilt, filter_window=window)
    mode_volume = grid.dqx * grid.dqy * grid.domega
    _write_csv(
        out / "sfg_coherent.csv",
        ("tilt_rad", "amplitude_real", "amplitude_imag", "abs_squared",
         "photons_carrier_mode"),
        [(tilt, amp.real, amp.imag, abs(amp) ** 2, abs(amp) ** 2 / mode_volume)],
    )
    _write_manifest(out, ns, doc, t0, {"seed": None, "plane": ns.plane})
    print(out)
    return 0


def cmd_simulate(ns) -> int:
    from . import simulator

    doc = _load_document(ns)
    t0 = time.monotonic()
    out = _out_dir(ns, doc)
    rc = _run_config(ns, doc)
    result = simulator.run_experiment(rc)

    write_grid(out / "spectrum.sfg", result.spectrum, seed=rc.seed,
               config_sha256=doc.sha256)
    for name, sl in (("walkoff", result.slice_walkoff),
                     ("orthogonal", result.slice_orthogonal)):
        _write_csv(
            out / f"slice_{name}.csv",
            ("q_rad_per_m", "omega_rad_per_s", "photons_per_mode"),
            _spectrum2d_rows(sl),
        )
    _write_csv(
        out / "summary.csv",
        ("tilt_rad", "n_coherent", "n_incoherent", "lambda_incoherent_m",
         "realizations", "seed"),
        [(result.dtheta, result.n_coherent, result.n_incoherent,
          result.lambda_inc, result.realizations, result.seed)],
    )
    _write_manifest(out, ns, doc, t0, {"seed": rc.seed})
    print(out)
    return 0


def cmd_analyze(ns) -> int:
    doc = _load_document(ns)
    t0 = time.monotonic()
    spec, header = read_grid(ns.input)
    if header.get("kind") != "spectrum3d":
        raise GridFileError(f"{ns.input}: analyze expects a spectrum3d file, "
                            f"found {header.get('kind')!r}")
    match = header.get("config_sha256") == doc.sha256
    if not match:
        print(f"warning: {ns.input} was produced under a different config "
              f"({str(header.get('config_sha256'))[:12]}...)", file=sys.stderr)
    out = _out_dir(ns, doc, extra=str(ns.input))

    truncate = ns.truncate if ns.truncate is not None else doc["analysis.truncate"]
    n_coh, n_inc, residual = analysis.split_coherent_incoherent(
        spec, mask_radius=doc["analysis.mask_radius"], truncate=truncate
    )
    plane = _plane_name(ns.plane) if ns.plane else doc["analysis.plane"]
    view = analysis.SpectrometerView(plane=plane, slit_cells=doc["analysis.slit_cells"])
    sl = analysis.slice_spectrum(residual, view)
    _write_csv(
        out / f"slice_{plane}.csv",
        ("q_rad_per_m", "omega_rad_per_s", "photons_per_mode"),
        _spectrum2d_rows(sl),
    )

    ctx = doc.context()
    profile = analysis.ridge_centroid(sl, omega_carrier=ctx.omega_up)
    _write_csv(
        out / "ridge.csv",
        ("q_rad_per_m", "centroid_rad_per_s", "mass", "valid"),
        zip(profile.q, profile.centroid, profile.mass,
            (int(v) for v in profile.valid)),
    )
    try:
        slope = analysis.ridge_slope(profile)
    except ValueError:
        slope = float("nan")
    _write_csv(
        out / "analysis.csv",
        ("n_coherent", "n_incoherent", "lambda_incoherent_m",
         "ridge_slope_s_per_m", "mask_radius_cells", "truncate"),
        [(n_coh, n_inc, profile.lambda_inc, slope,
          doc["analysis.mask_radius"], truncate)],
    )
    _write_manifest(out, ns, doc, t0, {
        "seed": header.get("seed"),
        "input": str(ns.input),
        "input_config_sha256": header.get("config_sha256"),
        "input_config_matches": match,
    })
    print(out)
    return 0


def cmd_sweep(ns) -> int:
    doc = _load_document(ns)
    t0 = time.monotonic()
    engine = ns.engine or doc["sweep.engine"]
    angles = parse_angles(ns.angles) if ns.angles else doc.sweep_angles()
    out = _out_dir(ns, doc, extra=f"{engine}:{ns.angles}")
    rc = _run_config(ns, doc)
    result = analysis.angle_sweep(rc, angles, engine=engine, workers=ns.threads)
    rows = [
        (np.degrees(a), a, lam, nc, ni, sl, flag if flag else "ok")
        for a, lam, nc, ni, sl, flag in zip(
            result.values, result.lambda_inc, result.n_coherent,
            result.n_incoherent, result.ridge_slope, result.flags,
        )
    ]
    _write_csv(
        out / "sweep.csv",
        ("tilt_deg", "tilt_rad", "lambda_incoherent_m", "n_coherent",
         "n_incoherent", "ridge_slope_s_per_m", "status"),
        rows,
    )
    _write_manifest(out, ns, doc, t0, {
        "seed": rc.seed, "engine": engine,
        "angles_rad": [float(a) for a in angles],
    })
    print(out / "sweep.csv")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sfgtools",
        description="Analytic and stochastic tools for broadband "
                    "down-conversion and its up-conversion.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", default=None,
                        help="YAML config document; omitted means the documented defaults")
    common.add_argument("--out", metavar="DIR", default=None,
                        help="output directory; default derives a unique name under ./runs")

    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("phasematch", parents=[common],
                       help="bandwidths, threshold lengths and critical angle of the configured crystals")
    p.set_defaults(func=cmd_phasematch)

    p = sub.add_parser("pwpa-spectrum", parents=[common],
                       help="analytic up-converted spectra on the configured grid")
    p.add_argument("--plane", choices=("xw", "yw"), default="xw",
                   help="spectrometer plane: xw = walk-off plane, yw = orthogonal (default xw)")
    p.add_argument("--threads", metavar="N", type=int, default=None,
                   help="FFT worker threads")
    p.set_defaults(func=cmd_pwpa_spectrum)

    p = sub.add_parser("simulate", parents=[common],
                       help="run the stochastic two-crystal experiment")
    p.add_argument("--seed", metavar="N", type=int, default=None,
                   help="override the master seed from the config")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", parents=[common],
                       help="split and profile a stored 3D spectrum")
    p.add_argument("input", metavar="SPECTRUM.sfg",
                   help="grid file written by simulate or pwpa-spectrum")
    p.add_argument("--plane", choices=("xw", "yw"), default=None,
                   help="spectrometer plane; default from the config analysis section")
    p.add_argument("--truncate", metavar="FRAC", type=float, default=None,
                   help="coherent-mask cap as a fraction of the peak (e.g. 0.0005)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", parents=[common],
                       help="scan the up-converter tilt with a chosen engine")
    p.add_argument("--angles", metavar="START:STEP:END", default=None,
                   help="inclusive tilt range in degrees, e.g. -2:0.5:2")
    p.add_argument("--engine", choices=("analytic", "pwpa", "stochastic"),
                   default=None, help="sweep engine; default from the config sweep section")
    p.add_argument("--seed", metavar="N", type=int, default=None,
                   help="override the master seed (stochastic engine)")
    p.add_argument("--threads", metavar="N", type=int, default=None,
                   help="worker threads for the sweep rows")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    ns.raw_argv = list(sys.argv[1:] if argv is None else argv)
    try:
        return ns.func(ns)
    except (ConfigError, GridFileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
