"""Declarative run configuration with explicit physical units.

A config is a YAML document whose physical quantities are strings carrying a
unit ("4 mm", "527.5 nm", "36 fs"); bare numbers are accepted only for
dimensionless keys. The schema is strict: unknown sections or keys are errors
with the offending path and a remedy hint, because a silently ignored typo in
a physics config costs an afternoon. Every key has a documented default, the
defaults being the acceptance geometry of the two-crystal experiment (4 mm
down-converter, 1 mm up-converter, gain 9.3, 64 x 64 x 256 box).

Parsing cross-validates the document: the grid must resolve the crystals'
narrowest spectral scales and the pump must fit the periodic box, so a
document that parses is a document that runs.
"""

from __future__ import annotations

import difflib
import hashlib
import io
import re
from dataclasses import dataclass
from types import MappingProxyType

import numpy as np
import yaml

from .grids import GridSpec, ResolutionError
from .materials import MATERIALS, Material, Sellmeier
from .phasematch import PhaseMatchContext
from .simulator import PumpPulse, RunConfig

__all__ = ["ConfigError", "ConfigDocument", "parse_config", "load_config", "parse_angles"]


class ConfigError(ValueError):
    """A config document that cannot be accepted, with its key path."""

    def __init__(self, path: str, problem: str, remedy: str = ""):
        self.path = path
        self.problem = problem
        self.remedy = remedy
        text = f"{path}: {problem}"
        if remedy:
            text += f" ({remedy})"
        super().__init__(text)


_PREFIX = {
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "nm": 1e-9},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9, "ps": 1e-12, "fs": 1e-15},
    "angle": {"rad": 1.0, "mrad": 1e-3, "deg": np.pi / 180.0},
    "fraction": {"": 1.0, "%": 0.01},
}

_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([^\s]*)\s*$")


def _parse_quantity(path: str, value, kind: str) -> float:
    """Number + unit string to SI; dimensionless kinds accept bare numbers."""
    if kind in ("float", "int"):
        try:
            num = float(value) if not isinstance(value, bool) else None
        except (TypeError, ValueError):
            num = None
        if num is None:
            raise ConfigError(path, f"expected a number, got {value!r}")
        if kind == "int":
            if num != int(num):
                raise ConfigError(path, f"expected an integer, got {value!r}")
            return int(num)
        return num
    table = _PREFIX[kind]
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        if "" in table:
            return float(value)
        raise ConfigError(
            path,
            f"bare number {value!r} for a {kind} quantity",
            f"add a unit, e.g. '{value} {next(iter(table))}'",
        )
    m = _NUMBER.match(str(value))
    if not m:
        raise ConfigError(path, f"cannot read a quantity from {value!r}")
    num, unit = float(m.group(1)), m.group(2)
    if unit not in table:
        known = ", ".join(u for u in table if u)
        raise ConfigError(path, f"unknown {kind} unit {unit!r}", f"use one of: {known}")
    return num * table[unit]


@dataclass(frozen=True)
class _Field:
    kind: str  # length | time | angle | fraction | float | int | bool | choice
    default: object
    choices: tuple = ()


_SCHEMA: dict[str, dict[str, _Field]] = {
    "crystals": {
        "material": _Field("choice", "BBO"),  # choices resolved against the registry
        "pump_wavelength": _Field("length", "527.5 nm"),
        "pdc_length": _Field("length", "4 mm"),
        "sfg_length": _Field("length", "1 mm"),
        "gain": _Field("float", 9.3),
        "sigma": _Field("float", 1e-16),
        "tilt": _Field("angle", "0 deg"),
    },
    "pump": {
        "waist": _Field("length", "500 um"),
        "duration": _Field("time", "1 ps"),
    },
    "grid": {
        "nx": _Field("int", 64),
        "ny": _Field("int", 64),
        "nt": _Field("int", 256),
        "dx": _Field("length", "46.875 um"),
        "dy": _Field("length", "46.875 um"),
        "dt": _Field("time", "23.4375 fs"),
    },
    "filter": {
        "enabled": _Field("bool", True),
        "min_wavelength": _Field("length", "750 nm"),
        "max_wavelength": _Field("length", "1300 nm"),
    },
    "run": {
        "seed": _Field("int", 0),
        "realizations": _Field("int", 1),
        "steps": _Field("int", 200),
    },
    "analysis": {
        "plane": _Field("choice", "walkoff", ("walkoff", "orthogonal")),
        "slit_cells": _Field("int", 1),
        "mask_radius": _Field("int", 3),
        "truncate": _Field("fraction", "0.05 %"),
    },
    "sweep": {
        "engine": _Field("choice", "analytic", ("analytic", "pwpa", "stochastic")),
        "angles": _Field("choice", "-2:0.5:2 deg", ()),  # free-form range string
    },
}


def parse_angles(spec: str) -> np.ndarray:
    """START:STEP:END range with an optional trailing angle unit, inclusive.

    "-2:0.5:2 deg" gives the nine tilts of the tuning-curve measurement.
    """
    m = re.match(r"^\s*([^:]+):([^:]+):([^\s:]+)\s*([a-zA-Z]*)\s*$", str(spec))
    if not m:
        raise ConfigError("angles", f"expected START:STEP:END, got {spec!r}")
    unit = m.group(4) or "deg"
    if unit not in _PREFIX["angle"]:
        raise ConfigError("angles", f"unknown angle unit {unit!r}", "use deg, mrad or rad")
    try:
        start, step, end = (float(m.group(i)) for i in (1, 2, 3))
    except ValueError:
        raise ConfigError("angles", f"non-numeric bound in {spec!r}") from None
    if step <= 0 or end < start:
        raise ConfigError("angles", "need STEP > 0 and END >= START")
    count = int(round((end - start) / step)) + 1
    vals = start + step * np.arange(count)
    vals = vals[vals <= end + 1e-9 * abs(step)]
    return vals * _PREFIX["angle"][unit]


def _suggest(name: str, known) -> str:
    close = difflib.get_close_matches(name, list(known), n=1)
    if close:
        return f"did you mean {close[0]!r}?"
    return "valid keys: " + ", ".join(sorted(known))


def _parse_material_table(name: str, body) -> Material:
    path = f"materials.{name}"
    if not isinstance(body, dict):
        raise ConfigError(path, "expected a mapping with ordinary/extraordinary sets")
    known = {"ordinary", "extraordinary", "window"}
    for key in body:
        if key not in known:
            raise ConfigError(f"{path}.{key}", "unknown key", _suggest(key, known))
    sets = {}
    for pol in ("ordinary", "extraordinary"):
        coeffs = body.get(pol)
        if not isinstance(coeffs, dict) or set(coeffs) != {"a", "b", "c", "d"}:
            raise ConfigError(
                f"{path}.{pol}", "expected Sellmeier coefficients a, b, c, d"
            )
        sets[pol] = Sellmeier(**{k: float(coeffs[k]) for k in "abcd"})
    window = (0.4e-6, 1.4e-6)
    if "window" in body:
        raw = body["window"]
        if not isinstance(raw, (list, tuple)) or len(raw) != 2:
            raise ConfigError(f"{path}.window", "expected [min, max] wavelengths")
        window = tuple(
            _parse_quantity(f"{path}.window[{i}]", v, "length") for i, v in enumerate(raw)
        )
    return Material(name=name, ordinary=sets["ordinary"], extraordinary=sets["extraordinary"], window=window)


@dataclass(frozen=True)
class ConfigDocument:
    """A validated run description; construct through parse_config.

    ``values`` maps section.key to the SI-normalized value; ``text`` holds the
    canonical echo used for hashing, so two documents with equal text behave
    identically everywhere.
    """

    values: MappingProxyType
    text: str
    material: Material

    def __getitem__(self, path: str):
        return self.values[path]

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.text.encode()).hexdigest()

    def context(self) -> PhaseMatchContext:
        v = self.values
        return PhaseMatchContext.collinear(
            self.material,
            v["crystals.pump_wavelength"],
            v["crystals.pdc_length"],
            v["crystals.sfg_length"],
            gain=v["crystals.gain"],
            sigma=v["crystals.sigma"],
        )

    def grid(self) -> GridSpec:
        v = self.values
        return GridSpec(
            nx=v["grid.nx"], ny=v["grid.ny"], nt=v["grid.nt"],
            dx=v["grid.dx"], dy=v["grid.dy"], dt=v["grid.dt"],
        )

    def pump(self) -> PumpPulse:
        return PumpPulse(
            waist=self.values["pump.waist"], duration=self.values["pump.duration"]
        )

    def filter_window(self) -> tuple[float, float] | None:
        v = self.values
        if not v["filter.enabled"]:
            return None
        return (v["filter.min_wavelength"], v["filter.max_wavelength"])

    def run_config(self) -> RunConfig:
        v = self.values
        return RunConfig(
            ctx=self.context(),
            grid=self.grid(),
            pump=self.pump(),
            dtheta=v["crystals.tilt"],
            filter_window=self.filter_window(),
            steps=v["run.steps"],
            seed=v["run.seed"],
            realizations=v["run.realizations"],
            mask_radius=v["analysis.mask_radius"],
        )

    def sweep_angles(self) -> np.ndarray:
        return parse_angles(self.values["sweep.angles"])


def _canonical_text(raw: dict, materials_block) -> str:
    """Schema-ordered echo with every key materialized; the hashing surface."""
    out = io.StringIO()
    if materials_block:
        out.write(yaml.safe_dump({"materials": materials_block}, sort_keys=True))
    for section, fields in _SCHEMA.items():
        out.write(f"{section}:\n")
        for key, field in fields.items():
            val = raw.get(section, {}).get(key, field.default)
            if isinstance(val, bool):
                out.write(f"  {key}: {'true' if val else 'false'}\n")
            elif isinstance(val, str):
                out.write(f"  {key}: {val.strip()}\n")
            else:
                out.write(f"  {key}: {val}\n")
    return out.getvalue()


def parse_config(text: str) -> ConfigDocument:
    """Validate a YAML config; empty text means the documented defaults.

    Raises ConfigError with the key path and a remedy hint on unknown keys,
    missing units, malformed values, or a grid that cannot resolve the
    configured crystals.
    """
    try:
        doc = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError("document", f"not parseable as YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("document", "top level must be a mapping of sections")

    materials_block = doc.pop("materials", None)
    registry = dict(MATERIALS)
    if materials_block is not None:
        if not isinstance(materials_block, dict):
            raise ConfigError("materials", "expected a mapping of named Sellmeier sets")
        for name, body in materials_block.items():
            registry[str(name)] = _parse_material_table(str(name), body)

    for section in doc:
        if section not in _SCHEMA:
            raise ConfigError(section, "unknown section", _suggest(section, _SCHEMA))
        if not isinstance(doc[section], dict):
            raise ConfigError(section, "expected a mapping of keys")
        for key in doc[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(
                    f"{section}.{key}", "unknown key", _suggest(key, _SCHEMA[section])
                )

    values = {}
    for section, fields in _SCHEMA.items():
        for key, field in fields.items():
            path = f"{section}.{key}"
            val = doc.get(section, {}).get(key, field.default)
            if field.kind == "bool":
                if not isinstance(val, bool):
                    raise ConfigError(path, f"expected true or false, got {val!r}")
                values[path] = val
            elif field.kind == "choice":
                sval = str(val).strip()
                if field.choices and sval not in field.choices:
                    raise ConfigError(
                        path, f"unknown value {sval!r}", _suggest(sval, field.choices)
                    )
                values[path] = sval
            else:
                values[path] = _parse_quantity(path, val, field.kind)

    name = values["crystals.material"]
    if name not in registry:
        raise ConfigError(
            "crystals.material", f"unknown material {name!r}", _suggest(name, registry)
        )

    document = ConfigDocument(
        values=MappingProxyType(values),
        text=_canonical_text(doc, materials_block),
        material=registry[name],
    )

    # cross-module validation: a config that parses must also run
    try:
        document.grid().validate_against(document.context())
    except ResolutionError as exc:
        raise ConfigError(
            "grid", str(exc), "refine dx/dy/dt or shorten the crystals"
        ) from exc
    except ValueError as exc:
        raise ConfigError("crystals", str(exc)) from exc
    try:
        document.run_config()
        parse_angles(values["sweep.angles"])
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("run", str(exc)) from exc
    return document


def load_config(path) -> ConfigDocument:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
