"""Versioned binary container for simulation fields and spectra.

Layout: 4 magic bytes ``SFGR``, a little-endian u16 byte-order sentinel
(0x1234), a u16 format version, a u32 JSON header length, the UTF-8 JSON
header, then the dense payload. The payload is the raw little-endian C-order
bytes of each array named in the header, in order, so a write/read cycle is
bit-identical. The header carries the provenance needed to reproduce the
array: polarization and normalization tags, propagation distance, RNG seed,
and the sha256 of the config document that produced it.

Interop happens through CSV export at the CLI layer; this format exists so a
multi-gigabyte complex field survives a round trip without loss.
"""

from __future__ import annotations

import json

import numpy as np

from .grids import GridSpec
from .spectra import Axis, SpectralField, Spectrum3D

__all__ = ["GridFileError", "write_grid", "read_grid", "read_header", "MAGIC", "VERSION"]

MAGIC = b"SFGR"
VERSION = 1
_SENTINEL = 0x1234

# fields are always cell-Wigner amplitudes; spectra carry their own tag
_FIELD_NORMALIZATION = "wigner-cell-amplitude"


class GridFileError(IOError):
    """A grid file that cannot be read: wrong magic, version, or size."""


def _descriptor(arr: np.ndarray) -> dict:
    kind = arr.dtype.kind
    if kind == "c":
        dtype = f"complex{arr.dtype.itemsize * 8}"
    elif kind == "f":
        dtype = f"float{arr.dtype.itemsize * 8}"
    else:
        raise GridFileError(f"unsupported array dtype {arr.dtype}")
    return {"dtype": dtype, "shape": list(arr.shape)}


def _np_dtype(name: str) -> np.dtype:
    table = {"complex128": "<c16", "complex64": "<c8", "float64": "<f8", "float32": "<f4"}
    if name not in table:
        raise GridFileError(f"unsupported dtype {name!r} in header")
    return np.dtype(table[name])


def write_grid(path, obj, *, seed=None, config_sha256=None) -> None:
    """Serialize a SpectralField or Spectrum3D with provenance tags."""
    if isinstance(obj, SpectralField):
        g = obj.grid
        header = {
            "kind": "field",
            "polarization": obj.polarization,
            "z": float(obj.z),
            "grid": {"nx": g.nx, "ny": g.ny, "nt": g.nt,
                     "dx": g.dx, "dy": g.dy, "dt": g.dt},
            "normalization": _FIELD_NORMALIZATION,
            "arrays": [_descriptor(obj.values)],
        }
        arrays = [obj.values]
    elif isinstance(obj, Spectrum3D):
        header = {
            "kind": "spectrum3d",
            "polarization": None,
            "normalization": obj.normalization,
            "axis_kinds": [ax.kind for ax in obj.axes],
            "arrays": [_descriptor(ax.values) for ax in obj.axes]
            + [_descriptor(obj.values)],
        }
        arrays = [ax.values for ax in obj.axes] + [obj.values]
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    header["seed"] = seed
    header["config_sha256"] = config_sha256

    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(np.uint16(_SENTINEL).astype("<u2").tobytes())
        fh.write(np.uint16(VERSION).astype("<u2").tobytes())
        fh.write(np.uint32(len(blob)).astype("<u4").tobytes())
        fh.write(blob)
        for arr in arrays:
            fh.write(np.ascontiguousarray(arr).astype(arr.dtype.newbyteorder("<")).tobytes())


def read_header(path) -> dict:
    """Parse magic, sentinel, version and the JSON header; payload untouched."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise GridFileError(
                f"{path}: not a grid file (magic {magic!r}, expected {MAGIC!r})"
            )
        raw = fh.read(4)
        if len(raw) < 4:
            raise GridFileError(f"{path}: truncated before the format header")
        sentinel = int(np.frombuffer(raw, "<u2", count=1)[0])
        if sentinel != _SENTINEL:
            if sentinel == 0x3412:
                raise GridFileError(
                    f"{path}: byte-order sentinel is swapped; the file was written "
                    "big-endian and this reader only accepts little-endian payloads"
                )
            raise GridFileError(f"{path}: bad byte-order sentinel 0x{sentinel:04x}")
        version = int(np.frombuffer(raw, "<u2", count=2)[1])
        if version != VERSION:
            raise GridFileError(
                f"{path}: format version {version} is not the supported version {VERSION}"
            )
        raw = fh.read(4)
        if len(raw) < 4:
            raise GridFileError(f"{path}: truncated before the header length")
        length = int(np.frombuffer(raw, "<u4")[0])
        blob = fh.read(length)
        if len(blob) < length:
            raise GridFileError(f"{path}: truncated JSON header")
        try:
            header = json.loads(blob.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise GridFileError(f"{path}: corrupt JSON header: {exc}") from exc
        header["_payload_offset"] = fh.tell()
        return header


def read_grid(path):
    """Reconstruct the stored object; returns (object, header).

    The header dict includes the seed and config hash written alongside the
    data, so a caller can refuse arrays that do not match its own config.
    """
    header = read_header(path)
    offset = header.pop("_payload_offset")
    descriptors = header["arrays"]
    expected = sum(
        _np_dtype(d["dtype"]).itemsize * int(np.prod(d["shape"])) for d in descriptors
    )
    with open(path, "rb") as fh:
        fh.seek(offset)
        payload = fh.read()
    if len(payload) != expected:
        raise GridFileError(
            f"{path}: truncated payload: expected {expected} bytes, found {len(payload)}"
        )
    arrays = []
    pos = 0
    for d in descriptors:
        dtype = _np_dtype(d["dtype"])
        count = int(np.prod(d["shape"]))
        arr = np.frombuffer(payload, dtype, count=count, offset=pos)
        arrays.append(arr.reshape(d["shape"]).copy())
        pos += dtype.itemsize * count

    if header["kind"] == "field":
        grid = GridSpec(**header["grid"])
        obj = SpectralField(
            values=arrays[0], grid=grid, polarization=header["polarization"],
            z=header["z"],
        )
    elif header["kind"] == "spectrum3d":
        axes = tuple(
            Axis(kind=k, values=a) for k, a in zip(header["axis_kinds"], arrays[:-1])
        )
        obj = Spectrum3D(
            values=arrays[-1], axes=axes, normalization=header["normalization"]
        )
    else:
        raise GridFileError(f"{path}: unknown payload kind {header['kind']!r}")
    return obj, header
