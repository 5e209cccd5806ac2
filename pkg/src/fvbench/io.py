"""Snapshot and CSV formats.

Snapshot (``.fvb``): ASCII header lines ``FVB1``, ``key=value`` ..., ``END``,
followed by the interior conserved array ``(nvar, *cells)`` as row-major
little-endian float64.
"""

from __future__ import annotations

import csv
import io as _io
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import CartesianGrid, ConservedField, GasModel

MAGIC = "FVB1"
FLOAT_FMT = "%.17g"


def _fmt(v) -> str:
    if isinstance(v, float) or isinstance(v, np.floating):
        return FLOAT_FMT % v
    return str(v)


def _tuple(text: str, kind=float) -> tuple:
    return tuple(kind(t) for t in text.split(",") if t)


def write_snapshot(path: str | Path, f: ConservedField, gas: GasModel,
                   meta: Mapping[str, str] | None = None) -> Path:
    g = f.grid
    header = {
        "ndim": str(g.ndim),
        "cells": ",".join(map(str, g.cells)),
        "lo": ",".join(_fmt(float(x)) for x in g.lo),
        "hi": ",".join(_fmt(float(x)) for x in g.hi),
        "boundary": ",".join(g.boundary),
        "time": _fmt(float(f.time)),
        "gamma": _fmt(gas.gamma),
        "cp": _fmt(gas.cp),
        "cv": _fmt(gas.cv),
        "r_specific": _fmt(gas.r_specific),
        "prandtl": _fmt(gas.prandtl),
        "nvar": str(g.nvar),
        "dtype": "<f8",
    }
    for ax, state in sorted(f.inflow.items()):
        header[f"inflow.{ax}"] = ",".join(_fmt(float(x)) for x in state)
    for k, v in (meta or {}).items():
        if "\n" in str(v) or "=" in str(k):
            raise ValueError(f"metadata entry {k!r} not representable")
        header[f"meta.{k}"] = str(v)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = MAGIC + "\n" + "".join(f"{k}={v}\n" for k, v in header.items()) + "END\n"
    payload = np.ascontiguousarray(f.interior, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(text.encode("ascii"))
        fh.write(payload)
    return path


def read_snapshot(path: str | Path, ghost_width: int = 4) -> tuple[ConservedField, GasModel, dict[str, str]]:
    raw = Path(path).read_bytes()
    lines = []
    pos = 0
    while True:
        end = raw.index(b"\n", pos)
        line = raw[pos:end].decode("ascii")
        pos = end + 1
        if line == "END":
            break
        lines.append(line)
    if not lines or lines[0] != MAGIC:
        raise ValueError(f"{path}: not an FVB1 snapshot")
    header = dict(l.split("=", 1) for l in lines[1:])
    cells = _tuple(header["cells"], int)
    grid = CartesianGrid(cells, _tuple(header["lo"]), _tuple(header["hi"]), ghost_width,
                         tuple(header["boundary"].split(",")))
    if "cv" in header:
        gas = GasModel(float(header["gamma"]), float(header["r_specific"]), float(header["cp"]),
                       float(header["cv"]), float(header["prandtl"]))
    else:
        gas = GasModel.from_cp(float(header["cp"]), float(header["gamma"]), float(header["prandtl"]))
    data = np.frombuffer(raw[pos:], dtype="<f8")
    expected = grid.nvar * int(np.prod(cells))
    if data.size != expected:
        raise ValueError(f"{path}: payload has {data.size} values, expected {expected}")
    inflow = {int(k.split(".")[1]): np.array(_tuple(v)) for k, v in header.items() if k.startswith("inflow.")}
    f = ConservedField.from_interior(grid, data.reshape((grid.nvar,) + cells).astype(float),
                                     float(header["time"]), inflow)
    return f, gas, header


def write_csv(path: str | Path, columns: Sequence[str], rows: Iterable[Sequence],
              header: Mapping[str, str] | None = None) -> Path:
    """CSV with ``# key=value`` comment lines, a column row, and 17-digit floats."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = _io.StringIO()
    for k, v in (header or {}).items():
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    path.write_text(buf.getvalue())
    return path


def read_csv(path: str | Path) -> tuple[dict[str, str], list[str], list[list[str]]]:
    header: dict[str, str] = {}
    body = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# "):
            k, _, v = line[2:].partition("=")
            header[k] = v
        else:
            body.append(line)
    rows = list(csv.reader(body))
    return header, rows[0], rows[1:]
