"""Structured-text data files: '#'-prefixed header, CSV payload.

Every file opens with a format tag line, a meta line holding one JSON object
(axes, provenance, resolved configuration, ...) and a columns line, followed
by plain CSV rows. Floats are written with repr, which round-trips exactly,
so loading a grid reproduces the saved arrays bit for bit. Headers carry no
timestamp unless explicitly requested, keeping identical runs byte-identical.
"""
from __future__ import annotations

import json
import math
from datetime import datetime, timezone

import numpy as np

from .errors import ValidationError
from .tomography import ChiGrid, WignerGrid

__all__ = [
    "write_table",
    "read_table",
    "save_chi_grid",
    "load_chi_grid",
    "save_wigner_grid",
    "load_wigner_grid",
    "write_json",
    "read_json",
]

_TAG = "chitomo-table v1"


def _format_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        raise ValidationError("boolean cells are not part of the table format")
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_table(path, columns, rows, meta: dict | None = None, timestamps: bool = False) -> None:
    """CSV with a '#' header: tag, optional timestamp, meta JSON, column names."""
    columns = list(columns)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {_TAG}\n")
        if timestamps:
            stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
            fh.write(f"# generated: {stamp}\n")
        fh.write(f"# meta: {json.dumps(meta or {}, sort_keys=True)}\n")
        fh.write(f"# columns: {','.join(columns)}\n")
        for row in rows:
            if len(row) != len(columns):
                raise ValidationError("row width does not match the column list")
            fh.write(",".join(_format_cell(v) for v in row) + "\n")


def read_table(path) -> tuple[list[str], list[list[float]], dict]:
    """Inverse of write_table; numeric cells come back as floats."""
    columns: list[str] | None = None
    meta: dict = {}
    rows: list[list[float]] = []
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
        if first != f"# {_TAG}":
            raise ValidationError(f"{path} is not a {_TAG} file")
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].lstrip()
                if body.startswith("meta:"):
                    meta = json.loads(body[len("meta:"):])
                elif body.startswith("columns:"):
                    columns = [c.strip() for c in body[len("columns:"):].split(",")]
                continue
            if columns is None:
                raise ValidationError(f"{path} has data before a columns header")
            cells = line.split(",")
            if len(cells) != len(columns):
                raise ValidationError(f"{path}: row width does not match columns")
            rows.append([float(c) for c in cells])
    if columns is None:
        raise ValidationError(f"{path} has no columns header")
    return columns, rows, meta


def _axes_to_meta(axes) -> list[list[float]]:
    return [[float(v) for v in a] for a in axes]


def _axes_from_meta(meta) -> tuple[np.ndarray, ...]:
    try:
        return tuple(np.array(a, dtype=float) for a in meta["axes"])
    except KeyError:
        raise ValidationError("grid file carries no axes in its meta header") from None


def _coordinate_rows(axes, extra_columns):
    mesh = np.meshgrid(*axes, indexing="ij")
    flat = [m.reshape(-1) for m in mesh]
    return np.stack(flat + list(extra_columns), axis=1)


def save_chi_grid(
    grid: ChiGrid, path, meta: dict | None = None, timestamps: bool = False
) -> None:
    """One row per grid point, C order: coordinates, Re chi, Im chi[, stderr]."""
    n = grid.n_modes
    if n == 1:
        coord_names = ["re_xi", "im_xi"]
    else:
        coord_names = []
        for m in range(n):
            coord_names += [f"re_xi{m}", f"im_xi{m}"]
    columns = coord_names + ["re_chi", "im_chi"]
    extra = [grid.values.reshape(-1).real, grid.values.reshape(-1).imag]
    if grid.stderr is not None:
        columns.append("stderr")
        extra.append(grid.stderr.reshape(-1))
    doc = dict(meta or {})
    doc.update(
        {
            "kind": "chi_grid",
            "provenance": grid.provenance,
            "shots": grid.shots,
            "axes": _axes_to_meta(grid.axes),
        }
    )
    write_table(path, columns, _coordinate_rows(grid.axes, extra), doc, timestamps)


def load_chi_grid(path) -> ChiGrid:
    columns, rows, meta = read_table(path)
    if meta.get("kind") != "chi_grid":
        raise ValidationError(f"{path} is not a chi grid file")
    axes = _axes_from_meta(meta)
    shape = tuple(a.size for a in axes)
    data = np.asarray(rows, dtype=float)
    if data.shape[0] != math.prod(shape):
        raise ValidationError(f"{path}: row count does not match the axes")
    k = len(axes)
    values = (data[:, k] + 1j * data[:, k + 1]).reshape(shape)
    stderr = None
    if "stderr" in columns:
        stderr = data[:, columns.index("stderr")].reshape(shape)
    return ChiGrid(
        axes=axes,
        values=values,
        provenance=str(meta.get("provenance", "exact")),
        shots=int(meta.get("shots", 0)),
        stderr=stderr,
    )


def save_wigner_grid(
    grid: WignerGrid, path, meta: dict | None = None, timestamps: bool = False
) -> None:
    n = grid.n_modes
    if n == 1:
        coord_names = ["x", "p"]
    else:
        coord_names = []
        for m in range(n):
            coord_names += [f"x{m}", f"p{m}"]
    columns = coord_names + ["w"]
    doc = dict(meta or {})
    doc.update(
        {
            "kind": "wigner_grid",
            "normalization": grid.normalization,
            "imag_residual": grid.imag_residual,
            "axes": _axes_to_meta(grid.axes),
        }
    )
    write_table(
        path, columns, _coordinate_rows(grid.axes, [grid.values.reshape(-1)]), doc, timestamps
    )


def load_wigner_grid(path) -> WignerGrid:
    _, rows, meta = read_table(path)
    if meta.get("kind") != "wigner_grid":
        raise ValidationError(f"{path} is not a Wigner grid file")
    axes = _axes_from_meta(meta)
    shape = tuple(a.size for a in axes)
    data = np.asarray(rows, dtype=float)
    if data.shape[0] != math.prod(shape):
        raise ValidationError(f"{path}: row count does not match the axes")
    return WignerGrid(
        axes=axes,
        values=data[:, len(axes)].reshape(shape),
        normalization=float(meta.get("normalization", float("nan"))),
        imag_residual=float(meta.get("imag_residual", 0.0)),
    )


def write_json(path, doc) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
