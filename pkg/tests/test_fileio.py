"""Table format and grid serialization round trips."""
from __future__ import annotations

import math

import numpy as np
import pytest

from chitomo.errors import ValidationError
from chitomo.fileio import (
    load_chi_grid,
    load_wigner_grid,
    read_json,
    read_table,
    save_chi_grid,
    save_wigner_grid,
    write_json,
    write_table,
)
from chitomo.gaussian_field import GaussianFieldState, ModeSet, Squeezed, Thermal
from chitomo.tomography import (
    chi_grid_from_state,
    grid_axis,
    hermitian_fill,
    sampled_chi_grid,
    wigner_transform,
)

MS1 = ModeSet(spatial_dim=1, box_side=2 * np.pi, mass=1.0, mode_indices=[[1]])
MS2 = ModeSet(spatial_dim=1, box_side=2 * np.pi, mass=1.0, mode_indices=[[1], [2]])
THERMAL = GaussianFieldState(modes=MS1, mode_states=[Thermal(n=1.0)])


# ------------------------------------------------------------------- tables

def test_table_roundtrip_exact(tmp_path):
    path = tmp_path / "t.csv"
    rows = [[1, 0.1, math.pi], [2, -0.25, 1e-17], [3, math.nan, -0.0]]
    write_table(path, ["idx", "a", "b"], rows, meta={"kind": "demo", "seed": 7})
    columns, got, meta = read_table(path)
    assert columns == ["idx", "a", "b"]
    assert meta == {"kind": "demo", "seed": 7}
    for want_row, got_row in zip(rows, got):
        for w, g in zip(want_row, got_row):
            if isinstance(w, float) and math.isnan(w):
                assert math.isnan(g)
            else:
                assert g == w  # repr round trip is exact, not approximate


def test_table_is_deterministic_without_timestamps(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_table(a, ["x"], [[0.1]], meta={"s": 1})
    write_table(b, ["x"], [[0.1]], meta={"s": 1})
    assert a.read_bytes() == b.read_bytes()
    assert b"generated" not in a.read_bytes()


def test_table_timestamp_flag(tmp_path):
    path = tmp_path / "t.csv"
    write_table(path, ["x"], [[1.0]], timestamps=True)
    assert b"# generated:" in path.read_bytes()


def test_table_rejects_bad_cells(tmp_path):
    path = tmp_path / "t.csv"
    with pytest.raises(ValidationError):
        write_table(path, ["x"], [[True]])
    with pytest.raises(ValidationError):
        write_table(path, ["x", "y"], [[1.0]])


def test_read_rejects_foreign_files(tmp_path):
    path = tmp_path / "other.csv"
    path.write_text("x,y\n1,2\n")
    with pytest.raises(ValidationError):
        read_table(path)


# -------------------------------------------------------------------- grids

def test_chi_grid_roundtrip_bitwise(tmp_path):
    g = sampled_chi_grid(THERMAL, (grid_axis(2.0, 11), grid_axis(2.0, 11)),
                         shots=200, seed=5, half=True)
    path = tmp_path / "chi.csv"
    save_chi_grid(g, path, meta={"note": 1})
    back = load_chi_grid(path)
    np.testing.assert_array_equal(back.values, g.values)  # NaN half included
    np.testing.assert_array_equal(back.stderr, g.stderr)
    for a, b in zip(back.axes, g.axes):
        np.testing.assert_array_equal(a, b)
    assert back.provenance == g.provenance
    assert back.shots == g.shots


def test_chi_grid_roundtrip_exact_and_two_mode(tmp_path):
    st2 = GaussianFieldState(modes=MS2, mode_states=[Thermal(n=0.5), Squeezed(r=0.4)])
    g = chi_grid_from_state(st2, (grid_axis(2.0, 7),) * 4)
    path = tmp_path / "chi2.csv"
    save_chi_grid(g, path)
    back = load_chi_grid(path)
    np.testing.assert_array_equal(back.values, g.values)
    assert back.n_modes == 2
    assert back.stderr is None
    columns, _, _ = read_table(path)
    assert columns[:4] == ["re_xi0", "im_xi0", "re_xi1", "im_xi1"]


def test_wigner_grid_roundtrip(tmp_path):
    w = wigner_transform(chi_grid_from_state(THERMAL, (grid_axis(6.0, 65),) * 2))
    path = tmp_path / "w.csv"
    save_wigner_grid(w, path)
    back = load_wigner_grid(path)
    np.testing.assert_array_equal(back.values, w.values)
    assert back.normalization == w.normalization
    assert back.imag_residual == w.imag_residual
    with pytest.raises(ValidationError):
        load_chi_grid(path)  # wrong kind tag


def test_grid_kind_checked(tmp_path):
    g = chi_grid_from_state(THERMAL, (grid_axis(2.0, 5),) * 2)
    path = tmp_path / "chi.csv"
    save_chi_grid(g, path)
    with pytest.raises(ValidationError):
        load_wigner_grid(path)


# --------------------------------------------------------------------- json

def test_json_roundtrip(tmp_path):
    doc = {"b": [1, 2.5], "a": {"nested": True}, "s": "text"}
    path = tmp_path / "doc.json"
    write_json(path, doc)
    assert read_json(path) == doc
    # deterministic key order
    text = path.read_text()
    assert text.index('"a"') < text.index('"b"')
