"""Loading and validation of the delimited tables the CLI emits."""

from __future__ import annotations

import json
import os

import numpy as np

EXPECTED_COLUMNS = {
    "cf_iels": ["beta_abs", "drift", "m", "re", "im", "abs2"],
    "cf_prefilter": ["beta_abs", "delta_d", "drift", "m", "re", "im", "abs2",
                     "m0"],
    "emit_postfilter": ["delta_d", "purity", "field_re", "field_im",
                        "field_abs", "p_success"],
    "emit_prefilter": ["beta_abs", "delta_d", "purity", "field_re", "field_im",
                       "field_abs", "m0"],
    "stats_cfplane": ["m1_im", "m2_re", "g_over_i2", "physical"],
    "stats_iels": ["beta_abs", "drift", "m1_im", "m2_re", "g_over_i2",
                   "physical"],
    "cat": ["beta_abs", "s", "fidelity", "p_success", "pf_gamma", "pf_direct"],
    "wigner": ["x", "p", "w"],
    "optimize": None,  # variable ring columns, checked by prefix
}

OPTIMIZE_PREFIX = ["sweep_param", "M", "fidelity", "p_success", "s", "drift"]


class SchemaError(ValueError):
    pass


class Table:
    def __init__(self, columns: list[str], data: np.ndarray):
        self.columns = columns
        self.data = data  # float array, nan for missing cells

    def col(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]


def _parse_cell(cell: str) -> float:
    if cell == "" or cell == "nan":
        return float("nan")
    return float(cell)


def load_table(path: str, kind: str) -> Table:
    """Read a CLI table (csv or json) and check its header against `kind`."""
    if not os.path.exists(path):
        raise SchemaError(f"missing input {path}")
    if path.endswith(".json"):
        payload = json.loads(open(path, encoding="utf-8").read())
        columns = payload["columns"]
        rows = payload["rows"]
    else:
        with open(path, encoding="utf-8") as fh:
            columns = fh.readline().strip().split(",")
            rows = [line.strip().split(",") for line in fh if line.strip()]
    expected = EXPECTED_COLUMNS[kind]
    if expected is not None and columns != expected:
        raise SchemaError(f"{path}: header {columns} != {expected}")
    if kind == "optimize":
        if columns[: len(OPTIMIZE_PREFIX)] != OPTIMIZE_PREFIX:
            raise SchemaError(f"{path}: optimize header prefix mismatch")
    sidecar = os.path.splitext(path)[0] + ".meta.json"
    if os.path.exists(sidecar):
        meta = json.loads(open(sidecar, encoding="utf-8").read())
        if meta.get("columns") != columns:
            raise SchemaError(f"{path}: sidecar columns disagree with table")
    data = np.array([[_parse_cell(c) for c in row] for row in rows], dtype=float)
    if data.ndim != 2 or data.shape[0] == 0 or data.shape[1] != len(columns):
        raise SchemaError(f"{path}: ragged or empty table")
    return Table(columns, data)


def pivot(table: Table, xcol: str, ycol: str, vcol: str):
    """Scan rows -> (x axis, y axis, grid[y, x]) with nan where absent."""
    xs = np.unique(table.col(xcol))
    ys = np.unique(table.col(ycol))
    grid = np.full((ys.size, xs.size), np.nan)
    ix = np.searchsorted(xs, table.col(xcol))
    iy = np.searchsorted(ys, table.col(ycol))
    grid[iy, ix] = table.col(vcol)
    return xs, ys, grid
