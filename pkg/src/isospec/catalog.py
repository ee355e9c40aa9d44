"""Potential catalog and tabulated-potential ingestion.

Catalog potentials use units with a unit coefficient on the kinetic term,
so the harmonic oscillator ``omega^2 x^2`` has level spacing ``2 omega``.
Tabulated potentials are CSV files with header ``x,V``, strictly uniform
spacing, and finite values; the writer emits 17 significant digits so a
written table re-ingests bit-identically.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import TableFormatError
from .grids import Grid1D, GridFunction, make_grid

__all__ = [
    "PotentialSpec",
    "CATALOG_NAMES",
    "default_grid",
    "build_potential",
    "ingest_table",
    "write_table",
]

CATALOG_NAMES = ("harmonic", "box", "poschl_teller")

#: Relative spacing jitter beyond which a table is rejected.
SPACING_TOL = 1e-9


@dataclass(frozen=True)
class PotentialSpec:
    """Which potential to run on: a named catalog entry or a CSV table."""

    kind: str  # "catalog" | "tabulated"
    catalog_name: str | None = None
    params: dict = field(default_factory=dict)
    table_path: str | None = None

    def __post_init__(self):
        if self.kind == "catalog":
            if self.catalog_name not in CATALOG_NAMES:
                raise ValueError(
                    f"unknown catalog potential {self.catalog_name!r}; "
                    f"choose from {CATALOG_NAMES}"
                )
        elif self.kind == "tabulated":
            if not self.table_path:
                raise ValueError("tabulated potential requires a file path")
        else:
            raise ValueError(f"unknown potential kind {self.kind!r}")

    @property
    def label(self) -> str:
        return self.catalog_name if self.kind == "catalog" else str(self.table_path)


def default_grid(spec: PotentialSpec) -> Grid1D:
    """Default discretization: a wide box for whole-line potentials, the
    unit-pitch well for the box (odd point counts keep Simpson available)."""
    if spec.kind == "catalog" and spec.catalog_name == "box":
        return make_grid(0.0, math.pi, 629)
    return make_grid(-10.0, 10.0, 2001)


def build_potential(spec: PotentialSpec, grid: Grid1D | None = None) -> GridFunction:
    """Sample a catalog potential on a grid, or load a tabulated one."""
    if spec.kind == "tabulated":
        table = ingest_table(spec.table_path)
        if grid is not None and grid != table.grid:
            raise ValueError("explicit grid conflicts with the tabulated grid")
        return table
    if grid is None:
        grid = default_grid(spec)
    x = grid.x
    if spec.catalog_name == "harmonic":
        omega = float(spec.params.get("omega", 1.0))
        vals = omega**2 * x**2
    elif spec.catalog_name == "box":
        vals = np.zeros(grid.n)
    else:  # poschl_teller
        a = float(spec.params.get("a", 1.0))
        vals = -a * (a + 1.0) / np.cosh(x) ** 2
    return GridFunction(grid, vals)


def ingest_table(path: str | Path) -> GridFunction:
    """Read a CSV potential table, validating shape, spacing, and finiteness."""
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["x", "V"]:
        raise TableFormatError("expected header 'x,V'", line_number=1)
    xs: list[float] = []
    vs: list[float] = []
    for i, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 2:
            raise TableFormatError(f"expected 2 columns, got {len(row)}", line_number=i)
        try:
            x, v = float(row[0]), float(row[1])
        except ValueError:
            raise TableFormatError(f"non-numeric entry {row!r}", line_number=i)
        if not (math.isfinite(x) and math.isfinite(v)):
            raise TableFormatError(f"non-finite entry {row!r}", line_number=i)
        xs.append(x)
        vs.append(v)
    if len(xs) < 3:
        raise TableFormatError(f"need at least 3 data rows, got {len(xs)}")
    x_arr = np.asarray(xs)
    spacing = float(x_arr[-1] - x_arr[0]) / (len(xs) - 1)
    if spacing <= 0:
        raise TableFormatError("x column must be strictly increasing")
    steps = np.diff(x_arr)
    bad = np.flatnonzero(np.abs(steps - spacing) > SPACING_TOL * abs(spacing))
    if bad.size:
        raise TableFormatError(
            f"non-uniform spacing: step {steps[bad[0]]:.17g} vs mean {spacing:.17g}",
            line_number=int(bad[0]) + 3,  # header + 1-based + offset of second point
        )
    grid = make_grid(float(x_arr[0]), float(x_arr[-1]), len(xs))
    return GridFunction(grid, np.asarray(vs))


def write_table(path: str | Path, f: GridFunction, value_name: str = "V") -> None:
    """Write ``x,V`` CSV at 17 significant digits (lossless round trip)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", value_name])
        for x, v in zip(f.grid.x, f.values):
            writer.writerow([f"{x:.17g}", f"{v:.17g}"])
