"""Equilibrium region maps over the (c_o * delta1**2, E1 - E2) plane.

The x axis sweeps the marginal cost with ``delta1``, ``lam`` and ``r`` held
fixed and reports ``c_o * delta1**2``. The y axis is the territory gap,
realised by lowering ``E2`` from the base config's fixed ``E1``.
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

from .analytic import classify_case, solve_two_route
from .core import AgentParams, GameConfig, Territories
from .exceptions import HeterogeneousCosts, InvalidRange, IoFailure, NotTwoRoutes

__all__ = [
    "SweepSpec",
    "Cell",
    "Boundary",
    "RegionGrid",
    "sweep",
    "extract_boundaries",
    "boundary_agreement",
    "export_regions",
    "THREADS_ENV",
]

THREADS_ENV = "STACKELROUTE_THREADS"

X_AXIS = "c_o"
Y_AXIS = "gap"
Y_AXIS_NOTE = "E1 - E2 with E1 fixed at the base value and E2 lowered"

LOW_VERTICAL = "r/(2lam)"
HIGH_VERTICAL = "r/lam"
LOW_FRONTIER = "gap=r/(2lam*delta1)"
MID_FRONTIER = "gap=(lam-1)c_o*delta1-(lam-2)r/(2lam*delta1)"
HIGH_FRONTIER = "gap=r/(2delta1)"


def _g(v: float) -> str:
    return f"{v:.9g}"


@dataclass(frozen=True)
class SweepSpec:
    base: GameConfig
    x_range: tuple[float, float] | None = None
    y_range: tuple[float, float] | None = None
    x_resolution: int = 200
    y_resolution: int = 200
    x_axis: str = X_AXIS
    y_axis: str = Y_AXIS

    def __post_init__(self) -> None:
        if self.base.n_routes != 2:
            raise NotTwoRoutes("region sweeps need a two-route base config")
        if not self.base.homogeneous:
            raise HeterogeneousCosts("region sweeps need a homogeneous base config")
        if self.x_axis != X_AXIS or self.y_axis != Y_AXIS:
            raise InvalidRange(f"supported axes are {X_AXIS!r} x {Y_AXIS!r}")
        if self.x_resolution < 2 or self.y_resolution < 2:
            raise InvalidRange("resolutions must be at least 2")
        x_range = self.x_range or self._default_x()
        y_range = self.y_range or self._default_y()
        for name, (lo, hi) in (("x", x_range), ("y", y_range)):
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise InvalidRange(f"{name} range must be finite with min < max, got {(lo, hi)}")
        if x_range[0] <= 0:
            raise InvalidRange("x range must stay positive (c_o > 0)")
        if y_range[0] <= 0 or y_range[1] >= self.base.territories.e1:
            raise InvalidRange("y range must lie inside (0, E1) so that E2 > 0 and E1 > E2")
        object.__setattr__(self, "x_range", (float(x_range[0]), float(x_range[1])))
        object.__setattr__(self, "y_range", (float(y_range[0]), float(y_range[1])))

    def _default_x(self) -> tuple[float, float]:
        hi = 2 * self.base.r / self.base.lam
        return hi / self.x_resolution, hi

    def _default_y(self) -> tuple[float, float]:
        e1 = self.base.territories.e1
        step = e1 / (self.y_resolution + 1)
        return step, e1 - step

    @property
    def x_values(self) -> np.ndarray:
        return np.linspace(*self.x_range, self.x_resolution)

    @property
    def y_values(self) -> np.ndarray:
        return np.linspace(*self.y_range, self.y_resolution)

    def config_at(self, x: float, y: float) -> GameConfig:
        b = self.base
        c_o = x / b.routes.deltas[0] ** 2
        return replace(
            b,
            agent1=AgentParams(b.agent1.beta, c_o),
            agent2=AgentParams(b.agent2.beta, c_o),
            territories=Territories(b.territories.e1, b.territories.e1 - y),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "base": self.base.to_dict(),
            "x_axis": "c_o*delta1^2",
            "y_axis": Y_AXIS_NOTE,
            "x_range": [float(_g(v)) for v in self.x_range],
            "y_range": [float(_g(v)) for v in self.y_range],
            "x_resolution": self.x_resolution,
            "y_resolution": self.y_resolution,
        }


@dataclass(frozen=True)
class Cell:
    case_id: int
    kinds: tuple[str, ...]
    routes: tuple[int, ...]

    @property
    def competitive(self) -> bool:
        return "Competition" in self.kinds

    def to_dict(self) -> dict[str, Any]:
        return {"case": self.case_id, "kinds": list(self.kinds), "routes": list(self.routes)}


@dataclass(frozen=True)
class Boundary:
    label: str
    orientation: str  # "vertical" or "frontier"
    source: str  # "empirical" or "analytic"
    points: tuple[tuple[float, float], ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "orientation": self.orientation,
            "source": self.source,
            "points": [[float(_g(x)), float(_g(y))] for x, y in self.points],
        }


@dataclass
class RegionGrid:
    """Cells indexed ``[row][col]``: rows follow the y axis, columns the x axis."""

    x_values: np.ndarray
    y_values: np.ndarray
    cells: list[list[Cell]]
    boundaries: list[Boundary] = field(default_factory=list)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.y_values), len(self.x_values)

    def case_ids(self) -> np.ndarray:
        return np.array([[c.case_id for c in row] for row in self.cells])

    def competitive(self) -> np.ndarray:
        return np.array([[c.competitive for c in row] for row in self.cells])


def classify_cell(config: GameConfig) -> Cell:
    eqs = solve_two_route(config)
    return Cell(
        case_id=classify_case(config).case_id,
        kinds=tuple(sorted({e.kind.value for e in eqs})),
        routes=tuple(sorted({e.profile.x1 for e in eqs})),
    )


def _threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1") or 1)
    return max(1, threads)


def sweep(spec: SweepSpec, threads: int | None = None) -> RegionGrid:
    """Classify every grid point by its equilibrium set and attach boundaries.

    Rows are evaluated independently (optionally on ``threads`` workers,
    default from ``STACKELROUTE_THREADS``); assembly is row-major.
    """
    xs, ys = spec.x_values, spec.y_values

    def row(y: float) -> list[Cell]:
        return [classify_cell(spec.config_at(x, y)) for x in xs]

    n = _threads(threads)
    if n == 1:
        cells = [row(y) for y in ys]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            cells = list(pool.map(row, ys))
    grid = RegionGrid(x_values=xs, y_values=ys, cells=cells)
    grid.boundaries = extract_boundaries(grid, spec)
    return grid


def _vertical_label(a: int, b: int) -> str:
    return LOW_VERTICAL if max(a, b) <= 3 and min(a, b) <= 2 else HIGH_VERTICAL


def _frontier_label(case_id: int) -> str:
    return {1: LOW_FRONTIER, 2: LOW_FRONTIER, 3: MID_FRONTIER, 5: MID_FRONTIER, 4: HIGH_FRONTIER}[case_id]


def _analytic_threshold(spec: SweepSpec, x: float, case_id: int) -> float:
    b = spec.base
    d1, lam, r = b.routes.deltas[0], b.lam, b.r
    if case_id in (1, 2):
        return r / (2 * lam * d1)
    if case_id in (3, 5):
        return (lam - 1) * (x / d1) - (lam - 2) * r / (2 * lam * d1)
    return r / (2 * d1)


def _empirical(grid: RegionGrid, spec: SweepSpec) -> list[Boundary]:
    xs, ys = grid.x_values, grid.y_values
    cases = grid.case_ids()
    comp = grid.competitive()
    out: list[Boundary] = []
    # A one-column boundary-case strip yields two adjacent changes; merge them.
    runs: list[tuple[str, list[int]]] = []
    for j in range(len(xs) - 1):
        a, b = int(cases[0, j]), int(cases[0, j + 1])
        if a == b:
            continue
        label = _vertical_label(a, b)
        if runs and runs[-1][0] == label and runs[-1][1][-1] == j - 1:
            runs[-1][1].append(j)
        else:
            runs.append((label, [j]))
    for label, cols in runs:
        xm = float(np.mean([0.5 * (xs[j] + xs[j + 1]) for j in cols]))
        out.append(Boundary(label, "vertical", "empirical", tuple((xm, float(y)) for y in ys)))
    frontier: dict[str, list[tuple[float, float]]] = {}
    for j, x in enumerate(xs):
        col = comp[:, j]
        if col.all() or not col.any():
            continue
        k = int(np.argmax(col))
        if k == 0:
            continue
        label = _frontier_label(int(cases[k, j]))
        frontier.setdefault(label, []).append((float(x), 0.5 * float(ys[k - 1] + ys[k])))
    for label in (LOW_FRONTIER, MID_FRONTIER, HIGH_FRONTIER):
        if label in frontier:
            out.append(Boundary(label, "frontier", "empirical", tuple(frontier[label])))
    return out


def _analytic(spec: SweepSpec) -> list[Boundary]:
    b = spec.base
    lo, hi = b.r / (2 * b.lam), b.r / b.lam
    (x0, x1), (y0, y1) = spec.x_range, spec.y_range
    out: list[Boundary] = []
    for label, v in ((LOW_VERTICAL, lo), (HIGH_VERTICAL, hi)):
        if x0 <= v <= x1:
            out.append(Boundary(label, "vertical", "analytic", ((v, y0), (v, y1))))
    strips = ((LOW_FRONTIER, 1, x0, min(x1, lo)), (MID_FRONTIER, 3, max(x0, lo), min(x1, hi)),
              (HIGH_FRONTIER, 4, max(x0, hi), x1))
    for label, case_id, a, c in strips:
        if a >= c:
            continue
        ya, yc = _analytic_threshold(spec, a, case_id), _analytic_threshold(spec, c, case_id)
        if max(ya, yc) < y0 or min(ya, yc) > y1:
            continue
        out.append(Boundary(label, "frontier", "analytic", ((a, ya), (c, yc))))
    return out


def extract_boundaries(grid: RegionGrid, spec: SweepSpec) -> list[Boundary]:
    """Empirical classification-change curves followed by the closed-form curves inside the window."""
    return _empirical(grid, spec) + _analytic(spec)


def boundary_agreement(grid: RegionGrid, spec: SweepSpec) -> dict[str, float]:
    """Largest empirical-vs-analytic distance, per orientation, in units of one cell."""
    xs, ys = grid.x_values, grid.y_values
    dx, dy = xs[1] - xs[0], ys[1] - ys[0]
    b = spec.base
    verticals = [b.r / (2 * b.lam), b.r / b.lam]
    worst = {"vertical": 0.0, "frontier": 0.0}
    cases = grid.case_ids()
    col_of = {float(x): j for j, x in enumerate(xs)}
    for bd in grid.boundaries:
        if bd.source != "empirical":
            continue
        if bd.orientation == "vertical":
            xm = bd.points[0][0]
            worst["vertical"] = max(worst["vertical"], min(abs(xm - v) for v in verticals) / dx)
        else:
            for x, y in bd.points:
                case_id = int(cases[0, col_of[x]])
                worst["frontier"] = max(worst["frontier"], abs(y - _analytic_threshold(spec, x, case_id)) / dy)
    return {k: float(v) for k, v in worst.items()}


def _csv_text(grid: RegionGrid) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x_value", "y_value", "case", "kind", "route"])
    for y, row in zip(grid.y_values, grid.cells):
        for x, cell in zip(grid.x_values, row):
            writer.writerow(
                [_g(x), _g(y), cell.case_id, "|".join(cell.kinds), "|".join(str(r) for r in cell.routes)]
            )
    return buf.getvalue()


def _json_text(grid: RegionGrid, spec: SweepSpec | None) -> str:
    doc = {
        "spec": None if spec is None else spec.to_dict(),
        "x_values": [float(_g(v)) for v in grid.x_values],
        "y_values": [float(_g(v)) for v in grid.y_values],
        "cells": [[c.to_dict() for c in row] for row in grid.cells],
        "boundaries": [b.to_dict() for b in grid.boundaries],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def export_regions(grid: RegionGrid, format: str, path: str | os.PathLike, spec: SweepSpec | None = None) -> None:
    """Write ``grid`` as CSV or JSON; output is byte-identical for identical grids."""
    fmt = format.lower()
    if fmt == "csv":
        text = _csv_text(grid)
    elif fmt == "json":
        text = _json_text(grid, spec)
    else:
        raise ValueError(f"unknown export format {format!r}; use 'csv' or 'json'")
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
