"""CSV artifacts: comma-separated, one header row, floats at full precision.

Every writer has a reader that parses its output back.
"""

from __future__ import annotations

import csv
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any, NamedTuple

import numpy as np

from pconduct.dnmap import Measurement
from pconduct.errors import ConfigError
from pconduct.geometry.hull import HullPolygon
from pconduct.geometry.mesh import TriMesh
from pconduct.psolver import BoundaryTrace

__all__ = [
    "SupportRow",
    "write_csv",
    "read_csv",
    "write_support_csv",
    "read_support_csv",
    "write_polygon_csv",
    "read_polygon_csv",
    "write_solution_csv",
    "write_trace_csv",
    "read_trace_csv",
    "write_measurements_csv",
    "read_measurements_csv",
    "write_wolff_csv",
    "write_indicator_csv",
    "write_verdicts_csv",
    "write_boundary_csv",
]


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ConfigError(f"CSV row {list(row)} does not match header {list(header)} in {path.name}.")
            writer.writerow([_cell(v) for v in row])
    return path


def read_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{Path(path).name} is empty; expected a header row.") from None
        return header, [row for row in reader if row]


def _expect(path: str | Path, header: list[str], expected: Sequence[str]) -> None:
    if list(header[: len(expected)]) != list(expected):
        raise ConfigError(f"{Path(path).name} has header {header}, expected {list(expected)}.")


# ==========================================
# Support functions and polygons
# ==========================================
class SupportRow(NamedTuple):
    rho: tuple[float, float]
    h: float
    status: str


SUPPORT_HEADER = ("rho_x", "rho_y", "h", "status", "bracket_low", "bracket_high")


def write_support_csv(path: str | Path, estimates) -> Path:
    """One row per direction of an enclosure run (h is nan without an estimate)."""
    return write_csv(
        path,
        SUPPORT_HEADER,
        ([e.rho[0], e.rho[1], e.h_est, e.status, e.bracket[0], e.bracket[1]] for e in estimates),
    )


def read_support_csv(path: str | Path) -> list[SupportRow]:
    header, rows = read_csv(path)
    _expect(path, header, SUPPORT_HEADER[:3])
    status_col = 3 if len(header) > 3 else None
    return [
        SupportRow((float(r[0]), float(r[1])), float(r[2]), r[status_col] if status_col else "ok")
        for r in rows
    ]


def write_polygon_csv(path: str | Path, hull: HullPolygon) -> Path:
    """Counterclockwise vertices, first vertex repeated last. Empty hulls give a bare header."""
    verts = hull.vertices
    closed = np.vstack([verts, verts[:1]]) if len(verts) else verts
    return write_csv(path, ("x", "y"), closed.tolist())


def read_polygon_csv(path: str | Path) -> np.ndarray:
    header, rows = read_csv(path)
    _expect(path, header, ("x", "y"))
    pts = np.array([[float(x), float(y)] for x, y in rows], dtype=float).reshape(-1, 2)
    if len(pts) > 1 and np.array_equal(pts[0], pts[-1]):
        pts = pts[:-1]
    return pts


# ==========================================
# Fields and traces
# ==========================================
def write_solution_csv(path: str | Path, mesh: TriMesh, u: np.ndarray) -> Path:
    rows = np.column_stack([mesh.vertices, np.asarray(u, dtype=float)])
    return write_csv(path, ("x", "y", "u"), rows.tolist())


def write_trace_csv(path: str | Path, mesh: TriMesh, trace: BoundaryTrace) -> Path:
    """Boundary vertex index, stored value and the trace log-scale (repeated per row)."""
    trace.check(mesh)
    return write_csv(
        path,
        ("vertex", "value", "log_scale"),
        ([int(v), float(x), trace.log_scale] for v, x in zip(mesh.boundary_vertices, trace.values)),
    )


def read_trace_csv(path: str | Path, mesh: TriMesh, label: str = "") -> BoundaryTrace:
    header, rows = read_csv(path)
    _expect(path, header, ("vertex", "value"))
    vertices = np.array([int(r[0]) for r in rows], dtype=np.int64)
    if not np.array_equal(vertices, mesh.boundary_vertices):
        raise ConfigError(
            f"{Path(path).name} lists {len(vertices)} boundary vertices that do not match "
            f"this mesh ({len(mesh.boundary_vertices)} boundary vertices)."
        )
    log_scale = float(rows[0][2]) if rows and len(header) > 2 else 0.0
    return BoundaryTrace(
        np.array([float(r[1]) for r in rows]), mesh.mesh_id, log_scale, label or Path(path).stem
    )


def write_measurements_csv(path: str | Path, measurements: Iterable[Measurement]) -> Path:
    return write_csv(
        path,
        ("trace_id", "pairing", "log_scale"),
        ([m.trace_id, m.value, m.log_scale] for m in measurements),
    )


def read_measurements_csv(path: str | Path) -> list[Measurement]:
    header, rows = read_csv(path)
    _expect(path, header, ("trace_id", "pairing", "log_scale"))
    return [Measurement(r[0], float(r[1]), float(r[2])) for r in rows]


def write_wolff_csv(path: str | Path, solution) -> Path:
    """One period of the profile: s, w, w'."""
    return write_csv(path, ("s", "w", "dw"), solution.samples.tolist())


# ==========================================
# Method traces
# ==========================================
def write_indicator_csv(path: str | Path, estimates) -> Path:
    """Every indicator sample seen during bisection, one row per (direction, t, tau)."""

    def rows():
        for e in estimates:
            for step in e.trace:
                curve = step.curve
                for tau, sign, log_abs in zip(curve.taus, curve.signs, curve.log_abs):
                    yield [e.rho[0], e.rho[1], step.t, tau, sign, log_abs, step.classification.value]

    return write_csv(path, ("rho_x", "rho_y", "t", "tau", "sign", "log_abs", "classification"), rows())


def write_verdicts_csv(path: str | Path, verdicts) -> Path:
    return write_csv(
        path,
        ("center_x", "center_y", "radius", "cells", "alpha", "direction", "marked", "witness", "gap"),
        (
            [
                v.region.center[0],
                v.region.center[1],
                v.region.radius,
                len(v.region.cells),
                v.alpha,
                v.direction,
                v.marked,
                v.witness or "",
                v.gap,
            ]
            for v in verdicts
        ),
    )


def write_boundary_csv(path: str | Path, estimates) -> Path:
    return write_csv(
        path,
        ("x", "y", "sigma_recovered", "iterations", "bracket_width", "status"),
        (
            [e.query.x0[0], e.query.x0[1], e.value, e.iterations, e.bracket_width, e.status]
            for e in estimates
        ),
    )

