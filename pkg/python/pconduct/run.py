"""Pipeline orchestration: one RunConfig in, artifacts and a summary out."""

from __future__ import annotations

import logging
import math
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from pconduct.boundary import recover_boundary
from pconduct.config.scene import LoadedScene, load_scene
from pconduct.config.schema import RunConfig
from pconduct.dnmap import DnOracle, default_dictionary
from pconduct.enclosure import DEFAULT_TAU_MULTIPLIERS, HullReconstruction, reconstruct_hull
from pconduct.errors import PConductError
from pconduct.geometry.hull import HullPolygon, convex_hull_of_cells, hausdorff_distance
from pconduct.geometry.scene import discrete_support_set
from pconduct.monotonicity import ScanResult, ball_grid, scan
from pconduct.psolver import BoundaryTrace, pairing_from_solutions, solve_dirichlet
from pconduct.reports.csv import (
    read_trace_csv,
    write_boundary_csv,
    write_indicator_csv,
    write_measurements_csv,
    write_polygon_csv,
    write_solution_csv,
    write_support_csv,
    write_trace_csv,
    write_verdicts_csv,
    write_wolff_csv,
)
from pconduct.reports.summary import write_summary
from pconduct.reports.svg import render_overlay_svg
from pconduct.wolff import WolffSolution, integrate_wolff

__all__ = ["RunReport", "run", "METHODS"]

logger = logging.getLogger(__name__)


@dataclass
class RunReport:
    """Outcome of one run: summary mapping, written files and the exit code."""

    method: str
    summary: dict[str, Any]
    artifacts: list[Path] = field(default_factory=list)
    exit_code: int = 0

    @property
    def summary_path(self) -> Path | None:
        return next((p for p in self.artifacts if p.name == "summary.json"), None)


@dataclass
class _Context:
    config: RunConfig
    out: Path
    loaded: LoadedScene | None
    artifacts: list[Path] = field(default_factory=list)
    _wolff: WolffSolution | None = None
    _oracles: tuple[DnOracle, DnOracle] | None = None

    @property
    def p(self) -> float:
        if self.config.p is not None and (self.loaded is None or self.config.method == "wolff"):
            return float(self.config.p)
        return self.loaded.scene.p

    @property
    def mesh(self):
        return self.loaded.scene.mesh

    def wolff(self) -> WolffSolution:
        if self._wolff is None:
            self._wolff = integrate_wolff(self.p)
        return self._wolff

    def oracles(self) -> tuple[DnOracle, DnOracle]:
        if self._oracles is None:
            scene, solver = self.loaded.scene, self.loaded.solver
            self._oracles = (
                DnOracle.from_scene(scene, solver, name="sigma"),
                DnOracle.reference(scene.mesh, solver),
            )
        return self._oracles

    def write(self, path: Path) -> Path:
        self.artifacts.append(path)
        return path

    def truth_hull(self) -> HullPolygon:
        cells = discrete_support_set(self.loaded.scene)
        return convex_hull_of_cells(self.mesh, cells) if cells.size else HullPolygon.empty()

    def solves(self) -> dict[str, int]:
        if self._oracles is None:
            return {}
        sigma, one = self._oracles
        return {"sigma": sigma.solves, "reference": one.solves}


# ==========================================
# Pipelines
# ==========================================
_AFFINE: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "x": lambda pts: pts[:, 0],
    "y": lambda pts: pts[:, 1],
    "xy": lambda pts: pts[:, 0] + pts[:, 1],
}


def _run_solve(ctx: _Context) -> dict[str, Any]:
    scene, solver = ctx.loaded.scene, ctx.loaded.solver
    if ctx.config.trace_file is not None:
        f = read_trace_csv(ctx.config.trace_file, ctx.mesh)
    else:
        f = BoundaryTrace.from_function(ctx.mesh, _AFFINE[ctx.config.trace], f"affine-{ctx.config.trace}")
    solution = solve_dirichlet(ctx.mesh, scene.sigma, f, solver)
    pairing = pairing_from_solutions(ctx.mesh, scene.sigma, solution.values, solution.values, scene.p, solver.epsilon)
    # on stored values; the physical pairing is pairing * exp(p * log_scale)
    ctx.write(write_solution_csv(ctx.out / "solution.csv", ctx.mesh, solution.values))
    ctx.write(write_trace_csv(ctx.out / "trace.csv", ctx.mesh, f))
    return {
        "trace": f.label,
        "energy": solution.energy,
        "pairing": pairing,
        "log_scale": f.log_scale,
        "iterations": solution.iterations,
        "residual": solution.residual,
        "vertices": ctx.mesh.n_vertices,
        "cells": ctx.mesh.n_cells,
    }


def _run_wolff(ctx: _Context) -> dict[str, Any]:
    sol = ctx.wolff()
    ctx.write(write_wolff_csv(ctx.out / "wolff.csv", sol))
    return {
        "p": sol.p,
        "lambda_p": sol.lambda_p,
        "c_emp": sol.c_emp,
        "C_emp": sol.C_emp,
        "mean": sol.mean,
        "closure_error": sol.closure_error,
    }


def _enclosure(ctx: _Context) -> HullReconstruction:
    config = ctx.config
    oracle_sigma, oracle_one = ctx.oracles()
    return reconstruct_hull(
        oracle_sigma,
        oracle_one,
        ctx.wolff(),
        config.directions,
        config.tolerance,
        workers=config.workers,
        tau_multipliers=config.tau_schedule or DEFAULT_TAU_MULTIPLIERS,
    )


def _monotonicity(ctx: _Context) -> ScanResult:
    config = ctx.config
    oracle_sigma, oracle_one = ctx.oracles()
    regions = ball_grid(ctx.mesh, config.ball_stride, config.ball_radius * ctx.mesh.cell_width)
    dictionary = default_dictionary(ctx.mesh, ctx.wolff(), config.seed)
    return scan(oracle_sigma, oracle_one, regions, config.alpha_schedule, dictionary, config.sign)


def _svg(ctx: _Context, name: str, hull: HullPolygon, marked=(), title: str = "") -> None:
    if not ctx.config.svg:
        return
    svg = render_overlay_svg(
        ctx.mesh,
        discrete_support_set(ctx.loaded.scene),
        ctx.truth_hull(),
        hull,
        marked,
        title,
    )
    path = ctx.out / name
    path.write_text(svg)
    ctx.write(path)


def _distance_to_truth(ctx: _Context, hull: HullPolygon) -> float | None:
    truth = ctx.truth_hull()
    if truth.is_empty and hull.is_empty:
        return 0.0
    distance = hausdorff_distance(hull, truth)
    return distance if math.isfinite(distance) else None


def _run_enclosure(ctx: _Context) -> dict[str, Any]:
    result = _enclosure(ctx)
    ctx.write(write_support_csv(ctx.out / "support.csv", result.estimates))
    ctx.write(write_polygon_csv(ctx.out / "hull.csv", result.hull))
    ctx.write(write_indicator_csv(ctx.out / "indicator.csv", result.estimates))
    _svg(ctx, "overlay.svg", result.hull, title="enclosure")
    return {
        "verdict": result.sign_class.value,
        "statuses": result.statuses,
        "sign_counts": result.sign_counts,
        "hull_vertices": len(result.hull.vertices),
        "hull_area": result.hull.area,
        "distance_to_truth": _distance_to_truth(ctx, result.hull),
        "directions": [
            {"rho": list(e.rho), "h": e.h_est, "status": e.status, "steps": len(e.trace)}
            for e in result.estimates
        ],
    }


def _run_monotonicity(ctx: _Context) -> dict[str, Any]:
    result = _monotonicity(ctx)
    oracle_sigma, _ = ctx.oracles()
    ctx.write(write_verdicts_csv(ctx.out / "verdicts.csv", result.verdicts))
    ctx.write(write_polygon_csv(ctx.out / "hull.csv", result.hull))
    ctx.write(write_measurements_csv(ctx.out / "measurements.csv", oracle_sigma.measurements()))
    _svg(ctx, "overlay.svg", result.hull, [v.region for v in result.marked], title="monotonicity")
    return {
        "verdict": result.sign_class.value,
        "direction": result.direction,
        "regions": len(result.verdicts),
        "marked": len(result.marked),
        "rejected": len(result.verdicts) - len(result.marked),
        "resolution_limited": sum(v.tied for v in result.marked),
        "hull_vertices": len(result.hull.vertices),
        "hull_area": result.hull.area,
        "distance_to_truth": _distance_to_truth(ctx, result.hull),
    }


def _run_boundary(ctx: _Context) -> dict[str, Any]:
    config = ctx.config
    oracle_sigma, oracle_one = ctx.oracles()
    estimates = recover_boundary(
        oracle_sigma,
        oracle_one,
        ctx.wolff(),
        config.points,
        config.tolerance or 5e-3,
        gamma_bracket=config.gamma_bracket,
        workers=config.workers,
        tau_multipliers=config.tau_schedule or DEFAULT_TAU_MULTIPLIERS,
    )
    ctx.write(write_boundary_csv(ctx.out / "boundary.csv", estimates))
    return {
        "points": [
            {
                "x0": list(e.query.x0),
                "sigma": e.value,
                "iterations": e.iterations,
                "bracket_width": e.bracket_width,
                "status": e.status,
            }
            for e in estimates
        ],
    }


def _run_compare(ctx: _Context) -> dict[str, Any]:
    enclosure = _enclosure(ctx)
    monotonicity = _monotonicity(ctx)
    truth = ctx.truth_hull()
    ctx.write(write_polygon_csv(ctx.out / "enclosure_hull.csv", enclosure.hull))
    ctx.write(write_polygon_csv(ctx.out / "monotonicity_hull.csv", monotonicity.hull))
    ctx.write(write_polygon_csv(ctx.out / "truth_hull.csv", truth))
    width = ctx.mesh.cell_width
    between = hausdorff_distance(enclosure.hull, monotonicity.hull)
    bounds = {
        "enclosure": 2.0 * width,
        "monotonicity": 2.0 * width + ctx.config.ball_radius * width,
    }
    return {
        "verdicts": {
            "enclosure": enclosure.sign_class.value,
            "monotonicity": monotonicity.sign_class.value,
        },
        "hausdorff_between": between if math.isfinite(between) else None,
        "resolution_bounds": bounds,
        "within_bounds": bool(between <= sum(bounds.values())) if math.isfinite(between) else False,
        "distance_to_truth": {
            "enclosure": _distance_to_truth(ctx, enclosure.hull),
            "monotonicity": _distance_to_truth(ctx, monotonicity.hull),
        },
    }


METHODS: dict[str, Callable[[_Context], dict[str, Any]]] = {
    "solve": _run_solve,
    "wolff": _run_wolff,
    "enclosure": _run_enclosure,
    "monotonicity": _run_monotonicity,
    "boundary": _run_boundary,
    "compare": _run_compare,
}


def run(config: RunConfig) -> RunReport:
    """Execute one pipeline and write its artifacts plus ``summary.json`` to ``config.out``.

    Errors from the pipeline propagate as :class:`PConductError`; the summary
    is still written, with the error category, before re-raising.
    """
    started = time.perf_counter()
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    loaded = load_scene(config.scene) if config.scene is not None else None
    ctx = _Context(config, out, loaded)

    summary: dict[str, Any] = {
        "method": config.method,
        "scene": config.scene,
        "p": ctx.p,
        "seed": config.seed,
    }
    logger.info("running %s on %s", config.method, config.scene or f"p={ctx.p:g}")
    try:
        summary["result"] = METHODS[config.method](ctx)
        summary["status"] = "ok"
    except PConductError as exc:
        summary["status"] = exc.category
        summary["error"] = str(exc)
        raise
    finally:
        summary["solves"] = ctx.solves()
        summary["wall_time"] = time.perf_counter() - started
        summary["artifacts"] = sorted(p.name for p in ctx.artifacts)
        ctx.artifacts.append(write_summary(out / "summary.json", summary))
    return RunReport(config.method, summary, ctx.artifacts)
