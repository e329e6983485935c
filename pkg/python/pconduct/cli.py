"""Command-line entry point: ``pconduct <method> --scene FILE [options]``."""

from __future__ import annotations

import logging
from collections.abc import Callable
from pathlib import Path
from typing import Any

import click
import msgspec

from pconduct.config.defaults import resolve_defaults
from pconduct.config.loader import convert, load
from pconduct.config.schema import RunConfig
from pconduct.errors import ConfigError, PConductError
from pconduct.run import RunReport, run

logger = logging.getLogger(__name__)


def _floats(ctx: click.Context, param: click.Parameter, value: str | None) -> tuple[float, ...] | None:
    if value is None:
        return None
    try:
        numbers = tuple(float(part) for part in value.replace(" ", "").split(",") if part)
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, e.g. 4,8,12,16 (got {value!r})")
    if not numbers:
        raise click.BadParameter("needs at least one number")
    return numbers


def _options(*decorators: Callable) -> Callable:
    def apply(fn: Callable) -> Callable:
        for decorator in reversed(decorators):
            fn = decorator(fn)
        return fn

    return apply


scene_option = click.option(
    "--scene", type=click.Path(exists=True, dir_okay=False), help="Scene file (.toml, .json, .yaml)."
)
common_options = _options(
    click.option("--out", type=click.Path(file_okay=False), help="Output directory."),
    click.option("--seed", type=int, help="Seed for the random dictionary traces."),
    click.option("--tolerance", type=float, help="Bisection tolerance."),
    click.option("--svg/--no-svg", default=None, help="Also write an SVG overlay."),
)
enclosure_options = _options(
    click.option("--directions", type=int, help="Number of probe directions (at least 8)."),
    click.option(
        "--tau-schedule", callback=_floats, help="tau multipliers of 1/extent(rho), e.g. 4,8,12,16,20,24."
    ),
)
monotonicity_options = _options(
    click.option("--alpha-schedule", callback=_floats, help="Contrasts to test, e.g. 0.125,0.25,0.5,1."),
    click.option("--ball-stride", type=int, help="Ball-grid spacing in cell widths."),
    click.option("--ball-radius", type=float, help="Ball radius in cell widths."),
    click.option("--sign", type=click.Choice(["plus", "minus", "auto"]), help="Which monotonicity test to run."),
)


def _execute(ctx: click.Context, method: str, flags: dict[str, Any]) -> RunReport:
    """Layer defaults, build the RunConfig and run it; errors become exit codes."""
    try:
        scene = flags.pop("scene", None)
        scene_table = None
        if scene is not None:
            raw = load(scene)
            scene_table = raw.get("defaults") if isinstance(raw, dict) else None
        values = msgspec.structs.asdict(resolve_defaults(scene_table=scene_table))
        values.update({k: v for k, v in flags.items() if v is not None and v != ()})
        workers = ctx.obj.get("workers") if ctx.obj else None
        if workers is not None:
            values["workers"] = workers
        payload = {"method": method, "scene": scene, **values}
        config = convert({k.replace("_", "-"): v for k, v in payload.items()}, RunConfig, "the command line")
        logger.debug("resolved run config: %s", config)
        report = run(config)
    except PConductError as exc:
        click.echo(f"error [{exc.category}]: {exc}", err=True)
        ctx.exit(exc.exit_code)
    except FileNotFoundError as exc:
        click.echo(f"error [config]: {exc}", err=True)
        ctx.exit(ConfigError.exit_code)

    result = report.summary.get("result", {})
    verdict = result.get("verdict") if isinstance(result, dict) else None
    click.echo(f"{method}: {report.summary['status']}" + (f" ({verdict})" if verdict else ""))
    click.echo(f"wrote {len(report.artifacts)} files to {Path(config.out)}")
    return report


# ==========================================
# Commands
# ==========================================
@click.group()
@click.option("-v", "--verbose", count=True, help="More logging (-vv for solver iterations).")
@click.option("-q", "--quiet", is_flag=True, help="Only warnings and errors.")
@click.option("--workers", type=int, default=None, help="Threads for independent directions and points.")
@click.version_option(package_name="pconduct")
@click.pass_context
def main(ctx: click.Context, verbose: int, quiet: bool, workers: int | None) -> None:
    """Inclusion detection and boundary recovery for the p-conductivity equation."""
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(verbose, 2)]
    if quiet:
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    ctx.ensure_object(dict)
    ctx.obj["workers"] = workers


@main.command()
@scene_option
@common_options
@click.option("--trace", type=click.Choice(["x", "y", "xy"]), help="Affine boundary data.")
@click.option(
    "--trace-file",
    type=click.Path(exists=True, dir_okay=False),
    help="Boundary trace CSV (vertex,value[,log_scale]); overrides --trace.",
)
@click.pass_context
def solve(ctx: click.Context, **flags: Any) -> None:
    """Solve the forward problem for affine or recorded boundary data."""
    _execute(ctx, "solve", flags)


@main.command()
@scene_option
@common_options
@click.option("--p", "p", type=float, help="Exponent, when no scene is given.")
@click.pass_context
def wolff(ctx: click.Context, **flags: Any) -> None:
    """Integrate one period of the Wolff profile."""
    _execute(ctx, "wolff", flags)


@main.command()
@scene_option
@common_options
@enclosure_options
@click.pass_context
def enclosure(ctx: click.Context, **flags: Any) -> None:
    """Reconstruct the inclusion hull from indicator blow-up."""
    _execute(ctx, "enclosure", flags)


@main.command()
@scene_option
@common_options
@monotonicity_options
@click.pass_context
def monotonicity(ctx: click.Context, **flags: Any) -> None:
    """Reconstruct the inclusion hull from marked test balls."""
    _execute(ctx, "monotonicity", flags)


@main.command()
@scene_option
@common_options
@click.option("--tau-schedule", callback=_floats, help="tau multipliers of 1/extent(rho).")
@click.option("--point", "points", type=(float, float), multiple=True, help="Boundary point X Y (repeatable).")
@click.option("--gamma-bracket", type=(float, float), default=None, help="Initial gamma bracket LOW HIGH.")
@click.pass_context
def boundary(ctx: click.Context, **flags: Any) -> None:
    """Recover sigma at boundary points."""
    flags["points"] = tuple(flags["points"])
    _execute(ctx, "boundary", flags)


@main.command()
@scene_option
@common_options
@enclosure_options
@monotonicity_options
@click.pass_context
def compare(ctx: click.Context, **flags: Any) -> None:
    """Run both reconstructions and compare their hulls."""
    _execute(ctx, "compare", flags)


@main.command("run")
@click.argument("config_file", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def run_file(ctx: click.Context, config_file: str) -> None:
    """Run a pipeline described by a run file (.toml, .json, .yaml)."""
    try:
        raw = load(config_file)
    except PConductError as exc:
        click.echo(f"error [{exc.category}]: {exc}", err=True)
        ctx.exit(exc.exit_code)
    if not isinstance(raw, dict) or "method" not in raw:
        click.echo("error [config]: a run file needs a top-level `method` key.", err=True)
        ctx.exit(ConfigError.exit_code)
    flags = {k.replace("-", "_"): v for k, v in raw.items()}
    method = flags.pop("method")
    _execute(ctx, method, flags)


if __name__ == "__main__":
    main()
