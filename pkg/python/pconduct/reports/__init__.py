"""CSV, SVG and JSON artifacts written by the command line."""

from pconduct.reports.csv import (
    SupportRow,
    read_csv,
    read_measurements_csv,
    read_polygon_csv,
    read_support_csv,
    read_trace_csv,
    write_boundary_csv,
    write_csv,
    write_indicator_csv,
    write_measurements_csv,
    write_polygon_csv,
    write_solution_csv,
    write_support_csv,
    write_trace_csv,
    write_verdicts_csv,
    write_wolff_csv,
)
from pconduct.reports.summary import read_summary, write_summary
from pconduct.reports.svg import render_overlay_svg

__all__ = [
    # CSV
    "write_csv",
    "read_csv",
    "SupportRow",
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
    # SVG
    "render_overlay_svg",
    # Summaries
    "write_summary",
    "read_summary",
]
