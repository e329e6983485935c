"""SVG overlays."""

import xml.etree.ElementTree as ET

import numpy as np

from pconduct.geometry import (
    HullPolygon,
    convex_hull_of_cells,
    convex_hull_of_points,
    discrete_support_set,
)
from pconduct.monotonicity import ball_region
from pconduct.reports.svg import render_attr, render_overlay_svg

NS = {"svg": "http://www.w3.org/2000/svg"}


def _classes(root, tag):
    return [el.get("class") for el in root.iter(f"{{{NS['svg']}}}{tag}")]


def test_overlay_of_a_painted_scene(high_disk):
    mesh = high_disk.mesh
    cells = discrete_support_set(high_disk)
    truth = convex_hull_of_cells(mesh, cells)
    grown = convex_hull_of_points(0.5 + 1.1 * (truth.vertices - 0.5))
    svg = render_overlay_svg(mesh, cells, truth, grown, title="disk")
    root = ET.fromstring(svg)
    polygons = _classes(root, "polygon")
    assert polygons.count("painted") == len(cells)
    assert polygons.count("truth") == 1
    assert polygons.count("reconstructed") == 1
    assert polygons[0] == "domain"
    assert root.find("svg:title", NS).text == "disk"


def test_disk_domain_is_a_circle(disk_mesh):
    root = ET.fromstring(render_overlay_svg(disk_mesh))
    assert _classes(root, "circle") == ["domain"]
    assert _classes(root, "polygon") == []


def test_empty_hulls_are_not_drawn(square_mesh):
    root = ET.fromstring(render_overlay_svg(square_mesh, true_hull=HullPolygon.empty(), reconstructed=None))
    assert _classes(root, "polygon") == ["domain"]


def test_marked_balls_carry_their_labels(square_mesh):
    regions = [ball_region(square_mesh, (0.5, 0.5), 0.1, "ball-0007")]
    root = ET.fromstring(render_overlay_svg(square_mesh, marked_regions=regions))
    circle = next(root.iter(f"{{{NS['svg']}}}circle"))
    assert circle.get("data-label") == "ball-0007"
    assert circle.get("class") == "ball"


def test_title_is_escaped(square_mesh):
    svg = render_overlay_svg(square_mesh, title='sigma < 1 & "low"')
    assert "&lt;" in svg
    assert ET.fromstring(svg).find("svg:title", NS).text == 'sigma < 1 & "low"'


def test_render_attr_flags():
    assert render_attr("hidden", True) == " hidden"
    assert render_attr("hidden", False) == ""
    assert render_attr("r", 2.5) == ' r="2.5"'


def test_canvas_is_flipped_so_y_points_up(square_mesh):
    svg = render_overlay_svg(square_mesh)
    points = ET.fromstring(svg).find("svg:polygon", NS).get("points").split()
    xy = np.array([[float(c) for c in p.split(",")] for p in points])
    # the outline starts at the origin, drawn at the bottom left
    assert xy[0, 0] < xy[:, 0].mean()
    assert xy[0, 1] > xy[:, 1].mean()
