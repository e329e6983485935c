"""Static SVG overlays of scenes and reconstructed hulls.

Attribute values and text go through markupsafe, so labels taken from
scene files cannot break the markup.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence

import numpy as np
from markupsafe import escape

from pconduct.geometry.hull import HullPolygon
from pconduct.geometry.mesh import TriMesh

__all__ = ["render_attr", "render_overlay_svg"]

CANVAS = 480
PAD = 16

STYLES = {
    "domain": {"fill": "#fafafa", "stroke": "#444", "stroke-width": "1"},
    "painted": {"fill": "#f4b183", "stroke": "none"},
    "ball": {"fill": "#8fbc8f", "fill-opacity": "0.35", "stroke": "none"},
    "truth": {"fill": "none", "stroke": "#c00000", "stroke-width": "2"},
    "reconstructed": {"fill": "none", "stroke": "#1f4e79", "stroke-width": "2", "stroke-dasharray": "6 3"},
}


def render_attr(name: str, value) -> str:
    """Render one escaped attribute.

    Example:
        >>> render_attr("class", 'hull "a"')
        ' class="hull &#34;a&#34;"'
        >>> render_attr("hidden", None)
        ''
    """
    if value is None or value is False:
        return ""
    if value is True:
        return f" {name}"
    return f' {name}="{escape(value)}"'


def _attrs(**attrs) -> str:
    return "".join(render_attr(k.rstrip("_").replace("_", "-"), v) for k, v in attrs.items())


def _style(kind: str) -> str:
    return "".join(render_attr(k, v) for k, v in STYLES[kind].items())


class _Frame:
    """Maps domain coordinates onto the canvas, y pointing up."""

    def __init__(self, mesh: TriMesh):
        x0, y0, x1, y1 = mesh.domain.bounding_box()
        self.x0, self.y1 = x0, y1
        self.scale = (CANVAS - 2 * PAD) / max(x1 - x0, y1 - y0)

    def points(self, pts: np.ndarray) -> str:
        pts = np.atleast_2d(pts)
        xs = PAD + (pts[:, 0] - self.x0) * self.scale
        ys = PAD + (self.y1 - pts[:, 1]) * self.scale
        return " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))

    def point(self, pt) -> tuple[float, float]:
        x, y = self.points(np.asarray(pt, dtype=float)).split(",")
        return float(x), float(y)


def _polygon(frame: _Frame, pts: np.ndarray, kind: str, **extra) -> str:
    return f"<polygon{_attrs(points=frame.points(pts), class_=kind, **extra)}{_style(kind)}/>"


def render_overlay_svg(
    mesh: TriMesh,
    painted_cells: Iterable[int] = (),
    true_hull: HullPolygon | None = None,
    reconstructed: HullPolygon | None = None,
    marked_regions: Sequence = (),
    title: str = "",
) -> str:
    """Domain outline, painted cells, optional marked balls and both hulls as one SVG document."""
    frame = _Frame(mesh)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg"{_attrs(width=CANVAS, height=CANVAS, viewBox=f"0 0 {CANVAS} {CANVAS}")}>'
    ]
    if title:
        parts.append(f"<title>{escape(title)}</title>")

    domain = mesh.domain
    if domain.is_disk:
        cx, cy = frame.point(domain.center)
        parts.append(
            f"<circle{_attrs(cx=f'{cx:.2f}', cy=f'{cy:.2f}', r=f'{domain.radius * frame.scale:.2f}', class_='domain')}"
            f"{_style('domain')}/>"
        )
    else:
        parts.append(_polygon(frame, domain.outline(), "domain"))

    cells = np.asarray(list(painted_cells), dtype=np.int64)
    if cells.size:
        parts.append('<g class="painted">')
        parts += [_polygon(frame, mesh.vertices[mesh.triangles[c]], "painted") for c in cells]
        parts.append("</g>")

    if marked_regions:
        parts.append('<g class="marked">')
        for region in marked_regions:
            cx, cy = frame.point(region.center)
            parts.append(
                f"<circle{_attrs(cx=f'{cx:.2f}', cy=f'{cy:.2f}', r=f'{region.radius * frame.scale:.2f}', class_='ball', data_label=region.label or None)}"
                f"{_style('ball')}/>"
            )
        parts.append("</g>")

    for hull, kind in ((true_hull, "truth"), (reconstructed, "reconstructed")):
        if hull is not None and not hull.is_empty:
            parts.append(_polygon(frame, hull.vertices, kind))

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
