"""Deterministic SVG rendering and timeline sampling.

Identical scenes yield byte-identical documents: fixed element order
(background, data marks by id, x axis, y axis, legend, title), numeric
attributes rounded to three decimals.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

from .effects import OutOfRange, sample_scene_marks
from .layout import BACKGROUND, Scene

CHROME_LAYERS = ("xaxis", "yaxis", "legend", "title")


def fmt_num(value):
    """Fixed 3-decimal formatting with trailing zeros stripped."""
    v = round(float(value), 3)
    if v == 0:
        v = 0.0
    text = f"{v:.3f}".rstrip("0").rstrip(".")
    return text if text else "0"


def _sector_point(cx, cy, r, angle):
    return cx + r * math.sin(angle), cy - r * math.cos(angle)


def sector_path(geom):
    """Path data for an annular sector; the outer arc is always split in
    two so full circles render correctly."""
    cx, cy = geom["cx"], geom["cy"]
    r0, r1 = geom.get("r0", 0.0), geom["r1"]
    a0, a1 = geom["a0"], geom["a1"]
    amid = (a0 + a1) / 2
    x0, y0 = _sector_point(cx, cy, r1, a0)
    xm, ym = _sector_point(cx, cy, r1, amid)
    x1, y1 = _sector_point(cx, cy, r1, a1)
    parts = [
        f"M {fmt_num(x0)} {fmt_num(y0)}",
        f"A {fmt_num(r1)} {fmt_num(r1)} 0 0 1 {fmt_num(xm)} {fmt_num(ym)}",
        f"A {fmt_num(r1)} {fmt_num(r1)} 0 0 1 {fmt_num(x1)} {fmt_num(y1)}",
    ]
    if r0 > 1e-9:
        ix1, iy1 = _sector_point(cx, cy, r0, a1)
        ixm, iym = _sector_point(cx, cy, r0, amid)
        ix0, iy0 = _sector_point(cx, cy, r0, a0)
        parts.append(f"L {fmt_num(ix1)} {fmt_num(iy1)}")
        parts.append(f"A {fmt_num(r0)} {fmt_num(r0)} 0 0 0 {fmt_num(ixm)} {fmt_num(iym)}")
        parts.append(f"A {fmt_num(r0)} {fmt_num(r0)} 0 0 0 {fmt_num(ix0)} {fmt_num(iy0)}")
    else:
        parts.append(f"L {fmt_num(cx)} {fmt_num(cy)}")
    parts.append("Z")
    return " ".join(parts)


def _mark_element(mark):
    opacity = ""
    if mark.opacity < 1.0 - 1e-9:
        opacity = f' opacity="{fmt_num(mark.opacity)}"'
    ident = escape(mark.id, {'"': "&quot;"})
    g = mark.geom
    if mark.shape == "rect":
        rx = g.get("rx", 0.0)
        rx_attr = f' rx="{fmt_num(rx)}"' if rx > 1e-9 else ""
        return (
            f'<rect id="{ident}" x="{fmt_num(g["x"])}" y="{fmt_num(g["y"])}" '
            f'width="{fmt_num(max(g["w"], 0.0))}" height="{fmt_num(max(g["h"], 0.0))}"'
            f'{rx_attr} fill="{mark.fill}"{opacity}/>'
        )
    if mark.shape == "sector":
        return f'<path id="{ident}" d="{sector_path(g)}" fill="{mark.fill}"{opacity}/>'
    if mark.shape == "point":
        return (
            f'<circle id="{ident}" cx="{fmt_num(g["cx"])}" cy="{fmt_num(g["cy"])}" '
            f'r="{fmt_num(max(g["r"], 0.0))}" fill="{mark.fill}"{opacity}/>'
        )
    if mark.shape == "polyline":
        pts = " ".join(f"{fmt_num(x)},{fmt_num(y)}" for x, y in g["pts"])
        return (
            f'<polyline id="{ident}" points="{pts}" fill="none" '
            f'stroke="{mark.fill}" stroke-width="2"{opacity}/>'
        )
    if mark.shape == "segment":
        return (
            f'<line id="{ident}" x1="{fmt_num(g["x1"])}" y1="{fmt_num(g["y1"])}" '
            f'x2="{fmt_num(g["x2"])}" y2="{fmt_num(g["y2"])}" '
            f'stroke="{mark.fill}" stroke-width="1"{opacity}/>'
        )
    if mark.shape == "text":
        anchor = g.get("anchor", "start")
        return (
            f'<text id="{ident}" x="{fmt_num(g["x"])}" y="{fmt_num(g["y"])}" '
            f'font-family="sans-serif" font-size="{fmt_num(g.get("size", 11))}" '
            f'text-anchor="{anchor}" fill="{mark.fill}"{opacity}>'
            f'{escape(str(g.get("text", "")))}</text>'
        )
    raise ValueError(f"unknown mark shape '{mark.shape}'")


def render_svg(scene):
    """Render a scene graph to a deterministic SVG document."""
    canvas = scene.canvas
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{fmt_num(canvas.width)}" '
        f'height="{fmt_num(canvas.height)}" '
        f'viewBox="0 0 {fmt_num(canvas.width)} {fmt_num(canvas.height)}">',
        f'<rect id="background" x="0" y="0" width="{fmt_num(canvas.width)}" '
        f'height="{fmt_num(canvas.height)}" fill="{BACKGROUND}"/>',
        '<g id="marks">',
    ]
    for mark in sorted(scene.marks, key=lambda m: m.id):
        lines.append(_mark_element(mark))
    lines.append("</g>")
    for layer in CHROME_LAYERS:
        lines.append(f'<g id="{layer}">')
        for mark in sorted(
            (m for m in scene.chrome if m.layer == layer), key=lambda m: m.id
        ):
            lines.append(_mark_element(mark))
        lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def chart_type_at(timeline, t):
    for end, chart_type in timeline.chart_types:
        if t <= end + 1e-9:
            return chart_type
    if timeline.chart_types:
        return timeline.chart_types[-1][1]
    return "barV"


def sample_scene(timeline, t):
    """Scene graph at time t; holds the previous stage's end scene
    during standing time."""
    if t < -1e-9 or t > timeline.total + 1e-9:
        raise OutOfRange(f"t={t} outside [0, {timeline.total}]")
    t = min(max(t, 0.0), timeline.total)
    marks = sample_scene_marks(timeline, t)
    scene = Scene(canvas=timeline.canvas, chart_type=chart_type_at(timeline, t))
    for mark in marks:
        if mark.layer == "data":
            scene.marks.append(mark)
        else:
            scene.chrome.append(mark)
    return scene
