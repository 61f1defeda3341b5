"""Static mark geometry for every supported chart type.

Produces a scene graph: positioned data marks plus axis/legend/title
chrome. Mark ids are derived from tree paths so the same data element
gets the same id in any chart drawn over it, which is what animation
correspondence is built on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .tree import path_id

#: Fixed categorical palette; color index = legend entry rank.
PALETTE = (
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc949", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
)

BACKGROUND = "#ffffff"
AXIS_COLOR = "#444444"
TEXT_COLOR = "#333333"

BAND_FILL = 0.8  # fraction of each band occupied by bars
POINT_RADIUS = 4.0
LINE_POINT_RADIUS = 3.0


class NegativeValueInPie(ValueError):
    pass


@dataclass(frozen=True)
class Canvas:
    width: float = 640.0
    height: float = 400.0
    margin_top: float = 48.0
    margin_right: float = 24.0
    margin_bottom: float = 40.0
    margin_left: float = 56.0

    @property
    def plot_x(self):
        return self.margin_left

    @property
    def plot_y(self):
        return self.margin_top

    @property
    def plot_w(self):
        return self.width - self.margin_left - self.margin_right

    @property
    def plot_h(self):
        return self.height - self.margin_top - self.margin_bottom


DEFAULT_CANVAS = Canvas()


@dataclass(frozen=True)
class ChartStyle:
    """The visual half of a chart spec; all the layout needs besides the tree."""

    chart_type: str
    show_x_axis: bool = True
    show_y_axis: bool = True
    show_legend: bool = True
    title: str = ""


def style_from_spec(spec):
    return ChartStyle(
        chart_type=spec.chart_type,
        show_x_axis=spec.show_x_axis,
        show_y_axis=spec.show_y_axis,
        show_legend=spec.show_legend,
        title=spec.title,
    )


@dataclass
class Mark:
    id: str
    shape: str  # rect | sector | point | polyline | segment | text
    geom: dict
    fill: str
    opacity: float = 1.0
    layer: str = "data"

    def clone(self):
        return Mark(self.id, self.shape, dict(self.geom), self.fill, self.opacity, self.layer)


@dataclass
class Scene:
    canvas: Canvas
    chart_type: str
    marks: list = field(default_factory=list)
    chrome: list = field(default_factory=list)
    axes: dict = field(default_factory=dict)
    legend_entries: list = field(default_factory=list)
    legend_visible: bool = True
    title: str = ""

    def all_marks(self):
        return list(self.marks) + list(self.chrome)

    def mark_by_id(self, mark_id):
        for m in self.all_marks():
            if m.id == mark_id:
                return m
        return None


def nice_ceil(value):
    """Smallest 1/2/5 x 10^k value >= value (1.0 for values <= 0)."""
    if value <= 0:
        return 1.0
    exponent = math.floor(math.log10(value))
    for mult in (1.0, 2.0, 5.0, 10.0):
        candidate = mult * 10.0 ** exponent
        if value <= candidate * (1.0 + 1e-12):
            return candidate
    return 10.0 ** (exponent + 1)


def legend_entries(tree, multi_measure_as_entries=True):
    """Ordered legend entry labels for a tree.

    Series labels (lowest-dimension values) list the chart's series;
    with several measures the measure names become the entries instead.
    """
    measure_level = tree.measure_level()
    measure_names = []
    for _, node in tree.nodes_at(measure_level):
        if node.label not in measure_names:
            measure_names.append(node.label)
    if multi_measure_as_entries and len(measure_names) > 1:
        return list(measure_names)
    lowest = tree.lowest_dimension_level()
    if lowest is None:
        return []
    seen = []
    for _, node in tree.nodes_at(lowest):
        if node.label not in seen:
            seen.append(node.label)
    return seen


def _entry_color(entries):
    index = {label: i for i, label in enumerate(entries)}

    def color(label):
        if label not in index:
            return PALETTE[0]
        return PALETTE[index[label] % len(PALETTE)]

    return color


def _max_leaf(tree, measure=None):
    best = 0.0
    for path, node in tree.leaves():
        if measure is not None:
            mlevel = tree.measure_level()
            if mlevel is not None and len(path) > mlevel - 1 and path[mlevel - 1] != measure:
                continue
        if node.value is not None:
            best = max(best, node.value)
    return best


def _x_slots(tree):
    """Ordered leaf slots along the band axis: tuples of dimension labels."""
    dims = tree.dimension_levels()
    if not dims:
        mlevel = tree.measure_level()
        return [(node.label,) for _, node in tree.nodes_at(mlevel)] or [("all",)]
    slots = []
    for path, node in tree.leaves():
        key = tuple(path[i - 1] for i in dims)
        mlevel = tree.measure_level()
        if mlevel is not None and len(tree.levels) >= mlevel and len(path) >= mlevel:
            key = key + (path[mlevel - 1],) if _measure_count(tree) > 1 else key
        if key not in slots:
            slots.append(key)
    return slots


def _measure_count(tree):
    mlevel = tree.measure_level()
    names = set()
    for _, node in tree.nodes_at(mlevel):
        names.add(node.label)
    return len(names)


def axis_domain(tree, style, axis):
    """Axis domain descriptor used for rescale detection and tick layout."""
    chart = style.chart_type
    if chart == "pie":
        return {"kind": "none"}
    if chart in ("barV", "barH", "line"):
        band_axis = "x" if chart in ("barV", "line") else "y"
        if axis == band_axis:
            if chart == "line":
                dims = tree.dimension_levels()
                labels = []
                if dims:
                    for _, node in tree.nodes_at(dims[0]):
                        if node.label not in labels:
                            labels.append(node.label)
                return {"kind": "categorical", "labels": labels}
            return {"kind": "categorical",
                    "labels": ["|".join(slot) for slot in _x_slots(tree)]}
        return {"kind": "numeric", "max": nice_ceil(_max_leaf(tree))}
    if chart == "scatter":
        dims = tree.dimension_levels()
        measures = _measure_names(tree)
        if axis == "x":
            if dims:
                labels = []
                for _, node in tree.nodes_at(dims[0]):
                    if node.label not in labels:
                        labels.append(node.label)
                return {"kind": "categorical", "labels": labels}
            return {"kind": "numeric", "max": nice_ceil(_scatter_axis_max(tree, 0))}
        if dims or len(measures) == 1:
            return {"kind": "numeric", "max": nice_ceil(_scatter_axis_max(tree, -1))}
        return {"kind": "numeric", "max": nice_ceil(_scatter_axis_max(tree, 1))}
    return {"kind": "none"}


def _measure_names(tree):
    names = []
    for _, node in tree.nodes_at(tree.measure_level()):
        if node.label not in names:
            names.append(node.label)
    return names


def _scatter_axis_max(tree, measure_index):
    names = _measure_names(tree)
    name = names[measure_index] if names else None
    best = 0.0
    mlevel = tree.measure_level()
    for path, node in tree.leaves():
        if name is not None and path[mlevel - 1] != name:
            continue
        if node.value is not None:
            best = max(best, node.value)
    return best


def _leaf_records(tree):
    """One record per leaf: (path, id, labels by level kind, value)."""
    records = []
    for path, node in tree.leaves():
        dims = tuple(
            path[i - 1] for i in tree.dimension_levels()
        )
        mlevel = tree.measure_level()
        measure = path[mlevel - 1] if mlevel is not None and len(path) >= mlevel else None
        records.append({
            "path": path,
            "id": path_id(tree, path),
            "dims": dims,
            "measure": measure,
            "value": node.value if node.value is not None else 0.0,
        })
    return records


def _series_label(tree, record):
    lowest = tree.lowest_dimension_level()
    if lowest is None:
        return record["measure"]
    return record["path"][lowest - 1]


def _color_label(tree, record, entries):
    if len(_measure_names(tree)) > 1:
        return record["measure"]
    return _series_label(tree, record)


def _band_layout(labels, start, extent):
    n = max(len(labels), 1)
    band = extent / n
    return {label: start + i * band for i, label in enumerate(labels)}, band


def layout_chart(tree, style, canvas=DEFAULT_CANVAS):
    """Compute the full scene graph for one chart state."""
    chart = style.chart_type
    entries = legend_entries(tree)
    color_of = _entry_color(entries)
    scene = Scene(
        canvas=canvas,
        chart_type=chart,
        axes={
            "x": dict(axis_domain(tree, style, "x"), visible=style.show_x_axis),
            "y": dict(axis_domain(tree, style, "y"), visible=style.show_y_axis),
        },
        legend_entries=list(entries),
        legend_visible=style.show_legend and bool(entries),
        title=style.title,
    )
    single_series = len(entries) <= 1

    def fill_for(record):
        if single_series:
            return PALETTE[0]
        return color_of(_color_label(tree, record, entries))

    builder = {
        "barV": _layout_bars_v,
        "barH": _layout_bars_h,
        "line": _layout_line,
        "pie": _layout_pie,
        "scatter": _layout_scatter,
    }[chart]
    builder(tree, scene, fill_for)
    _layout_chrome(tree, scene)
    return scene


def _slot_positions(tree, canvas, horizontal=False):
    """Positions for leaf slots grouped into bands by the top dimension."""
    slots = _x_slots(tree)
    top_labels = []
    for slot in slots:
        if slot[0] not in top_labels:
            top_labels.append(slot[0])
    start = canvas.plot_x if not horizontal else canvas.plot_y
    extent = canvas.plot_w if not horizontal else canvas.plot_h
    band_pos, band = _band_layout(top_labels, start, extent)
    per_band = {}
    for slot in slots:
        per_band.setdefault(slot[0], []).append(slot)
    k_max = max(len(v) for v in per_band.values()) if per_band else 1
    subw = band * BAND_FILL / k_max
    positions = {}
    for top, group in per_band.items():
        for i, slot in enumerate(group):
            offset = band * (1 - BAND_FILL) / 2 + i * subw
            positions[slot] = band_pos[top] + offset
    return positions, subw


def _slot_of(tree, record):
    dims = record["dims"]
    if not dims:
        return (record["measure"],)
    if _measure_count(tree) > 1:
        return dims + (record["measure"],)
    return dims


def _layout_bars_v(tree, scene, fill_for):
    canvas = scene.canvas
    ymax = scene.axes["y"]["max"]
    positions, subw = _slot_positions(tree, canvas)
    bottom = canvas.plot_y + canvas.plot_h
    for record in _leaf_records(tree):
        slot = _slot_of(tree, record)
        h = record["value"] / ymax * canvas.plot_h
        scene.marks.append(Mark(
            record["id"], "rect",
            {"x": positions[slot], "y": bottom - h, "w": subw, "h": h, "rx": 0.0},
            fill_for(record),
        ))


def _layout_bars_h(tree, scene, fill_for):
    canvas = scene.canvas
    xmax = scene.axes["x"]["max"]
    positions, subh = _slot_positions(tree, canvas, horizontal=True)
    for record in _leaf_records(tree):
        slot = _slot_of(tree, record)
        w = record["value"] / xmax * canvas.plot_w
        scene.marks.append(Mark(
            record["id"], "rect",
            {"x": canvas.plot_x, "y": positions[slot], "w": w, "h": subh, "rx": 0.0},
            fill_for(record),
        ))


def _line_groups(tree):
    """Leaf records grouped into polylines: one per (series dim x measure)."""
    groups = {}
    dims = tree.dimension_levels()
    for record in _leaf_records(tree):
        series = record["dims"][1] if len(dims) > 1 else None
        key = (series, record["measure"])
        groups.setdefault(key, []).append(record)
    return groups


def _layout_line(tree, scene, fill_for):
    canvas = scene.canvas
    ymax = scene.axes["y"]["max"]
    labels = scene.axes["x"]["labels"]
    band = canvas.plot_w / max(len(labels), 1)
    x_of = {label: canvas.plot_x + (i + 0.5) * band for i, label in enumerate(labels)}
    bottom = canvas.plot_y + canvas.plot_h
    for (series, measure), records in _line_groups(tree).items():
        pts = []
        for record in records:
            x = x_of[record["dims"][0]] if record["dims"] else canvas.plot_x + canvas.plot_w / 2
            y = bottom - record["value"] / ymax * canvas.plot_h
            pts.append((x, y))
            scene.marks.append(Mark(
                record["id"], "point",
                {"cx": x, "cy": y, "r": LINE_POINT_RADIUS},
                fill_for(record),
            ))
        if len(pts) > 1:
            line_id = f"{series}/{measure}:line" if series else f"{measure}:line"
            scene.marks.append(Mark(
                line_id, "polyline", {"pts": [list(p) for p in pts]},
                fill_for(records[0]),
            ))


def _layout_pie(tree, scene, fill_for):
    canvas = scene.canvas
    records = _leaf_records(tree)
    for record in records:
        if record["value"] < 0:
            raise NegativeValueInPie(f"negative slice value {record['value']}")
    total = sum(r["value"] for r in records)
    cx = canvas.plot_x + canvas.plot_w / 2
    cy = canvas.plot_y + canvas.plot_h / 2
    radius = min(canvas.plot_w, canvas.plot_h) / 2 * 0.9
    prefix = 0.0
    start = 0.0
    for record in records:
        prefix += record["value"]
        end = (prefix / total) * 2 * math.pi if total > 0 else start
        scene.marks.append(Mark(
            record["id"], "sector",
            {"cx": cx, "cy": cy, "r0": 0.0, "r1": radius, "a0": start, "a1": end},
            fill_for(record),
        ))
        start = end


def _layout_scatter(tree, scene, fill_for):
    canvas = scene.canvas
    dims = tree.dimension_levels()
    measures = _measure_names(tree)
    bottom = canvas.plot_y + canvas.plot_h
    two_measures = not dims and len(measures) == 2
    raw = tree.raw_level() is not None

    if two_measures:
        xmax = scene.axes["x"]["max"]
        ymax = scene.axes["y"]["max"]
        by_point = {}
        mlevel = tree.measure_level()
        for record in _leaf_records(tree):
            key = record["path"][mlevel:] if raw else ("agg",)
            by_point.setdefault(key, {})[record["measure"]] = record
        for key in sorted(by_point):
            pair = by_point[key]
            if len(pair) != 2:
                continue
            rx = pair[measures[0]]
            ry = pair[measures[1]]
            x = canvas.plot_x + rx["value"] / xmax * canvas.plot_w
            y = bottom - ry["value"] / ymax * canvas.plot_h
            point_id = ry["id"]
            scene.marks.append(Mark(
                point_id, "point", {"cx": x, "cy": y, "r": POINT_RADIUS},
                fill_for(ry),
            ))
        return

    ymax = scene.axes["y"]["max"]
    labels = scene.axes["x"]["labels"] if dims else []
    band = canvas.plot_w / max(len(labels), 1) if labels else canvas.plot_w
    x_of = {label: canvas.plot_x + (i + 0.5) * band for i, label in enumerate(labels)}
    for record in _leaf_records(tree):
        x = x_of[record["dims"][0]] if record["dims"] else canvas.plot_x + canvas.plot_w / 2
        y = bottom - record["value"] / ymax * canvas.plot_h
        scene.marks.append(Mark(
            record["id"], "point", {"cx": x, "cy": y, "r": POINT_RADIUS},
            fill_for(record),
        ))


def _numeric_ticks(maximum):
    return [maximum * i / 5 for i in range(6)]


def _layout_chrome(tree, scene):
    canvas = scene.canvas
    x0, y0 = canvas.plot_x, canvas.plot_y
    x1, y1 = canvas.plot_x + canvas.plot_w, canvas.plot_y + canvas.plot_h

    def fmt(v):
        return format(v, ".6g")

    x_axis = scene.axes["x"]
    if x_axis["visible"] and x_axis["kind"] != "none":
        scene.chrome.append(Mark(
            "xaxis:line", "segment", {"x1": x0, "y1": y1, "x2": x1, "y2": y1},
            AXIS_COLOR, layer="xaxis",
        ))
        if x_axis["kind"] == "categorical":
            labels = x_axis["labels"]
            band = canvas.plot_w / max(len(labels), 1)
            for i, label in enumerate(labels):
                short = label.split("|")[0] if "|" in label else label
                scene.chrome.append(Mark(
                    f"xaxis:lab:{label}", "text",
                    {"x": x0 + (i + 0.5) * band, "y": y1 + 14,
                     "text": short, "size": 11, "anchor": "middle"},
                    TEXT_COLOR, layer="xaxis",
                ))
        else:
            for value in _numeric_ticks(x_axis["max"]):
                x = x0 + value / x_axis["max"] * canvas.plot_w
                scene.chrome.append(Mark(
                    f"xaxis:tick:{fmt(value)}", "segment",
                    {"x1": x, "y1": y1, "x2": x, "y2": y1 + 4},
                    AXIS_COLOR, layer="xaxis",
                ))
                scene.chrome.append(Mark(
                    f"xaxis:lab:{fmt(value)}", "text",
                    {"x": x, "y": y1 + 14, "text": fmt(value), "size": 11, "anchor": "middle"},
                    TEXT_COLOR, layer="xaxis",
                ))

    y_axis = scene.axes["y"]
    if y_axis["visible"] and y_axis["kind"] != "none":
        scene.chrome.append(Mark(
            "yaxis:line", "segment", {"x1": x0, "y1": y0, "x2": x0, "y2": y1},
            AXIS_COLOR, layer="yaxis",
        ))
        if y_axis["kind"] == "categorical":
            labels = y_axis["labels"]
            band = canvas.plot_h / max(len(labels), 1)
            for i, label in enumerate(labels):
                short = label.split("|")[0] if "|" in label else label
                scene.chrome.append(Mark(
                    f"yaxis:lab:{label}", "text",
                    {"x": x0 - 6, "y": y0 + (i + 0.5) * band + 4,
                     "text": short, "size": 11, "anchor": "end"},
                    TEXT_COLOR, layer="yaxis",
                ))
        else:
            for value in _numeric_ticks(y_axis["max"]):
                y = y1 - value / y_axis["max"] * canvas.plot_h
                scene.chrome.append(Mark(
                    f"yaxis:tick:{fmt(value)}", "segment",
                    {"x1": x0 - 4, "y1": y, "x2": x0, "y2": y},
                    AXIS_COLOR, layer="yaxis",
                ))
                scene.chrome.append(Mark(
                    f"yaxis:lab:{fmt(value)}", "text",
                    {"x": x0 - 6, "y": y + 4, "text": fmt(value), "size": 11, "anchor": "end"},
                    TEXT_COLOR, layer="yaxis",
                ))

    if scene.legend_visible:
        color_of = _entry_color(scene.legend_entries)
        x = x0
        y = y0 - 12
        for label in scene.legend_entries:
            scene.chrome.append(Mark(
                f"legend:swatch:{label}", "rect",
                {"x": x, "y": y - 8, "w": 10.0, "h": 10.0, "rx": 0.0},
                color_of(label), layer="legend",
            ))
            scene.chrome.append(Mark(
                f"legend:lab:{label}", "text",
                {"x": x + 14, "y": y, "text": label, "size": 11, "anchor": "start"},
                TEXT_COLOR, layer="legend",
            ))
            x += 24 + 7 * len(label)

    if scene.title:
        scene.chrome.append(Mark(
            "title", "text",
            {"x": canvas.width / 2, "y": 24.0, "text": scene.title,
             "size": 14, "anchor": "middle"},
            TEXT_COLOR, layer="title",
        ))
