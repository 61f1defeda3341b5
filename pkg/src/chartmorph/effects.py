"""Animation effects: bindings, easing, shape morphing, keyframes.

Each transition unit kind binds to a default effect per chart type
(entrance kinds get entrance effects, exits get exit effects, updates
get update effects). Chart-type changes expand into an ordered morph
plan: marks of the same class morph then move, marks of different
classes progress through the point-line-area chain, and point marks
take a direct shortcut to and from pie slices.

Keyframe synthesis walks the staged plan, emitting per-mark keyframes
between consecutive stage-boundary scenes. Entrance effects ramp
opacity up alongside their geometry so a stage's first instant still
samples to the previous scene exactly; exits mirror that.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field

from .diff import (
    ADD_DATA_ITEM, ADD_DIMENSION, ADD_MEASURE, ADD_SERIES,
    AGGREGATE_DATA_ITEM, CHANGE_CHART_TYPE, CHANGE_TITLE,
    DISAGGREGATE_DATA_ITEM, HIDE_LEGEND, HIDE_X_AXIS, HIDE_Y_AXIS,
    MERGE_DATA_ITEM, REMOVE_DATA_ITEM, REMOVE_DIMENSION, REMOVE_MEASURE,
    REMOVE_SERIES, RESCALE_X_AXIS, RESCALE_Y_AXIS, SHOW_LEGEND,
    SHOW_X_AXIS, SHOW_Y_AXIS, SORT, SPLIT_DATA_ITEM, UPDATE_LEGEND,
    VALUE_CHANGE,
)
from .layout import Mark, Scene
from .tree import path_id

CHART_CLASSES = {
    "barV": "area", "barH": "area", "pie": "area",
    "line": "pointline", "scatter": "pointline",
}

#: Radius used to lift rectangles into near-flat annular sectors during
#: bar/pie morphs. Large enough that the summed sweeps of any sensible
#: bar chart stay far below a full turn.
RECT_LIFT_RADIUS = 1280.0


class UnsupportedCombination(ValueError):
    pass


class OutOfRange(ValueError):
    pass


class MissingCorrespondence(KeyError):
    pass


# --------------------------------------------------------------------------
# Easing


def ease(fn_id, t):
    """Normalized progress for normalized time under the named easing."""
    if t < -1e-12 or t > 1 + 1e-12:
        raise OutOfRange(f"time {t} outside [0, 1]")
    t = min(max(t, 0.0), 1.0)
    fn_id = normalize_easing(fn_id)
    if fn_id == "linear":
        return t
    if t < 0.5:
        return 4.0 * t ** 3
    return 1.0 - 4.0 * (1.0 - t) ** 3


def normalize_easing(fn_id):
    if fn_id in ("linear",):
        return "linear"
    if fn_id in ("in-out", "slowInSlowOut", "inout"):
        return "slowInSlowOut"
    raise UnsupportedCombination(f"unknown easing '{fn_id}'")


EASINGS = ("linear", "slowInSlowOut")


# --------------------------------------------------------------------------
# Color interpolation (CIELAB)


def _hex_to_rgb(color):
    color = color.lstrip("#")
    return tuple(int(color[i:i + 2], 16) / 255.0 for i in (0, 2, 4))


def _rgb_to_hex(rgb):
    return "#" + "".join(format(max(0, min(255, round(c * 255))), "02x") for c in rgb)


def _srgb_to_linear(c):
    return c / 12.92 if c <= 0.04045 else ((c + 0.055) / 1.055) ** 2.4


def _linear_to_srgb(c):
    return 12.92 * c if c <= 0.0031308 else 1.055 * c ** (1 / 2.4) - 0.055


_WHITE = (0.95047, 1.0, 1.08883)


def _rgb_to_lab(rgb):
    r, g, b = (_srgb_to_linear(c) for c in rgb)
    x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b
    y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b
    z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b

    def f(v):
        return v ** (1 / 3) if v > 0.008856 else 7.787 * v + 16 / 116

    fx, fy, fz = f(x / _WHITE[0]), f(y / _WHITE[1]), f(z / _WHITE[2])
    return (116 * fy - 16, 500 * (fx - fy), 200 * (fy - fz))


def _lab_to_rgb(lab):
    L, a, b = lab
    fy = (L + 16) / 116
    fx = fy + a / 500
    fz = fy - b / 200

    def finv(v):
        return v ** 3 if v ** 3 > 0.008856 else (v - 16 / 116) / 7.787

    x = _WHITE[0] * finv(fx)
    y = _WHITE[1] * finv(fy)
    z = _WHITE[2] * finv(fz)
    r = 3.2404542 * x - 1.5371385 * y - 0.4985314 * z
    g = -0.9692660 * x + 1.8760108 * y + 0.0415560 * z
    bb = 0.0556434 * x - 0.2040259 * y + 1.0572252 * z
    return tuple(min(max(_linear_to_srgb(c), 0.0), 1.0) for c in (r, g, bb))


def interp_color(c1, c2, p):
    """Perceptual (Lab-space) interpolation between two hex colors."""
    if c1 == c2 or p <= 0:
        return c1
    if p >= 1:
        return c2
    lab1 = _rgb_to_lab(_hex_to_rgb(c1))
    lab2 = _rgb_to_lab(_hex_to_rgb(c2))
    lab = tuple(a + (b - a) * p for a, b in zip(lab1, lab2))
    return _rgb_to_hex(_lab_to_rgb(lab))


# --------------------------------------------------------------------------
# Effect bindings

FADE_IN, FADE_OUT = "fadeIn", "fadeOut"
WIPE, FLY_IN, FLY_OUT = "wipe", "flyIn", "flyOut"
GROW, SHRINK = "grow", "shrink"
MOVE, MORPH = "move", "morph"
COLOR_CHANGE, TWEEN = "colorChange", "tween"
MOVE_MERGE, MOVE_SPLIT = "moveMerge", "moveSplit"

ENTRANCE_EFFECTS = (GROW, FADE_IN, WIPE, FLY_IN)
EXIT_EFFECTS = (SHRINK, FADE_OUT, FLY_OUT)
UPDATE_EFFECTS = (MOVE, MORPH, COLOR_CHANGE, TWEEN, MOVE_MERGE, MOVE_SPLIT)

ALLOWED_EFFECTS = {
    ADD_DATA_ITEM: ENTRANCE_EFFECTS,
    ADD_SERIES: ENTRANCE_EFFECTS,
    ADD_MEASURE: ENTRANCE_EFFECTS,
    REMOVE_DATA_ITEM: EXIT_EFFECTS,
    REMOVE_SERIES: EXIT_EFFECTS,
    REMOVE_MEASURE: EXIT_EFFECTS,
    ADD_DIMENSION: (COLOR_CHANGE,),
    REMOVE_DIMENSION: (COLOR_CHANGE,),
    MERGE_DATA_ITEM: (MOVE_MERGE,),
    SPLIT_DATA_ITEM: (MOVE_SPLIT,),
    AGGREGATE_DATA_ITEM: (MOVE_MERGE,),
    DISAGGREGATE_DATA_ITEM: (MOVE_SPLIT,),
    VALUE_CHANGE: (TWEEN,),
    SORT: (MOVE,),
    CHANGE_CHART_TYPE: (MORPH,),
    SHOW_X_AXIS: ENTRANCE_EFFECTS,
    SHOW_Y_AXIS: ENTRANCE_EFFECTS,
    SHOW_LEGEND: ENTRANCE_EFFECTS,
    HIDE_X_AXIS: EXIT_EFFECTS,
    HIDE_Y_AXIS: EXIT_EFFECTS,
    HIDE_LEGEND: EXIT_EFFECTS,
    CHANGE_TITLE: (FADE_IN,),
    RESCALE_X_AXIS: (MOVE,),
    RESCALE_Y_AXIS: (MOVE,),
    UPDATE_LEGEND: (MOVE,),
}

_AREA_TYPES = ("barV", "barH", "pie")


def default_binding(kind, chart_type):
    """Shipped default effect for a unit kind on a chart type."""
    if chart_type not in CHART_CLASSES:
        raise UnsupportedCombination(f"unknown chart type '{chart_type}'")
    if kind in (ADD_DATA_ITEM, ADD_SERIES, ADD_MEASURE):
        return GROW if chart_type in _AREA_TYPES else FADE_IN
    if kind in (REMOVE_DATA_ITEM, REMOVE_SERIES, REMOVE_MEASURE):
        return SHRINK if chart_type in _AREA_TYPES else FADE_OUT
    if kind in (ADD_DIMENSION, REMOVE_DIMENSION):
        return COLOR_CHANGE
    if kind in (MERGE_DATA_ITEM, AGGREGATE_DATA_ITEM):
        return MOVE_MERGE
    if kind in (SPLIT_DATA_ITEM, DISAGGREGATE_DATA_ITEM):
        return MOVE_SPLIT
    if kind == VALUE_CHANGE:
        return TWEEN
    if kind == SORT:
        if chart_type not in ("barV", "barH", "pie"):
            raise UnsupportedCombination(
                f"Sort is only supported on bar and pie charts, not {chart_type}"
            )
        return MOVE
    if kind == CHANGE_CHART_TYPE:
        return MORPH
    if kind in (SHOW_X_AXIS, SHOW_Y_AXIS, SHOW_LEGEND):
        return FADE_IN
    if kind in (HIDE_X_AXIS, HIDE_Y_AXIS, HIDE_LEGEND):
        return FADE_OUT
    if kind == CHANGE_TITLE:
        return FADE_IN
    if kind in (RESCALE_X_AXIS, RESCALE_Y_AXIS, UPDATE_LEGEND):
        return MOVE
    raise UnsupportedCombination(f"no effect binding for kind '{kind}'")


def resolve_binding(kind, chart_type, overrides=None):
    """Default binding with validated user overrides applied."""
    if overrides and kind in overrides:
        effect = overrides[kind]
        allowed = ALLOWED_EFFECTS.get(kind, ())
        if effect not in allowed:
            raise UnsupportedCombination(
                f"effect '{effect}' not allowed for {kind}; allowed: {sorted(allowed)}"
            )
        default_binding(kind, chart_type)  # still reject e.g. Sort on scatter
        return effect
    return default_binding(kind, chart_type)


def plan_mark_morph(from_type, to_type):
    """Ordered morph steps for a chart-type change.

    Same mark class: morph then move. Across classes: the point-line-
    area progression. Point marks (line/scatter) shortcut directly to
    and from pie slices.
    """
    if from_type == to_type:
        raise ValueError("chart types must differ")
    for t in (from_type, to_type):
        if t not in CHART_CLASSES:
            raise UnsupportedCombination(f"unknown chart type '{t}'")
    if {from_type, to_type} <= {"barV", "barH", "pie"} or \
            {from_type, to_type} == {"line", "scatter"}:
        return ["morph", "move"]
    if from_type == "pie" or to_type == "pie":
        return ["morphDirect"]
    if from_type in ("barV", "barH"):
        if to_type == "scatter":
            return ["shrinkWidth", "shrinkToPoints", "move"]
        return ["shrinkWidth", "move"]  # bar -> line
    if to_type in ("barV", "barH"):
        if from_type == "scatter":
            return ["move", "extendToLines", "expandWidth"]
        return ["move", "expandWidth"]  # line -> bar
    raise UnsupportedCombination(f"no morph plan for {from_type} -> {to_type}")


def morph_plan_table():
    """All 20 ordered chart-type pairs with their morph plans."""
    types = ("barV", "barH", "line", "pie", "scatter")
    return {
        f"{a}->{b}": plan_mark_morph(a, b)
        for a in types for b in types if a != b
    }


def step_count(kind, effect, from_type=None, to_type=None):
    """Number of sequential animation steps a unit expands to."""
    if kind == CHANGE_CHART_TYPE:
        return len(plan_mark_morph(from_type, to_type))
    if effect in (MOVE_MERGE, MOVE_SPLIT):
        return 2
    return 1


# --------------------------------------------------------------------------
# Geometry interpolation


def _lerp(a, b, p):
    return a + (b - a) * p


def _lerp_geom(a, b, p):
    out = {}
    for key in a:
        va, vb = a[key], b.get(key, a[key])
        if isinstance(va, (int, float)) and isinstance(vb, (int, float)):
            out[key] = _lerp(float(va), float(vb), p)
        elif key == "pts":
            out[key] = _lerp_pts(va, vb, p)
        else:
            out[key] = va if p < 1 else vb
    return out


def _resample(pts, n):
    if len(pts) == n:
        return [list(p) for p in pts]
    if len(pts) == 1:
        return [list(pts[0]) for _ in range(n)]
    out = []
    for i in range(n):
        t = i * (len(pts) - 1) / (n - 1)
        j = min(int(t), len(pts) - 2)
        u = t - j
        out.append([
            _lerp(pts[j][0], pts[j + 1][0], u),
            _lerp(pts[j][1], pts[j + 1][1], u),
        ])
    return out


def _lerp_pts(a, b, p):
    n = max(len(a), len(b))
    ra, rb = _resample(a, n), _resample(b, n)
    return [
        [_lerp(pa[0], pb[0], p), _lerp(pa[1], pb[1], p)]
        for pa, pb in zip(ra, rb)
    ]


def _rect_as_sector(rect, p, sector):
    """Interpolate a rect lifted into annular-sector space (p in (0,1))."""
    x, y, w, h = rect["x"], rect["y"], rect["w"], rect["h"]
    radius = RECT_LIFT_RADIUS
    cx0 = x + w / 2
    cy0 = y + h + radius
    r0_0, r1_0 = radius, radius + h
    mid0 = 0.0
    sweep0 = w / (radius + h / 2) if radius + h / 2 > 0 else 0.0
    mid1 = (sector["a0"] + sector["a1"]) / 2
    sweep1 = sector["a1"] - sector["a0"]
    mid = _lerp(mid0, mid1, p)
    sweep = _lerp(sweep0, sweep1, p)
    return {
        "cx": _lerp(cx0, sector["cx"], p),
        "cy": _lerp(cy0, sector["cy"], p),
        "r0": _lerp(r0_0, sector["r0"], p),
        "r1": _lerp(r1_0, sector["r1"], p),
        "a0": mid - sweep / 2,
        "a1": mid + sweep / 2,
    }


def interp_geometry(shape_a, geom_a, shape_b, geom_b, p):
    """Interpolate between two keyframe geometries, morphing shapes.

    Endpoints are exact: p=0 returns the first geometry unchanged, p=1
    the second.
    """
    if p <= 0:
        return shape_a, dict(geom_a)
    if p >= 1:
        return shape_b, dict(geom_b)
    if shape_a == shape_b:
        return shape_a, _lerp_geom(geom_a, geom_b, p)
    pair = (shape_a, shape_b)
    if pair == ("rect", "sector"):
        return "sector", _rect_as_sector(geom_a, p, geom_b)
    if pair == ("sector", "rect"):
        return "sector", _rect_as_sector(geom_b, 1 - p, geom_a)
    if pair == ("rect", "point"):
        r = geom_b["r"]
        target = {"x": geom_b["cx"] - r, "y": geom_b["cy"] - r,
                  "w": 2 * r, "h": 2 * r, "rx": r}
        return "rect", _lerp_geom({**geom_a, "rx": geom_a.get("rx", 0.0)}, target, p)
    if pair == ("point", "rect"):
        r = geom_a["r"]
        start = {"x": geom_a["cx"] - r, "y": geom_a["cy"] - r,
                 "w": 2 * r, "h": 2 * r, "rx": r}
        return "rect", _lerp_geom(start, {**geom_b, "rx": geom_b.get("rx", 0.0)}, p)
    if pair == ("point", "sector"):
        return "sector", {
            "cx": _lerp(geom_a["cx"], geom_b["cx"], p),
            "cy": _lerp(geom_a["cy"], geom_b["cy"], p),
            "r0": _lerp(0.0, geom_b["r0"], p),
            "r1": _lerp(geom_a["r"], geom_b["r1"], p),
            "a0": geom_b["a0"],
            "a1": geom_b["a1"],
        }
    if pair == ("sector", "point"):
        return "sector", {
            "cx": _lerp(geom_a["cx"], geom_b["cx"], p),
            "cy": _lerp(geom_a["cy"], geom_b["cy"], p),
            "r0": _lerp(geom_a["r0"], 0.0, p),
            "r1": _lerp(geom_a["r1"], geom_b["r"], p),
            "a0": geom_a["a0"],
            "a1": geom_a["a1"],
        }
    # No geometric morph between these shapes: snap at midpoint.
    return (shape_a, dict(geom_a)) if p < 0.5 else (shape_b, dict(geom_b))


def _geom_center(shape, geom):
    if shape == "rect":
        return geom["x"] + geom["w"] / 2, geom["y"] + geom["h"] / 2
    if shape == "point":
        return geom["cx"], geom["cy"]
    if shape == "sector":
        return geom["cx"], geom["cy"]
    if shape == "polyline":
        pts = geom["pts"]
        return (sum(p[0] for p in pts) / len(pts), sum(p[1] for p in pts) / len(pts))
    if shape == "segment":
        return (geom["x1"] + geom["x2"]) / 2, (geom["y1"] + geom["y2"]) / 2
    if shape == "text":
        return geom["x"], geom["y"]
    return 0.0, 0.0


def _translated(shape, geom, dx, dy):
    out = dict(geom)
    if shape == "rect":
        out["x"] += dx
        out["y"] += dy
    elif shape in ("point", "sector"):
        out["cx"] += dx
        out["cy"] += dy
    elif shape == "polyline":
        out["pts"] = [[p[0] + dx, p[1] + dy] for p in geom["pts"]]
    elif shape == "segment":
        out["x1"] += dx
        out["x2"] += dx
        out["y1"] += dy
        out["y2"] += dy
    elif shape == "text":
        out["x"] += dx
        out["y"] += dy
    return out


def _value_anchor(chart_type, geom):
    """The point encoding a bar's value: top of a vertical bar, right
    end of a horizontal one."""
    if chart_type == "barH":
        return geom["x"] + geom["w"], geom["y"] + geom["h"] / 2
    return geom["x"] + geom["w"] / 2, geom["y"]


def _thin_rect(chart_type, geom, r):
    out = dict(geom)
    if chart_type == "barH":
        cy = geom["y"] + geom["h"] / 2
        out["y"], out["h"] = cy - r, 2 * r
    else:
        cx = geom["x"] + geom["w"] / 2
        out["x"], out["w"] = cx - r, 2 * r
    return out


def morph_waypoints(plan, src_mark, dst_mark, src_type, dst_type):
    """Per-step (shape, geometry) waypoints for one mark across a
    chart-type change; length is len(plan) + 1."""
    src = (src_mark.shape, dict(src_mark.geom))
    dst = (dst_mark.shape, dict(dst_mark.geom))
    if plan == ["morph", "move"]:
        sx, sy = _geom_center(*src)
        dx, dy = _geom_center(*dst)
        mid = (dst[0], _translated(dst[0], dst[1], sx - dx, sy - dy))
        return [src, mid, dst]
    if plan == ["morphDirect"]:
        return [src, dst]
    point_r = dst[1].get("r", 4.0) if dst[0] == "point" else src[1].get("r", 4.0)
    if plan == ["shrinkWidth", "shrinkToPoints", "move"]:
        thin = ("rect", _thin_rect(src_type, src[1], point_r))
        ax, ay = _value_anchor(src_type, src[1])
        at_anchor = ("point", {"cx": ax, "cy": ay, "r": point_r})
        return [src, thin, at_anchor, dst]
    if plan == ["move", "extendToLines", "expandWidth"]:
        ax, ay = _value_anchor(dst_type, dst[1])
        at_anchor = ("point", {"cx": ax, "cy": ay, "r": point_r})
        thin = ("rect", _thin_rect(dst_type, dst[1], point_r))
        return [src, at_anchor, thin, dst]
    if plan == ["shrinkWidth", "move"]:
        thin = ("rect", _thin_rect(src_type, src[1], point_r))
        return [src, thin, dst]
    if plan == ["move", "expandWidth"]:
        ax, ay = _value_anchor(dst_type, dst[1])
        at_anchor = ("point", {"cx": ax, "cy": ay, "r": point_r})
        return [src, at_anchor, dst]
    raise UnsupportedCombination(f"unknown morph plan {plan}")


# --------------------------------------------------------------------------
# Keyframes


@dataclass
class Keyframe:
    t: float
    shape: str
    geom: dict
    fill: str
    opacity: float


@dataclass
class StageContext:
    """One stage plus its boundary scenes and tree states."""

    stage: object
    scene_before: Scene
    scene_after: Scene
    tree_before: object = None
    tree_after: object = None
    morph_plan: list | None = None


@dataclass
class KeyframeTimeline:
    tracks: dict = field(default_factory=dict)
    layers: dict = field(default_factory=dict)
    total: float = 0.0
    easing: str = "linear"
    canvas: object = None
    stage_spans: list = field(default_factory=list)  # (id, start, end)
    chart_types: list = field(default_factory=list)  # (end time, type)

    def add(self, mark_id, layer, t, shape, geom, fill, opacity):
        track = self.tracks.setdefault(mark_id, [])
        self.layers.setdefault(mark_id, layer)
        kf = Keyframe(float(t), shape, dict(geom), fill, float(opacity))
        if track and abs(track[-1].t - kf.t) < 1e-9:
            last = track[-1]
            if (last.shape == kf.shape and last.geom == kf.geom
                    and last.fill == kf.fill and last.opacity == kf.opacity):
                return
        track.append(kf)
        track.sort(key=lambda k: k.t)


def _add_mark_kf(timeline, mark, t, opacity=None, shape=None, geom=None, fill=None):
    timeline.add(
        mark.id, mark.layer, t,
        shape if shape is not None else mark.shape,
        geom if geom is not None else mark.geom,
        fill if fill is not None else mark.fill,
        opacity if opacity is not None else mark.opacity,
    )


def _entrance_start(effect, mark, chart_type, canvas):
    """Initial (shape, geom) for a mark entering under an effect."""
    shape, geom = mark.shape, dict(mark.geom)
    if effect == GROW:
        if shape == "rect":
            if chart_type == "barH":
                geom["w"] = 0.0
            else:
                geom["y"] = geom["y"] + geom["h"]
                geom["h"] = 0.0
        elif shape == "sector":
            geom["a1"] = geom["a0"]
        elif shape == "point":
            geom["r"] = 0.0
    elif effect == WIPE:
        if shape == "rect":
            geom["w"] = 0.0
    elif effect == FLY_IN:
        geom = _translated(shape, geom, 0.0, -canvas.height)
    return shape, geom


def _exit_end(effect, mark, chart_type, canvas):
    shape, geom = mark.shape, dict(mark.geom)
    if effect == SHRINK:
        if shape == "rect":
            if chart_type == "barH":
                geom["w"] = 0.0
            else:
                geom["y"] = geom["y"] + geom["h"]
                geom["h"] = 0.0
        elif shape == "sector":
            geom["a1"] = geom["a0"]
        elif shape == "point":
            geom["r"] = 0.0
    elif effect == FLY_OUT:
        geom = _translated(shape, geom, 0.0, canvas.height)
    return shape, geom


def _marks_equal(a, b):
    return (a.shape == b.shape and a.geom == b.geom
            and a.fill == b.fill and a.opacity == b.opacity)


def _leaf_id_map(tree):
    return {path_id(tree, path): path for path, _ in tree.leaves()}


def synthesize_keyframes(plan, contexts, source_scene, target_scene,
                         overrides=None, easing="linear"):
    """Build the full keyframe timeline from staged boundary scenes.

    Every source mark gets an anchor keyframe at t=0; each stage then
    emits keyframes for the marks it touches. Unaffected marks hold.
    """
    timeline = KeyframeTimeline(
        total=float(plan.total),
        easing=normalize_easing(easing),
        canvas=source_scene.canvas,
    )
    for mark in source_scene.all_marks():
        _add_mark_kf(timeline, mark, 0.0)
    current_type = source_scene.chart_type
    for ctx in contexts:
        stage = ctx.stage
        timeline.stage_spans.append((stage.id, stage.start, stage.start + stage.duration))
        _synthesize_stage(timeline, ctx, overrides)
        if ctx.scene_after.chart_type != current_type:
            current_type = ctx.scene_after.chart_type
        timeline.chart_types.append((stage.start + stage.duration, current_type))
    return timeline


def _synthesize_stage(timeline, ctx, overrides):
    stage = ctx.stage
    kind = stage.kind
    if kind == CHANGE_CHART_TYPE:
        _morph_stage(timeline, ctx)
    elif kind in (MERGE_DATA_ITEM, AGGREGATE_DATA_ITEM):
        _merge_stage(timeline, ctx)
    elif kind in (SPLIT_DATA_ITEM, DISAGGREGATE_DATA_ITEM):
        _split_stage(timeline, ctx)
    elif kind in (ADD_DIMENSION, REMOVE_DIMENSION):
        _dimension_stage(timeline, ctx)
    else:
        _generic_stage(timeline, ctx, overrides)


def _stage_times(stage):
    return float(stage.start), float(stage.start + stage.duration)


def _generic_stage(timeline, ctx, overrides):
    stage = ctx.stage
    t0, t1 = _stage_times(stage)
    before = {m.id: m for m in ctx.scene_before.all_marks()}
    after = {m.id: m for m in ctx.scene_after.all_marks()}
    chart_type = ctx.scene_after.chart_type
    canvas = ctx.scene_after.canvas
    effect = resolve_binding(stage.kind, chart_type, overrides)
    for mark_id in sorted(set(before) | set(after)):
        b, a = before.get(mark_id), after.get(mark_id)
        if b is not None and a is not None:
            if _marks_equal(b, a):
                continue
            _add_mark_kf(timeline, b, t0)
            _add_mark_kf(timeline, a, t1)
        elif a is not None:
            eff = effect if a.layer == "data" and effect in ENTRANCE_EFFECTS else FADE_IN
            shape, geom = _entrance_start(eff, a, chart_type, canvas)
            _add_mark_kf(timeline, a, t0, opacity=0.0, shape=shape, geom=geom)
            _add_mark_kf(timeline, a, t1, opacity=1.0)
        else:
            eff = effect if b.layer == "data" and effect in EXIT_EFFECTS else FADE_OUT
            shape, geom = _exit_end(eff, b, ctx.scene_before.chart_type, canvas)
            _add_mark_kf(timeline, b, t0)
            _add_mark_kf(timeline, b, t1, opacity=0.0, shape=shape, geom=geom)


def _morph_stage(timeline, ctx):
    stage = ctx.stage
    t0, t1 = _stage_times(stage)
    plan = ctx.morph_plan
    steps = len(plan)
    before = {m.id: m for m in ctx.scene_before.all_marks()}
    after = {m.id: m for m in ctx.scene_after.all_marks()}
    src_type = ctx.scene_before.chart_type
    dst_type = ctx.scene_after.chart_type
    times = [t0 + (t1 - t0) * i / steps for i in range(steps + 1)]
    for mark_id in sorted(set(before) | set(after)):
        b, a = before.get(mark_id), after.get(mark_id)
        if b is not None and a is not None:
            if b.layer != "data":
                if not _marks_equal(b, a):
                    _add_mark_kf(timeline, b, t0)
                    _add_mark_kf(timeline, a, t1)
                continue
            waypoints = morph_waypoints(plan, b, a, src_type, dst_type)
            for t, (shape, geom) in zip(times, waypoints):
                fill = interp_color(b.fill, a.fill, (t - t0) / (t1 - t0) if t1 > t0 else 1)
                timeline.add(mark_id, b.layer, t, shape, geom, fill, 1.0)
        elif a is not None:
            # enters during the last step
            _add_mark_kf(timeline, a, times[-2], opacity=0.0)
            _add_mark_kf(timeline, a, times[-1], opacity=1.0)
        else:
            # exits during the first step
            _add_mark_kf(timeline, b, times[0])
            _add_mark_kf(timeline, b, times[1], opacity=0.0)


def _merge_target_path(unit, path):
    payload = unit.payload
    level = payload["level"]
    if unit.kind == AGGREGATE_DATA_ITEM:
        return tuple(p for i, p in enumerate(path) if i != len(path) - 1)
    if payload.get("collapse"):
        return tuple(p for i, p in enumerate(path) if i != level - 1)
    mapping = payload.get("mapping", {})
    label = path[level - 1]
    return tuple(
        mapping.get(label, label) if i == level - 1 else p
        for i, p in enumerate(path)
    )


def _split_source_path(unit, path):
    return _merge_target_path(unit, path)


def _merge_stage(timeline, ctx):
    stage = ctx.stage
    t0, t1 = _stage_times(stage)
    tmid = (t0 + t1) / 2
    before = {m.id: m for m in ctx.scene_before.all_marks()}
    after = {m.id: m for m in ctx.scene_after.all_marks()}
    unit = stage.units[0]
    before_paths = _leaf_id_map(ctx.tree_before) if ctx.tree_before else {}
    target_of = {}
    for mark_id, path in before_paths.items():
        if unit.kind == AGGREGATE_DATA_ITEM or unit.payload.get("collapse") \
                or unit.payload.get("mapping", {}).get(path[unit.payload["level"] - 1]):
            target_path = _merge_target_path(unit, path)
            if ctx.tree_after is not None:
                target_id = path_id(ctx.tree_after, target_path)
                if target_id in after:
                    target_of[mark_id] = target_id
    for mark_id in sorted(set(before) | set(after)):
        b, a = before.get(mark_id), after.get(mark_id)
        if b is not None and a is not None:
            if not _marks_equal(b, a):
                _add_mark_kf(timeline, b, t0)
                _add_mark_kf(timeline, a, tmid)
                _add_mark_kf(timeline, a, t1)
            continue
        if b is not None:
            target = after.get(target_of.get(mark_id, ""))
            _add_mark_kf(timeline, b, t0)
            if target is not None:
                shape, geom = interp_geometry(
                    b.shape, b.geom, target.shape, target.geom, 1.0
                )
                timeline.add(mark_id, b.layer, tmid, shape, geom, b.fill, 1.0)
                timeline.add(mark_id, b.layer, t1, shape, geom, b.fill, 0.0)
            else:
                _add_mark_kf(timeline, b, t1, opacity=0.0)
        else:
            _add_mark_kf(timeline, a, tmid, opacity=0.0)
            _add_mark_kf(timeline, a, t1, opacity=1.0)


def _split_stage(timeline, ctx):
    stage = ctx.stage
    t0, t1 = _stage_times(stage)
    tmid = (t0 + t1) / 2
    before = {m.id: m for m in ctx.scene_before.all_marks()}
    after = {m.id: m for m in ctx.scene_after.all_marks()}
    unit = stage.units[0]
    after_paths = _leaf_id_map(ctx.tree_after) if ctx.tree_after else {}
    source_of = {}
    for mark_id, path in after_paths.items():
        if mark_id in before:
            continue
        source_path = _split_source_for(unit, path)
        if source_path is not None and ctx.tree_before is not None:
            source_id = path_id(ctx.tree_before, source_path)
            if source_id in before:
                source_of[mark_id] = source_id
    for mark_id in sorted(set(before) | set(after)):
        b, a = before.get(mark_id), after.get(mark_id)
        if b is not None and a is not None:
            if not _marks_equal(b, a):
                _add_mark_kf(timeline, b, t0)
                _add_mark_kf(timeline, b, tmid)
                _add_mark_kf(timeline, a, t1)
            continue
        if a is not None:
            source = before.get(source_of.get(mark_id, ""))
            if source is not None:
                timeline.add(mark_id, a.layer, t0, source.shape, source.geom, a.fill, 0.0)
                timeline.add(mark_id, a.layer, tmid, source.shape, source.geom, a.fill, 1.0)
                _add_mark_kf(timeline, a, t1)
            else:
                _add_mark_kf(timeline, a, t0, opacity=0.0)
                _add_mark_kf(timeline, a, t1, opacity=1.0)
        else:
            _add_mark_kf(timeline, b, t0)
            _add_mark_kf(timeline, b, tmid, opacity=0.0)


def _split_source_for(unit, path):
    payload = unit.payload
    if unit.kind == DISAGGREGATE_DATA_ITEM:
        return tuple(path[:-1])
    level = payload.get("level")
    mapping = payload.get("mapping", {})
    label = path[level - 1]
    coarse = mapping.get(label)
    if coarse is None:
        return None
    return tuple(coarse if i == level - 1 else p for i, p in enumerate(path))


def _dimension_stage(timeline, ctx):
    """Color-change crossfade between parent marks and their expansion."""
    stage = ctx.stage
    t0, t1 = _stage_times(stage)
    before = {m.id: m for m in ctx.scene_before.all_marks()}
    after = {m.id: m for m in ctx.scene_after.all_marks()}
    unit = stage.units[0]
    level = unit.payload["level"]
    adding = unit.kind == ADD_DIMENSION

    def stripped(path):
        return tuple(p for i, p in enumerate(path) if i != level - 1)

    partner_of = {}
    if adding and ctx.tree_after is not None and ctx.tree_before is not None:
        for path, _ in ctx.tree_after.leaves():
            child_id = path_id(ctx.tree_after, path)
            parent_id = path_id(ctx.tree_before, stripped(path))
            partner_of[child_id] = parent_id
    elif not adding and ctx.tree_before is not None and ctx.tree_after is not None:
        for path, _ in ctx.tree_before.leaves():
            child_id = path_id(ctx.tree_before, path)
            parent_id = path_id(ctx.tree_after, stripped(path))
            partner_of[child_id] = parent_id

    for mark_id in sorted(set(before) | set(after)):
        b, a = before.get(mark_id), after.get(mark_id)
        if b is not None and a is not None:
            if not _marks_equal(b, a):
                _add_mark_kf(timeline, b, t0)
                _add_mark_kf(timeline, a, t1)
            continue
        if a is not None:
            partner = before.get(partner_of.get(mark_id, "")) if adding else None
            if not adding:
                # a is a parent appearing as the dimension collapses
                child_ids = [cid for cid, pid in partner_of.items() if pid == mark_id]
                start_fill = before[child_ids[0]].fill if child_ids and child_ids[0] in before else a.fill
                timeline.add(mark_id, a.layer, t0, a.shape, a.geom, start_fill, 0.0)
                _add_mark_kf(timeline, a, t1, opacity=1.0)
            else:
                start_fill = partner.fill if partner is not None else a.fill
                timeline.add(mark_id, a.layer, t0, a.shape, a.geom, start_fill, 0.0)
                _add_mark_kf(timeline, a, t1, opacity=1.0)
        else:
            partner = after.get(partner_of.get(mark_id, "")) if not adding else None
            end_fill = partner.fill if partner is not None else b.fill
            _add_mark_kf(timeline, b, t0)
            timeline.add(mark_id, b.layer, t1, b.shape, b.geom, end_fill, 0.0)


# --------------------------------------------------------------------------
# Sampling


def sample_track(track, t, easing):
    """Sampled (shape, geom, fill, opacity) of one track, or None."""
    if not track or t < track[0].t - 1e-9:
        return None
    times = [k.t for k in track]
    i = bisect_right(times, t + 1e-9) - 1
    if i < 0:
        return None
    k0 = track[i]
    if i + 1 >= len(track):
        return k0.shape, dict(k0.geom), k0.fill, k0.opacity
    k1 = track[i + 1]
    if k1.t - k0.t <= 1e-9:
        return k1.shape, dict(k1.geom), k1.fill, k1.opacity
    u = (t - k0.t) / (k1.t - k0.t)
    p = ease(easing, min(max(u, 0.0), 1.0))
    shape, geom = interp_geometry(k0.shape, k0.geom, k1.shape, k1.geom, p)
    fill = interp_color(k0.fill, k1.fill, p)
    opacity = _lerp(k0.opacity, k1.opacity, p)
    return shape, geom, fill, opacity


def sample_scene_marks(timeline, t):
    """All visible marks of the timeline at time t."""
    marks = []
    for mark_id in sorted(timeline.tracks):
        sampled = sample_track(timeline.tracks[mark_id], t, timeline.easing)
        if sampled is None:
            continue
        shape, geom, fill, opacity = sampled
        if opacity <= 1e-9:
            continue
        marks.append(Mark(mark_id, shape, geom, fill, opacity,
                          timeline.layers.get(mark_id, "data")))
    return marks
