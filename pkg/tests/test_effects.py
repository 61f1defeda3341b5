import math

import pytest

from chartmorph.diff import (
    ADD_DATA_ITEM, CHANGE_CHART_TYPE, MERGE_DATA_ITEM, REMOVE_SERIES, SORT,
    VALUE_CHANGE,
)
from chartmorph.effects import (
    UnsupportedCombination, default_binding, ease, interp_color,
    interp_geometry, morph_plan_table, plan_mark_morph, resolve_binding,
    step_count,
)
from chartmorph.render import render_svg, sample_scene

from conftest import synth_for

CHART_TYPES = ("barV", "barH", "line", "pie", "scatter")


# -- easing -----------------------------------------------------------------

def test_easing_basics():
    assert ease("linear", 0.5) == 0.5
    assert ease("in-out", 0.0) == 0.0
    assert ease("in-out", 1.0) == 1.0
    assert ease("in-out", 0.25) == pytest.approx(0.0625)


def test_easing_monotone_on_grid():
    for fn in ("linear", "in-out"):
        samples = [ease(fn, i / 1000) for i in range(1001)]
        assert samples[0] == 0.0
        assert samples[-1] == 1.0
        assert all(b >= a - 1e-12 for a, b in zip(samples, samples[1:]))


def test_easing_out_of_range():
    from chartmorph.effects import OutOfRange

    with pytest.raises(OutOfRange):
        ease("linear", 1.5)


# -- bindings ---------------------------------------------------------------

def test_default_bindings_by_chart_family():
    assert default_binding(ADD_DATA_ITEM, "barV") == "grow"
    assert default_binding(ADD_DATA_ITEM, "pie") == "grow"
    assert default_binding(ADD_DATA_ITEM, "line") == "fadeIn"
    assert default_binding(REMOVE_SERIES, "line") == "fadeOut"
    assert default_binding(REMOVE_SERIES, "barH") == "shrink"
    assert default_binding(SORT, "barV") == "move"
    assert default_binding(VALUE_CHANGE, "scatter") == "tween"


def test_sort_on_scatter_is_unsupported():
    with pytest.raises(UnsupportedCombination):
        default_binding(SORT, "scatter")


def test_override_must_stay_in_allowed_set():
    assert resolve_binding(ADD_DATA_ITEM, "barV", {ADD_DATA_ITEM: "fadeIn"}) == "fadeIn"
    with pytest.raises(UnsupportedCombination):
        resolve_binding(ADD_DATA_ITEM, "barV", {ADD_DATA_ITEM: "shrink"})


# -- morph plans -------------------------------------------------------------

def test_all_twenty_ordered_pairs_have_plans():
    table = morph_plan_table()
    assert len(table) == 20
    assert all(table.values())


def test_bar_to_scatter_progression():
    assert plan_mark_morph("barV", "scatter") == [
        "shrinkWidth", "shrinkToPoints", "move",
    ]


def test_scatter_to_pie_shortcut():
    assert plan_mark_morph("scatter", "pie") == ["morphDirect"]
    assert plan_mark_morph("pie", "line") == ["morphDirect"]


def test_within_class_morph_then_move():
    assert plan_mark_morph("barV", "barH") == ["morph", "move"]
    assert plan_mark_morph("barH", "pie") == ["morph", "move"]
    assert plan_mark_morph("line", "scatter") == ["morph", "move"]


def test_step_counts():
    assert step_count(SORT, "move") == 1
    assert step_count(CHANGE_CHART_TYPE, "morph", "barV", "barH") == 2
    assert step_count(CHANGE_CHART_TYPE, "morph", "barV", "scatter") == 3
    assert step_count(MERGE_DATA_ITEM, "moveMerge") == 2


# -- geometry interpolation ---------------------------------------------------

def test_interp_endpoints_exact():
    rect = {"x": 10.0, "y": 20.0, "w": 30.0, "h": 40.0, "rx": 0.0}
    sector = {"cx": 100.0, "cy": 100.0, "r0": 0.0, "r1": 50.0, "a0": 0.0, "a1": 1.0}
    shape0, geom0 = interp_geometry("rect", rect, "sector", sector, 0.0)
    assert (shape0, geom0) == ("rect", rect)
    shape1, geom1 = interp_geometry("rect", rect, "sector", sector, 1.0)
    assert (shape1, geom1) == ("sector", sector)


def test_rect_sector_interp_sweep_grows_monotonically():
    rect = {"x": 100.0, "y": 200.0, "w": 40.0, "h": 80.0, "rx": 0.0}
    sector = {"cx": 320.0, "cy": 200.0, "r0": 0.0, "r1": 120.0,
              "a0": 0.5, "a1": 2.5}
    sweeps = []
    for i in range(1, 100):
        shape, geom = interp_geometry("rect", rect, "sector", sector, i / 100)
        assert shape == "sector"
        sweeps.append(geom["a1"] - geom["a0"])
    assert all(b >= a - 1e-12 for a, b in zip(sweeps, sweeps[1:]))
    assert all(0 <= s <= 2.0 + 1e-9 for s in sweeps)


def test_color_interp_perceptual_endpoints():
    assert interp_color("#ff0000", "#0000ff", 0.0) == "#ff0000"
    assert interp_color("#ff0000", "#0000ff", 1.0) == "#0000ff"
    mid = interp_color("#000000", "#ffffff", 0.5)
    # Lab midpoint of black and white is mid grey
    r = int(mid[1:3], 16)
    assert 100 <= r <= 140


# -- synthesized timelines ----------------------------------------------------

def _sector_sum(scene):
    return sum(
        m.geom["a1"] - m.geom["a0"] for m in scene.marks if m.shape == "sector"
    )


@pytest.mark.parametrize("name", ["rotate", "type_change", "drilldown"])
def test_timeline_endpoints_match_static_scenes(name):
    tb = synth_for(name)
    plan = tb.plan_bundle.plan
    assert render_svg(sample_scene(tb.timeline, 0)) == render_svg(tb.source_scene)
    assert render_svg(sample_scene(tb.timeline, plan.total)) == render_svg(tb.target_scene)


def test_fade_opacity_monotone_during_removal():
    tb = synth_for("filtering")
    plan = tb.plan_bundle.plan
    stage = plan.stages[0]
    doomed = "Brand=BMW/Country=Germany/Sales"
    last = 1.0
    for i in range(51):
        t = stage.start + stage.duration * i / 50
        scene = sample_scene(tb.timeline, t)
        mark = scene.mark_by_id(doomed)
        opacity = mark.opacity if mark is not None else 0.0
        assert opacity <= last + 1e-9
        last = opacity


def test_grow_geometry_monotone_for_added_bars():
    tb = synth_for("composite")
    plan = tb.plan_bundle.plan
    stage = next(s for s in plan.stages if s.kind == ADD_DATA_ITEM)
    heights = []
    for i in range(51):
        t = stage.start + stage.duration * i / 50
        scene = sample_scene(tb.timeline, t)
        mark = scene.mark_by_id("Year=2021/Sales")
        heights.append(mark.geom["h"] if mark is not None else 0.0)
    assert all(b >= a - 1e-9 for a, b in zip(heights, heights[1:]))
    assert heights[-1] > 1.0


def test_sorted_bars_move_with_their_axis_labels():
    tb = synth_for("sorting")
    plan = tb.plan_bundle.plan
    stage = plan.stages[0]
    t_mid = stage.start + stage.duration / 2
    start_scene = sample_scene(tb.timeline, stage.start)
    mid_scene = sample_scene(tb.timeline, t_mid)
    bar0 = start_scene.mark_by_id("Brand=VW/Sales")
    bar1 = mid_scene.mark_by_id("Brand=VW/Sales")
    assert bar1.geom["y"] != pytest.approx(bar0.geom["y"])
    lab0 = next(m for m in start_scene.chrome if m.id == "yaxis:lab:VW")
    lab1 = next(m for m in mid_scene.chrome if m.id == "yaxis:lab:VW")
    # the label travels with its bar: same relative progress along y
    bar_progress = (bar1.geom["y"] - bar0.geom["y"])
    lab_progress = (lab1.geom["y"] - lab0.geom["y"])
    assert math.copysign(1, bar_progress) == math.copysign(1, lab_progress)


def test_pie_valid_throughout_bar_pie_morphs():
    for name, direction in (("drilldown", "to pie"),):
        tb = synth_for(name)
        plan = tb.plan_bundle.plan
        stage = next(s for s in plan.stages if s.kind == CHANGE_CHART_TYPE)
        for i in range(101):
            t = stage.start + stage.duration * i / 100
            total = _sector_sum(sample_scene(tb.timeline, t))
            assert total <= 2 * math.pi + 1e-9
