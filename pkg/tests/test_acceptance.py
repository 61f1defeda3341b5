"""Acceptance suite: one test per release criterion.

Each test prints a PASS/FAIL line (visible with ``pytest -s`` or in the
captured output) and asserts the criterion at its stated tolerance.
"""

import json
import math
import random
import time

from chartmorph.diff import (
    ADD_DATA_ITEM, ADD_DIMENSION, ADD_MEASURE, ADD_SERIES, CHANGE_CHART_TYPE,
    MERGE_DATA_ITEM, REMOVE_DATA_ITEM, REMOVE_DIMENSION, REMOVE_MEASURE,
    REMOVE_SERIES, RESCALE_X_AXIS, RESCALE_Y_AXIS, SORT, UPDATE_LEGEND,
    VALUE_CHANGE, TransitionUnit, diff_trees, replay,
)
from chartmorph.effects import ease, morph_plan_table, plan_mark_morph
from chartmorph.export import export
from chartmorph.pipeline import plan_document, plan_transition, synthesize
from chartmorph.render import render_svg, sample_scene
from chartmorph.sequence import order_units
from chartmorph.tree import tree_equal

from conftest import fixture_names, plan_for, synth_for
from test_diff import random_tree


def report(criterion, ok):
    print(f"{'PASS' if ok else 'FAIL'}  {criterion}")
    assert ok, criterion


def test_priority_order_suite():
    rows = [
        ((ADD_DATA_ITEM, REMOVE_DATA_ITEM), [REMOVE_DATA_ITEM, ADD_DATA_ITEM]),
        ((ADD_DIMENSION, ADD_DATA_ITEM), [ADD_DATA_ITEM, ADD_DIMENSION]),
        ((ADD_DATA_ITEM, REMOVE_DIMENSION), [REMOVE_DIMENSION, ADD_DATA_ITEM]),
        ((ADD_MEASURE, ADD_DATA_ITEM), [ADD_DATA_ITEM, ADD_MEASURE]),
        ((ADD_DATA_ITEM, REMOVE_MEASURE), [REMOVE_MEASURE, ADD_DATA_ITEM]),
        ((ADD_SERIES, ADD_DATA_ITEM), [ADD_DATA_ITEM, ADD_SERIES]),
        ((ADD_DATA_ITEM, REMOVE_SERIES), [REMOVE_SERIES, ADD_DATA_ITEM]),
    ]
    started = time.perf_counter()
    passed = 0
    for given, expected in rows:
        units = [TransitionUnit(kind) for kind in given]
        for i, unit in enumerate(units):
            unit.id = f"u{i}"
        if [u.kind for u in order_units(units, [], [])] == expected:
            passed += 1
    elapsed = time.perf_counter() - started
    report(f"priority-order suite {passed}/7 in {elapsed * 1000:.0f} ms",
           passed == 7 and elapsed < 1.0)


def test_edit_script_round_trip_fuzz():
    rng = random.Random(0xC0FFEE)
    trials = 1000
    good = 0
    for _ in range(trials):
        a = random_tree(rng)
        b = random_tree(rng)
        script = diff_trees(a, b)
        if tree_equal(replay(a, script), b):
            good += 1
    report(f"edit-script round trip {good}/{trials} random pairs", good == trials)


def test_composite_golden_plan():
    bundle = plan_for("composite")
    transition = bundle.transition
    data_kinds = sorted(u.kind for u in transition.data_units)
    ok = data_kinds == sorted([REMOVE_SERIES, ADD_DATA_ITEM, ADD_DIMENSION])
    deps = transition.dependent_units
    by_id = {u.id: u.kind for u in transition.data_units}
    rescale_x = {by_id[d.depends_on] for d in deps if d.kind == RESCALE_X_AXIS}
    ok = ok and rescale_x == {REMOVE_SERIES, ADD_DATA_ITEM, ADD_DIMENSION}
    legend = {by_id[d.depends_on] for d in deps if d.kind == UPDATE_LEGEND}
    ok = ok and legend == {REMOVE_SERIES, ADD_DIMENSION}
    ok = ok and not any(d.kind == RESCALE_Y_AXIS for d in deps)
    stage_kinds = [s.kind for s in bundle.plan.stages]
    ok = ok and stage_kinds == [
        REMOVE_SERIES, ADD_DATA_ITEM, ADD_DIMENSION, "ChangeTitle",
    ]
    report("composite golden plan: units, rescales, legend updates, order", ok)


def test_timing_arithmetic():
    sort_stage = plan_for("sorting").plan.stages[0]
    ok = sort_stage.kind == SORT and sort_stage.duration == 500
    ok = ok and sort_stage.steps == 1 and sort_stage.standing_before == 1000

    rotate = plan_for("rotate").plan
    cct = next(s for s in rotate.stages if s.kind == CHANGE_CHART_TYPE)
    ok = ok and cct.duration == 1000 and cct.steps == 2
    ok = ok and cct.standing_before == 500

    drill = plan_for("drilldown").plan
    standings = {s.kind: s.standing_before for s in drill.stages}
    ok = ok and standings[MERGE_DATA_ITEM] == 1000
    ok = ok and standings[CHANGE_CHART_TYPE] == 500
    ok = ok and standings["ChangeTitle"] == 0

    fixed = plan_for("composite", {"timing": "fixed:2000"}).plan
    animated = sum(s.duration for s in fixed.stages)
    ok = ok and animated == 2000
    ok = ok and fixed.total == 2000 + sum(s.standing_before for s in fixed.stages)
    report("timing arithmetic: 500 ms steps, 1000/500/0 standing, fixed split", ok)


def _doc_for_type(chart_type):
    rows = [
        {"K": "a", "V": 30}, {"K": "b", "V": 55},
        {"K": "c", "V": 42}, {"K": "d", "V": 68},
    ]
    chart = {
        "type": chart_type,
        "measures": [{"column": "V", "aggregate": "sum"}],
        "showXAxis": True, "showYAxis": True, "showLegend": True, "title": "t",
    }
    if chart_type == "pie":
        chart["legend"] = "K"
    else:
        chart["x"] = "K"
    return {
        "data": {
            "columns": [
                {"name": "K", "role": "dimension", "valueType": "categorical"},
                {"name": "V", "role": "measure", "valueType": "numeric"},
            ],
            "rows": rows,
        },
        "chart": chart,
    }


def test_morph_totality():
    table = morph_plan_table()
    ok = len(table) == 20 and all(table.values())
    ok = ok and plan_mark_morph("barV", "scatter") == [
        "shrinkWidth", "shrinkToPoints", "move",
    ]
    ok = ok and plan_mark_morph("scatter", "pie") == ["morphDirect"]
    rendered = 0
    types = ("barV", "barH", "line", "pie", "scatter")
    for src in types:
        for dst in types:
            if src == dst:
                continue
            bundle = plan_transition(
                json.dumps(_doc_for_type(src)).encode(),
                json.dumps(_doc_for_type(dst)).encode(),
            )
            tb = synthesize(bundle)
            for i in range(5):
                t = bundle.plan.total * i / 4
                render_svg(sample_scene(tb.timeline, t))
            rendered += 1
    ok = ok and rendered == 20
    report(f"morph totality: 20/20 ordered chart-type pairs render", ok)


def test_gallery_stage_structures():
    ok = True
    # (a) filtering: item removal with an x rescale, marks decrease
    filtering = synth_for("filtering")
    stages = filtering.plan_bundle.plan.stages
    ok = ok and [s.kind for s in stages] == [REMOVE_DATA_ITEM]
    ok = ok and RESCALE_X_AXIS in stages[0].kind_labels()
    mid = sample_scene(
        filtering.timeline, stages[0].start + stages[0].duration * 0.99
    )
    start = sample_scene(filtering.timeline, stages[0].start)
    end = sample_scene(filtering.timeline, stages[0].start + stages[0].duration)
    ok = ok and len(end.marks) < len(start.marks)

    # (b) ordering: a single sort stage
    ok = ok and [s.kind for s in plan_for("sorting").plan.stages] == [SORT]

    # (c) timestep: value change with a y rescale riding along
    timestep = plan_for("timestep")
    stages = timestep.plan.stages
    ok = ok and [s.kind for s in stages] == [VALUE_CHANGE]
    ok = ok and RESCALE_Y_AXIS in stages[0].kind_labels()

    # (d) visualization change: staged point-line-area morph, and the
    #     bar-orientation variant morphs then moves
    type_change = plan_for("type_change").plan
    cct = next(s for s in type_change.stages if s.kind == CHANGE_CHART_TYPE)
    ok = ok and cct.steps == 3
    rotate = plan_for("rotate").plan
    cct2 = next(s for s in rotate.stages if s.kind == CHANGE_CHART_TYPE)
    ok = ok and cct2.steps == 2

    # (e) drill-down: merge, then the rect-to-circle morph, then the new
    #     dimension colors the pie
    drill = plan_for("drilldown").plan
    kinds = [s.kind for s in drill.stages]
    ok = ok and kinds[:3] == [MERGE_DATA_ITEM, CHANGE_CHART_TYPE, ADD_DIMENSION]
    report("gallery fixtures (a)-(e) stage structures", ok)


def test_endpoint_exactness_and_deterministic_export(tmp_path):
    ok = True
    for name in fixture_names():
        tb = synth_for(name)
        plan = tb.plan_bundle.plan
        frame0 = render_svg(sample_scene(tb.timeline, 0))
        frame_last = render_svg(sample_scene(tb.timeline, plan.total))
        if frame0 != render_svg(tb.source_scene):
            ok = False
        if frame_last != render_svg(tb.target_scene):
            ok = False
    tb = synth_for("composite")
    bundle = tb.plan_bundle
    doc = plan_document(bundle.plan, bundle.transition)
    export(tb.timeline, bundle.plan, doc, tmp_path / "r1", fps=4, fmt="gif")
    export(tb.timeline, bundle.plan, doc, tmp_path / "r2", fps=4, fmt="gif")
    for path in sorted((tmp_path / "r1").rglob("*")):
        if path.is_file():
            twin = tmp_path / "r2" / path.relative_to(tmp_path / "r1")
            if path.read_bytes() != twin.read_bytes():
                ok = False
    report("endpoint exactness on all fixtures + byte-identical double export", ok)


def test_numerical_invariants():
    ok = True
    # pie validity at 101 samples during bar <-> pie morphs, both ways
    for src, dst in (("barV", "pie"), ("pie", "barV")):
        bundle = plan_transition(
            json.dumps(_doc_for_type(src)).encode(),
            json.dumps(_doc_for_type(dst)).encode(),
        )
        tb = synthesize(bundle)
        stage = next(
            s for s in bundle.plan.stages if s.kind == CHANGE_CHART_TYPE
        )
        for i in range(101):
            t = stage.start + stage.duration * i / 100
            scene = sample_scene(tb.timeline, t)
            sweeps = [
                m.geom["a1"] - m.geom["a0"]
                for m in scene.marks if m.shape == "sector"
            ]
            if any(s < -1e-9 for s in sweeps):
                ok = False
            if sum(sweeps) > 2 * math.pi + 1e-9:
                ok = False
    # easing endpoint and monotonicity checks on a 1001-point grid
    for fn in ("linear", "in-out"):
        grid = [ease(fn, i / 1000) for i in range(1001)]
        if grid[0] != 0.0 or grid[-1] != 1.0:
            ok = False
        if any(b < a - 1e-12 for a, b in zip(grid, grid[1:])):
            ok = False
    report("numerical invariants: pie sweep sums and easing grid", ok)
