import pytest

from chartmorph.diff import (
    ADD_DATA_ITEM, ADD_DIMENSION, ADD_MEASURE, ADD_SERIES, CHANGE_CHART_TYPE,
    CHANGE_TITLE, HIDE_LEGEND, HIDE_X_AXIS, REMOVE_DATA_ITEM,
    REMOVE_DIMENSION, REMOVE_MEASURE, REMOVE_SERIES, RESCALE_X_AXIS,
    SHOW_Y_AXIS, SORT, TransitionUnit,
)
from chartmorph.sequence import (
    CyclicPriority, NonPositiveTotal, PriorityTable, TimingConfig,
    assign_timing, group_units, make_priority_table, order_units,
)

from conftest import plan_for


def units_of(*kinds):
    units = [TransitionUnit(kind) for kind in kinds]
    for i, unit in enumerate(units):
        unit.id = f"u{i}"
    return units


def ordered_kinds(*kinds):
    return [u.kind for u in order_units(units_of(*kinds), [], [])]


# one test per preference row, each fed in the dispreferred order
@pytest.mark.parametrize("given,expected", [
    ((ADD_DATA_ITEM, REMOVE_DATA_ITEM), [REMOVE_DATA_ITEM, ADD_DATA_ITEM]),
    ((ADD_DIMENSION, ADD_DATA_ITEM), [ADD_DATA_ITEM, ADD_DIMENSION]),
    ((REMOVE_DATA_ITEM, REMOVE_DIMENSION), [REMOVE_DIMENSION, REMOVE_DATA_ITEM]),
    ((ADD_MEASURE, REMOVE_DATA_ITEM), [REMOVE_DATA_ITEM, ADD_MEASURE]),
    ((ADD_DATA_ITEM, REMOVE_MEASURE), [REMOVE_MEASURE, ADD_DATA_ITEM]),
    ((ADD_SERIES, ADD_DATA_ITEM), [ADD_DATA_ITEM, ADD_SERIES]),
    ((ADD_DATA_ITEM, REMOVE_SERIES), [REMOVE_SERIES, ADD_DATA_ITEM]),
])
def test_priority_rows(given, expected):
    assert ordered_kinds(*given) == expected


def test_three_way_ordering():
    assert ordered_kinds(ADD_DIMENSION, ADD_DATA_ITEM, REMOVE_DATA_ITEM) == [
        REMOVE_DATA_ITEM, ADD_DATA_ITEM, ADD_DIMENSION,
    ]


def test_default_table_is_acyclic():
    make_priority_table()


def test_flipped_preference_changes_order():
    table = make_priority_table(flip=("measureRemoved",))
    units = units_of(REMOVE_MEASURE, ADD_DATA_ITEM)
    ordered = order_units(units, [], [], table)
    assert [u.kind for u in ordered] == [ADD_DATA_ITEM, REMOVE_MEASURE]


def test_unknown_flip_rejected():
    with pytest.raises(ValueError):
        make_priority_table(flip=("bogus",))


def test_custom_cyclic_table_detected():
    rows = (
        {"name": "a", "before": (ADD_DATA_ITEM,), "after": (REMOVE_DATA_ITEM,), "frequency": 0.5},
        {"name": "b", "before": (REMOVE_DATA_ITEM,), "after": (ADD_DATA_ITEM,), "frequency": 0.5},
    )
    with pytest.raises(CyclicPriority):
        PriorityTable(rows).check_acyclic()


def test_chart_change_sits_between_removals_and_additions():
    data = units_of(REMOVE_DATA_ITEM, ADD_DATA_ITEM)
    visual = [TransitionUnit(CHANGE_CHART_TYPE, {"from": "barV", "to": "pie"})]
    visual[0].id = "v0"
    ordered = order_units(data, visual, [])
    assert [u.kind for u in ordered] == [
        REMOVE_DATA_ITEM, CHANGE_CHART_TYPE, ADD_DATA_ITEM,
    ]


def test_axis_units_hug_the_chart_change():
    data = units_of(REMOVE_DATA_ITEM, ADD_DATA_ITEM)
    visual = [
        TransitionUnit(SHOW_Y_AXIS), TransitionUnit(CHANGE_CHART_TYPE),
        TransitionUnit(HIDE_X_AXIS), TransitionUnit(CHANGE_TITLE),
        TransitionUnit(HIDE_LEGEND),
    ]
    for i, unit in enumerate(visual):
        unit.id = f"v{i}"
    ordered = order_units(data, visual, [])
    assert [u.kind for u in ordered] == [
        REMOVE_DATA_ITEM, HIDE_X_AXIS, CHANGE_CHART_TYPE, SHOW_Y_AXIS,
        ADD_DATA_ITEM, HIDE_LEGEND, CHANGE_TITLE,
    ]


def test_dependents_follow_their_triggers():
    data = units_of(REMOVE_DATA_ITEM, ADD_DATA_ITEM)
    dep = TransitionUnit(RESCALE_X_AXIS, {}, depends_on="u0")
    dep.id = "d0"
    ordered = order_units(data, [], [dep])
    assert [u.id for u in ordered] == ["u0", "d0", "u1"]


def test_grouping_merges_adjacent_same_kind():
    units = units_of(REMOVE_DATA_ITEM, REMOVE_DATA_ITEM, REMOVE_DATA_ITEM)
    stages = group_units(order_units(units, [], []))
    assert len(stages) == 1
    assert stages[0].unit_ids() == ["u0", "u1", "u2"]


def test_legend_and_title_units_share_final_stage():
    data = units_of(REMOVE_DATA_ITEM)
    visual = [TransitionUnit(HIDE_LEGEND), TransitionUnit(CHANGE_TITLE)]
    for i, unit in enumerate(visual):
        unit.id = f"v{i}"
    stages = group_units(order_units(data, visual, []))
    assert len(stages) == 2
    assert stages[-1].kind_labels() == [HIDE_LEGEND, CHANGE_TITLE]


def test_single_unit_yields_single_stage():
    stages = group_units(order_units(units_of(SORT), [], []))
    assert len(stages) == 1


def test_grouping_idempotent():
    units = units_of(REMOVE_DATA_ITEM, REMOVE_DATA_ITEM, ADD_DATA_ITEM)
    stages = group_units(order_units(units, [], []))
    flattened = [u for stage in stages for u in stage.units]
    again = group_units(flattened)
    assert [s.unit_ids() for s in again] == [s.unit_ids() for s in stages]


def steps_one(stage):
    return 1


def test_animation_timing_and_standing_times():
    data = units_of(REMOVE_DATA_ITEM, ADD_DATA_ITEM)
    visual = [TransitionUnit(CHANGE_CHART_TYPE, {"from": "barV", "to": "barH"})]
    visual[0].id = "v0"
    stages = group_units(order_units(data, visual, []))
    plan = assign_timing(
        stages, TimingConfig(),
        lambda s: 2 if s.kind == CHANGE_CHART_TYPE else 1,
    )
    s0, s1, s2 = plan.stages
    assert (s0.standing_before, s0.duration) == (1000, 500)
    assert (s1.standing_before, s1.duration) == (500, 1000)
    assert (s2.standing_before, s2.duration) == (1000, 500)
    assert s1.start == s0.start + s0.duration + s1.standing_before
    assert s2.start == s1.start + s1.duration + s2.standing_before
    assert plan.total == s2.start + s2.duration
    assert plan.total == 1000 + 500 + 500 + 1000 + 1000 + 500


def test_fixed_timing_distributes_equally():
    stages = group_units(order_units(
        units_of(REMOVE_DATA_ITEM, ADD_DATA_ITEM, ADD_DIMENSION, ADD_MEASURE), [], []
    ))
    assert len(stages) == 4
    plan = assign_timing(stages, TimingConfig(mode="fixed", total_ms=2000), steps_one)
    assert [s.duration for s in plan.stages] == [500, 500, 500, 500]
    assert sum(s.duration for s in plan.stages) == 2000


def test_fixed_timing_remainder_goes_to_last_stage():
    stages = group_units(order_units(
        units_of(REMOVE_DATA_ITEM, ADD_DATA_ITEM, ADD_DIMENSION), [], []
    ))
    plan = assign_timing(stages, TimingConfig(mode="fixed", total_ms=2000), steps_one)
    assert [s.duration for s in plan.stages] == [666, 666, 668]
    assert sum(s.duration for s in plan.stages) == 2000


def test_fixed_timing_rejects_non_positive_total():
    stages = group_units(order_units(units_of(SORT), [], []))
    with pytest.raises(NonPositiveTotal):
        assign_timing(stages, TimingConfig(mode="fixed", total_ms=0), steps_one)


def test_each_unit_appears_in_exactly_one_stage(composite_bundle):
    plan = composite_bundle.plan
    seen = [uid for stage in plan.stages for uid in stage.unit_ids()]
    expected = {u.id for u in composite_bundle.transition.all_units()}
    assert sorted(seen) == sorted(expected)
    assert len(seen) == len(set(seen))


def test_plan_document_deterministic():
    import json

    a = plan_for("composite").document()
    b = plan_for("composite").document()
    assert json.dumps(a) == json.dumps(b)


def test_custom_step_duration():
    bundle = plan_for("sorting", {"stepMs": 300})
    sort_stage = next(s for s in bundle.plan.stages if s.kind == SORT)
    assert sort_stage.duration == 300
