"""Ordering, grouping and timing of transition units into a staged plan.

Ordering follows empirically preferred pairwise orders (see
``DEFAULT_PRIORITY_ROWS``) applied as a stable topological sort, with
removals partitioned before additions, chart-type changes in between,
axis hides/shows hugging the chart-type change, and legend/title
updates at the tail. Data-dependent units ride in their trigger's
stage. Timing is either animation-based (a fixed duration per animation
step) or a fixed total distributed equally over all steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import diff as units_mod
from .diff import (
    ADD_DATA_ITEM, ADD_DIMENSION, ADD_MEASURE, ADD_SERIES,
    AGGREGATE_DATA_ITEM, CHANGE_CHART_TYPE, CHANGE_TITLE,
    DATA_KINDS, DISAGGREGATE_DATA_ITEM, HIDE_LEGEND, HIDE_X_AXIS,
    HIDE_Y_AXIS, MERGE_DATA_ITEM, REMOVAL_SIDE_KINDS, REMOVE_DATA_ITEM,
    REMOVE_DIMENSION, REMOVE_MEASURE, REMOVE_SERIES, SHOW_LEGEND,
    SHOW_X_AXIS, SHOW_Y_AXIS, SORT, SPLIT_DATA_ITEM, VALUE_CHANGE,
)

DEFAULT_STEP_MS = 500
STANDING_BEFORE_DATA_MS = 1000
STANDING_BEFORE_CHART_CHANGE_MS = 500

#: The item-adjustment family: kinds whose tree edits reduce to adding
#: and removing data items, sharing one slot in the preference rows.
ADJUST_FAMILY = (
    ADD_DATA_ITEM, REMOVE_DATA_ITEM, MERGE_DATA_ITEM, SPLIT_DATA_ITEM,
    SORT, VALUE_CHANGE,
)

#: Preferred pairwise orders with their observed preference frequencies,
#: consumed here purely as ordering constants. Level-changing raw-value
#: units order with their dimension counterparts.
DEFAULT_PRIORITY_ROWS = (
    {"name": "withinDimension",
     "before": (REMOVE_DATA_ITEM,), "after": (ADD_DATA_ITEM,),
     "frequency": 0.747},
    {"name": "dimensionAdded",
     "before": ADJUST_FAMILY, "after": (ADD_DIMENSION, DISAGGREGATE_DATA_ITEM),
     "frequency": 0.688},
    {"name": "dimensionRemoved",
     "before": (REMOVE_DIMENSION, AGGREGATE_DATA_ITEM), "after": ADJUST_FAMILY,
     "frequency": 0.813},
    {"name": "measureAdded",
     "before": ADJUST_FAMILY, "after": (ADD_MEASURE,),
     "frequency": 0.667},
    {"name": "measureRemoved",
     "before": (REMOVE_MEASURE,), "after": ADJUST_FAMILY,
     "frequency": 0.563},
    {"name": "seriesAdded",
     "before": ADJUST_FAMILY, "after": (ADD_SERIES,),
     "frequency": 0.750},
    {"name": "seriesRemoved",
     "before": (REMOVE_SERIES,), "after": ADJUST_FAMILY,
     "frequency": 0.667},
)

FINAL_STAGE_KINDS = {SHOW_LEGEND, HIDE_LEGEND, CHANGE_TITLE}
AXIS_HIDE_KINDS = {HIDE_X_AXIS, HIDE_Y_AXIS}
AXIS_SHOW_KINDS = {SHOW_X_AXIS, SHOW_Y_AXIS}


class CyclicPriority(ValueError):
    pass


class NonPositiveTotal(ValueError):
    pass


@dataclass(frozen=True)
class PriorityTable:
    rows: tuple = DEFAULT_PRIORITY_ROWS
    flipped: tuple = ()

    def edges(self):
        """(before kind, after kind) pairs induced by the rows."""
        out = set()
        for row in self.rows:
            before, after = row["before"], row["after"]
            if row["name"] in self.flipped:
                before, after = after, before
            for x in before:
                for y in after:
                    if x != y:
                        out.add((x, y))
        return out

    def check_acyclic(self):
        edges = self.edges()
        nodes = {k for pair in edges for k in pair}
        adjacency = {n: [] for n in nodes}
        for x, y in edges:
            adjacency[x].append(y)
        state = {}

        def visit(n):
            state[n] = 1
            for m in adjacency[n]:
                if state.get(m) == 1:
                    raise CyclicPriority(f"priority cycle through '{m}'")
                if m not in state:
                    visit(m)
            state[n] = 2

        for n in nodes:
            if n not in state:
                visit(n)
        return self


def make_priority_table(flip=()):
    """Build and validate the priority table, optionally flipping rows."""
    names = {row["name"] for row in DEFAULT_PRIORITY_ROWS}
    for name in flip:
        if name not in names:
            raise ValueError(f"unknown priority row '{name}'")
    return PriorityTable(DEFAULT_PRIORITY_ROWS, tuple(flip)).check_acyclic()


def order_units(data_units, visual_units, dependents, table=None):
    """Produce the flat ordered unit list for staging.

    Data units are stably topo-sorted by the priority table (canonical
    order breaks ties), each data-dependent unit follows its trigger,
    the chart-type change separates removals from additions with axis
    hides/shows around it, and legend/title units go last.
    """
    table = table or make_priority_table()
    edges = table.edges()
    ordered_data = _stable_topo(data_units, edges)

    by_trigger = {}
    for dep in dependents:
        by_trigger.setdefault(dep.depends_on, []).append(dep)

    flat = []
    boundary = None
    for unit in ordered_data:
        if boundary is None and unit.kind not in REMOVAL_SIDE_KINDS:
            boundary = len(flat)
        flat.append(unit)
        flat.extend(by_trigger.get(unit.id, []))
    if boundary is None:
        boundary = len(flat)

    hide_axes = [u for u in visual_units if u.kind in AXIS_HIDE_KINDS]
    show_axes = [u for u in visual_units if u.kind in AXIS_SHOW_KINDS]
    chart_change = [u for u in visual_units if u.kind == CHANGE_CHART_TYPE]
    trailing = [u for u in visual_units if u.kind in (SHOW_LEGEND, HIDE_LEGEND)]
    trailing += [u for u in visual_units if u.kind == CHANGE_TITLE]

    middle = hide_axes + chart_change + show_axes
    return flat[:boundary] + middle + flat[boundary:] + trailing


def _stable_topo(units, edges):
    remaining = list(units)
    ordered = []
    while remaining:
        picked = None
        for candidate in remaining:
            ready = all(
                (other.kind, candidate.kind) not in edges
                for other in remaining
                if other is not candidate
            )
            if ready:
                picked = candidate
                break
        if picked is None:
            raise CyclicPriority("units cannot be ordered: cyclic preferences")
        remaining.remove(picked)
        ordered.append(picked)
    return ordered


@dataclass
class Stage:
    id: str
    units: list
    kind: str  # primary kind of the stage
    steps: int = 1
    start: int = 0
    duration: int = 0
    standing_before: int = 0
    easing: str = "linear"
    effects: dict = field(default_factory=dict)

    def unit_ids(self):
        return [u.id for u in self.units]

    def kind_labels(self):
        labels = []
        for u in self.units:
            if u.kind not in labels:
                labels.append(u.kind)
        return labels


def group_units(ordered):
    """Merge the flat unit list into stages.

    Adjacent units of the same kind animate together in one stage, with
    their data-dependent units riding along; paired axis hides (and
    shows) share a stage; legend- and title-related trailing units merge
    into a single final stage.
    """
    stages = []
    current = None

    def primary_kind(unit):
        return unit.kind

    def open_stage(unit):
        nonlocal current
        current = Stage(id="", units=[unit], kind=unit.kind)
        stages.append(current)

    for unit in ordered:
        if unit.kind in units_mod.DEPENDENT_KINDS and current is not None:
            current.units.append(unit)
            continue
        if current is not None:
            if unit.kind == current.kind:
                current.units.append(unit)
                continue
            both_hide = unit.kind in AXIS_HIDE_KINDS and current.kind in AXIS_HIDE_KINDS
            both_show = unit.kind in AXIS_SHOW_KINDS and current.kind in AXIS_SHOW_KINDS
            both_final = unit.kind in FINAL_STAGE_KINDS and current.kind in FINAL_STAGE_KINDS
            if both_hide or both_show or both_final:
                current.units.append(unit)
                continue
        open_stage(unit)
    for i, stage in enumerate(stages):
        stage.id = f"s{i}"
    return stages


@dataclass
class TimingConfig:
    mode: str = "animation"  # animation | fixed
    total_ms: int = 0
    step_ms: int = DEFAULT_STEP_MS
    easing: str = "linear"
    effect_overrides: dict = field(default_factory=dict)
    flip_preferences: tuple = ()

    def to_dict(self):
        out = {
            "timing": self.mode if self.mode == "animation" else f"fixed:{self.total_ms}",
            "stepMs": self.step_ms,
            "easing": self.easing,
            "effects": dict(self.effect_overrides),
        }
        if self.flip_preferences:
            out["flipPreferences"] = list(self.flip_preferences)
        return out


@dataclass
class TransitionPlan:
    stages: list
    total: int
    config: TimingConfig

    def stage_by_id(self, stage_id):
        for stage in self.stages:
            if stage.id == stage_id:
                return stage
        return None


def assign_timing(stages, config, steps_of):
    """Attach start times and durations to the staged units.

    ``steps_of`` maps a stage to its animation step count. In animation
    mode every step lasts ``step_ms``; in fixed mode the total animated
    time is divided equally over all steps with the remainder on the
    last stage. Standing time is inserted before every data stage and
    before the chart-type change.
    """
    if config.mode == "fixed" and config.total_ms <= 0:
        raise NonPositiveTotal(f"fixed total must be positive, got {config.total_ms}")

    for stage in stages:
        stage.steps = max(1, steps_of(stage))
        stage.easing = config.easing

    total_steps = sum(stage.steps for stage in stages)
    clock = 0
    for i, stage in enumerate(stages):
        stage.standing_before = _standing_before(stage)
        if config.mode == "animation":
            stage.duration = config.step_ms * stage.steps
        else:
            per_step = config.total_ms // total_steps if total_steps else 0
            stage.duration = per_step * stage.steps
            if i == len(stages) - 1:
                stage.duration += config.total_ms - per_step * total_steps
        clock += stage.standing_before
        stage.start = clock
        clock += stage.duration
    return TransitionPlan(stages=stages, total=clock, config=config)


def _standing_before(stage):
    first = stage.units[0]
    if first.kind in DATA_KINDS:
        return STANDING_BEFORE_DATA_MS
    if first.kind == CHANGE_CHART_TYPE:
        return STANDING_BEFORE_CHART_CHANGE_MS
    return 0


def build_plan(transition, config, steps_of, table=None):
    """Order, group and time a transition in one call."""
    table = table or make_priority_table(config.flip_preferences)
    ordered = order_units(
        transition.data_units, transition.visual_units,
        transition.dependent_units, table,
    )
    stages = group_units(ordered)
    return assign_timing(stages, config, steps_of)
