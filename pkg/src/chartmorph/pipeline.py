"""End-to-end orchestration: documents in, plan and timeline out.

The stage-boundary states are computed by replaying the edit script's
operations in stage order, so every stage boundary is itself a valid
chart; scenes come from laying those states out.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .diff import (
    CHANGE_CHART_TYPE, CHANGE_TITLE, DATA_KINDS, HIDE_LEGEND, HIDE_X_AXIS,
    HIDE_Y_AXIS, SHOW_LEGEND, SHOW_X_AXIS, SHOW_Y_AXIS,
    apply_op, identify_transition,
)
from .document import parse_chart_pair
from .effects import (
    StageContext, plan_mark_morph, resolve_binding, step_count,
    synthesize_keyframes,
)
from .layout import DEFAULT_CANVAS, ChartStyle, layout_chart
from .sequence import (
    TimingConfig, assign_timing, group_units, make_priority_table, order_units,
)
from .tree import build_tree, tree_equal


class PipelineError(RuntimeError):
    pass


@dataclass
class PlanBundle:
    source_table: object
    source_spec: object
    target_table: object
    target_spec: object
    source_tree: object
    target_tree: object
    transition: object
    plan: object
    config: TimingConfig

    def document(self):
        return plan_document(self.plan, self.transition)


@dataclass
class TimelineBundle:
    plan_bundle: PlanBundle
    contexts: list
    timeline: object
    source_scene: object
    target_scene: object


def parse_config(options=None):
    """TimingConfig from a flat options mapping (CLI flags, request body)."""
    options = dict(options or {})
    timing = options.get("timing", "animation")
    mode, total = "animation", 0
    if timing.startswith("fixed:"):
        mode = "fixed"
        try:
            total = int(timing.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad fixed timing '{timing}', expected fixed:<ms>")
    elif timing != "animation":
        raise ValueError(f"timing must be 'animation' or 'fixed:<ms>', got '{timing}'")
    step_ms = int(options.get("stepMs", 500))
    if step_ms <= 0:
        raise ValueError("stepMs must be positive")
    easing = options.get("easing", "linear")
    if easing not in ("linear", "in-out"):
        raise ValueError(f"easing must be 'linear' or 'in-out', got '{easing}'")
    effects = dict(options.get("effects", {}))
    flips = tuple(options.get("flipPreferences", ()))
    return TimingConfig(
        mode=mode, total_ms=total, step_ms=step_ms, easing=easing,
        effect_overrides=effects, flip_preferences=flips,
    )


def plan_transition(source_raw, target_raw, config=None):
    """Parse both documents, identify units, and build the timed plan."""
    config = config or TimingConfig()
    source_table, source_spec, target_table, target_spec = parse_chart_pair(
        source_raw, target_raw
    )
    source_tree = build_tree(source_table, source_spec)
    target_tree = build_tree(target_table, target_spec)
    transition = identify_transition(
        source_tree, source_spec, target_tree, target_spec
    )
    table = make_priority_table(config.flip_preferences)
    ordered = order_units(
        transition.data_units, transition.visual_units,
        transition.dependent_units, table,
    )
    stages = group_units(ordered)

    chart_type = source_spec.chart_type
    steps = {}
    for stage in stages:
        if stage.kind == CHANGE_CHART_TYPE:
            steps[stage.id] = step_count(
                stage.kind, "morph", source_spec.chart_type, target_spec.chart_type
            )
            stage.effects = {stage.kind: "morph"}
            chart_type = target_spec.chart_type
            continue
        effects = {}
        for unit in stage.units:
            if unit.kind not in effects:
                effects[unit.kind] = resolve_binding(
                    unit.kind, chart_type, config.effect_overrides
                )
        stage.effects = effects
        steps[stage.id] = step_count(stage.kind, effects[stage.kind])
    plan = assign_timing(stages, config, lambda s: steps[s.id])
    return PlanBundle(
        source_table, source_spec, target_table, target_spec,
        source_tree, target_tree, transition, plan, config,
    )


def stage_states(bundle, canvas=DEFAULT_CANVAS):
    """Boundary scenes for every stage by replaying units in stage order."""
    source_spec = bundle.source_spec
    target_spec = bundle.target_spec
    script = bundle.transition.script
    tree = bundle.source_tree.clone()
    chart_type = source_spec.chart_type
    show_x, show_y = source_spec.show_x_axis, source_spec.show_y_axis
    show_legend = source_spec.show_legend
    title = source_spec.title

    def current_style():
        return ChartStyle(chart_type, show_x, show_y, show_legend, title)

    contexts = []
    scene = layout_chart(tree, current_style(), canvas)
    source_scene = scene
    tree_snapshot = tree.clone()
    for stage in bundle.plan.stages:
        before_scene = scene
        before_tree = tree_snapshot
        morph_plan = None
        for unit in stage.units:
            if unit.kind in DATA_KINDS:
                op = script.op_for(unit.id)
                if op is not None:
                    apply_op(tree, op)
            elif unit.kind == CHANGE_CHART_TYPE:
                morph_plan = plan_mark_morph(chart_type, unit.payload["to"])
                chart_type = unit.payload["to"]
            elif unit.kind == SHOW_X_AXIS:
                show_x = True
            elif unit.kind == HIDE_X_AXIS:
                show_x = False
            elif unit.kind == SHOW_Y_AXIS:
                show_y = True
            elif unit.kind == HIDE_Y_AXIS:
                show_y = False
            elif unit.kind == SHOW_LEGEND:
                show_legend = True
            elif unit.kind == HIDE_LEGEND:
                show_legend = False
            elif unit.kind == CHANGE_TITLE:
                title = unit.payload["to"]
        tree_snapshot = tree.clone()
        scene = layout_chart(tree, current_style(), canvas)
        contexts.append(StageContext(
            stage=stage,
            scene_before=before_scene,
            scene_after=scene,
            tree_before=before_tree,
            tree_after=tree_snapshot,
            morph_plan=morph_plan,
        ))
    if not tree_equal(tree, bundle.target_tree):
        raise PipelineError("stage replay did not reach the target tree")
    return contexts, source_scene, scene


def synthesize(bundle, canvas=DEFAULT_CANVAS):
    """Full keyframe timeline for a planned transition."""
    contexts, source_scene, target_scene = stage_states(bundle, canvas)
    timeline = synthesize_keyframes(
        bundle.plan, contexts, source_scene, target_scene,
        overrides=bundle.config.effect_overrides,
        easing=bundle.config.easing,
    )
    return TimelineBundle(bundle, contexts, timeline, source_scene, target_scene)


def plan_document(plan, transition):
    """The plan's canonical JSON-ready form; field order is stable."""
    return {
        "stages": [
            {
                "id": stage.id,
                "unitIds": stage.unit_ids(),
                "kindLabels": stage.kind_labels(),
                "start": stage.start,
                "duration": stage.duration,
                "standingBefore": stage.standing_before,
                "easing": stage.easing,
                "effects": getattr(stage, "effects", {}),
                "steps": stage.steps,
            }
            for stage in plan.stages
        ],
        "total": plan.total,
        "config": plan.config.to_dict(),
        "units": [unit.to_dict() for unit in transition.all_units()],
    }


def plan_json(doc):
    return json.dumps(doc, indent=2) + "\n"


def scene_document(scene):
    return {
        "chartType": scene.chart_type,
        "marks": [
            {
                "id": m.id, "shape": m.shape, "geom": m.geom,
                "fill": m.fill, "opacity": m.opacity, "layer": m.layer,
            }
            for m in scene.all_marks()
        ],
    }


def timeline_document(timeline):
    """Timeline as data, for clients that sample playback themselves."""
    return {
        "total": timeline.total,
        "easing": timeline.easing,
        "canvas": {
            "width": timeline.canvas.width,
            "height": timeline.canvas.height,
        },
        "stages": [
            {"id": sid, "start": start, "end": end}
            for sid, start, end in timeline.stage_spans
        ],
        "tracks": {
            mark_id: {
                "layer": timeline.layers.get(mark_id, "data"),
                "keyframes": [
                    {
                        "t": kf.t, "shape": kf.shape, "geom": kf.geom,
                        "fill": kf.fill, "opacity": kf.opacity,
                    }
                    for kf in track
                ],
            }
            for mark_id, track in sorted(timeline.tracks.items())
        },
    }
