"""chartmorph: staged animated transitions between statistical charts.

Pipeline: parse a chart-pair, model each chart as a tree, identify
transition units by tree diffing and spec comparison, compose them into
an ordered, grouped, timed plan, synthesize per-mark keyframes, and
render/export the resulting animation.
"""

from .diff import (
    EditScript, Transition, TransitionUnit, detect_visual_units,
    diff_trees, find_aligned_level, identify_transition, replay,
)
from .document import (
    ChartSpec, DataTable, DocumentError, parse_chart_document,
    parse_chart_pair, serialize_document, validate_spec,
)
from .effects import (
    KeyframeTimeline, UnsupportedCombination, default_binding, ease,
    plan_mark_morph, step_count, synthesize_keyframes,
)
from .layout import Canvas, ChartStyle, Scene, axis_domain, layout_chart, nice_ceil
from .pipeline import (
    parse_config, plan_document, plan_transition, synthesize,
    timeline_document,
)
from .render import render_svg, sample_scene
from .sequence import (
    TimingConfig, TransitionPlan, assign_timing, group_units,
    make_priority_table, order_units,
)
from .tree import ChartTree, build_tree, dump_tree, tree_equal

__version__ = "0.1.0"

__all__ = [
    "Canvas", "ChartSpec", "ChartStyle", "ChartTree", "DataTable",
    "DocumentError", "EditScript", "KeyframeTimeline", "Scene",
    "TimingConfig", "Transition", "TransitionPlan", "TransitionUnit",
    "UnsupportedCombination", "axis_domain", "build_tree",
    "default_binding", "detect_visual_units", "diff_trees", "dump_tree",
    "ease", "find_aligned_level", "group_units", "identify_transition",
    "layout_chart", "make_priority_table", "nice_ceil", "order_units",
    "parse_chart_document", "parse_chart_pair", "parse_config",
    "plan_document", "plan_mark_morph", "plan_transition", "render_svg",
    "replay", "sample_scene", "serialize_document", "step_count",
    "synthesize", "synthesize_keyframes", "timeline_document",
    "tree_equal", "validate_spec", "assign_timing",
]
