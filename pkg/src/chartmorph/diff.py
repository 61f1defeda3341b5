"""Transition unit identification between two chart trees.

Data changes come from a tree edit procedure anchored at the aligned
level (the deepest level at which both trees' descriptors still match):
node removals at or above the aligned level, level removals below it
(bottom up), level additions (top down), node additions, then in-place
detections for sorting, value changes and grouped merges/splits.
Visual changes come from spec comparison, and data-dependent visual
units (axis rescales, legend updates) are derived from the data units.

Every data unit carries a tree operation; replaying the script's
operations on the source tree yields the target tree. Operations are
structure-aware so they can also be applied in the sequencer's stage
order, where removals always precede additions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .layout import axis_domain, legend_entries
from .tree import DIM, MEASURE, RAW, Level, Node, tree_equal, values_close

# Data change kinds
ADD_DIMENSION = "AddDimension"
REMOVE_DIMENSION = "RemoveDimension"
ADD_MEASURE = "AddMeasure"
REMOVE_MEASURE = "RemoveMeasure"
ADD_SERIES = "AddSeries"
REMOVE_SERIES = "RemoveSeries"
ADD_DATA_ITEM = "AddDataItem"
REMOVE_DATA_ITEM = "RemoveDataItem"
SPLIT_DATA_ITEM = "SplitDataItem"
MERGE_DATA_ITEM = "MergeDataItem"
SORT = "Sort"
VALUE_CHANGE = "ValueChange"
AGGREGATE_DATA_ITEM = "AggregateDataItem"
DISAGGREGATE_DATA_ITEM = "DisaggregateDataItem"

# Visual-related kinds
SHOW_X_AXIS = "ShowXAxis"
HIDE_X_AXIS = "HideXAxis"
SHOW_Y_AXIS = "ShowYAxis"
HIDE_Y_AXIS = "HideYAxis"
SHOW_LEGEND = "ShowLegend"
HIDE_LEGEND = "HideLegend"
CHANGE_CHART_TYPE = "ChangeChartType"
CHANGE_TITLE = "ChangeTitle"

# Data-dependent kinds
RESCALE_X_AXIS = "RescaleXAxis"
RESCALE_Y_AXIS = "RescaleYAxis"
UPDATE_LEGEND = "UpdateLegend"

DATA_KINDS = {
    ADD_DIMENSION, REMOVE_DIMENSION, ADD_MEASURE, REMOVE_MEASURE,
    ADD_SERIES, REMOVE_SERIES, ADD_DATA_ITEM, REMOVE_DATA_ITEM,
    SPLIT_DATA_ITEM, MERGE_DATA_ITEM, SORT, VALUE_CHANGE,
    AGGREGATE_DATA_ITEM, DISAGGREGATE_DATA_ITEM,
}
VISUAL_KINDS = {
    SHOW_X_AXIS, HIDE_X_AXIS, SHOW_Y_AXIS, HIDE_Y_AXIS,
    SHOW_LEGEND, HIDE_LEGEND, CHANGE_CHART_TYPE, CHANGE_TITLE,
}
DEPENDENT_KINDS = {RESCALE_X_AXIS, RESCALE_Y_AXIS, UPDATE_LEGEND}

#: Data kinds that take marks away; the sequencer partitions these
#: before everything that adds or updates marks.
REMOVAL_SIDE_KINDS = {
    REMOVE_DIMENSION, REMOVE_MEASURE, REMOVE_SERIES, REMOVE_DATA_ITEM,
    MERGE_DATA_ITEM, AGGREGATE_DATA_ITEM,
}

RESCALE_X_TRIGGERS = {
    ADD_SERIES, REMOVE_SERIES, ADD_DATA_ITEM, REMOVE_DATA_ITEM,
    MERGE_DATA_ITEM, SPLIT_DATA_ITEM, ADD_DIMENSION, REMOVE_DIMENSION,
}
RESCALE_Y_TRIGGERS = {VALUE_CHANGE, ADD_MEASURE, REMOVE_MEASURE}
UPDATE_LEGEND_TRIGGERS = {
    ADD_DIMENSION, REMOVE_DIMENSION, ADD_SERIES, REMOVE_SERIES,
    ADD_MEASURE, REMOVE_MEASURE,
}


class AmbiguousClassification(ValueError):
    pass


@dataclass
class TransitionUnit:
    kind: str
    payload: dict = field(default_factory=dict)
    depends_on: str | None = None
    id: str = ""

    def to_dict(self):
        out = {"id": self.id, "kind": self.kind, "payload": self.payload}
        if self.depends_on is not None:
            out["dependsOn"] = self.depends_on
        return out


@dataclass
class EditScript:
    entries: list  # (TransitionUnit, op dict or None)
    aligned_level: int

    @property
    def units(self):
        return [unit for unit, _ in self.entries]

    def op_for(self, unit_id):
        for unit, op in self.entries:
            if unit.id == unit_id:
                return op
        return None

    def is_empty(self):
        return not self.entries


def node_to_dict(node):
    out = {"label": node.label}
    if node.value is not None:
        out["value"] = node.value
    if node.children:
        out["children"] = [node_to_dict(c) for c in node.children]
    return out


def node_from_dict(data):
    return Node(
        data["label"],
        [node_from_dict(c) for c in data.get("children", [])],
        data.get("value"),
    )


def levels_to_list(levels):
    return [{"kind": lv.kind, "column": lv.column} for lv in levels]


def levels_from_list(data):
    return tuple(Level(e["kind"], e.get("column")) for e in data)


def find_aligned_level(a, b):
    """Deepest level index at which both trees' descriptors still match.

    The root counts as level 0, so two trees with nothing else in common
    align at 0.
    """
    aligned = 0
    for la, lb in zip(a.levels, b.levels):
        if la == lb:
            aligned += 1
        else:
            break
    return aligned


def _collapse_value(values, aggregate):
    if not values:
        return 0.0
    if aggregate == "avg":
        return float(sum(values) / len(values))
    return float(sum(values))


def _collect_measure_values(node, levels_below):
    """Leaf values per measure label for the subtree under ``node``.

    ``levels_below`` describes the levels of ``node``'s descendants,
    outermost first.
    """
    values = {}
    order = []

    def note(label, vals):
        if label not in values:
            values[label] = []
            order.append(label)
        values[label].extend(vals)

    def walk(n, i):
        level = levels_below[i]
        if level.kind == MEASURE:
            for c in n.children:
                if c.children:
                    note(c.label, [rc.value for rc in c.children])
                else:
                    note(c.label, [c.value])
        else:
            for c in n.children:
                walk(c, i + 1)

    walk(node, 0)
    return order, values


def _collapse_below(node, levels_below, aggregates):
    """Collapse a node's subtree. Returns (children, value).

    Above the measure level this yields one aggregated leaf per measure;
    at the measure level (collapsing a raw level) it yields a plain leaf
    value.
    """
    if levels_below and levels_below[0].kind == RAW:
        vals = [c.value for c in node.children]
        return [], _collapse_value(vals, aggregates.get(node.label, "sum"))
    order, values = _collect_measure_values(node, levels_below)
    children = [
        Node(m, value=_collapse_value(values[m], aggregates.get(m, "sum")))
        for m in order
    ]
    return children, None


def _adapt_subtree(payload, payload_levels, current_levels, aggregates):
    """Fit an inserted subtree to the tree's current structure.

    When the current tree does not yet carry all of the target's deeper
    levels (they are inserted by later stages), the payload is collapsed
    to aggregated measure leaves.
    """
    node = node_from_dict(payload)
    if list(payload_levels) == list(current_levels):
        return node
    children, value = _collapse_below(node, payload_levels, aggregates)
    return Node(node.label, children, value)


def apply_op(tree, op):
    """Apply one tree operation in place."""
    kind = op["op"]
    if kind == "remove_nodes":
        for path in op["paths"]:
            parent = tree.node_by_path(tuple(path[:-1]))
            if parent is None:
                continue
            parent.children = [c for c in parent.children if c.label != path[-1]]
    elif kind == "insert_nodes":
        level_index = op["level"]
        payload_levels = levels_from_list(op["payloadLevels"])
        current_levels = tree.levels[level_index:]
        for entry in op["inserts"]:
            parent = tree.node_by_path(tuple(entry["parent"]))
            if parent is None or parent.child(entry["node"]["label"]) is not None:
                continue
            node = _adapt_subtree(
                entry["node"], payload_levels, current_levels, op.get("aggregates", {})
            )
            rank = {label: i for i, label in enumerate(entry["finalOrder"])}
            my_rank = rank.get(node.label, len(rank))
            position = len(parent.children)
            for i, child in enumerate(parent.children):
                if rank.get(child.label, len(rank)) > my_rank:
                    position = i
                    break
            parent.children.insert(position, node)
    elif kind == "remove_level":
        level_index = op["level"]
        replacements = {
            tuple(e["parent"]): e for e in op["replacements"]
        }
        parents = (
            [((), tree.root)] if level_index == 1 else tree.nodes_at(level_index - 1)
        )
        levels_below = tree.levels[level_index - 1:]
        for path, parent in parents:
            entry = replacements.get(path)
            if entry is not None:
                parent.children = [node_from_dict(c) for c in entry["children"]]
                parent.value = entry.get("value")
            else:
                children, value = _collapse_below(
                    parent, levels_below, op.get("aggregates", {})
                )
                parent.children = children
                parent.value = value
        tree.levels = tuple(
            lv for i, lv in enumerate(tree.levels) if i != level_index - 1
        )
    elif kind == "insert_level":
        level_index = op["level"]
        descriptor = Level(op["levelKind"], op.get("column"))
        replacements = {tuple(e["parent"]): e for e in op["replacements"]}
        parents = (
            [((), tree.root)] if level_index == 1 else tree.nodes_at(level_index - 1)
        )
        for path, parent in parents:
            entry = replacements.get(path)
            if entry is not None:
                parent.children = [node_from_dict(c) for c in entry["children"]]
                parent.value = entry.get("value")
        tree.levels = tuple(
            list(tree.levels[: level_index - 1])
            + [descriptor]
            + list(tree.levels[level_index - 1:])
        )
    elif kind == "merge_nodes":
        level_index = op["level"]
        payload_levels = levels_from_list(op["payloadLevels"])
        current_levels = tree.levels[level_index:]
        for entry in op["merges"]:
            parent = tree.node_by_path(tuple(entry["parent"]))
            if parent is None:
                continue
            members = set(entry["members"])
            position = min(
                (i for i, c in enumerate(parent.children) if c.label in members),
                default=len(parent.children),
            )
            merged = _adapt_subtree(
                entry["node"], payload_levels, current_levels, op.get("aggregates", {})
            )
            parent.children = [c for c in parent.children if c.label not in members]
            parent.children.insert(min(position, len(parent.children)), merged)
    elif kind == "split_nodes":
        level_index = op["level"]
        payload_levels = levels_from_list(op["payloadLevels"])
        current_levels = tree.levels[level_index:]
        for entry in op["splits"]:
            parent = tree.node_by_path(tuple(entry["parent"]))
            if parent is None:
                continue
            position = len(parent.children)
            for i, child in enumerate(parent.children):
                if child.label == entry["member"]:
                    position = i
                    break
            parent.children = [c for c in parent.children if c.label != entry["member"]]
            for offset, payload in enumerate(entry["nodes"]):
                part = _adapt_subtree(
                    payload, payload_levels, current_levels, op.get("aggregates", {})
                )
                parent.children.insert(min(position + offset, len(parent.children)), part)
    elif kind == "remove_measure":
        mlevel = tree.measure_level()
        for _, parent in (
            [((), tree.root)] if mlevel == 1 else tree.nodes_at(mlevel - 1)
        ):
            parent.children = [c for c in parent.children if c.label != op["label"]]
    elif kind == "reorder":
        for entry in op["orders"]:
            parent = tree.node_by_path(tuple(entry["parent"]))
            if parent is None:
                continue
            rank = {label: i for i, label in enumerate(entry["order"])}
            parent.children.sort(key=lambda c: rank.get(c.label, len(rank)))
    elif kind == "set_values":
        for entry in op["changes"]:
            node = tree.node_by_path(tuple(entry["path"]))
            if node is not None:
                node.value = entry["after"]
    else:
        raise ValueError(f"unknown tree op '{kind}'")
    return tree


def replay(tree, script):
    """Apply the script's operations to a copy of the tree."""
    work = tree.clone()
    for unit, op in script.entries:
        if op is not None:
            apply_op(work, op)
    return work


def classify_node_edit(tree, level_index, whole_series):
    """Map a structural node edit at a level to its removal-side kind.

    A lowest-dimension value edited under every parent is a series; a
    measure node is a measure; any other node is a data item. Additions
    use the Add counterpart of the returned kind.
    """
    level = tree.levels[level_index - 1]
    if level.kind == MEASURE:
        return REMOVE_MEASURE
    if level.kind == RAW:
        return REMOVE_DATA_ITEM
    if level_index == tree.lowest_dimension_level() and whole_series:
        return REMOVE_SERIES
    return REMOVE_DATA_ITEM


_ADD_OF = {
    REMOVE_SERIES: ADD_SERIES,
    REMOVE_MEASURE: ADD_MEASURE,
    REMOVE_DATA_ITEM: ADD_DATA_ITEM,
    REMOVE_DIMENSION: ADD_DIMENSION,
}


def _grouped_entry(src, level_index, kind, label, nodes, removing):
    paths = [list(p) for p, _ in nodes]
    unit = TransitionUnit(kind, {"level": level_index, "label": label, "paths": paths})
    if removing:
        if kind == REMOVE_MEASURE:
            # Label-based so it applies cleanly wherever the measure
            # level sits when the sequencer reorders the script.
            op = {"op": "remove_measure", "label": label}
        else:
            op = {"op": "remove_nodes", "paths": paths}
    else:
        op = {
            "op": "insert_nodes",
            "level": level_index,
            "aggregates": dict(src.aggregates),
            "payloadLevels": levels_to_list(src.levels[level_index:]),
            "inserts": [
                {
                    "parent": list(p[:-1]),
                    "finalOrder": [
                        c.label
                        for c in src.node_by_path(tuple(p[:-1])).children
                    ],
                    "node": node_to_dict(n),
                }
                for p, n in nodes
            ],
        }
    return unit, op


def _node_edits(work, b, aligned, removing):
    """Node removals or additions at levels within the aligned prefix.

    Removals classify against the source structure, additions against
    the target's. Whole subtrees collapse into their topmost edited
    node: no unit is emitted for a node whose parent is also edited.
    """
    src = work if removing else b
    other = b if removing else work
    entries = []
    max_level = min(aligned, len(src.levels), len(other.levels))
    gone_paths = set()
    for level_index in range(1, max_level + 1):
        level = src.levels[level_index - 1]
        if level.kind == MEASURE:
            # Measure-set differences are synced after the structural
            # phases (see _measure_sync), so they stay valid when the
            # sequencer reorders units.
            continue
        mine = src.nodes_at(level_index)
        theirs = {path for path, _ in other.nodes_at(level_index)}
        edited = []
        for path, node in mine:
            if path in theirs:
                continue
            if path[:-1] in gone_paths:
                gone_paths.add(path)
                continue
            gone_paths.add(path)
            edited.append((path, node))
        if not edited:
            continue
        if level.kind == DIM and level_index == src.lowest_dimension_level():
            by_label = {}
            for path, node in edited:
                by_label.setdefault(path[-1], []).append((path, node))
            occurrences = {}
            for path, node in mine:
                if path[:-1] not in gone_paths:
                    occurrences[path[-1]] = occurrences.get(path[-1], 0) + 1
            for label, group in by_label.items():
                kind_base = REMOVE_SERIES if len(group) == occurrences.get(label, 0) else REMOVE_DATA_ITEM
                kind = kind_base if removing else _ADD_OF[kind_base]
                if kind_base == REMOVE_SERIES:
                    entries.append(
                        _grouped_entry(src, level_index, kind, label, group, removing)
                    )
                else:
                    entries.extend(
                        _grouped_entry(src, level_index, kind, p[-1], [(p, n)], removing)
                        for p, n in group
                    )
        else:
            kind = REMOVE_DATA_ITEM if removing else ADD_DATA_ITEM
            entries.extend(
                _grouped_entry(src, level_index, kind, p[-1], [(p, n)], removing)
                for p, n in edited
            )
    return entries


def _level_removals(work, b, aligned):
    """Remove the source's below-aligned dimension/raw levels, bottom up."""
    entries = []
    for level_index in reversed(range(aligned + 1, len(work.levels) + 1)):
        level = work.levels[level_index - 1]
        if level.kind == MEASURE:
            continue
        replacements = []
        parents = (
            [((), work.root)] if level_index == 1 else work.nodes_at(level_index - 1)
        )
        levels_below = work.levels[level_index - 1:]
        for path, parent in parents:
            target = b.node_by_path(path)
            if target is not None and _exact_replacement(b, path, target):
                replacements.append({
                    "parent": list(path),
                    "children": [node_to_dict(c) for c in target.children],
                    "value": target.value,
                })
            else:
                children, value = _collapse_below(parent, levels_below, work.aggregates)
                replacements.append({
                    "parent": list(path),
                    "children": [node_to_dict(c) for c in children],
                    "value": value,
                })
        if level.kind == RAW:
            unit = TransitionUnit(AGGREGATE_DATA_ITEM, {"level": level_index})
        else:
            unit = TransitionUnit(
                REMOVE_DIMENSION, {"level": level_index, "column": level.column}
            )
        op = {
            "op": "remove_level",
            "level": level_index,
            "aggregates": dict(work.aggregates),
            "replacements": replacements,
        }
        entries.append((unit, op))
        apply_op(work, op)
    return entries


def _exact_replacement(b, path, target):
    """True when the target subtree at ``path`` bottoms out immediately,
    so its children can replace the collapsed level verbatim."""
    remaining = b.levels[len(path):]
    if len(remaining) == 1 and remaining[0].kind == MEASURE:
        return True
    if not remaining and target.value is not None:
        return True
    return False


def _level_additions(work, b, aligned):
    """Insert the target's below-aligned dimension/raw levels, top down."""
    entries = []
    inserted = 0
    for offset, level in enumerate(b.levels[aligned:]):
        b_index = aligned + offset + 1
        if level.kind == MEASURE:
            continue
        parents = [((), b.root)] if b_index == 1 else b.nodes_at(b_index - 1)
        replacements = []
        if level.kind == RAW:
            for path, parent in parents:
                replacements.append({
                    "parent": list(path),
                    "children": [node_to_dict(c) for c in parent.children],
                    "value": None,
                })
            unit = TransitionUnit(DISAGGREGATE_DATA_ITEM, {"level": b_index})
            insert_at = len(work.levels) + 1
        else:
            for path, parent in parents:
                children = []
                for child in parent.children:
                    sub_children, _ = _collapse_below(
                        child, b.levels[b_index:], b.aggregates
                    )
                    children.append(node_to_dict(Node(child.label, sub_children)))
                replacements.append({
                    "parent": list(path), "children": children, "value": None,
                })
            unit = TransitionUnit(
                ADD_DIMENSION, {"level": b_index, "column": level.column}
            )
            insert_at = aligned + inserted + 1
        op = {
            "op": "insert_level",
            "level": insert_at,
            "levelKind": level.kind,
            "column": level.column,
            "aggregates": dict(b.aggregates),
            "replacements": replacements,
        }
        entries.append((unit, op))
        apply_op(work, op)
        inserted += 1
    return entries


def _measure_sync(work, b):
    """Add/Remove Measure units, emitted once structures are aligned.

    After the level phases both trees share the same level list, so the
    measure sets can be compared per parent; a measure label missing on
    one side is removed or added under every parent at once.
    """
    entries = []
    mlevel = work.measure_level()
    if mlevel is None or b.measure_level() != mlevel:
        return entries
    work_nodes = work.nodes_at(mlevel)
    b_nodes = b.nodes_at(mlevel)
    b_paths = {path for path, _ in b_nodes}
    work_paths = {path for path, _ in work_nodes}

    removed = {}
    for path, node in work_nodes:
        if path not in b_paths:
            removed.setdefault(path[-1], []).append((path, node))
    for label, group in removed.items():
        entries.append(
            _grouped_entry(work, mlevel, REMOVE_MEASURE, label, group, removing=True)
        )
    for _, op in entries:
        apply_op(work, op)

    added = {}
    for path, node in b_nodes:
        if path not in work_paths and work.node_by_path(path[:-1]) is not None:
            added.setdefault(path[-1], []).append((path, node))
    for label, group in added.items():
        entry = _grouped_entry(b, mlevel, ADD_MEASURE, label, group, removing=False)
        entries.append(entry)
        apply_op(work, entry[1])
    return entries


def _sort_detection(work, b):
    """One Sort unit per level where shared sibling order differs."""
    entries = []
    per_level = {}

    def walk(wnode, bnode, path, depth):
        w_labels = [c.label for c in wnode.children]
        b_labels = [c.label for c in bnode.children]
        shared_w = [l for l in w_labels if l in set(b_labels)]
        shared_b = [l for l in b_labels if l in set(w_labels)]
        if shared_w != shared_b:
            per_level.setdefault(depth + 1, []).append({
                "parent": list(path), "order": b_labels,
            })
        for wchild in wnode.children:
            bchild = bnode.child(wchild.label)
            if bchild is not None:
                walk(wchild, bchild, path + (wchild.label,), depth + 1)

    walk(work.root, b.root, (), 0)
    for level_index in sorted(per_level):
        orders = per_level[level_index]
        unit = TransitionUnit(SORT, {"level": level_index, "orders": orders})
        op = {"op": "reorder", "orders": orders}
        entries.append((unit, op))
        apply_op(work, op)
    return entries


def _value_changes(work, b):
    changes = []

    def walk(wnode, bnode, path):
        if wnode.value is not None or bnode.value is not None:
            if not values_close(wnode.value, bnode.value):
                changes.append({
                    "path": list(path),
                    "before": wnode.value,
                    "after": bnode.value,
                })
        for wchild in wnode.children:
            bchild = bnode.child(wchild.label)
            if bchild is not None:
                walk(wchild, bchild, path + (wchild.label,))

    walk(work.root, b.root, ())
    if not changes:
        return []
    unit = TransitionUnit(VALUE_CHANGE, {"changes": changes})
    op = {"op": "set_values", "changes": changes}
    apply_op(work, op)
    return [(unit, op)]


def _grouping_map(source_labels, target_labels, label_map):
    """Fine-to-coarse grouping of source labels onto target labels.

    Uses the declared map when given, else conservative inference: each
    source label must start with exactly one target label. Returns
    None when no surjective grouping exists.
    """
    source_labels = list(source_labels)
    target_labels = list(target_labels)
    if set(source_labels) == set(target_labels):
        return None
    if label_map is not None:
        groups = label_map.groups
        if all(l in groups for l in source_labels):
            mapped = {l: groups[l] for l in source_labels}
            if set(mapped.values()) == set(target_labels):
                return mapped
        return None
    mapped = {}
    for label in source_labels:
        prefixes = [t for t in target_labels if label.startswith(t)]
        if len(prefixes) != 1:
            return None
        mapped[label] = prefixes[0]
    if set(mapped.values()) != set(target_labels):
        return None
    if all(k == v for k, v in mapped.items()):
        return None
    return mapped


def _global_labels(tree, level_index):
    labels = []
    for _, node in tree.nodes_at(level_index):
        if node.label not in labels:
            labels.append(node.label)
    return labels


def _merge_split_detection(work, b, target_label_map):
    """In-place merges/splits at a dimension level both trees share."""
    entries = []
    if work.levels != b.levels:
        return entries
    for level_index in work.dimension_levels():
        level = work.levels[level_index - 1]
        declared = (
            target_label_map
            if target_label_map is not None and target_label_map.column == level.column
            else None
        )
        w_labels = _global_labels(work, level_index)
        b_labels = _global_labels(b, level_index)
        if set(w_labels) == set(b_labels):
            continue
        merge_map = _grouping_map(w_labels, b_labels, declared)
        if merge_map is not None:
            entries.extend(_emit_merge(work, b, level_index, merge_map))
            continue
        split_map = _grouping_map(b_labels, w_labels, declared)
        if split_map is not None:
            entries.extend(_emit_split(work, b, level_index, split_map))
    return entries


def _emit_merge(work, b, level_index, mapping):
    merges = []
    parents = (
        [((), work.root)] if level_index == 1 else work.nodes_at(level_index - 1)
    )
    for path, parent in parents:
        target_parent = b.node_by_path(path)
        if target_parent is None:
            continue
        groups = {}
        for child in parent.children:
            group = mapping.get(child.label)
            if group is not None:
                groups.setdefault(group, []).append(child.label)
        for group, members in groups.items():
            target_child = target_parent.child(group)
            if target_child is None or members == [group]:
                continue
            merges.append({
                "parent": list(path),
                "group": group,
                "members": members,
                "node": node_to_dict(target_child),
            })
    if not merges:
        return []
    unit = TransitionUnit(MERGE_DATA_ITEM, {
        "level": level_index,
        "mapping": dict(mapping),
        "merges": [
            {"parent": m["parent"], "group": m["group"], "members": m["members"]}
            for m in merges
        ],
    })
    op = {
        "op": "merge_nodes",
        "level": level_index,
        "aggregates": dict(b.aggregates),
        "payloadLevels": levels_to_list(b.levels[level_index:]),
        "merges": merges,
    }
    apply_op(work, op)
    return [(unit, op)]


def _emit_split(work, b, level_index, mapping):
    """``mapping`` maps target (fine) labels to source (coarse) labels."""
    by_member = {}
    for fine, coarse in mapping.items():
        by_member.setdefault(coarse, []).append(fine)
    splits = []
    parents = (
        [((), work.root)] if level_index == 1 else work.nodes_at(level_index - 1)
    )
    for path, parent in parents:
        target_parent = b.node_by_path(path)
        if target_parent is None:
            continue
        for child in parent.children:
            fines = by_member.get(child.label)
            if not fines or fines == [child.label]:
                continue
            target_order = [
                c.label for c in target_parent.children if c.label in set(fines)
            ]
            nodes = [node_to_dict(target_parent.child(l)) for l in target_order]
            if not nodes:
                continue
            splits.append({
                "parent": list(path),
                "member": child.label,
                "labels": target_order,
                "nodes": nodes,
            })
    if not splits:
        return []
    unit = TransitionUnit(SPLIT_DATA_ITEM, {
        "level": level_index,
        "mapping": dict(mapping),
        "splits": [
            {"parent": s["parent"], "member": s["member"], "labels": s["labels"]}
            for s in splits
        ],
    })
    op = {
        "op": "split_nodes",
        "level": level_index,
        "aggregates": dict(b.aggregates),
        "payloadLevels": levels_to_list(b.levels[level_index:]),
        "splits": splits,
    }
    apply_op(work, op)
    return [(unit, op)]


def _collapse_merge(work, b, target_label_map):
    """Merge-to-one: a whole source dimension groups into a single label
    and the level collapses away (the classic drill-up gesture where all
    items join into one total before a new dimension splits it again).
    """
    if target_label_map is None:
        return []
    column = target_label_map.column
    level_index = None
    for i in work.dimension_levels():
        if work.levels[i - 1].column == column:
            level_index = i
            break
    if level_index is None:
        return []
    if any(lv.kind == DIM and lv.column == column for lv in b.levels):
        return []
    labels = _global_labels(work, level_index)
    mapped = {l: target_label_map.groups.get(l) for l in labels}
    if any(g is None for g in mapped.values()) or len(set(mapped.values())) != 1:
        return []
    group_label = next(iter(set(mapped.values())))
    replacements = []
    parents = (
        [((), work.root)] if level_index == 1 else work.nodes_at(level_index - 1)
    )
    levels_below = work.levels[level_index - 1:]
    for path, parent in parents:
        children, value = _collapse_below(parent, levels_below, work.aggregates)
        replacements.append({
            "parent": list(path),
            "children": [node_to_dict(c) for c in children],
            "value": value,
        })
    unit = TransitionUnit(MERGE_DATA_ITEM, {
        "level": level_index,
        "column": column,
        "collapse": True,
        "group": group_label,
        "members": labels,
    })
    op = {
        "op": "remove_level",
        "level": level_index,
        "aggregates": dict(work.aggregates),
        "replacements": replacements,
    }
    apply_op(work, op)
    return [(unit, op)]


def diff_trees(a, b, target_label_map=None):
    """Edit script that transforms tree ``a`` into tree ``b``.

    Emits, in canonical order: grouped merges/splits, node removals,
    level removals (bottom up), level additions (top down), node
    additions, then sort and value-change detections. Equal trees yield
    an empty script.
    """
    if tree_equal(a, b):
        return EditScript([], find_aligned_level(a, b))
    work = a.clone()
    entries = []
    entries.extend(_collapse_merge(work, b, target_label_map))
    entries.extend(_merge_split_detection(work, b, target_label_map))
    aligned = find_aligned_level(work, b)

    removals = _node_edits(work, b, aligned, removing=True)
    for _, op in removals:
        apply_op(work, op)
    entries.extend(removals)

    entries.extend(_level_removals(work, b, aligned))
    entries.extend(_level_additions(work, b, aligned))

    additions = _node_edits(work, b, aligned, removing=False)
    for _, op in additions:
        apply_op(work, op)
    entries.extend(additions)

    entries.extend(_measure_sync(work, b))
    entries.extend(_sort_detection(work, b))
    entries.extend(_value_changes(work, b))
    return EditScript(entries, aligned)


def detect_visual_units(source_spec, target_spec):
    """Visual-related units from direct comparison of the two specs."""
    units = []
    for attr, show, hide in (
        ("show_x_axis", SHOW_X_AXIS, HIDE_X_AXIS),
        ("show_y_axis", SHOW_Y_AXIS, HIDE_Y_AXIS),
        ("show_legend", SHOW_LEGEND, HIDE_LEGEND),
    ):
        before = getattr(source_spec, attr)
        after = getattr(target_spec, attr)
        if before and not after:
            units.append(TransitionUnit(hide, {}))
        elif after and not before:
            units.append(TransitionUnit(show, {}))
    if source_spec.chart_type != target_spec.chart_type:
        units.append(TransitionUnit(CHANGE_CHART_TYPE, {
            "from": source_spec.chart_type, "to": target_spec.chart_type,
        }))
    if source_spec.title != target_spec.title:
        units.append(TransitionUnit(CHANGE_TITLE, {
            "from": source_spec.title, "to": target_spec.title,
        }))
    return units


def _domain_equal(a, b):
    if a.get("kind") != b.get("kind"):
        return False
    if a.get("kind") == "categorical":
        return a.get("labels") == b.get("labels")
    if a.get("kind") == "numeric":
        return math.isclose(a.get("max", 0.0), b.get("max", 0.0), rel_tol=1e-12)
    return True


def derive_data_dependent_units(script, source_tree, source_style, target_style):
    """Axis rescales and legend updates generated by the data units.

    Each data unit's before/after domains are compared on the
    intermediate trees; a unit whose domains come out equal produces no
    dependent. Removal-side units are measured under the source chart's
    styling, the rest under the target's.
    """
    dependents = []
    work = source_tree.clone()
    for unit, op in script.entries:
        style = source_style if unit.kind in REMOVAL_SIDE_KINDS else target_style
        before_x = axis_domain(work, style, "x")
        before_y = axis_domain(work, style, "y")
        before_legend = legend_entries(work)
        if op is not None:
            apply_op(work, op)
        after_x = axis_domain(work, style, "x")
        after_y = axis_domain(work, style, "y")
        after_legend = legend_entries(work)
        if unit.kind in RESCALE_X_TRIGGERS and not _domain_equal(before_x, after_x):
            dependents.append(TransitionUnit(
                RESCALE_X_AXIS,
                {"axis": "x", "before": before_x, "after": after_x},
                depends_on=unit.id,
            ))
        if unit.kind in RESCALE_Y_TRIGGERS and not _domain_equal(before_y, after_y):
            dependents.append(TransitionUnit(
                RESCALE_Y_AXIS,
                {"axis": "y", "before": before_y, "after": after_y},
                depends_on=unit.id,
            ))
        if (unit.kind in UPDATE_LEGEND_TRIGGERS
                and style.show_legend
                and before_legend != after_legend):
            dependents.append(TransitionUnit(
                UPDATE_LEGEND,
                {"before": before_legend, "after": after_legend},
                depends_on=unit.id,
            ))
    return dependents


@dataclass
class Transition:
    """Everything identified between a chart pair, with stable unit ids."""

    script: EditScript
    data_units: list
    dependent_units: list
    visual_units: list

    def all_units(self):
        return self.data_units + self.dependent_units + self.visual_units

    def unit_by_id(self, unit_id):
        for unit in self.all_units():
            if unit.id == unit_id:
                return unit
        return None


def identify_transition(source_tree, source_spec, target_tree, target_spec):
    """Full identification for a chart pair.

    When the two trees are equal only the visual comparison contributes
    units. Unit ids are stable: data units in canonical script order,
    then data-dependent units, then visual units.
    """
    from .layout import style_from_spec

    script = diff_trees(source_tree, target_tree, target_spec.label_map)
    counter = 0
    for unit in script.units:
        unit.id = f"u{counter}"
        counter += 1
    dependents = derive_data_dependent_units(
        script, source_tree,
        style_from_spec(source_spec), style_from_spec(target_spec),
    )
    for unit in dependents:
        unit.id = f"u{counter}"
        counter += 1
    visual = detect_visual_units(source_spec, target_spec)
    for unit in visual:
        unit.id = f"u{counter}"
        counter += 1
    return Transition(script, script.units, dependents, visual)
