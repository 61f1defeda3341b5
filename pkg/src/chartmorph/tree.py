"""Tree representation of a chart's data.

The root stands for the whole table. Each intermediate level holds the
values of one dimension (x dimension first, then legend dimension), the
next level holds one node per measure, and scatter charts built from
non-aggregated values append one extra raw-value level below the
measures. Leaves under a common lowest-dimension value form one series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .document import temporal_key

DIM = "dim"
MEASURE = "measure"
RAW = "raw"


class AggregateOnNonNumeric(ValueError):
    pass


@dataclass(frozen=True)
class Level:
    kind: str
    column: str | None = None

    def describe(self):
        return self.column if self.kind == DIM else self.kind


@dataclass
class Node:
    label: str
    children: list = field(default_factory=list)
    value: float | None = None

    def is_leaf(self):
        return not self.children

    def child(self, label):
        for c in self.children:
            if c.label == label:
                return c
        return None

    def clone(self):
        return Node(self.label, [c.clone() for c in self.children], self.value)


@dataclass
class ChartTree:
    levels: tuple[Level, ...]
    root: Node
    aggregates: dict = field(default_factory=dict)

    @property
    def depth(self):
        return len(self.levels)

    def dimension_levels(self):
        """1-based level indexes of the dimension levels."""
        return [i + 1 for i, lv in enumerate(self.levels) if lv.kind == DIM]

    def lowest_dimension_level(self):
        dims = self.dimension_levels()
        return dims[-1] if dims else None

    def measure_level(self):
        for i, lv in enumerate(self.levels):
            if lv.kind == MEASURE:
                return i + 1
        return None

    def raw_level(self):
        for i, lv in enumerate(self.levels):
            if lv.kind == RAW:
                return i + 1
        return None

    def nodes_at(self, level_index):
        """(path, node) pairs for every node at a 1-based level index."""
        out = []

        def walk(node, path, depth):
            if depth == level_index:
                out.append((path, node))
                return
            for child in node.children:
                walk(child, path + (child.label,), depth + 1)

        for child in self.root.children:
            walk(child, (child.label,), 1)
        return out

    def leaves(self):
        return self.nodes_at(self.depth)

    def node_by_path(self, path):
        node = self.root
        for label in path:
            node = node.child(label)
            if node is None:
                return None
        return node

    def clone(self):
        return ChartTree(self.levels, self.root.clone(), dict(self.aggregates))


def _aggregate(values, kind):
    if kind == "count":
        return float(len(values))
    if kind == "sum":
        return float(sum(values))
    if kind == "avg":
        return float(sum(values) / len(values))
    raise ValueError(f"unsupported aggregate '{kind}'")


def _dimension_value_order(table, spec, column_name, measure_ref):
    """Global sibling order for one dimension level."""
    col = table.column(column_name)
    seen = {}
    for row in table.rows:
        value = row[column_name]
        if value not in seen:
            seen[value] = len(seen)
    values = list(seen)
    if col.value_type == "temporal":
        values.sort(key=lambda v: temporal_key(col, v))
    sort = spec.sort
    first_dim = spec.x_dimension or spec.legend_dimension
    if sort is not None and column_name == first_dim:
        if sort.by == "label":
            if col.value_type == "temporal":
                values.sort(key=lambda v: temporal_key(col, v))
            else:
                values.sort()
        else:
            groups = {v: [] for v in values}
            for row in table.rows:
                raw = row[measure_ref.column]
                groups[row[column_name]].append(raw)
            values.sort(
                key=lambda v: _aggregate(groups[v], measure_ref.aggregate)
                if measure_ref.aggregate != "none"
                else sum(groups[v])
            )
        if sort.direction == "desc":
            values.reverse()
    return values


def build_tree(table, spec):
    """Build the chart's tree from its table and encoding spec.

    Level order is x dimension, then legend dimension, then the measure
    level, then (for non-aggregated scatter) the raw-value level.
    sparse dimension combinations produce no node.
    """
    levels = []
    dim_columns = []
    if spec.x_dimension:
        col = table.column(spec.x_dimension)
        if col is not None and col.role == "dimension":
            levels.append(Level(DIM, spec.x_dimension))
            dim_columns.append(spec.x_dimension)
    if spec.legend_dimension:
        col = table.column(spec.legend_dimension)
        if col is not None and col.role == "dimension":
            levels.append(Level(DIM, spec.legend_dimension))
            dim_columns.append(spec.legend_dimension)
    levels.append(Level(MEASURE))
    raw_values = any(m.aggregate == "none" for m in spec.measures)
    if raw_values:
        levels.append(Level(RAW))

    for ref in spec.measures:
        for row in table.rows:
            value = row.get(ref.column)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise AggregateOnNonNumeric(
                    f"measure '{ref.column}' holds non-numeric value {value!r}"
                )

    orders = {
        name: _dimension_value_order(table, spec, name, spec.measures[0])
        for name in dim_columns
    }

    def build(rows, remaining_dims):
        if remaining_dims:
            column = remaining_dims[0]
            groups = {}
            for row in rows:
                groups.setdefault(row[column], []).append(row)
            children = []
            for value in orders[column]:
                if value in groups:
                    node = Node(str(value))
                    node.children = build(groups[value], remaining_dims[1:])
                    children.append(node)
            return children
        children = []
        for ref in spec.measures:
            node = Node(ref.column)
            values = [float(row[ref.column]) for row in rows]
            if raw_values:
                node.children = [
                    Node(str(i), value=v) for i, v in enumerate(values)
                ]
            else:
                node.value = _aggregate(values, ref.aggregate)
            children.append(node)
        return children

    root = Node("")
    root.children = build(list(table.rows), dim_columns)
    aggregates = {m.column: m.aggregate for m in spec.measures}
    return ChartTree(tuple(levels), root, aggregates)


def values_close(a, b, rel_tol=1e-9):
    if a is None or b is None:
        return a is None and b is None
    return math.isclose(a, b, rel_tol=rel_tol, abs_tol=1e-9)


def tree_equal(a, b):
    """Structural equality: levels, labels, sibling order, leaf values."""
    if a.levels != b.levels:
        return False

    def eq(na, nb):
        if na.label != nb.label:
            return False
        if not values_close(na.value, nb.value):
            return False
        if len(na.children) != len(nb.children):
            return False
        return all(eq(ca, cb) for ca, cb in zip(na.children, nb.children))

    return eq(a.root, b.root)


def dump_tree(tree):
    """Deterministic indented text dump, one node per line."""
    lines = [f"root[{', '.join(lv.describe() for lv in tree.levels)}]"]

    def walk(node, depth):
        level = tree.levels[depth - 1]
        if level.kind == DIM:
            label = f"{level.column}:{node.label}"
        elif level.kind == MEASURE:
            label = node.label
        else:
            label = f"raw[{node.label}]"
        suffix = f"={format(node.value, '.12g')}" if node.value is not None else ""
        lines.append("  " * depth + label + suffix)
        for child in node.children:
            walk(child, depth + 1)

    for child in tree.root.children:
        walk(child, 1)
    return "\n".join(lines) + "\n"


def path_id(tree, path):
    """Stable mark key for the data element at a tree path.

    The same data element (dimension values plus measure name) yields
    the same id in any chart drawn over it.
    """
    parts = []
    for level, label in zip(tree.levels, path):
        if level.kind == DIM:
            parts.append(f"{level.column}={label}")
        elif level.kind == MEASURE:
            parts.append(label)
        else:
            parts.append(f"#{label}")
    return "/".join(parts)


def series_labels(tree):
    """Labels of the series dimension (the lowest dimension), in order."""
    lowest = tree.lowest_dimension_level()
    if lowest is None:
        return [node.label for node in tree.root.children]
    seen = []
    for _, node in tree.nodes_at(lowest):
        if node.label not in seen:
            seen.append(node.label)
    return seen
