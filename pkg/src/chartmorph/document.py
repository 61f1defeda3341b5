"""Chart document parsing and validation.

A chart document is a JSON object with two top-level sections:

``data``
    ``columns``: list of ``{name, role, valueType}`` (``role`` is
    ``dimension`` or ``measure``; ``valueType`` is ``categorical``,
    ``temporal`` or ``numeric``; temporal columns may declare an
    optional strptime ``format``), and ``rows``: list of records keyed
    by column name.

``chart``
    ``type`` (barV | barH | line | pie | scatter), ``x``, ``legend``,
    ``measures``: list of ``{column, aggregate}``, optional ``sort``
    (``{by, direction}``), ``showXAxis``, ``showYAxis``, ``showLegend``,
    ``title`` and optional ``labelMap`` (``{column, groups}``) declaring
    how another chart's labels group into this chart's labels.

Unknown fields are rejected. The supported encoding combinations are
listed in ``ENCODING_COMBINATIONS`` (also documented in
docs/chart-document.md).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime

CHART_TYPES = ("barV", "barH", "line", "pie", "scatter")
ROLES = ("dimension", "measure")
VALUE_TYPES = ("categorical", "temporal", "numeric")
AGGREGATES = ("sum", "avg", "count", "none")
SORT_BY = ("measure", "label")
SORT_DIRECTIONS = ("asc", "desc")

#: Supported encoding combinations, keyed by chart type. ``measures`` is
#: the allowed count range; ``multiMeasureNeedsNoLegend`` means more than
#: one measure is only accepted when no legend dimension is mapped.
ENCODING_COMBINATIONS = {
    "barV": {
        "x": "optional",
        "legend": "optional",
        "measures": (1, 8),
        "aggregate": ("sum", "avg", "count"),
        "multiMeasureNeedsNoLegend": True,
    },
    "barH": {
        "x": "optional",
        "legend": "optional",
        "measures": (1, 8),
        "aggregate": ("sum", "avg", "count"),
        "multiMeasureNeedsNoLegend": True,
    },
    "line": {
        "x": "required",
        "legend": "optional",
        "measures": (1, 8),
        "aggregate": ("sum", "avg", "count"),
        "multiMeasureNeedsNoLegend": True,
    },
    "pie": {
        "x": "exactlyOneDimension",
        "legend": "exactlyOneDimension",
        "measures": (1, 1),
        "aggregate": ("sum", "avg", "count"),
        "multiMeasureNeedsNoLegend": True,
    },
    # Scatter is the only type that may carry non-aggregated values.
    # Either x is a dimension and there is one measure (y), or x/y are
    # the first/second measures and no x dimension is mapped.
    "scatter": {
        "x": "optional",
        "legend": "optional",
        "measures": (1, 2),
        "aggregate": ("sum", "avg", "count", "none"),
        "multiMeasureNeedsNoLegend": False,
    },
}

MALFORMED_DOCUMENT = "MalformedDocument"
SCHEMA_VIOLATION = "SchemaViolation"
SEMANTIC_VIOLATION = "SemanticViolation"


@dataclass(frozen=True)
class Violation:
    """One validation finding; violations are data, not exceptions."""

    code: str
    message: str
    path: str = ""

    def __str__(self):
        where = f" at {self.path}" if self.path else ""
        return f"{self.code}{where}: {self.message}"


class DocumentError(ValueError):
    """Raised when a chart document cannot be accepted.

    Carries the full list of violations so callers can report them
    together instead of one at a time.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


@dataclass(frozen=True)
class Column:
    name: str
    role: str
    value_type: str
    temporal_format: str | None = None


@dataclass(frozen=True)
class DataTable:
    columns: tuple[Column, ...]
    rows: tuple[dict, ...]

    def column(self, name):
        for col in self.columns:
            if col.name == name:
                return col
        return None

    def dimension_names(self):
        return [c.name for c in self.columns if c.role == "dimension"]

    def measure_names(self):
        return [c.name for c in self.columns if c.role == "measure"]


@dataclass(frozen=True)
class MeasureRef:
    column: str
    aggregate: str


@dataclass(frozen=True)
class SortOrder:
    by: str
    direction: str


@dataclass(frozen=True)
class LabelMap:
    """Grouping relation between another chart's labels and this one's.

    ``groups`` always maps fine-grained labels to coarse group labels.
    """

    column: str
    groups: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ChartSpec:
    chart_type: str
    x_dimension: str | None
    legend_dimension: str | None
    measures: tuple[MeasureRef, ...]
    sort: SortOrder | None = None
    show_x_axis: bool = True
    show_y_axis: bool = True
    show_legend: bool = True
    title: str = ""
    label_map: LabelMap | None = None

    def mapped_dimensions(self):
        dims = []
        if self.x_dimension:
            dims.append(self.x_dimension)
        if self.legend_dimension:
            dims.append(self.legend_dimension)
        return dims


def _expect_keys(obj, allowed, required, path, violations):
    for key in obj:
        if key not in allowed:
            violations.append(
                Violation(SCHEMA_VIOLATION, f"unknown field '{key}'", path)
            )
    for key in required:
        if key not in obj:
            violations.append(
                Violation(SCHEMA_VIOLATION, f"missing field '{key}'", path)
            )


def _parse_columns(raw, violations):
    columns = []
    seen = set()
    if not isinstance(raw, list) or not raw:
        violations.append(
            Violation(SCHEMA_VIOLATION, "'columns' must be a non-empty list", "data.columns")
        )
        return columns
    for i, entry in enumerate(raw):
        path = f"data.columns[{i}]"
        if not isinstance(entry, dict):
            violations.append(Violation(SCHEMA_VIOLATION, "column must be an object", path))
            continue
        _expect_keys(entry, {"name", "role", "valueType", "format"},
                     {"name", "role", "valueType"}, path, violations)
        name = entry.get("name")
        role = entry.get("role")
        value_type = entry.get("valueType")
        fmt = entry.get("format")
        if not isinstance(name, str) or not name:
            violations.append(Violation(SCHEMA_VIOLATION, "column name must be a string", path))
            continue
        if name in seen:
            violations.append(Violation(SEMANTIC_VIOLATION, f"duplicate column '{name}'", path))
            continue
        seen.add(name)
        if role not in ROLES:
            violations.append(Violation(SCHEMA_VIOLATION, f"role must be one of {ROLES}", path))
            continue
        if value_type not in VALUE_TYPES:
            violations.append(
                Violation(SCHEMA_VIOLATION, f"valueType must be one of {VALUE_TYPES}", path)
            )
            continue
        if role == "dimension" and value_type == "numeric":
            violations.append(
                Violation(SEMANTIC_VIOLATION, f"dimension '{name}' cannot be numeric", path)
            )
            continue
        if role == "measure" and value_type != "numeric":
            violations.append(
                Violation(SEMANTIC_VIOLATION, f"measure '{name}' must be numeric", path)
            )
            continue
        if fmt is not None and not isinstance(fmt, str):
            violations.append(Violation(SCHEMA_VIOLATION, "format must be a string", path))
            continue
        columns.append(Column(name, role, value_type, fmt))
    return columns


def _parse_rows(raw, columns, violations):
    rows = []
    if not isinstance(raw, list):
        violations.append(Violation(SCHEMA_VIOLATION, "'rows' must be a list", "data.rows"))
        return rows
    names = {c.name: c for c in columns}
    for i, entry in enumerate(raw):
        path = f"data.rows[{i}]"
        if not isinstance(entry, dict):
            violations.append(Violation(SCHEMA_VIOLATION, "row must be an object", path))
            continue
        ok = True
        for key in entry:
            if key not in names:
                violations.append(
                    Violation(SCHEMA_VIOLATION, f"row references unknown column '{key}'", path)
                )
                ok = False
        for col in columns:
            if col.name not in entry:
                violations.append(
                    Violation(SEMANTIC_VIOLATION, f"row missing value for '{col.name}'", path)
                )
                ok = False
                continue
            value = entry[col.name]
            if col.role == "measure":
                if not isinstance(value, (int, float)) or isinstance(value, bool):
                    violations.append(
                        Violation(
                            SEMANTIC_VIOLATION,
                            f"measure '{col.name}' holds non-numeric value {value!r}",
                            path,
                        )
                    )
                    ok = False
            else:
                if not isinstance(value, str):
                    violations.append(
                        Violation(
                            SEMANTIC_VIOLATION,
                            f"dimension '{col.name}' holds non-string value {value!r}",
                            path,
                        )
                    )
                    ok = False
        if ok:
            rows.append(dict(entry))
    return rows


def _parse_chart(raw, violations):
    path = "chart"
    allowed = {"type", "x", "legend", "measures", "sort",
               "showXAxis", "showYAxis", "showLegend", "title", "labelMap"}
    _expect_keys(raw, allowed, {"type", "measures"}, path, violations)
    chart_type = raw.get("type")
    if chart_type not in CHART_TYPES:
        violations.append(
            Violation(SCHEMA_VIOLATION, f"type must be one of {CHART_TYPES}", "chart.type")
        )
        chart_type = None

    measures = []
    raw_measures = raw.get("measures", [])
    if not isinstance(raw_measures, list):
        violations.append(Violation(SCHEMA_VIOLATION, "'measures' must be a list", "chart.measures"))
        raw_measures = []
    for i, entry in enumerate(raw_measures):
        mpath = f"chart.measures[{i}]"
        if not isinstance(entry, dict):
            violations.append(Violation(SCHEMA_VIOLATION, "measure must be an object", mpath))
            continue
        _expect_keys(entry, {"column", "aggregate"}, {"column", "aggregate"}, mpath, violations)
        column = entry.get("column")
        aggregate = entry.get("aggregate")
        if not isinstance(column, str) or not column:
            violations.append(Violation(SCHEMA_VIOLATION, "measure column must be a string", mpath))
            continue
        if aggregate not in AGGREGATES:
            violations.append(
                Violation(SCHEMA_VIOLATION, f"aggregate must be one of {AGGREGATES}", mpath)
            )
            continue
        measures.append(MeasureRef(column, aggregate))

    sort = None
    raw_sort = raw.get("sort")
    if raw_sort is not None:
        if not isinstance(raw_sort, dict):
            violations.append(Violation(SCHEMA_VIOLATION, "'sort' must be an object", "chart.sort"))
        else:
            _expect_keys(raw_sort, {"by", "direction"}, {"by", "direction"}, "chart.sort", violations)
            by = raw_sort.get("by")
            direction = raw_sort.get("direction")
            if by in SORT_BY and direction in SORT_DIRECTIONS:
                sort = SortOrder(by, direction)
            else:
                violations.append(
                    Violation(
                        SCHEMA_VIOLATION,
                        f"sort needs by in {SORT_BY} and direction in {SORT_DIRECTIONS}",
                        "chart.sort",
                    )
                )

    label_map = None
    raw_map = raw.get("labelMap")
    if raw_map is not None:
        if not isinstance(raw_map, dict):
            violations.append(
                Violation(SCHEMA_VIOLATION, "'labelMap' must be an object", "chart.labelMap")
            )
        else:
            _expect_keys(raw_map, {"column", "groups"}, {"column", "groups"},
                         "chart.labelMap", violations)
            column = raw_map.get("column")
            groups = raw_map.get("groups")
            if (isinstance(column, str) and isinstance(groups, dict)
                    and all(isinstance(k, str) and isinstance(v, str) for k, v in groups.items())):
                label_map = LabelMap(column, dict(groups))
            else:
                violations.append(
                    Violation(
                        SCHEMA_VIOLATION,
                        "labelMap needs a column name and a string-to-string groups object",
                        "chart.labelMap",
                    )
                )

    def _flag(name):
        value = raw.get(name, True)
        if not isinstance(value, bool):
            violations.append(Violation(SCHEMA_VIOLATION, f"'{name}' must be a boolean", f"chart.{name}"))
            return True
        return value

    for opt, kind in (("x", str), ("legend", str)):
        value = raw.get(opt)
        if value is not None and not isinstance(value, kind):
            violations.append(Violation(SCHEMA_VIOLATION, f"'{opt}' must be a string", f"chart.{opt}"))

    title = raw.get("title", "")
    if not isinstance(title, str):
        violations.append(Violation(SCHEMA_VIOLATION, "'title' must be a string", "chart.title"))
        title = ""

    return ChartSpec(
        chart_type=chart_type or "barV",
        x_dimension=raw.get("x") if isinstance(raw.get("x"), str) else None,
        legend_dimension=raw.get("legend") if isinstance(raw.get("legend"), str) else None,
        measures=tuple(measures),
        sort=sort,
        show_x_axis=_flag("showXAxis"),
        show_y_axis=_flag("showYAxis"),
        show_legend=_flag("showLegend"),
        title=title,
        label_map=label_map,
    )


def validate_spec(table, spec):
    """Check all ChartSpec invariants against the table.

    Returns a list of violations; empty iff the spec is consistent.
    """
    violations = []
    combo = ENCODING_COMBINATIONS.get(spec.chart_type)
    if combo is None:
        violations.append(
            Violation(SEMANTIC_VIOLATION, f"unsupported chart type '{spec.chart_type}'", "chart.type")
        )
        return violations

    for channel, name in (("x", spec.x_dimension), ("legend", spec.legend_dimension)):
        if name is None:
            continue
        col = table.column(name)
        if col is None:
            violations.append(
                Violation(SEMANTIC_VIOLATION, f"unknown column '{name}'", f"chart.{channel}")
            )
        elif col.role != "dimension":
            violations.append(
                Violation(
                    SEMANTIC_VIOLATION,
                    f"'{name}' mapped to {channel} must be a dimension",
                    f"chart.{channel}",
                )
            )

    if not spec.measures:
        violations.append(Violation(SEMANTIC_VIOLATION, "at least one measure required", "chart.measures"))
    seen_measures = set()
    for i, ref in enumerate(spec.measures):
        mpath = f"chart.measures[{i}]"
        col = table.column(ref.column)
        if col is None:
            violations.append(Violation(SEMANTIC_VIOLATION, f"unknown column '{ref.column}'", mpath))
            continue
        if col.role != "measure":
            violations.append(
                Violation(SEMANTIC_VIOLATION, f"'{ref.column}' must be a measure column", mpath)
            )
        if ref.column in seen_measures:
            violations.append(
                Violation(SEMANTIC_VIOLATION, f"duplicate measure '{ref.column}'", mpath)
            )
        seen_measures.add(ref.column)
        if ref.aggregate not in combo["aggregate"]:
            violations.append(
                Violation(
                    SEMANTIC_VIOLATION,
                    f"aggregate '{ref.aggregate}' not supported for {spec.chart_type}",
                    mpath,
                )
            )

    if spec.x_dimension and spec.x_dimension == spec.legend_dimension:
        violations.append(
            Violation(SEMANTIC_VIOLATION, "x and legend cannot map the same dimension", "chart")
        )

    mapped = spec.mapped_dimensions()
    if len(mapped) > 2:
        violations.append(
            Violation(SEMANTIC_VIOLATION, "at most two dimensions may be mapped", "chart")
        )

    if combo["x"] == "required" and spec.x_dimension is None:
        violations.append(
            Violation(SEMANTIC_VIOLATION, f"{spec.chart_type} requires an x dimension", "chart.x")
        )
    if spec.chart_type == "pie" and len(mapped) != 1:
        violations.append(
            Violation(
                SEMANTIC_VIOLATION,
                "pie requires exactly one mapped dimension",
                "chart",
            )
        )

    lo, hi = combo["measures"]
    if spec.measures and not (lo <= len(spec.measures) <= hi):
        violations.append(
            Violation(
                SEMANTIC_VIOLATION,
                f"{spec.chart_type} supports {lo}..{hi} measures, got {len(spec.measures)}",
                "chart.measures",
            )
        )
    if combo["multiMeasureNeedsNoLegend"] and len(spec.measures) > 1 and spec.legend_dimension:
        violations.append(
            Violation(
                SEMANTIC_VIOLATION,
                "multiple measures cannot be combined with a legend dimension",
                "chart.measures",
            )
        )

    aggregates = {m.aggregate for m in spec.measures}
    if "none" in aggregates:
        if spec.chart_type != "scatter":
            violations.append(
                Violation(
                    SEMANTIC_VIOLATION,
                    "aggregate 'none' is only allowed for scatter",
                    "chart.measures",
                )
            )
        elif aggregates != {"none"}:
            violations.append(
                Violation(
                    SEMANTIC_VIOLATION,
                    "scatter measures must either all aggregate or all be raw",
                    "chart.measures",
                )
            )

    if spec.chart_type == "scatter" and not violations:
        if len(spec.measures) == 1 and spec.x_dimension is None:
            violations.append(
                Violation(
                    SEMANTIC_VIOLATION,
                    "scatter with one measure needs an x dimension",
                    "chart",
                )
            )
        if len(spec.measures) == 2 and spec.x_dimension is not None:
            violations.append(
                Violation(
                    SEMANTIC_VIOLATION,
                    "scatter with two measures cannot also map an x dimension",
                    "chart",
                )
            )

    if spec.sort and spec.sort.by == "measure" and len(spec.measures) > 1:
        violations.append(
            Violation(
                SEMANTIC_VIOLATION,
                "sort by measure is ambiguous with multiple measures",
                "chart.sort",
            )
        )

    if spec.label_map is not None:
        if table.column(spec.label_map.column) is None:
            # The mapped column names the *other* chart's dimension; it may
            # legitimately be absent from this table, so only its shape is
            # checked here.
            pass

    return violations


def parse_chart_document(raw):
    """Parse one chart document from bytes/str into (DataTable, ChartSpec).

    Raises DocumentError carrying every violation found.
    """
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DocumentError([Violation(MALFORMED_DOCUMENT, f"not valid UTF-8: {exc}")])
    if isinstance(raw, str):
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise DocumentError([Violation(MALFORMED_DOCUMENT, f"invalid JSON: {exc}")])
    else:
        doc = raw

    violations = []
    if not isinstance(doc, dict):
        raise DocumentError([Violation(SCHEMA_VIOLATION, "document must be an object")])
    _expect_keys(doc, {"data", "chart"}, {"data", "chart"}, "", violations)
    data = doc.get("data")
    chart = doc.get("chart")
    if not isinstance(data, dict):
        violations.append(Violation(SCHEMA_VIOLATION, "'data' must be an object", "data"))
        raise DocumentError(violations)
    if not isinstance(chart, dict):
        violations.append(Violation(SCHEMA_VIOLATION, "'chart' must be an object", "chart"))
        raise DocumentError(violations)

    _expect_keys(data, {"columns", "rows"}, {"columns", "rows"}, "data", violations)
    columns = _parse_columns(data.get("columns"), violations)
    rows = _parse_rows(data.get("rows", []), columns, violations)
    spec = _parse_chart(chart, violations)
    if violations:
        raise DocumentError(violations)

    table = DataTable(tuple(columns), tuple(rows))
    violations = validate_spec(table, spec)
    if violations:
        raise DocumentError(violations)
    return table, spec


def parse_chart_pair(source_raw, target_raw):
    """Parse and validate both documents, reporting all violations together."""
    violations = []
    source = target = None
    try:
        source = parse_chart_document(source_raw)
    except DocumentError as exc:
        violations.extend(
            Violation(v.code, v.message, f"source:{v.path}" if v.path else "source")
            for v in exc.violations
        )
    try:
        target = parse_chart_document(target_raw)
    except DocumentError as exc:
        violations.extend(
            Violation(v.code, v.message, f"target:{v.path}" if v.path else "target")
            for v in exc.violations
        )
    if violations:
        raise DocumentError(violations)
    return source[0], source[1], target[0], target[1]


def serialize_document(table, spec):
    """Inverse of parse_chart_document; parse(serialize(x)) is semantically x."""
    columns = []
    for col in table.columns:
        entry = {"name": col.name, "role": col.role, "valueType": col.value_type}
        if col.temporal_format is not None:
            entry["format"] = col.temporal_format
        columns.append(entry)
    chart = {
        "type": spec.chart_type,
        "x": spec.x_dimension,
        "legend": spec.legend_dimension,
        "measures": [{"column": m.column, "aggregate": m.aggregate} for m in spec.measures],
        "sort": (
            {"by": spec.sort.by, "direction": spec.sort.direction} if spec.sort else None
        ),
        "showXAxis": spec.show_x_axis,
        "showYAxis": spec.show_y_axis,
        "showLegend": spec.show_legend,
        "title": spec.title,
    }
    if chart["x"] is None:
        del chart["x"]
    if chart["legend"] is None:
        del chart["legend"]
    if chart["sort"] is None:
        del chart["sort"]
    if spec.label_map is not None:
        chart["labelMap"] = {
            "column": spec.label_map.column,
            "groups": dict(spec.label_map.groups),
        }
    return {"data": {"columns": columns, "rows": [dict(r) for r in table.rows]}, "chart": chart}


def temporal_key(column, value):
    """Chronological sort key for a temporal value; lexical fallback."""
    if column.temporal_format:
        try:
            return (0, datetime.strptime(value, column.temporal_format))
        except ValueError:
            return (1, value)
    return (1, value)
