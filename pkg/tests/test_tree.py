import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chartmorph.document import parse_chart_document
from chartmorph.tree import build_tree, dump_tree, path_id, tree_equal

from conftest import fixture_bytes, load_doc


def tree_for(name, side):
    table, spec = parse_chart_document(fixture_bytes(name, side))
    return build_tree(table, spec)


def describe(tree):
    return [lv.describe() for lv in tree.levels]


def test_clustered_level_order_follows_encoding():
    tree = tree_for("grouped_swap", "source")
    assert describe(tree) == ["Year", "Brand", "measure"]
    assert [n.label for n in tree.root.children] == ["2018", "2019", "2020"]
    assert [n.label for n in tree.root.children[0].children] == ["BMW", "Audi"]


def test_swapped_encoding_swaps_levels():
    tree = tree_for("grouped_swap", "target")
    assert describe(tree) == ["Brand", "Year", "measure"]


def test_swapped_trees_are_not_equal():
    assert not tree_equal(tree_for("grouped_swap", "source"),
                          tree_for("grouped_swap", "target"))


def test_tree_equal_reflexive_and_value_sensitive():
    a = tree_for("sorting", "source")
    b = tree_for("sorting", "source")
    assert tree_equal(a, b)
    b.leaves()[0][1].value += 1.0
    assert not tree_equal(a, b)


def test_no_dimension_table_gives_depth_one_tree():
    doc = {
        "data": {
            "columns": [{"name": "Sales", "role": "measure", "valueType": "numeric"}],
            "rows": [{"Sales": 10}, {"Sales": 20}, {"Sales": 12}],
        },
        "chart": {"type": "barV",
                  "measures": [{"column": "Sales", "aggregate": "sum"}]},
    }
    table, spec = parse_chart_document(json.dumps(doc))
    tree = build_tree(table, spec)
    assert tree.depth == 1
    leaves = tree.leaves()
    assert len(leaves) == 1
    assert leaves[0][1].value == pytest.approx(42.0)


def test_aggregates_sum_per_subspace():
    tree = tree_for("composite", "source")
    # source chart maps only the year; values sum over brands
    assert describe(tree) == ["Year", "measure"]
    values = {path[0]: node.value for path, node in tree.leaves()}
    assert values["2017"] == pytest.approx(55.0)
    assert values["2018"] == pytest.approx(88.0)


def test_avg_aggregate():
    tree = tree_for("aggregate", "target")
    values = {path[0]: node.value for path, node in tree.leaves()}
    assert values["BMW"] == pytest.approx((62 + 71 + 57) / 3)


def test_raw_value_level_for_non_aggregated_scatter():
    tree = tree_for("aggregate", "source")
    assert describe(tree) == ["Brand", "measure", "raw"]
    raw_under_bmw = tree.node_by_path(("BMW", "Price"))
    assert [c.value for c in raw_under_bmw.children] == [62.0, 71.0, 57.0]


def test_sparse_combinations_produce_no_node():
    tree = tree_for("filtering", "source")
    # brands only carry their own country: one leaf per brand
    assert len(tree.leaves()) == 5
    assert tree.node_by_path(("BMW", "Japan")) is None


def test_sort_order_applies_to_first_dimension():
    tree = tree_for("sorting", "target")
    assert [n.label for n in tree.root.children] == ["VW", "BMW", "Tesla", "Audi", "Kia"]


def test_temporal_order_is_chronological():
    doc = load_doc("composite", "source")
    doc["data"]["rows"] = list(reversed(doc["data"]["rows"]))
    table, spec = parse_chart_document(json.dumps(doc))
    tree = build_tree(table, spec)
    assert [n.label for n in tree.root.children] == ["2017", "2018", "2019", "2020"]


def test_build_tree_deterministic():
    a = dump_tree(tree_for("composite", "target"))
    b = dump_tree(tree_for("composite", "target"))
    assert a == b


def test_dump_format_golden():
    tree = tree_for("sorting", "source")
    assert dump_tree(tree) == (
        "root[Brand, measure]\n"
        "  Brand:BMW\n"
        "    Sales=55\n"
        "  Brand:Audi\n"
        "    Sales=30\n"
        "  Brand:VW\n"
        "    Sales=68\n"
        "  Brand:Kia\n"
        "    Sales=18\n"
        "  Brand:Tesla\n"
        "    Sales=43\n"
    )


def test_path_ids_are_stable_and_unique():
    tree = tree_for("grouped_swap", "source")
    ids = [path_id(tree, path) for path, _ in tree.leaves()]
    assert len(set(ids)) == len(ids) == 6
    assert "Year=2018/Brand=BMW/Sales" in ids


@st.composite
def table_rows(draw):
    years = draw(st.lists(
        st.sampled_from(["2018", "2019", "2020", "2021"]),
        min_size=1, max_size=4, unique=True,
    ))
    brands = draw(st.lists(
        st.sampled_from(["BMW", "Audi", "VW", "Kia"]),
        min_size=1, max_size=4, unique=True,
    ))
    rows = []
    for y in years:
        for b in brands:
            if draw(st.booleans()) or (y == years[0] and b == brands[0]):
                rows.append({
                    "Year": y, "Brand": b,
                    "Sales": draw(st.integers(min_value=0, max_value=500)),
                })
    return rows


@settings(max_examples=60, deadline=None)
@given(table_rows())
def test_leaf_count_matches_group_by_and_sums_conserve(rows):
    doc = {
        "data": {
            "columns": [
                {"name": "Year", "role": "dimension", "valueType": "temporal"},
                {"name": "Brand", "role": "dimension", "valueType": "categorical"},
                {"name": "Sales", "role": "measure", "valueType": "numeric"},
            ],
            "rows": rows,
        },
        "chart": {"type": "barV", "x": "Year", "legend": "Brand",
                  "measures": [{"column": "Sales", "aggregate": "sum"}]},
    }
    table, spec = parse_chart_document(json.dumps(doc))
    tree = build_tree(table, spec)
    combos = {(r["Year"], r["Brand"]) for r in rows}
    assert len(tree.leaves()) == len(combos)
    # conservation: every node's subtree total equals the group-by sum
    for year_node in tree.root.children:
        expected = sum(r["Sales"] for r in rows if r["Year"] == year_node.label)
        total = sum(
            leaf.value
            for brand in year_node.children
            for leaf in brand.children
        )
        assert total == pytest.approx(expected)
