import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import levels, object_nodes, units
from foon.model import (
    FOONGraph,
    FunctionalUnit,
    Kitchen,
    Level,
    ObjectNode,
    graph_stats,
    node_identity,
    unit_equals,
    unit_key,
)


def test_states_collapse_at_level_1_only():
    peeled = ObjectNode("strawberry", ("peeled",))
    chopped = ObjectNode("strawberry", ("chopped",))
    assert node_identity(peeled, Level.L1) == node_identity(chopped, Level.L1)
    assert node_identity(peeled, Level.L2) != node_identity(chopped, Level.L2)


def test_mixtures_merge_at_level_2_but_not_level_3():
    a = ObjectNode("bowl", ("contains",), ("egg", "salt"))
    b = ObjectNode("bowl", ("contains",), ("egg", "milk"))
    assert node_identity(a, Level.L2) == node_identity(b, Level.L2)
    assert node_identity(a, Level.L3) != node_identity(b, Level.L3)


def test_identity_ignores_order_of_set_fields():
    a = ObjectNode("bowl", ("hot", "contains"), ("salt", "egg"))
    b = ObjectNode("bowl", ("contains", "hot"), ("egg", "salt"))
    assert node_identity(a, Level.L3) == node_identity(b, Level.L3)


def test_moving_flag_counts_above_level_1():
    still, moving = ObjectNode("spoon"), ObjectNode("spoon", is_moving=True)
    assert node_identity(still, Level.L1) == node_identity(moving, Level.L1)
    assert node_identity(still, Level.L2) != node_identity(moving, Level.L2)


def test_labels_are_normalized():
    node = ObjectNode("  Corn   Starch ", ("Whole",))
    assert node.label == "corn starch"
    assert node.states == ("whole",)


@pytest.mark.parametrize("kwargs", [
    dict(label="   "),
    dict(label="bowl", ingredients=("bowl",)),
    dict(label="bowl", states=("",)),
])
def test_invalid_nodes_rejected(kwargs):
    with pytest.raises(ValueError):
        ObjectNode(**kwargs)


def test_unit_needs_inputs_and_outputs():
    with pytest.raises(ValueError):
        FunctionalUnit((), "cut", (ObjectNode("a"),))
    with pytest.raises(ValueError):
        FunctionalUnit((ObjectNode("a"),), "cut", ())


def test_unit_rejects_duplicate_l3_inputs():
    with pytest.raises(ValueError, match="duplicate input"):
        FunctionalUnit((ObjectNode("a"), ObjectNode("a")), "cut", (ObjectNode("b"),))
    # build() merges them instead
    u = FunctionalUnit.build((ObjectNode("a"), ObjectNode("a")), "cut", (ObjectNode("b"),))
    assert len(u.inputs) == 1


def test_unit_time_span_ordered():
    with pytest.raises(ValueError):
        FunctionalUnit((ObjectNode("a"),), "cut", (ObjectNode("b"),), (3.0, 1.0))


def test_unit_equals_examples():
    knife, lettuce = ObjectNode("knife"), ObjectNode("lettuce", ("whole",))
    out = (knife, ObjectNode("lettuce", ("chopped",)))
    u = FunctionalUnit((knife, lettuce), "cut", out)
    assert unit_equals(u, u, Level.L3)
    assert unit_equals(u, FunctionalUnit((lettuce, knife), "cut", out, (1.0, 2.0), "other"), Level.L3)
    assert not unit_equals(u, FunctionalUnit((knife, lettuce), "slice", out), Level.L1)


def test_ingredient_only_difference_depends_on_level():
    a = FunctionalUnit((ObjectNode("bowl", ("contains",), ("egg",)),), "stir",
                       (ObjectNode("bowl", ("mixed",), ("egg",)),))
    b = FunctionalUnit((ObjectNode("bowl", ("contains",), ("milk",)),), "stir",
                       (ObjectNode("bowl", ("mixed",), ("milk",)),))
    assert unit_equals(a, b, Level.L2)
    assert not unit_equals(a, b, Level.L3)


def test_unit_equals_is_multiset_based():
    # two level-3-distinct bowls that coincide at level 2
    two = FunctionalUnit((ObjectNode("bowl", (), ("egg",)), ObjectNode("bowl", (), ("milk",))), "pour",
                         (ObjectNode("bowl"),))
    one = FunctionalUnit((ObjectNode("bowl", (), ("egg",)),), "pour", (ObjectNode("bowl"),))
    assert not unit_equals(two, one, Level.L2)
    assert not unit_equals(two, one, Level.L1)


@given(object_nodes())
def test_identity_coarsening_chain(node):
    other = ObjectNode(node.label, node.states[::-1], node.ingredients[::-1], node.is_moving)
    for lo, hi in ((Level.L1, Level.L2), (Level.L2, Level.L3)):
        if node_identity(node, hi) == node_identity(other, hi):
            assert node_identity(node, lo) == node_identity(other, lo)


@given(object_nodes(), object_nodes())
def test_identity_coarsening_chain_pairs(a, b):
    if node_identity(a, Level.L3) == node_identity(b, Level.L3):
        assert node_identity(a, Level.L2) == node_identity(b, Level.L2)
    if node_identity(a, Level.L2) == node_identity(b, Level.L2):
        assert node_identity(a, Level.L1) == node_identity(b, Level.L1)


@given(units(), units(), units(), levels)
def test_unit_equals_is_equivalence(a, b, c, level):
    assert unit_equals(a, a, level)
    assert unit_equals(a, b, level) == unit_equals(b, a, level)
    if unit_equals(a, b, level) and unit_equals(b, c, level):
        assert unit_equals(a, c, level)
    assert unit_equals(a, b, level) == (unit_key(a, level) == unit_key(b, level))


def test_graph_stats_empty():
    assert tuple(graph_stats(FOONGraph())) == (0, 0, 0)


def test_graph_stats_single_cut_unit():
    knife = ObjectNode("knife")
    u = FunctionalUnit((knife, ObjectNode("lettuce")), "cut", (knife, ObjectNode("lettuce", ("chopped",))))
    # distinct level-2 keys: knife, lettuce, lettuce[chopped]
    assert tuple(graph_stats(FOONGraph([u], Level.L2))) == (3, 1, 1)


def test_graph_stats_salad(salad):
    assert tuple(graph_stats(FOONGraph(salad.units, Level.L3))) == (5, 2, 2)
    # both bowls share the level-2 key bowl[contains]
    assert tuple(graph_stats(FOONGraph(salad.units, Level.L2))) == (4, 2, 2)
    assert tuple(graph_stats(FOONGraph(salad.units, Level.L1))) == (3, 2, 2)


def test_graph_dedup_and_indices(salad):
    g = FOONGraph(salad.units + salad.units[::-1], Level.L3)
    assert len(g) == 2
    chopped = node_identity(ObjectNode("lettuce", ("chopped",)), Level.L3)
    assert g.producer_index[chopped] == (0,)
    assert g.object_index[chopped] == (0, 1)
    assert salad.units[1] in g


@given(st.lists(units(), max_size=8), levels)
def test_indices_rebuildable(us, level):
    g = FOONGraph(us, level)
    rebuilt = FOONGraph(g.units, level)
    assert rebuilt.object_index == g.object_index
    assert rebuilt.producer_index == g.producer_index
    for key, refs in g.producer_index.items():
        for i in refs:
            assert key in {node_identity(n, level) for n in g.units[i].outputs}
    assert graph_stats(g).motion_node_count == len(g.units)


def test_kitchen_collapses_duplicates():
    k = Kitchen((ObjectNode("knife"), ObjectNode("Knife"), ObjectNode("bowl")))
    assert len(k) == 2
