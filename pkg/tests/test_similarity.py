import random

import pytest

from foon.parser import Taxonomy, parse_similarity_matrix, parse_taxonomy
from foon.similarity import (
    NoCommonSubsumer,
    SimilarityIndex,
    UnknownLabel,
    WuPalmer,
    build_similarity_index,
    wu_palmer,
)
from gen import brute_wu_palmer, hand_built_taxonomies, random_taxonomy

VEG = hand_built_taxonomies()[0]


def test_identity_score():
    assert wu_palmer(VEG, "kale", "kale") == 1.0


def test_siblings_under_vegetable():
    # subsumer vegetable at depth 3, one edge from each side: 6 / 8
    assert wu_palmer(VEG, "kale", "lettuce") == 0.75


def test_leaf_against_ancestor():
    # subsumer food at depth 2, two edges from kale: 4 / 6
    assert wu_palmer(VEG, "kale", "food") == pytest.approx(4 / 6)


def test_depth_is_longest_root_path():
    t = parse_taxonomy("a\troot\nb\ta\nc\tb\nc\troot\n")
    assert WuPalmer(t).depth == {"root": 1, "a": 2, "b": 3, "c": 4}


HAND_BUILT = hand_built_taxonomies()


@pytest.mark.parametrize("t", HAND_BUILT, ids=range(len(HAND_BUILT)))
def test_hand_built_match_brute_force(t):
    assert len(t.nodes) <= 12
    wp = WuPalmer(t)
    for a in sorted(t.nodes):
        for b in sorted(t.nodes):
            assert wp(a, b) == brute_wu_palmer(t, a, b)


def test_random_dags_symmetric_and_bounded():
    rng = random.Random(3)
    for _ in range(20):
        t = random_taxonomy(rng, rng.randint(2, 200))
        wp = WuPalmer(t)
        names = sorted(t.nodes)
        for _ in range(200):
            a, b = rng.choice(names), rng.choice(names)
            s = wp(a, b)
            assert s == wp(b, a)
            assert 0.0 < s <= 1.0
            assert (s == 1.0) == (a == b)


def test_random_small_dags_match_brute_force():
    rng = random.Random(11)
    for _ in range(30):
        t = random_taxonomy(rng, rng.randint(2, 12))
        wp = WuPalmer(t)
        for a in sorted(t.nodes):
            for b in sorted(t.nodes):
                assert wp(a, b) == brute_wu_palmer(t, a, b)


def test_unknown_label():
    with pytest.raises(UnknownLabel):
        wu_palmer(VEG, "kale", "granite")


def test_no_common_subsumer_across_roots():
    t = Taxonomy.from_edges([("a", "r1"), ("b", "r2")], ["a", "b", "r1", "r2"])
    with pytest.raises(NoCommonSubsumer):
        wu_palmer(t, "a", "b")
    assert brute_wu_palmer(t, "a", "b") is None


# -- similarity index -------------------------------------------------------------


def test_threshold_one_leaves_no_neighbors():
    idx = build_similarity_index(VEG, ["kale", "lettuce", "food"], 1.0)
    assert all(not idx.of(x) for x in ("kale", "lettuce", "food"))


def test_threshold_point_seven():
    idx = build_similarity_index(VEG, ["kale", "lettuce"], 0.7)
    assert idx.of("kale") == {"lettuce": 0.75}
    assert idx.alternatives("kale") == ["kale", "lettuce"]


def test_matrix_threshold_filter():
    m = parse_similarity_matrix("kale\tlettuce\t0.9\nkale\trock\t0.1\n")
    idx = build_similarity_index(m, ["kale", "lettuce", "rock"], 0.89)
    assert idx.of("kale") == {"lettuce": 0.9}
    assert idx.of("rock") == {}


def test_threshold_monotonicity():
    rng = random.Random(5)
    t = random_taxonomy(rng, 60)
    objects = sorted(t.nodes)
    prev = None
    for threshold in (1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.3, 0.0):
        idx = build_similarity_index(t, objects, threshold)
        if prev is not None:
            for label in objects:
                assert set(prev.of(label)) <= set(idx.of(label))
        prev = idx


def test_matrix_and_taxonomy_sources_agree():
    objects = ["kale", "lettuce", "food", "vegetable"]
    via_tax = build_similarity_index(VEG, objects, 0.6)
    via_matrix = SimilarityIndex.from_matrix(via_tax.to_matrix(), 0.6)
    assert via_matrix == via_tax


def test_overrides_take_precedence():
    overrides = parse_similarity_matrix("kale\tlettuce\t0.2\nkale\tspinach\t0.95\n")
    idx = build_similarity_index(VEG, ["kale", "lettuce", "spinach"], 0.7, overrides)
    assert idx.of("kale") == {"spinach": 0.95}
    assert idx.unresolved == []


def test_unresolved_objects_reported():
    idx = build_similarity_index(VEG, ["kale", "granite"], 0.7)
    assert idx.unresolved == ["granite"]
    assert idx.of("granite") == {}


def test_bad_threshold():
    with pytest.raises(ValueError):
        build_similarity_index(VEG, ["kale"], 1.5)
