from __future__ import annotations

import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from foon.model import FOONGraph, FunctionalUnit, Kitchen, Level, ObjectNode  # noqa: E402
from foon.parser import parse_kitchen, parse_subgraph  # noqa: E402

DATA = Path(__file__).parent / "data"

labels = st.sampled_from(["apple", "bowl", "cup", "egg", "knife", "milk"])
states = st.lists(st.sampled_from(["whole", "chopped", "hot", "mixed"]), max_size=3)


@st.composite
def object_nodes(draw):
    label = draw(labels)
    ingredients = draw(st.lists(labels.filter(lambda x: x != label), max_size=2))
    return ObjectNode(label, tuple(draw(states)), tuple(ingredients), draw(st.booleans()))


@st.composite
def units(draw):
    return FunctionalUnit.build(
        draw(st.lists(object_nodes(), min_size=1, max_size=3)),
        draw(st.sampled_from(["cut", "pour", "stir"])),
        draw(st.lists(object_nodes(), min_size=1, max_size=3)),
    )


levels = st.sampled_from(list(Level))


@pytest.fixture
def salad_text() -> str:
    return (DATA / "salad.foon").read_text()


@pytest.fixture
def salad(salad_text):
    return parse_subgraph(salad_text, source="salad.foon")


@pytest.fixture
def salad_l3(salad) -> FOONGraph:
    return FOONGraph(salad.units, Level.L3)


@pytest.fixture
def salad_kitchen() -> Kitchen:
    return parse_kitchen((DATA / "salad_kitchen.txt").read_text())


@pytest.fixture
def salad_goal() -> ObjectNode:
    return ObjectNode("bowl", ("contains",), ("tomato", "lettuce"))
