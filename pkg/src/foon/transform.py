"""Graph transforms: merging, hierarchy abstraction, FOON-EXP and FOON-GEN."""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator

from .model import FOONGraph, FunctionalUnit, Kitchen, Level, ObjectNode
from .parser import CategoryIndex, Subgraph
from .similarity import DEFAULT_THRESHOLD, SimilarityIndex


class ExpansionTooLarge(RuntimeError):
    def __init__(self, projected: int, limit: int):
        self.projected = projected
        self.limit = limit
        super().__init__(f"expansion would produce up to {projected} units (limit {limit})")


@dataclass(frozen=True)
class ExpansionConfig:
    threshold: float = DEFAULT_THRESHOLD
    max_units: int | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold {self.threshold} outside [0, 1]")
        if self.max_units is not None and self.max_units < 0:
            raise ValueError("max_units must be non-negative")


class GeneralizeMode(enum.Enum):
    FIRST_CATEGORY = "first"
    ALL_COMBINATIONS = "all"


def merge(sources: Iterable[Subgraph | FOONGraph], level: Level | int = Level.L3) -> FOONGraph:
    """Union of all units, duplicates at ``level`` removed (first occurrence kept)."""
    return FOONGraph(itertools.chain.from_iterable(s.units for s in sources), level)


def abstract_to_level(g: FOONGraph, target: Level | int) -> FOONGraph:
    target = Level.parse(target)
    if target > g.level:
        raise ValueError(f"cannot raise a level {g.level.value} graph to level {target.value}")
    if target == g.level:
        return g
    return FOONGraph((u.map_nodes(lambda n: n.at_level(target)) for u in g.units), target)


def _substitutions(unit: FunctionalUnit, idx: SimilarityIndex) -> Iterator[dict[str, str]]:
    labels = unit.labels()
    choices = [idx.alternatives(label) for label in labels]
    for combo in itertools.product(*choices):
        yield {a: b for a, b in zip(labels, combo) if a != b}


def projected_expansion(g: FOONGraph, idx: SimilarityIndex) -> int:
    """Candidate count before deduplication."""
    return sum(math.prod(len(idx.alternatives(x)) for x in u.labels()) for u in g.units)


def _raw(n: ObjectNode) -> tuple:
    return n.label, tuple(sorted(n.states)), n.ingredients, n.is_moving


def _side_key(nodes: list[tuple], mapping: dict[str, str], level: Level) -> tuple:
    """Sorted identity keys of relabeled nodes, collapsed as ``FunctionalUnit.build`` would."""
    full = set()
    for label, states, ingredients, moving in nodes:
        label = mapping.get(label, label)
        ing = tuple(sorted({mapping.get(i, i) for i in ingredients} - {label}))
        full.add((label, states, ing, moving))
    if level == Level.L1:
        return tuple(sorted((f[0],) for f in full))
    if level == Level.L2:
        return tuple(sorted((f[0], f[1], f[3]) for f in full))
    return tuple(sorted(full))


def _new_substitutions(g: FOONGraph, idx: SimilarityIndex) -> Iterator[tuple[FunctionalUnit, dict[str, str]]]:
    """(unit, mapping) for every substitution whose result is not yet in the graph."""
    level = g.level
    seen = set(g.unit_keys())
    for unit in g.units:
        ins = [_raw(n) for n in unit.inputs]
        outs = [_raw(n) for n in unit.outputs]
        for mapping in _substitutions(unit, idx):
            if not mapping:
                continue
            key = (unit.motion.label, _side_key(ins, mapping, level), _side_key(outs, mapping, level))
            if key not in seen:
                seen.add(key)
                yield unit, mapping


def expansion_size(g: FOONGraph, idx: SimilarityIndex) -> int:
    """Unit count of ``expand(g, idx)`` without building the new units."""
    return len(g.units) + sum(1 for _ in _new_substitutions(g, idx))


def expand(g: FOONGraph, idx: SimilarityIndex, cfg: ExpansionConfig = ExpansionConfig()) -> FOONGraph:
    """FOON-EXP: add every unit obtained by swapping labels for similar ones.

    One replacement is chosen per distinct label and applied to every occurrence
    of that label in the unit, including inside ingredient lists.  Original
    units come first, then candidates in unit order and substitution order.
    """
    if idx.threshold != cfg.threshold:
        raise ValueError(f"index threshold {idx.threshold} does not match config {cfg.threshold}")
    limit = cfg.max_units
    if limit is not None and limit < len(g.units):
        raise ValueError(f"max_units {limit} is below the input size {len(g.units)}")

    out = list(g.units)
    for unit, mapping in _new_substitutions(g, idx):
        out.append(unit.map_nodes(lambda n: n.relabel(mapping)))
        if limit is not None and len(out) > limit:
            raise ExpansionTooLarge(projected_expansion(g, idx), limit)
    return FOONGraph(out, g.level)


def generalize(
    g: FOONGraph,
    cats: CategoryIndex,
    mode: GeneralizeMode = GeneralizeMode.FIRST_CATEGORY,
) -> FOONGraph:
    """FOON-GEN: relabel objects with their categories and deduplicate.

    Objects without a category keep their label.  In ALL_COMBINATIONS mode each
    multi-category node label fans out to one unit per category choice, while
    ingredient-only labels take their first category.
    """
    first = cats.first()
    units: list[FunctionalUnit] = []
    for unit in g.units:
        if mode is GeneralizeMode.FIRST_CATEGORY:
            units.append(unit.map_nodes(lambda n: n.relabel(first)))
            continue
        labels = [x for x in unit.labels() if cats.categories_of(x)]
        for combo in itertools.product(*(cats.categories_of(x) for x in labels)):
            mapping = dict(first)
            mapping.update(zip(labels, combo))
            units.append(unit.map_nodes(lambda n, m=mapping: n.relabel(m)))
    return FOONGraph(units, g.level)


def categorize_kitchen(
    k: Kitchen,
    cats: CategoryIndex,
    mode: GeneralizeMode = GeneralizeMode.FIRST_CATEGORY,
) -> Kitchen:
    """Kitchen in category space.

    In ALL_COMBINATIONS mode an item with several categories stands for each of them.
    """
    first = cats.first()
    items: list[ObjectNode] = []
    for node in k.items:
        if mode is GeneralizeMode.ALL_COMBINATIONS and len(cats.categories_of(node.label)) > 1:
            for cat in cats.categories_of(node.label):
                mapping = dict(first)
                mapping[node.label] = cat
                items.append(node.relabel(mapping))
        else:
            items.append(node.relabel(first))
    return Kitchen(tuple(items))


def categorize_goal(goal: ObjectNode, cats: CategoryIndex) -> ObjectNode:
    """Goal in category space; always the first category."""
    return goal.relabel(cats.first())


def categorize_query(
    k: Kitchen,
    goal: ObjectNode,
    cats: CategoryIndex,
    mode: GeneralizeMode = GeneralizeMode.FIRST_CATEGORY,
) -> tuple[Kitchen, ObjectNode]:
    """Map a kitchen and goal into category space so they can query a FOON-GEN."""
    return categorize_kitchen(k, cats, mode), categorize_goal(goal, cats)
