"""Seeded synthetic kitchen corpora for benchmarking without the annotated videos.

``synthetic_networks`` builds a level-2 universal FOON of a requested size from
recipe-like subgraphs, then picks a similarity index and a category index so
that expansion and generalization land near requested unit counts.  The
defaults follow the published level-2 sizes (866 regular units, 5493 after
expansion, 821 after generalization).
"""
from __future__ import annotations

from dataclasses import dataclass

from .model import FOONGraph, FunctionalUnit, Level, ObjectNode, unit_key
from .parser import CategoryIndex
from .rng import SplitMix64
from .similarity import DEFAULT_THRESHOLD, SimilarityIndex
from .transform import ExpansionConfig, expand, expansion_size, generalize

STATES = ["whole", "chopped", "sliced", "diced", "peeled", "boiled", "fried",
          "mashed", "grated", "seasoned", "melted", "beaten"]
MOTIONS = ["cut", "slice", "dice", "peel", "boil", "fry", "mash", "grate",
           "season", "melt", "beat", "stir"]
CONTAINER_MOTIONS = ["pour", "pick-and-place", "sprinkle", "scoop"]
FINE_TUNE_CANDIDATES = 64


@dataclass
class SyntheticCorpus:
    reg: FOONGraph
    exp: FOONGraph
    gen: FOONGraph
    index: SimilarityIndex
    categories: CategoryIndex


def _vocabulary(n_categories: int, per_category: int, n_tools: int, n_containers: int):
    ingredients = {f"cat{c:02d}": [f"food{c:02d}{j}" for j in range(per_category)]
                   for c in range(n_categories)}
    tools = [f"tool{t:02d}" for t in range(n_tools)]
    containers = [f"vessel{v:02d}" for v in range(n_containers)]
    return ingredients, tools, containers


def _recipe_units(rng: SplitMix64, ingredients, tools, containers):
    """Units of one recipe: prepare 2-4 ingredients, then combine them in a vessel."""
    foods = [f for group in ingredients.values() for f in group]
    vessel = containers[rng.below(len(containers))]
    units = []
    held = ObjectNode(vessel, ("empty",))
    for food in rng.sample(foods, 2 + rng.below(3)):
        states = rng.sample(STATES[1:], 1 + rng.below(3))
        current = ObjectNode(food, ("whole",))
        for state in states:
            tool = tools[rng.below(len(tools))]
            motion = MOTIONS[STATES.index(state) % len(MOTIONS)]
            nxt = ObjectNode(food, (state,))
            units.append(FunctionalUnit.build(
                (ObjectNode(tool), current), motion, (ObjectNode(tool), nxt)))
            current = nxt
        motion = CONTAINER_MOTIONS[rng.below(len(CONTAINER_MOTIONS))]
        filled = ObjectNode(vessel, ("contains",), (food,) + held.ingredients)
        units.append(FunctionalUnit.build((held, current), motion, (filled,)))
        held = filled
    return units


def _smallest(lo: int, hi: int, ok) -> int:
    """Smallest n in [lo, hi] with ok(n), assuming ok is monotone."""
    while lo < hi:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


def synthetic_networks(
    seed: int,
    reg_units: int = 866,
    exp_units: int = 5493,
    gen_units: int = 821,
    n_categories: int = 20,
    per_category: int = 8,
    n_tools: int = 12,
    n_containers: int = 10,
) -> SyntheticCorpus:
    rng = SplitMix64.stream(seed, 0)
    ingredients, tools, containers = _vocabulary(n_categories, per_category, n_tools, n_containers)

    units: list[FunctionalUnit] = []
    seen: set = set()
    while len(units) < reg_units:
        for u in _recipe_units(rng, ingredients, tools, containers):
            key = unit_key(u, Level.L2)
            if key not in seen:
                seen.add(key)
                units.append(u)
            if len(units) == reg_units:
                break
    reg = FOONGraph(units, Level.L2)

    # similarity: candidate pairs within a category (foods) or tool group of four
    pairs = [(a, b) for group in ingredients.values()
             for i, a in enumerate(group) for b in group[i + 1:]]
    pairs += [(a, b) for i, a in enumerate(tools) for b in tools[i + 1:]
              if int(a[4:]) // 4 == int(b[4:]) // 4]
    pair_rng = SplitMix64.stream(seed, 1)
    pair_rng.shuffle(pairs)
    scored = [(a, b, 0.89 + 0.11 * pair_rng.uniform()) for a, b in pairs]

    def index_for(chosen) -> SimilarityIndex:
        neighbors: dict[str, dict[str, float]] = {}
        for a, b, s in chosen:
            neighbors.setdefault(a, {})[b] = s
            neighbors.setdefault(b, {})[a] = s
        return SimilarityIndex(DEFAULT_THRESHOLD, neighbors)

    n_pairs = _smallest(0, len(scored), lambda n: expansion_size(reg, index_for(scored[:n])) >= exp_units)
    # one pair can add hundreds of units: fill up to the target with later pairs
    # that fit, then take one overshooting pair only if it lands closer
    chosen = scored[:max(n_pairs - 1, 0)]
    size = expansion_size(reg, index_for(chosen))
    overshoot = None
    for pair in scored[len(chosen):len(chosen) + FINE_TUNE_CANDIDATES]:
        grown = expansion_size(reg, index_for(chosen + [pair]))
        if grown <= exp_units:
            chosen, size = chosen + [pair], grown
        elif overshoot is None or grown < overshoot[1]:
            overshoot = (pair, grown)
    if overshoot is not None:
        grown = expansion_size(reg, index_for(chosen + [overshoot[0]]))
        if abs(grown - exp_units) < abs(size - exp_units):
            chosen = chosen + [overshoot[0]]
    index = index_for(chosen)
    exp = expand(reg, index, ExpansionConfig(DEFAULT_THRESHOLD))

    # categories: tool groups first, then food categories, one label at a time
    cat_rng = SplitMix64.stream(seed, 2)
    candidates = [(t, f"toolgroup{int(t[4:]) // 4}") for t in tools]
    candidates += [(f, c) for c, group in ingredients.items() for f in group]
    cat_rng.shuffle(candidates)
    names = sorted({c for _, c in candidates})

    def cats_for(n: int) -> CategoryIndex:
        return CategoryIndex({label: [cat] for label, cat in candidates[:n]}, names)

    n_cats = _smallest(0, len(candidates), lambda n: len(generalize(reg, cats_for(n))) <= gen_units)
    categories = cats_for(n_cats)
    gen = generalize(reg, categories)
    return SyntheticCorpus(reg, exp, gen, index, categories)
