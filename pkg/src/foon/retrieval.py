"""Task-tree retrieval by backward chaining over functional units.

The search goes depth-first over the units that produce an object and
breadth-first over the input objects of the unit being tried.  Producers are
ordered by a lazily refined estimate of their subtree step count, so a unit
whose inputs are all in the kitchen is tried before anything that needs
preparation.
"""
from __future__ import annotations

import sys
import time
from collections import deque
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Union

from .model import FOONGraph, FunctionalUnit, Kitchen, ObjectNode, unit_key

DEFAULT_MAX_EXPANSIONS = 1_000_000


@dataclass(frozen=True)
class SearchBudget:
    max_expansions: int = DEFAULT_MAX_EXPANSIONS
    wall_clock_limit: float | None = None  # milliseconds

    def __post_init__(self) -> None:
        if self.max_expansions < 1:
            raise ValueError("max_expansions must be at least 1")

    @classmethod
    def unlimited(cls) -> "SearchBudget":
        return cls(sys.maxsize)


@dataclass(frozen=True)
class TaskTree:
    units: tuple[FunctionalUnit, ...]
    goal: Hashable
    kitchen_used: frozenset = field(default_factory=frozenset)

    def __len__(self) -> int:
        return len(self.units)


@dataclass(frozen=True)
class Solved:
    tree: TaskTree
    elapsed_ms: float = 0.0
    expansions: int = 0


@dataclass(frozen=True)
class Unsolvable:
    expansions: int = 0


@dataclass(frozen=True)
class TimedOut:
    expansions_used: int


RetrievalOutcome = Union[Solved, Unsolvable, TimedOut]


class _OutOfBudget(Exception):
    pass


@contextmanager
def _recursion_headroom(depth: int):
    old = sys.getrecursionlimit()
    if depth > old:
        sys.setrecursionlimit(depth)
    try:
        yield
    finally:
        sys.setrecursionlimit(old)


class _Search:
    def __init__(self, g: FOONGraph, kitchen: frozenset, budget: SearchBudget,
                 motion_costs: Mapping[str, float] | None):
        self.g = g
        self.kitchen = kitchen
        self.budget = budget
        self.costs = motion_costs or {}
        self.expansions = 0
        self.deadline = None
        if budget.wall_clock_limit is not None:
            self.deadline = time.perf_counter() + budget.wall_clock_limit / 1000.0
        self.solved: dict[Hashable, tuple[int, ...]] = {}
        self.failed: set[Hashable] = set()
        # failures that depended on in-progress identities, with the solved-memo epoch
        self.conditional: dict[Hashable, tuple[frozenset, int]] = {}
        self.epoch = 0
        self.in_progress: set[Hashable] = set()
        self._inputs = g.input_keys()

    def _tick(self) -> None:
        if self.expansions >= self.budget.max_expansions:
            raise _OutOfBudget
        if self.deadline is not None and time.perf_counter() > self.deadline:
            raise _OutOfBudget
        self.expansions += 1

    def _estimate(self, i: int) -> float:
        steps = 1.0
        for key in self._inputs[i]:
            if key in self.kitchen:
                continue
            if key in self.failed:
                return float("inf")
            tree = self.solved.get(key)
            steps += len(tree) if tree is not None else 1
        return steps

    def _order(self, key: Hashable) -> list[int]:
        producers = self.g.producer_index.get(key, ())
        units = self.g.units
        return sorted(
            producers,
            key=lambda i: (self._estimate(i), self.costs.get(units[i].motion.label, 0.0), i),
        )

    def solve(self, key: Hashable) -> tuple[tuple[int, ...] | None, frozenset]:
        """Unit indices of an executable subtree for ``key``, or None.

        On failure the second item is the set of in-progress identities the
        failure depended on; a failure that depends on none is final.
        """
        if key in self.kitchen:
            return (), frozenset()
        if key in self.solved:
            return self.solved[key], frozenset()
        if key in self.failed:
            return None, frozenset()
        cached = self.conditional.get(key)
        if cached is not None and cached[1] == self.epoch and cached[0] <= self.in_progress:
            # same solved memo and the same blockers still open: the search would fail again
            return None, cached[0]

        self.in_progress.add(key)
        blocked: set[Hashable] = set()
        try:
            for i in self._order(key):
                self._tick()
                needs = self._inputs[i]
                cyclic = [k for k in needs if k in self.in_progress]
                if cyclic:
                    blocked.update(cyclic)
                    continue
                subtree = self._solve_inputs(needs, blocked)
                if subtree is not None:
                    tree = tuple(dict.fromkeys(subtree + [i]))
                    self.solved[key] = tree
                    self.epoch += 1
                    return tree, frozenset()
        finally:
            self.in_progress.discard(key)
        blocked.discard(key)
        deps = frozenset(blocked)
        if deps:
            self.conditional[key] = (deps, self.epoch)
        else:
            self.failed.add(key)
        return None, deps

    def _solve_inputs(self, needs: tuple, blocked: set) -> list[int] | None:
        queue = deque(needs)
        subtree: list[int] = []
        while queue:
            result, deps = self.solve(queue.popleft())
            if result is None:
                blocked.update(deps)
                return None
            subtree.extend(result)
        return subtree


def _kitchen_keys(g: FOONGraph, k: Kitchen) -> frozenset:
    return k.identities(g.level)


def retrieve_task_tree(
    g: FOONGraph,
    goal: ObjectNode,
    k: Kitchen,
    budget: SearchBudget = SearchBudget(),
    motion_costs: Mapping[str, float] | None = None,
) -> RetrievalOutcome:
    """Find a task tree producing ``goal`` from the kitchen.

    ``motion_costs`` optionally breaks step-count ties by motion label cost.
    """
    start = time.perf_counter()
    kitchen = _kitchen_keys(g, k)
    goal_key = g.identity(goal)
    search = _Search(g, kitchen, budget, motion_costs)
    try:
        with _recursion_headroom(4 * len(g.object_index) + 1000):
            indices, _ = search.solve(goal_key)
    except _OutOfBudget:
        return TimedOut(search.expansions)
    if indices is None:
        return Unsolvable(search.expansions)
    units = tuple(g.units[i] for i in indices)
    used = frozenset(
        key for u in units for key in (g.identity(n) for n in u.inputs) if key in kitchen
    )
    if not units:
        used = frozenset({goal_key})
    tree = TaskTree(units, goal_key, used)
    return Solved(tree, (time.perf_counter() - start) * 1000.0, search.expansions)


def is_solvable(g: FOONGraph, goal: ObjectNode, k: Kitchen) -> bool:
    """Budget-free fixpoint: saturate the available set, then test the goal."""
    available = set(_kitchen_keys(g, k))
    goal_key = g.identity(goal)
    units = list(zip(g.input_keys(), g.output_keys()))
    changed = True
    while changed and goal_key not in available:
        changed = False
        for ins, outs in units:
            if all(key in available for key in ins):
                for key in outs:
                    if key not in available:
                        available.add(key)
                        changed = True
    return goal_key in available


def verify_tree(g: FOONGraph, tree: TaskTree, k: Kitchen) -> bool:
    """True iff the tree's units are in ``g``, distinct, and executable in order."""
    available = set(_kitchen_keys(g, k))
    seen = set()
    for unit in tree.units:
        key = unit_key(unit, g.level)
        if key in seen or unit not in g:
            return False
        seen.add(key)
        if any(g.identity(n) not in available for n in unit.inputs):
            return False
        available.update(g.identity(n) for n in unit.outputs)
    return tree.goal in available
