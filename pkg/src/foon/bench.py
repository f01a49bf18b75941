"""Seeded retrieval experiment over REG / EXP / GEN networks.

Each trial draws one kitchen from the pool and one set of goal objects from
the goal graph; every network is queried with the same kitchen and goals
(GEN queries mapped into category space first).
"""
from __future__ import annotations

import csv
import gc
import io
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Mapping

from .model import FOONGraph, Kitchen, Level, ObjectNode, format_identity, node_identity
from .parser import CategoryIndex
from .retrieval import SearchBudget, Solved, TimedOut, retrieve_task_tree
from .rng import SplitMix64
from .transform import GeneralizeMode, categorize_goal, categorize_kitchen


def created_identities(g: FOONGraph) -> set[Hashable]:
    """Identities some unit outputs without also consuming them."""
    created = set()
    for unit in g.units:
        ins = {g.identity(n) for n in unit.inputs}
        created.update(k for k in (g.identity(n) for n in unit.outputs) if k not in ins)
    return created


def select_goals(g: FOONGraph, n: int, rng: SplitMix64) -> list[Hashable]:
    """``n`` distinct non-basic objects, drawn without replacement.

    Eligible goals are objects some unit makes; a tool that only passes
    through a unit unchanged is still in its basic state.
    """
    eligible = sorted(created_identities(g))
    if n > len(eligible):
        raise ValueError(f"asked for {n} goals but only {len(eligible)} objects are made by some unit")
    return rng.sample(eligible, n)


def select_kitchen(pool, size: int, rng: SplitMix64) -> Kitchen:
    items = sorted(pool, key=lambda n: node_identity(n, Level.L3))
    if size > len(items):
        raise ValueError(f"kitchen size {size} exceeds pool of {len(items)}")
    return Kitchen(tuple(rng.sample(items, size)))


def basic_objects(g: FOONGraph) -> list[ObjectNode]:
    """Objects no unit creates: each is either never an output or passes through unchanged.

    This is the default kitchen pool; tools such as a knife appear as both input
    and output of the units that use them but are never made.
    """
    return [g.representative(k) for k in sorted(set(g.object_index) - created_identities(g))]


@dataclass
class ExperimentConfig:
    graphs: dict[str, FOONGraph]
    kitchen_pool: list[ObjectNode]
    trials: int = 10
    goals_per_trial: int = 100
    kitchen_size: int | float = 0.5
    seed: int = 0
    budget: SearchBudget = field(default_factory=SearchBudget)
    level: Level = Level.L2
    categories: CategoryIndex | None = None
    categorized: frozenset = frozenset({"GEN"})
    mode: GeneralizeMode = GeneralizeMode.FIRST_CATEGORY
    goal_graph: str = "REG"

    def __post_init__(self) -> None:
        self.level = Level.parse(self.level)
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.goals_per_trial < 1:
            raise ValueError("goals_per_trial must be at least 1")
        if self.goal_graph not in self.graphs:
            raise ValueError(f"goal graph {self.goal_graph!r} not among {sorted(self.graphs)}")
        for name, g in self.graphs.items():
            if g.level != self.level:
                raise ValueError(f"graph {name} is level {g.level.value}, experiment is level {self.level.value}")
            if name in self.categorized and self.categories is None:
                raise ValueError(f"graph {name} needs a category index for query mapping")
        if self.pool_size() > len(self.kitchen_pool):
            raise ValueError(f"kitchen size {self.kitchen_size} exceeds pool of {len(self.kitchen_pool)}")

    def pool_size(self) -> int:
        if isinstance(self.kitchen_size, float):
            if not 0.0 <= self.kitchen_size <= 1.0:
                raise ValueError("fractional kitchen_size must lie in [0, 1]")
            return round(self.kitchen_size * len(self.kitchen_pool))
        return self.kitchen_size


@dataclass
class GoalOutcome:
    goal: str
    outcome: str  # solved | unsolvable | timeout
    steps: int
    expansions: int
    elapsed_ms: float


@dataclass
class GraphTrial:
    graph: str
    outcomes: list[GoalOutcome]

    def count(self, kind: str) -> int:
        return sum(o.outcome == kind for o in self.outcomes)

    @property
    def successes(self) -> int:
        return self.count("solved")

    @property
    def timeouts(self) -> int:
        return self.count("timeout")

    @property
    def unsolvables(self) -> int:
        return self.count("unsolvable")

    @property
    def mean_retrieval_ms(self) -> float:
        return sum(o.elapsed_ms for o in self.outcomes) / len(self.outcomes)


@dataclass
class TrialReport:
    trial: int
    kitchen: list[str]
    goals: list[str]
    per_graph: dict[str, GraphTrial]


@dataclass
class ExperimentReport:
    trials: list[TrialReport]

    def graph_names(self) -> list[str]:
        return list(self.trials[0].per_graph) if self.trials else []

    def mean_ms(self, graph: str) -> float:
        outcomes = [o for t in self.trials for o in t.per_graph[graph].outcomes]
        return sum(o.elapsed_ms for o in outcomes) / len(outcomes)

    def successes(self, graph: str) -> list[int]:
        return [t.per_graph[graph].successes for t in self.trials]

    def mean_successes(self, graph: str) -> float:
        s = self.successes(graph)
        return sum(s) / len(s)

    def records(self, zero_timing: bool = False) -> list[dict]:
        def ms(x: float) -> float:
            return 0.0 if zero_timing else round(x, 4)

        out: list[dict] = []
        for t in self.trials:
            out.append({"record": "trial", "trial": t.trial, "kitchen": t.kitchen, "goals": t.goals})
            for name, gt in t.per_graph.items():
                for o in gt.outcomes:
                    out.append({
                        "record": "goal", "trial": t.trial, "graph": name, "goal": o.goal,
                        "outcome": o.outcome, "steps": o.steps, "expansions": o.expansions,
                        "elapsed_ms": ms(o.elapsed_ms),
                    })
                out.append({
                    "record": "summary", "trial": t.trial, "graph": name,
                    "successes": gt.successes, "timeouts": gt.timeouts,
                    "unsolvables": gt.unsolvables, "mean_retrieval_ms": ms(gt.mean_retrieval_ms),
                })
        for name in self.graph_names():
            out.append({
                "record": "aggregate", "graph": name,
                "mean_retrieval_ms": ms(self.mean_ms(name)),
                "mean_successes": self.mean_successes(name),
                "successes": self.successes(name),
            })
        return out

    def to_jsonl(self, zero_timing: bool = False) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records(zero_timing))

    def to_csv(self, zero_timing: bool = False) -> str:
        """Mean-time table followed by the per-trial success table."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["graph", "mean_retrieval_ms"])
        for name in self.graph_names():
            w.writerow([name, 0.0 if zero_timing else round(self.mean_ms(name), 1)])
        w.writerow([])
        w.writerow(["graph"] + [f"trial_{t.trial + 1}" for t in self.trials])
        for name in self.graph_names():
            w.writerow([name] + self.successes(name))
        return buf.getvalue()


def _timed_retrieval(graph, goal, kitchen, budget):
    # collector pauses would dominate sub-millisecond searches; timeit does the same
    enabled = gc.isenabled()
    gc.disable()
    try:
        start = time.perf_counter()
        result = retrieve_task_tree(graph, goal, kitchen, budget)
        return result, (time.perf_counter() - start) * 1000.0
    finally:
        if enabled:
            gc.enable()


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    goal_graph = cfg.graphs[cfg.goal_graph]
    size = cfg.pool_size()
    trials: list[TrialReport] = []
    for t in range(cfg.trials):
        rng = SplitMix64.stream(cfg.seed, t)
        kitchen = select_kitchen(cfg.kitchen_pool, size, rng).at_level(cfg.level)
        goals = select_goals(goal_graph, cfg.goals_per_trial, rng)
        goal_nodes = [goal_graph.representative(k) for k in goals]
        per_graph: dict[str, GraphTrial] = {}
        for name, graph in cfg.graphs.items():
            outcomes = []
            k, queries = kitchen, goal_nodes
            if name in cfg.categorized:
                # query mapping happens once per trial, outside the timed region
                k = categorize_kitchen(kitchen, cfg.categories, cfg.mode)
                queries = [categorize_goal(n, cfg.categories) for n in goal_nodes]
            for key, goal in zip(goals, queries):
                result, elapsed = _timed_retrieval(graph, goal, k, cfg.budget)
                if isinstance(result, Solved):
                    outcomes.append(GoalOutcome(format_identity(key), "solved", len(result.tree), result.expansions, elapsed))
                elif isinstance(result, TimedOut):
                    outcomes.append(GoalOutcome(format_identity(key), "timeout", 0, result.expansions_used, elapsed))
                else:
                    outcomes.append(GoalOutcome(format_identity(key), "unsolvable", 0, result.expansions, elapsed))
            per_graph[name] = GraphTrial(name, outcomes)
        trials.append(TrialReport(
            t,
            [format_identity(node_identity(n, cfg.level)) for n in kitchen.items],
            [format_identity(k) for k in goals],
            per_graph,
        ))
    return ExperimentReport(trials)


def load_config(path: str | Path, overrides: Mapping[str, object] | None = None) -> ExperimentConfig:
    """Build an experiment from a TOML key/value file.

    Recognised keys: ``reg`` (required), ``exp``, ``gen``, ``index`` +
    ``threshold`` (build EXP from REG), ``categories`` (needed for GEN; builds
    GEN from REG when ``gen`` is absent), ``pool``, ``trials``,
    ``goals_per_trial``, ``kitchen_size``, ``seed``, ``max_expansions``,
    ``wall_clock_ms``, ``level``, ``mode``.  Paths are relative to the file.
    """
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib

    from .parser import parse_category_index, parse_kitchen, parse_similarity_matrix, parse_subgraph
    from .similarity import SimilarityIndex
    from .transform import ExpansionConfig, abstract_to_level, expand, generalize, merge

    path = Path(path)
    data = tomllib.loads(path.read_text(encoding="utf-8"))
    data.update(overrides or {})
    known = {"reg", "exp", "gen", "index", "threshold", "categories", "pool", "trials",
             "goals_per_trial", "kitchen_size", "seed", "max_expansions", "wall_clock_ms",
             "level", "mode"}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    if "reg" not in data:
        raise ValueError("config needs a 'reg' graph")
    level = Level.parse(data.get("level", 2))
    base = path.parent

    def read(name: str) -> str:
        return (base / str(data[name])).read_text(encoding="utf-8")

    def load_graph(name: str) -> FOONGraph:
        sub = parse_subgraph(read(name), source=str(data[name]))
        return abstract_to_level(merge([sub], Level.L3), level)

    graphs = {"REG": load_graph("reg")}
    categories = parse_category_index(read("categories")) if "categories" in data else None
    mode = GeneralizeMode(data.get("mode", "first"))
    if "exp" in data:
        graphs["EXP"] = load_graph("exp")
    elif "index" in data:
        threshold = float(data.get("threshold", 0.89))
        idx = SimilarityIndex.from_matrix(parse_similarity_matrix(read("index")), threshold)
        graphs["EXP"] = expand(graphs["REG"], idx, ExpansionConfig(threshold))
    if "gen" in data:
        graphs["GEN"] = load_graph("gen")
    elif categories is not None:
        graphs["GEN"] = generalize(graphs["REG"], categories, mode)
    pool = list(parse_kitchen(read("pool")).items) if "pool" in data else basic_objects(graphs["REG"])
    wall = data.get("wall_clock_ms")
    budget = SearchBudget(int(data.get("max_expansions", SearchBudget().max_expansions)),
                          float(wall) if wall is not None else None)
    return ExperimentConfig(
        graphs=graphs,
        kitchen_pool=pool,
        trials=int(data.get("trials", 10)),
        goals_per_trial=int(data.get("goals_per_trial", 100)),
        kitchen_size=data.get("kitchen_size", 0.5),
        seed=int(data.get("seed", 0)),
        budget=budget,
        level=level,
        categories=categories,
        mode=mode,
    )
