"""Core FOON types: object nodes, motion nodes, functional units and graphs.

Object identity is parameterized by a hierarchy level.  Level 1 keeps only
the object label, level 2 adds states and the in-motion flag, and level 3
also keeps the ingredient contents.  All types are immutable.
"""
from __future__ import annotations

import enum
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, NamedTuple, Sequence

_WS = re.compile(r"\s+")


def normalize_label(text: str) -> str:
    """Lowercase and collapse inner whitespace to single spaces."""
    return _WS.sub(" ", text.strip()).lower()


def _ordered_unique(items: Iterable[str]) -> tuple[str, ...]:
    seen: dict[str, None] = {}
    for item in items:
        seen.setdefault(normalize_label(item), None)
    return tuple(seen)


class Level(enum.IntEnum):
    """Hierarchy level at which object identity is enforced."""

    L1 = 1
    L2 = 2
    L3 = 3

    @classmethod
    def parse(cls, value: "int | str | Level") -> "Level":
        if isinstance(value, Level):
            return value
        text = str(value).strip().upper().lstrip("L")
        try:
            return cls(int(text))
        except ValueError:
            raise ValueError(f"unknown hierarchy level {value!r}") from None


@dataclass(frozen=True)
class ObjectNode:
    label: str
    states: tuple[str, ...] = ()
    ingredients: tuple[str, ...] = ()
    is_moving: bool = False

    def __post_init__(self) -> None:
        label = normalize_label(self.label)
        if not label:
            raise ValueError("object label is empty")
        states = _ordered_unique(self.states)
        ingredients = _ordered_unique(self.ingredients)
        if "" in states or "" in ingredients:
            raise ValueError(f"empty state or ingredient on object {label!r}")
        if label in ingredients:
            raise ValueError(f"object {label!r} lists itself as an ingredient")
        object.__setattr__(self, "label", label)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "ingredients", ingredients)
        object.__setattr__(self, "is_moving", bool(self.is_moving))

    def at_level(self, level: Level) -> "ObjectNode":
        """Copy carrying only the fields that ``level`` keeps."""
        if level == Level.L1:
            return ObjectNode(self.label)
        if level == Level.L2:
            return ObjectNode(self.label, self.states, (), self.is_moving)
        return self

    def relabel(self, mapping: Mapping[str, str]) -> "ObjectNode":
        """Substitute labels (node label and ingredient labels) via ``mapping``.

        Ingredients that end up equal to the node's own label are dropped.
        """
        label = mapping.get(self.label, self.label)
        ingredients = [mapping.get(i, i) for i in self.ingredients]
        return ObjectNode(label, self.states, [i for i in ingredients if i != label], self.is_moving)

    def __str__(self) -> str:
        text = self.label
        if self.states:
            text += "[" + ",".join(self.states) + "]"
        if self.ingredients:
            text += "{" + ",".join(self.ingredients) + "}"
        if self.is_moving:
            text += "*"
        return text


@dataclass(frozen=True)
class MotionNode:
    label: str

    def __post_init__(self) -> None:
        label = normalize_label(self.label)
        if not label:
            raise ValueError("motion label is empty")
        object.__setattr__(self, "label", label)

    def __str__(self) -> str:
        return self.label


def node_identity(node: ObjectNode, level: Level) -> tuple:
    """Identity key of ``node`` at ``level``; set-valued fields are order-insensitive."""
    if level == Level.L1:
        return (node.label,)
    states = tuple(sorted(node.states))
    if level == Level.L2:
        return (node.label, states, node.is_moving)
    return (node.label, states, tuple(sorted(node.ingredients)), node.is_moving)


def format_identity(key: tuple) -> str:
    """Readable rendering of an identity key, stable across runs."""
    text = key[0]
    if len(key) > 1 and key[1]:
        text += "[" + ",".join(key[1]) + "]"
    if len(key) == 4 and key[2]:
        text += "{" + ",".join(key[2]) + "}"
    if len(key) > 1 and key[-1]:
        text += "*"
    return text


def _collapse(nodes: Iterable[ObjectNode]) -> tuple[ObjectNode, ...]:
    out: dict[tuple, ObjectNode] = {}
    for node in nodes:
        out.setdefault(node_identity(node, Level.L3), node)
    return tuple(out.values())


@dataclass(frozen=True)
class FunctionalUnit:
    inputs: tuple[ObjectNode, ...]
    motion: MotionNode
    outputs: tuple[ObjectNode, ...]
    time_span: tuple[float, float] | None = None
    provenance: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        inputs, outputs = tuple(self.inputs), tuple(self.outputs)
        if not inputs:
            raise ValueError("functional unit has no input objects")
        if not outputs:
            raise ValueError("functional unit has no output objects")
        motion = self.motion if isinstance(self.motion, MotionNode) else MotionNode(self.motion)
        for side, nodes in (("input", inputs), ("output", outputs)):
            if len(_collapse(nodes)) != len(nodes):
                raise ValueError(f"duplicate {side} object in unit {motion.label!r}")
        if self.time_span is not None:
            start, end = (float(t) for t in self.time_span)
            if start > end:
                raise ValueError(f"time span starts after it ends ({start} > {end})")
            object.__setattr__(self, "time_span", (start, end))
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "outputs", outputs)
        object.__setattr__(self, "motion", motion)

    @classmethod
    def build(
        cls,
        inputs: Iterable[ObjectNode],
        motion: MotionNode | str,
        outputs: Iterable[ObjectNode],
        time_span: tuple[float, float] | None = None,
        provenance: str | None = None,
    ) -> "FunctionalUnit":
        """Like the constructor, but nodes that became identical are merged (first kept)."""
        return cls(_collapse(inputs), motion, _collapse(outputs), time_span, provenance)

    def map_nodes(self, fn) -> "FunctionalUnit":
        return FunctionalUnit.build(
            (fn(n) for n in self.inputs), self.motion, (fn(n) for n in self.outputs),
            self.time_span, self.provenance,
        )

    def labels(self) -> tuple[str, ...]:
        """Distinct object labels of the unit's nodes, first-seen order."""
        return tuple(dict.fromkeys(n.label for n in self.inputs + self.outputs))

    def __str__(self) -> str:
        ins = ", ".join(map(str, self.inputs))
        outs = ", ".join(map(str, self.outputs))
        return f"{ins} --{self.motion}--> {outs}"


def unit_key(unit: FunctionalUnit, level: Level) -> tuple:
    """Hashable key such that equal keys <=> unit_equals at ``level``."""
    return (
        unit.motion.label,
        tuple(sorted(node_identity(n, level) for n in unit.inputs)),
        tuple(sorted(node_identity(n, level) for n in unit.outputs)),
    )


def unit_equals(a: FunctionalUnit, b: FunctionalUnit, level: Level) -> bool:
    if a.motion.label != b.motion.label:
        return False
    ins = Counter(node_identity(n, level) for n in a.inputs)
    outs = Counter(node_identity(n, level) for n in a.outputs)
    return (
        ins == Counter(node_identity(n, level) for n in b.inputs)
        and outs == Counter(node_identity(n, level) for n in b.outputs)
    )


class GraphStats(NamedTuple):
    object_node_count: int
    motion_node_count: int
    unit_count: int

    def __str__(self) -> str:
        return f"objects={self.object_node_count} motions={self.motion_node_count} units={self.unit_count}"


class FOONGraph:
    """A deduplicated set of functional units with derived node indices.

    Duplicates (per ``unit_equals`` at ``level``) are dropped on construction,
    first occurrence wins.  ``object_index`` and ``producer_index`` map identity
    keys to tuples of positions in ``units``.
    """

    __slots__ = ("units", "level", "object_index", "producer_index", "_keys", "_nodes", "_input_keys", "_output_keys")

    def __init__(self, units: Iterable[FunctionalUnit] = (), level: Level | int = Level.L3):
        level = Level.parse(level)
        kept: dict[tuple, FunctionalUnit] = {}
        for unit in units:
            kept.setdefault(unit_key(unit, level), unit)
        self.units: tuple[FunctionalUnit, ...] = tuple(kept.values())
        self.level = level
        self._keys = frozenset(kept)

        objects: dict[Hashable, list[int]] = {}
        producers: dict[Hashable, list[int]] = {}
        nodes: dict[Hashable, ObjectNode] = {}
        for i, unit in enumerate(self.units):
            for node in unit.inputs + unit.outputs:
                key = node_identity(node, level)
                refs = objects.setdefault(key, [])
                if not refs or refs[-1] != i:
                    refs.append(i)
                nodes.setdefault(key, node.at_level(level))
            for node in unit.outputs:
                key = node_identity(node, level)
                refs = producers.setdefault(key, [])
                if not refs or refs[-1] != i:
                    refs.append(i)
        self.object_index: dict[Hashable, tuple[int, ...]] = {k: tuple(v) for k, v in objects.items()}
        self.producer_index: dict[Hashable, tuple[int, ...]] = {k: tuple(v) for k, v in producers.items()}
        self._nodes = nodes
        self._input_keys: tuple[tuple, ...] | None = None
        self._output_keys: tuple[tuple, ...] | None = None

    def __len__(self) -> int:
        return len(self.units)

    def __iter__(self):
        return iter(self.units)

    def __contains__(self, unit: FunctionalUnit) -> bool:
        return unit_key(unit, self.level) in self._keys

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FOONGraph):
            return NotImplemented
        return self.level == other.level and self.units == other.units

    def __repr__(self) -> str:
        return f"FOONGraph(units={len(self.units)}, level={self.level.name})"

    def unit_keys(self) -> frozenset:
        return self._keys

    def identity(self, node: ObjectNode) -> tuple:
        return node_identity(node, self.level)

    def representative(self, key: Hashable) -> ObjectNode:
        """A node with identity ``key``, reduced to this graph's level."""
        return self._nodes[key]

    def input_keys(self) -> tuple[tuple, ...]:
        """Per unit, the distinct identity keys of its inputs (computed once)."""
        if self._input_keys is None:
            self._input_keys = tuple(
                tuple(dict.fromkeys(node_identity(n, self.level) for n in u.inputs)) for u in self.units
            )
        return self._input_keys

    def output_keys(self) -> tuple[tuple, ...]:
        """Per unit, the distinct identity keys of its outputs (computed once)."""
        if self._output_keys is None:
            self._output_keys = tuple(
                tuple(dict.fromkeys(node_identity(n, self.level) for n in u.outputs)) for u in self.units
            )
        return self._output_keys

    def identities(self) -> list[tuple]:
        return sorted(self.object_index)

    def output_identities(self) -> list[tuple]:
        return sorted(self.producer_index)


def graph_stats(g: FOONGraph) -> GraphStats:
    return GraphStats(len(g.object_index), len(g.units), len(g.units))


@dataclass(frozen=True)
class Kitchen:
    """Objects available in the environment, in unlimited quantity."""

    items: tuple[ObjectNode, ...] = ()
    _ids: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", _collapse(self.items))

    def identities(self, level: Level) -> frozenset:
        ids = self._ids.get(level)
        if ids is None:
            ids = self._ids[level] = frozenset(node_identity(n, level) for n in self.items)
        return ids

    def at_level(self, level: Level) -> "Kitchen":
        return Kitchen(tuple(n.at_level(level) for n in self.items))

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)


def distinct_at(nodes: Sequence[ObjectNode], level: Level) -> list[ObjectNode]:
    """First node per identity at ``level``, preserving order."""
    out: dict[tuple, ObjectNode] = {}
    for n in nodes:
        out.setdefault(node_identity(n, level), n)
    return list(out.values())
