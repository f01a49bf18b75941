"""Readers and writers for the TAB-separated FOON file formats.

Subgraph files::

    # comment
    O   knife           object block (input before M, output after it)
    S   chopped         state of the current object, repeatable
    I   tomato,lettuce  ingredient contents of the current object
    W   1               current object moves in the scene (default 0)
    M   cut 12.0 15.5   motion, optional start/end timestamps in seconds
    //                  end of functional unit

Similarity matrices (``a<TAB>b<TAB>score``), taxonomies (``child<TAB>parent``),
category indices and kitchen manifests are also handled here.  Every error
raised carries a 1-based line number.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, TextIO

from .model import FunctionalUnit, Kitchen, MotionNode, ObjectNode, normalize_label


class FoonSyntaxError(ValueError):
    def __init__(self, message: str, line: int, source: str | None = None):
        self.message = message
        self.line = line
        self.source = source
        where = f"{source}: " if source else ""
        super().__init__(f"{where}{message}, line {line}")


def _lines(text: str | TextIO) -> Iterator[tuple[int, str]]:
    if not isinstance(text, str):
        text = text.read()
    for lineno, raw in enumerate(text.splitlines(), 1):
        yield lineno, raw.rstrip("\r\n")


def _data_lines(text: str | TextIO) -> Iterator[tuple[int, list[str]]]:
    """Non-blank, non-comment lines split on TAB."""
    for lineno, line in _lines(text):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield lineno, line.split("\t")


def _split_list(text: str) -> list[str]:
    return [normalize_label(part) for part in text.split(",") if part.strip()]


# -- subgraphs ---------------------------------------------------------------


@dataclass
class Subgraph:
    units: list[FunctionalUnit] = field(default_factory=list)
    source: str | None = None

    def __len__(self) -> int:
        return len(self.units)

    def __iter__(self):
        return iter(self.units)


class _ObjectBlock:
    __slots__ = ("label", "states", "ingredients", "moving", "line", "seen")

    def __init__(self, label: str, line: int):
        self.label = label
        self.states: list[str] = []
        self.ingredients: list[str] = []
        self.moving = False
        self.line = line
        self.seen: set[str] = set()

    def build(self) -> ObjectNode:
        return ObjectNode(self.label, tuple(self.states), tuple(self.ingredients), self.moving)


def _expect_fields(tag: str, fields: list[str], n: int, lineno: int, source) -> None:
    if len(fields) != n:
        raise FoonSyntaxError(f"{tag} line takes {n - 1} field(s), got {len(fields) - 1}", lineno, source)


def parse_subgraph(
    text: str | TextIO,
    source: str | None = None,
    motions: Iterable[str] | None = None,
) -> Subgraph:
    """Parse a subgraph file into its functional units, in file order.

    ``motions``, when given, is the motion index every M-line must come from.
    """
    motion_index = None if motions is None else {normalize_label(m) for m in motions}
    units: list[FunctionalUnit] = []
    inputs: list[_ObjectBlock] = []
    outputs: list[_ObjectBlock] = []
    motion: MotionNode | None = None
    span: tuple[float, float] | None = None
    current: _ObjectBlock | None = None
    unit_line: int | None = None

    def fail(msg: str, lineno: int):
        raise FoonSyntaxError(msg, lineno, source)

    for lineno, fields in _data_lines(text):
        tag = fields[0].strip()
        if unit_line is None and tag != "//":
            unit_line = lineno
        if tag == "O":
            _expect_fields("O", fields, 2, lineno, source)
            label = normalize_label(fields[1])
            if not label:
                fail("empty object label", lineno)
            current = _ObjectBlock(label, lineno)
            (outputs if motion is not None else inputs).append(current)
        elif tag in ("S", "I", "W"):
            if current is None:
                what = {"S": "state", "I": "ingredients", "W": "motion flag"}[tag]
                fail(f"{what} before object", lineno)
            _expect_fields(tag, fields, 2, lineno, source)
            value = fields[1].strip()
            if tag == "S":
                state = normalize_label(value)
                if not state:
                    fail("empty state", lineno)
                current.states.append(state)
            elif tag == "I":
                if "I" in current.seen:
                    fail("ingredients given twice for one object", lineno)
                items = _split_list(value)
                if not items:
                    fail("empty ingredient list", lineno)
                if current.label in items:
                    fail(f"object {current.label!r} lists itself as an ingredient", lineno)
                current.ingredients = items
            else:
                if "W" in current.seen:
                    fail("motion flag given twice for one object", lineno)
                if value not in ("0", "1"):
                    fail(f"motion flag must be 0 or 1, got {value!r}", lineno)
                current.moving = value == "1"
            current.seen.add(tag)
        elif tag == "M":
            if motion is not None:
                fail("second motion in one unit", lineno)
            if not inputs:
                fail("motion without input objects", lineno)
            if len(fields) not in (2, 4):
                fail("M line takes a motion and optionally two timestamps", lineno)
            label = normalize_label(fields[1])
            if not label:
                fail("empty motion label", lineno)
            if motion_index is not None and label not in motion_index:
                fail(f"motion {label!r} not in motion index", lineno)
            motion = MotionNode(label)
            span = None
            if len(fields) == 4:
                try:
                    start, end = float(fields[2]), float(fields[3])
                except ValueError:
                    fail("malformed timestamp", lineno)
                if not (math.isfinite(start) and math.isfinite(end)) or start < 0 or start > end:
                    fail("malformed timestamp", lineno)
                span = (start, end)
            current = None
        elif tag == "//":
            if len(fields) != 1 or fields[0] != "//":
                fail("unit terminator takes no fields", lineno)
            if unit_line is None:
                fail("empty functional unit", lineno)
            if motion is None:
                fail("unit missing motion line", lineno)
            if not outputs:
                fail("unit has no output objects", lineno)
            try:
                units.append(FunctionalUnit(
                    tuple(b.build() for b in inputs), motion,
                    tuple(b.build() for b in outputs), span, source,
                ))
            except ValueError as exc:
                fail(str(exc), unit_line)
            inputs, outputs, motion, span, current, unit_line = [], [], None, None, None, None
        else:
            fail(f"unknown line tag {tag!r}", lineno)

    if unit_line is not None:
        fail("unterminated functional unit", unit_line)
    return Subgraph(units, source)


def _fmt_time(t: float) -> str:
    return repr(float(t))


def serialize_units(units: Iterable[FunctionalUnit]) -> str:
    """Canonical subgraph text for ``units``."""
    out: list[str] = []

    def emit(node: ObjectNode) -> None:
        out.append(f"O\t{node.label}")
        out.extend(f"S\t{s}" for s in node.states)
        if node.ingredients:
            out.append("I\t" + ",".join(node.ingredients))
        if node.is_moving:
            out.append("W\t1")

    for unit in units:
        for node in unit.inputs:
            emit(node)
        line = f"M\t{unit.motion.label}"
        if unit.time_span is not None:
            line += "\t" + "\t".join(_fmt_time(t) for t in unit.time_span)
        out.append(line)
        for node in unit.outputs:
            emit(node)
        out.append("//")
    return "".join(line + "\n" for line in out)


def serialize_subgraph(s: Subgraph) -> str:
    return serialize_units(s.units)


# -- similarity matrix -----------------------------------------------------------


def pair_key(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


@dataclass
class SimilarityMatrix:
    entries: dict[tuple[str, str], float] = field(default_factory=dict)

    def lookup(self, a: str, b: str) -> float | None:
        a, b = normalize_label(a), normalize_label(b)
        if a == b and (a, b) not in self.entries:
            return None
        return self.entries.get(pair_key(a, b))

    def labels(self) -> set[str]:
        return {x for pair in self.entries for x in pair}

    def __len__(self) -> int:
        return len(self.entries)


def parse_similarity_matrix(text: str | TextIO, source: str | None = None) -> SimilarityMatrix:
    entries: dict[tuple[str, str], float] = {}
    for lineno, fields in _data_lines(text):
        if len(fields) != 3:
            raise FoonSyntaxError("similarity row needs <a> <b> <score>", lineno, source)
        a, b = normalize_label(fields[0]), normalize_label(fields[1])
        if not a or not b:
            raise FoonSyntaxError("empty label", lineno, source)
        try:
            score = float(fields[2])
        except ValueError:
            raise FoonSyntaxError(f"malformed score {fields[2]!r}", lineno, source) from None
        if not 0.0 <= score <= 1.0:
            raise FoonSyntaxError(f"score {score} outside [0, 1]", lineno, source)
        if a == b and score != 1.0:
            raise FoonSyntaxError(f"self-similarity of {a!r} must be 1.0", lineno, source)
        key = pair_key(a, b)
        if key in entries and entries[key] != score:
            raise FoonSyntaxError(
                f"conflicting scores for {a!r}/{b!r}: {entries[key]} vs {score}", lineno, source
            )
        entries[key] = score
    return SimilarityMatrix(entries)


def serialize_similarity_matrix(m: SimilarityMatrix) -> str:
    return "".join(f"{a}\t{b}\t{s!r}\n" for (a, b), s in sorted(m.entries.items()))


# -- taxonomy ------------------------------------------------------------------


@dataclass
class Taxonomy:
    nodes: set[str]
    parent_edges: dict[str, set[str]]

    @property
    def roots(self) -> set[str]:
        return {n for n in self.nodes if not self.parent_edges.get(n)}

    def parents(self, label: str) -> set[str]:
        return self.parent_edges.get(label, set())

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[str, str]], nodes: Iterable[str] = ()) -> "Taxonomy":
        text = "".join(f"{c}\t{p}\n" for c, p in edges) + "".join(f"{n}\n" for n in nodes)
        return parse_taxonomy(text)


def find_cycle(parent_edges: dict[str, set[str]]) -> list[str] | None:
    """One parent-edge cycle as a node list, or None if the edges form a DAG."""
    color: dict[str, int] = {}
    for start in sorted(parent_edges):
        if color.get(start):
            continue
        stack = [(start, iter(sorted(parent_edges.get(start, ()))))]
        path = [start]
        color[start] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[node] = 2
                stack.pop()
                path.pop()
            elif color.get(nxt) == 1:
                return path[path.index(nxt):]
            elif not color.get(nxt):
                color[nxt] = 1
                path.append(nxt)
                stack.append((nxt, iter(sorted(parent_edges.get(nxt, ())))))
    return None


def parse_taxonomy(text: str | TextIO, source: str | None = None) -> Taxonomy:
    """``child<TAB>parent`` rows; a lone label declares a node without parents."""
    nodes: set[str] = set()
    parents: dict[str, set[str]] = {}
    first_line: dict[str, int] = {}
    for lineno, fields in _data_lines(text):
        if len(fields) not in (1, 2):
            raise FoonSyntaxError("taxonomy row needs <child> <parent>", lineno, source)
        labels = [normalize_label(f) for f in fields]
        if not all(labels):
            raise FoonSyntaxError("empty label", lineno, source)
        nodes.update(labels)
        if len(labels) == 2:
            child, parent = labels
            if child == parent:
                raise FoonSyntaxError(f"cycle: {child} -> {child}", lineno, source)
            parents.setdefault(child, set()).add(parent)
            first_line.setdefault(child, lineno)
    cycle = find_cycle(parents)
    if cycle:
        line = min(first_line[n] for n in cycle)
        raise FoonSyntaxError("cycle: " + " -> ".join(cycle + [cycle[0]]), line, source)
    if nodes and not any(not parents.get(n) for n in nodes):
        raise FoonSyntaxError("taxonomy has no root", 1, source)
    return Taxonomy(nodes, parents)


# -- category index ------------------------------------------------------------


@dataclass
class CategoryIndex:
    assignments: dict[str, list[str]] = field(default_factory=dict)
    categories: list[str] = field(default_factory=list)

    def categories_of(self, label: str) -> list[str]:
        return self.assignments.get(label, [])

    def first(self) -> dict[str, str]:
        return {obj: cats[0] for obj, cats in self.assignments.items() if cats}


def parse_category_index(text: str | TextIO, source: str | None = None) -> CategoryIndex:
    categories: list[str] | None = None
    assignments: dict[str, list[str]] = {}
    for lineno, fields in _data_lines(text):
        if categories is None:
            if fields[0] != "CATEGORIES" or len(fields) != 2:
                raise FoonSyntaxError("expected CATEGORIES header", lineno, source)
            categories = list(dict.fromkeys(_split_list(fields[1])))
            continue
        if len(fields) != 2:
            raise FoonSyntaxError("category row needs <object> <cat>[,<cat>...]", lineno, source)
        obj = normalize_label(fields[0])
        if not obj:
            raise FoonSyntaxError("empty object label", lineno, source)
        cats = list(dict.fromkeys(_split_list(fields[1])))
        for cat in cats:
            if cat not in categories:
                raise FoonSyntaxError(f"undeclared category {cat!r}", lineno, source)
        if obj in cats:
            raise FoonSyntaxError(f"object {obj!r} mapped to itself", lineno, source)
        if obj in assignments and assignments[obj] != cats:
            raise FoonSyntaxError(f"conflicting rows for object {obj!r}", lineno, source)
        assignments[obj] = cats
    return CategoryIndex(assignments, categories or [])


def serialize_category_index(c: CategoryIndex) -> str:
    lines = ["CATEGORIES\t" + ",".join(c.categories)]
    lines += [f"{obj}\t{','.join(cats)}" for obj, cats in c.assignments.items()]
    return "".join(line + "\n" for line in lines)


# -- kitchen manifest ----------------------------------------------------------


def parse_object_spec(fields: list[str], lineno: int = 1, source: str | None = None) -> ObjectNode:
    """``label[<TAB>state,...][<TAB>I=ing,...]`` as used by kitchen manifests."""
    label = normalize_label(fields[0])
    if not label:
        raise FoonSyntaxError("empty object label", lineno, source)
    states: list[str] = []
    ingredients: list[str] = []
    rest = fields[1:]
    if rest and not rest[0].startswith("I="):
        states = _split_list(rest.pop(0))
    if rest and rest[0].startswith("I="):
        ingredients = _split_list(rest.pop(0)[2:])
    if rest:
        raise FoonSyntaxError(f"unexpected field {rest[0]!r}", lineno, source)
    try:
        return ObjectNode(label, tuple(states), tuple(ingredients))
    except ValueError as exc:
        raise FoonSyntaxError(str(exc), lineno, source) from None


def parse_kitchen(text: str | TextIO, source: str | None = None) -> Kitchen:
    return Kitchen(tuple(parse_object_spec(f, n, source) for n, f in _data_lines(text)))


def serialize_kitchen(k: Kitchen) -> str:
    out = []
    for node in k.items:
        line = node.label
        if node.states:
            line += "\t" + ",".join(node.states)
        if node.ingredients:
            line += "\tI=" + ",".join(node.ingredients)
        out.append(line + "\n")
    return "".join(out)


def parse_goal(text: str) -> ObjectNode:
    """Command-line goal syntax ``label[:state,...][:I=ing,...]``."""
    parts = text.split(":")
    label, rest = parts[0], parts[1:]
    fields = [label]
    if rest and not rest[0].startswith("I="):
        fields.append(rest.pop(0))
    fields.extend(rest)
    if len(fields) > 1 and fields[1] == "":
        fields.pop(1)
    return parse_object_spec(fields)
