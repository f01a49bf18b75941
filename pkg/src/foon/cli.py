"""``foon`` command-line entry point.

Exit codes: 0 success, 1 retrieval found no tree, 2 retrieval ran out of
budget, 64 usage error, 65 data error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .bench import load_config, run_experiment
from .model import FOONGraph, Level, graph_stats
from .parser import (
    FoonSyntaxError,
    parse_category_index,
    parse_goal,
    parse_kitchen,
    parse_similarity_matrix,
    parse_subgraph,
    parse_taxonomy,
    serialize_similarity_matrix,
    serialize_units,
)
from .retrieval import SearchBudget, Solved, TimedOut, retrieve_task_tree
from .similarity import SimilarityIndex, build_similarity_index
from .transform import (
    ExpansionConfig,
    ExpansionTooLarge,
    GeneralizeMode,
    abstract_to_level,
    expand,
    generalize,
    merge,
)

EX_USAGE = 64
EX_DATAERR = 65


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def load_graph(paths: Sequence[str], level: Level) -> FOONGraph:
    """Merge subgraph files at full detail, then abstract to ``level``."""
    subgraphs = [parse_subgraph(_read(p), source=p) for p in paths]
    return abstract_to_level(merge(subgraphs, Level.L3), level)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_validate(args) -> int:
    motions = None
    if args.motions:
        motions = [line.strip() for line in _read(args.motions).splitlines() if line.strip()]
    for path in args.files:
        sub = parse_subgraph(_read(path), source=path, motions=motions)
        print(f"{path}: ok units={len(sub)}")
    return 0


def cmd_merge(args) -> int:
    subgraphs = [parse_subgraph(_read(p), source=p) for p in args.files]
    _emit(serialize_units(merge(subgraphs, args.level).units), args.out)
    return 0


def cmd_abstract(args) -> int:
    _emit(serialize_units(load_graph(args.files, args.level).units), args.out)
    return 0


def cmd_expand(args) -> int:
    g = load_graph(args.files, args.level)
    matrix = parse_similarity_matrix(_read(args.index), source=args.index)
    idx = SimilarityIndex.from_matrix(matrix, args.threshold)
    result = expand(g, idx, ExpansionConfig(args.threshold, args.max_units))
    _emit(serialize_units(result.units), args.out)
    return 0


def cmd_generalize(args) -> int:
    g = load_graph(args.files, args.level)
    cats = parse_category_index(_read(args.categories), source=args.categories)
    mode = GeneralizeMode(args.mode)
    _emit(serialize_units(generalize(g, cats, mode).units), args.out)
    return 0


def cmd_similarity(args) -> int:
    taxonomy = parse_taxonomy(_read(args.taxonomy), source=args.taxonomy)
    objects = [line.strip() for line in _read(args.objects).splitlines()
               if line.strip() and not line.startswith("#")]
    overrides = None
    if args.overrides:
        overrides = parse_similarity_matrix(_read(args.overrides), source=args.overrides)
    idx: SimilarityIndex = build_similarity_index(taxonomy, objects, args.threshold, overrides)
    for label in idx.unresolved:
        print(f"unresolved\t{label}", file=sys.stderr)
    _emit(serialize_similarity_matrix(idx.to_matrix()), args.out)
    return 0


def cmd_retrieve(args) -> int:
    g = load_graph([args.graph], args.level)
    kitchen = parse_kitchen(_read(args.kitchen), source=args.kitchen)
    try:
        goal = parse_goal(args.goal)
    except FoonSyntaxError as exc:
        raise UsageError(f"bad --goal {args.goal!r}: {exc.message}") from None
    budget = SearchBudget(args.budget) if args.budget else SearchBudget()
    outcome = retrieve_task_tree(g, goal, kitchen, budget)
    if isinstance(outcome, Solved):
        print(f"solved steps={len(outcome.tree)} expansions={outcome.expansions}", file=sys.stderr)
        _emit(serialize_units(outcome.tree.units), args.out)
        return 0
    if isinstance(outcome, TimedOut):
        print(f"timeout expansions={outcome.expansions_used}", file=sys.stderr)
        return 2
    print(f"unsolvable expansions={outcome.expansions}", file=sys.stderr)
    return 1


def cmd_bench(args) -> int:
    overrides = {}
    if args.level is not None:
        overrides["level"] = int(args.level)
    if args.seed is not None:
        overrides["seed"] = args.seed
    cfg = load_config(args.config, overrides)
    report = run_experiment(cfg)
    text = report.to_csv(args.zero_timing) if args.csv else report.to_jsonl(args.zero_timing)
    _emit(text, args.out)
    return 0


def cmd_stats(args) -> int:
    print(graph_stats(load_graph(args.graph, args.level)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="foon", description="Build, generalize and search functional object-oriented networks.")
    parser.add_argument("--version", action="version", version=f"foon {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def verb(name: str, fn, help: str, level: Level | None = Level.L3):
        p = sub.add_parser(name, help=help)
        p.add_argument("--level", type=Level.parse, default=level, choices=list(Level),
                       metavar="{1,2,3}", help=f"hierarchy level (default {level and level.value or 'from config'})")
        p.set_defaults(fn=fn)
        return p

    p = verb("validate", cmd_validate, "check subgraph files")
    p.add_argument("files", nargs="+")
    p.add_argument("--motions", help="motion index, one label per line")

    p = verb("merge", cmd_merge, "merge subgraphs, dropping duplicate units")
    p.add_argument("files", nargs="+")
    p.add_argument("--out")

    p = verb("abstract", cmd_abstract, "rewrite a graph at a lower hierarchy level")
    p.add_argument("files", nargs="+")
    p.add_argument("--out")

    p = verb("expand", cmd_expand, "FOON-EXP: add units with similar objects")
    p.add_argument("files", nargs="+")
    p.add_argument("--index", required=True, help="similarity matrix TSV")
    p.add_argument("--threshold", type=float, default=0.89)
    p.add_argument("--max-units", type=int)
    p.add_argument("--out")

    p = verb("generalize", cmd_generalize, "FOON-GEN: relabel objects by category")
    p.add_argument("files", nargs="+")
    p.add_argument("--categories", required=True)
    p.add_argument("--mode", choices=[m.value for m in GeneralizeMode], default="first")
    p.add_argument("--out")

    p = verb("similarity", cmd_similarity, "Wu-Palmer similarity index from a taxonomy")
    p.add_argument("--taxonomy", required=True)
    p.add_argument("--objects", required=True, help="object labels, one per line")
    p.add_argument("--threshold", type=float, default=0.89)
    p.add_argument("--overrides", help="similarity matrix whose scores take precedence")
    p.add_argument("--out")

    p = verb("retrieve", cmd_retrieve, "find a task tree for a goal object")
    p.add_argument("--graph", required=True)
    p.add_argument("--goal", required=True, help="label[:state,...][:I=ing,...]")
    p.add_argument("--kitchen", required=True)
    p.add_argument("--budget", type=int, help="maximum unit expansions")
    p.add_argument("--out")

    p = verb("bench", cmd_bench, "run the seeded REG/EXP/GEN retrieval experiment", level=None)
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--csv", action="store_true", help="summary tables instead of JSON lines")
    p.add_argument("--zero-timing", action="store_true", help="write 0 for wall-clock fields")
    p.add_argument("--out")

    p = verb("stats", cmd_stats, "object/motion/unit counts")
    p.add_argument("--graph", required=True, action="append")
    return parser


def _error(kind: str, message: str, line: int | None = None) -> None:
    record = {"error": kind, "message": message}
    if line is not None:
        record["line"] = line
    print(json.dumps(record), file=sys.stderr)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.fn(args)
    except UsageError as exc:
        _error("usage", str(exc))
        return EX_USAGE
    except FoonSyntaxError as exc:
        _error("data", str(exc), exc.line)
        return EX_DATAERR
    except (ValueError, ExpansionTooLarge) as exc:
        _error("data", str(exc))
        return EX_DATAERR


if __name__ == "__main__":
    sys.exit(main())
