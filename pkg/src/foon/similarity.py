"""Wu-Palmer similarity over a concept taxonomy, and threshold-filtered indices."""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

from .model import normalize_label
from .parser import SimilarityMatrix, Taxonomy, pair_key

log = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.89


class UnknownLabel(KeyError):
    pass


class NoCommonSubsumer(LookupError):
    """The two concepts share no ancestor (possible only with several roots)."""

    def __init__(self, a: str, b: str):
        self.pair = (a, b)
        super().__init__(f"no common subsumer for {a!r} and {b!r}")


class WuPalmer:
    """Wu-Palmer scorer with per-node caches over one taxonomy.

    Depth counts nodes on the longest root-to-node path (roots have depth 1);
    the subsumer used is the deepest common ancestor-or-self, and distances are
    shortest upward edge counts.
    """

    def __init__(self, taxonomy: Taxonomy):
        self.taxonomy = taxonomy
        self._up: dict[str, dict[str, int]] = {}

    @cached_property
    def depth(self) -> dict[str, int]:
        parents = self.taxonomy.parent_edges
        memo: dict[str, int] = {}
        for start in self.taxonomy.nodes:
            stack = [start]
            while stack:
                node = stack[-1]
                if node in memo:
                    stack.pop()
                    continue
                pending = [p for p in parents.get(node, ()) if p not in memo]
                if pending:
                    stack.extend(pending)
                else:
                    memo[node] = 1 + max((memo[p] for p in parents.get(node, ())), default=0)
                    stack.pop()
        return memo

    def ancestors(self, label: str) -> dict[str, int]:
        """Ancestor-or-self -> shortest upward edge distance."""
        if label not in self._up:
            if label not in self.taxonomy.nodes:
                raise UnknownLabel(label)
            dist = {label: 0}
            queue = deque([label])
            while queue:
                node = queue.popleft()
                for parent in self.taxonomy.parent_edges.get(node, ()):
                    if parent not in dist:
                        dist[parent] = dist[node] + 1
                        queue.append(parent)
            self._up[label] = dist
        return self._up[label]

    def __call__(self, a: str, b: str) -> float:
        a, b = normalize_label(a), normalize_label(b)
        up_a, up_b = self.ancestors(a), self.ancestors(b)
        if a == b:
            return 1.0
        common = up_a.keys() & up_b.keys()
        if not common:
            raise NoCommonSubsumer(a, b)
        depth = self.depth
        # equally deep subsumers can differ in distance; take the best score among them
        best = max(depth[c] for c in common)
        score = 0.0
        for c in common:
            if depth[c] == best:
                d = 2 * best
                score = max(score, d / (d + up_a[c] + up_b[c]))
        return score


def wu_palmer(t: Taxonomy, a: str, b: str) -> float:
    return WuPalmer(t)(a, b)


@dataclass
class SimilarityIndex:
    threshold: float
    neighbors: dict[str, dict[str, float]] = field(default_factory=dict)
    unresolved: list[str] = field(default_factory=list)

    def of(self, label: str) -> dict[str, float]:
        return self.neighbors.get(label, {})

    def alternatives(self, label: str) -> list[str]:
        """``label`` followed by its neighbors in sorted order."""
        return [label, *sorted(self.of(label))]

    def to_matrix(self) -> SimilarityMatrix:
        entries = {}
        for a, nbrs in self.neighbors.items():
            for b, s in nbrs.items():
                entries[pair_key(a, b)] = s
        return SimilarityMatrix(entries)

    @classmethod
    def from_matrix(cls, m: SimilarityMatrix, threshold: float = DEFAULT_THRESHOLD) -> "SimilarityIndex":
        return build_similarity_index(m, sorted(m.labels()), threshold)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SimilarityIndex):
            return NotImplemented
        mine = {k: v for k, v in self.neighbors.items() if v}
        theirs = {k: v for k, v in other.neighbors.items() if v}
        return self.threshold == other.threshold and mine == theirs


def build_similarity_index(
    source: SimilarityMatrix | Taxonomy,
    objects: Iterable[str],
    threshold: float = DEFAULT_THRESHOLD,
    overrides: SimilarityMatrix | None = None,
) -> SimilarityIndex:
    """Neighbor sets with score >= ``threshold`` among ``objects``.

    Scores in ``overrides`` replace taxonomy/matrix scores for matching pairs.
    Objects the source cannot score get empty neighbor sets and are listed in
    ``unresolved``.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold {threshold} outside [0, 1]")
    labels = sorted({normalize_label(o) for o in objects})
    neighbors: dict[str, dict[str, float]] = {label: {} for label in labels}
    override = overrides.entries if overrides is not None else {}

    if isinstance(source, Taxonomy):
        scorer = WuPalmer(source)
        known = [x for x in labels if x in source.nodes]
        unresolved = [x for x in labels if x not in source.nodes]

        def score(a: str, b: str) -> float | None:
            try:
                return scorer(a, b)
            except NoCommonSubsumer:
                return None
    else:
        present = source.labels()
        known = [x for x in labels if x in present]
        unresolved = [x for x in labels if x not in present]

        def score(a: str, b: str) -> float | None:
            return source.entries.get((a, b))

    scoreable = set(known)
    for i, a in enumerate(labels):
        for b in labels[i + 1:]:
            key = (a, b)
            if key in override:
                s = override[key]
            elif a in scoreable and b in scoreable:
                s = score(a, b)
            else:
                s = None
            if s is not None and s >= threshold:
                neighbors[a][b] = s
                neighbors[b][a] = s
    if override:
        covered = {x for pair in override for x in pair}
        unresolved = [x for x in unresolved if x not in covered]
    if unresolved:
        log.info("%d object(s) without similarity data: %s", len(unresolved), ", ".join(unresolved))
    return SimilarityIndex(threshold, neighbors, unresolved)

