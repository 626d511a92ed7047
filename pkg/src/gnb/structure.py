"""GNB structures: triplet clusters (Y, mother, child) chained through (Y, mother) separators."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

STRUCTURE_SCHEMA = 1


class StructureError(ValueError):
    pass


@dataclass(frozen=True)
class GnbStructure:
    """Attributes in construction order; every attribute after the first hangs off an earlier mother.

    The class variable belongs to every cluster, so the attributes alone form a tree.
    """

    class_index: int
    order: tuple[int, ...]
    mother: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(int(a) for a in self.order))
        object.__setattr__(self, "mother", {int(k): int(v) for k, v in self.mother.items()})

    @property
    def attributes(self) -> tuple[int, ...]:
        return self.order

    def clusters(self) -> list[tuple[int, int, int]]:
        y = self.class_index
        return [(y, self.mother[k], k) for k in self.order[1:]]

    def separators(self) -> list[tuple[int, int]]:
        """One (Y, mother) entry per attachment after the first triplet, repeated per extra child."""
        y = self.class_index
        return [(y, self.mother[k]) for k in self.order[2:]]

    def children(self, a: int) -> list[int]:
        return [k for k in self.order[1:] if self.mother[k] == a]

    def check(self, n_columns: int | None = None) -> "GnbStructure":
        problems = validate(self, n_columns)
        if problems:
            raise StructureError("; ".join(problems))
        return self

    def to_dict(self) -> dict:
        return {
            "kind": "gnb",
            "class_index": self.class_index,
            "order": list(self.order),
            "mother": {str(k): self.mother[k] for k in self.order[1:]},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class NbStructure:
    """Naive Bayes: clusters (Y, X_i), the separator Y shared by all of them."""

    class_index: int
    order: tuple[int, ...]

    @property
    def attributes(self) -> tuple[int, ...]:
        return self.order

    def clusters(self) -> list[tuple[int, int]]:
        return [(self.class_index, a) for a in self.order]

    def separators(self) -> list[tuple[int]]:
        return [(self.class_index,)] * (len(self.order) - 1)

    def to_dict(self) -> dict:
        return {"kind": "nb", "class_index": self.class_index, "order": list(self.order)}


def structure_from_dict(doc: Mapping) -> GnbStructure | NbStructure:
    kind = doc.get("kind", "gnb")
    if kind == "nb":
        return NbStructure(int(doc["class_index"]), tuple(doc["order"]))
    if kind != "gnb":
        raise StructureError(f"unknown structure kind {kind!r}")
    return GnbStructure(int(doc["class_index"]), tuple(doc["order"]),
                        {int(k): int(v) for k, v in doc["mother"].items()})


def validate(structure: GnbStructure, n_columns: int | None = None) -> list[str]:
    """All invariant violations of ``structure``; empty means valid."""
    problems = []
    order = structure.order
    y = structure.class_index
    if len(order) < 2:
        problems.append("a structure needs at least two attributes")
    if n_columns is not None:
        if not 0 <= y < n_columns:
            problems.append(f"class index {y} out of range")
        for a in order:
            if not 0 <= a < n_columns:
                problems.append(f"attribute {a} out of range")
    if y in order:
        problems.append("class variable listed as an attribute")
    seen: dict[int, int] = {}
    for pos, a in enumerate(order):
        if a in seen:
            problems.append(f"duplicate attribute {a}")
        else:
            seen[a] = pos
    mother = structure.mother
    if order and order[0] in mother:
        problems.append(f"first attribute {order[0]} must not have a mother")
    for k in mother:
        if k not in seen:
            problems.append(f"mother given for unlisted attribute {k}")
    for pos, a in enumerate(order[1:], start=1):
        if a not in mother:
            problems.append(f"attribute {a} has no mother")
            continue
        m = mother[a]
        if m not in seen:
            problems.append(f"mother {m} of {a} is not an attribute of the structure")
        elif seen[m] >= pos:
            problems.append(f"mother {m} of {a} not yet connected")
    # cycles in the mother relation (reported separately from ordering errors)
    for start in mother:
        cur, steps = start, 0
        while cur in mother and steps <= len(mother):
            cur = mother[cur]
            steps += 1
        if steps > len(mother):
            problems.append(f"mother relation has a cycle through {start}")
            break
    return problems


def prefix(structure: GnbStructure, k: int) -> GnbStructure:
    """First ``k`` attributes in construction order with their mothers."""
    m = len(structure.order)
    if not 2 <= k <= m:
        raise StructureError(f"prefix length {k} outside [2, {m}]")
    order = structure.order[:k]
    return GnbStructure(structure.class_index, order, {a: structure.mother[a] for a in order[1:]})


def from_tree(class_index: int, edges: Sequence[tuple[int, int]], root: int) -> GnbStructure:
    """Root an undirected attribute tree and list it breadth-first (smaller index first)."""
    adj: dict[int, list[int]] = {root: []}
    for a, b in edges:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    order, mother = [root], {}
    queue = [root]
    while queue:
        u = queue.pop(0)
        for v in sorted(adj[u]):
            if v != root and v not in mother:
                mother[v] = u
                order.append(v)
                queue.append(v)
    if len(order) != len(adj):
        raise StructureError("edges do not form a spanning tree")
    return GnbStructure(class_index, tuple(order), mother)


@dataclass(frozen=True)
class Arborescence:
    """Directed spanning tree over vertices 0..n-1 rooted at 0.

    ``labels[v]`` is the table column behind vertex ``v`` (vertex 0 is the class).
    """

    parent: Mapping[int, int]
    weight: float = 0.0
    labels: tuple[int, ...] = ()
    root: int = 0

    def __post_init__(self):
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(len(self.parent) + 1)))

    @property
    def n_vertices(self) -> int:
        return len(self.parent) + 1

    def children(self, v: int) -> list[int]:
        return sorted(c for c, p in self.parent.items() if p == v)

    def problems(self) -> list[str]:
        out = []
        n = self.n_vertices
        if self.root in self.parent:
            out.append("root has a parent")
        for v in range(n):
            if v == self.root:
                continue
            if v not in self.parent:
                out.append(f"vertex {v} has no parent")
                continue
            cur, steps = v, 0
            while cur != self.root and cur in self.parent and steps <= n:
                cur = self.parent[cur]
                steps += 1
            if cur != self.root:
                out.append(f"no path from the root to {v}")
        return out


def _edge_score(score) -> Callable[[int, int], float]:
    """Normalise a score source to f(parent, child)."""
    matrix = getattr(score, "matrix", score)
    if callable(matrix):
        return matrix
    S = np.asarray(matrix, dtype=float)
    return lambda parent, child: float(S[child, parent])


def chain_ordering(arb: Arborescence, score, first_pair: tuple[int, int] | None = None) -> GnbStructure:
    """Construction order from an arborescence by repeated cheapest-leaf deletion.

    Leaves (vertices that are no longer anyone's parent) are deleted one at
    a time, smallest incoming-edge score first, ties to the smaller column.
    The root's child, and the forced second vertex when known, are never
    deleted; the construction order is those followed by the reversed
    deletion order, so every prefix is itself a valid structure.

    ``score`` is a ScoreMatrix, a matrix indexed ``[child, parent]``, or a
    callable ``(parent, child) -> float``; vertices are arborescence vertices.
    """
    problems = arb.problems()
    if problems:
        raise StructureError("malformed arborescence: " + "; ".join(problems))
    top = arb.children(arb.root)
    if len(top) != 1:
        raise StructureError(f"root must have exactly one child, has {len(top)}")
    if first_pair is None:
        first_pair = getattr(score, "first_pair", None)
    protected = [top[0]]
    if first_pair is not None:
        i1, i2 = first_pair
        if i1 != top[0] or arb.parent.get(i2) != i1:
            raise StructureError(f"first pair {first_pair} is not the root's child chain")
        protected.append(i2)
    edge = _edge_score(score)
    labels = arb.labels

    alive = set(arb.parent) - set(protected)
    n_kids = {v: 0 for v in range(arb.n_vertices)}
    for c, p in arb.parent.items():
        n_kids[p] += 1
    deleted = []
    while alive:
        leaves = [v for v in alive if n_kids[v] == 0]
        v = min(leaves, key=lambda u: (edge(arb.parent[u], u), labels[u]))
        deleted.append(v)
        alive.remove(v)
        n_kids[arb.parent[v]] -= 1
    vertices = protected + deleted[::-1]
    if len(vertices) < 2:
        raise StructureError("arborescence has fewer than two attributes")
    order = tuple(labels[v] for v in vertices)
    mother = {labels[v]: labels[arb.parent[v]] for v in vertices[1:]}
    return GnbStructure(labels[arb.root], order, mother)

