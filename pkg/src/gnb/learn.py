"""Structure learners: greedy GNB-A, arborescence-based GNB-O, and the NB / TAN baselines."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field


import numpy as np

from .data import DiscreteTable
from .empirical import Entropies
from .structure import Arborescence, GnbStructure, NbStructure, StructureError, chain_ordering, from_tree

NO_EDGE = -np.inf
ALGORITHMS = ("gnb-a", "gnb-o", "nb", "tan")


@dataclass(frozen=True)
class TraceStep:
    attributes: tuple[int, ...]
    triplet: tuple[int, int, int]
    increment: float
    cumulative: float


@dataclass
class LearnTrace:
    steps: list[TraceStep] = field(default_factory=list)

    def add(self, attributes, triplet, increment):
        cumulative = (self.steps[-1].cumulative if self.steps else 0.0) + increment
        self.steps.append(TraceStep(tuple(attributes), tuple(triplet), increment, cumulative))

    @property
    def weight(self) -> float:
        return self.steps[-1].cumulative if self.steps else 0.0

    def __len__(self):
        return len(self.steps)


def _require_attributes(table: DiscreteTable, n: int = 2):
    if len(table.attributes) < n:
        raise ValueError(f"need at least {n} attributes, table has {len(table.attributes)}")
    if table.n_rows == 0:
        raise ValueError("empty table")


def best_triplet(table: DiscreteTable, ent: Entropies) -> tuple[int, int]:
    """argmax over attribute pairs i < j of I(Y, X_i, X_j); ties go to the smaller pair."""
    y = table.class_column
    best, best_key = None, None
    for i, j in itertools.combinations(table.attributes, 2):
        key = -ent.info((y, i, j))
        if best_key is None or key < best_key:
            best, best_key = (i, j), key
    return best


def trace_from_structure(structure: GnbStructure, ent: Entropies) -> LearnTrace:
    y = structure.class_index
    i1, i2 = structure.order[:2]
    trace = LearnTrace()
    trace.add((i1, i2), (y, i1, i2), ent.info((y, i1, i2)))
    for k in structure.order[2:]:
        m = structure.mother[k]
        trace.add((k,), (y, m, k), ent.info((y, m, k)) - ent.info((y, m)))
    return trace


def learn_gnb_a(table: DiscreteTable, ent: Entropies | None = None) -> tuple[GnbStructure, LearnTrace]:
    """Greedy construction: start from the most informative triplet, then repeatedly
    attach the attribute whose triplet with an already connected mother adds the most
    information over the (Y, mother) separator."""
    _require_attributes(table)
    ent = ent or Entropies(table)
    y = table.class_column
    i1, i2 = best_triplet(table, ent)
    order, mother = [i1, i2], {i2: i1}
    trace = LearnTrace()
    trace.add((i1, i2), (y, i1, i2), ent.info((y, i1, i2)))
    remaining = [a for a in table.attributes if a not in (i1, i2)]
    while remaining:
        best, best_key = None, None
        for m in sorted(order):
            base = ent.info((y, m))
            for k in remaining:
                gain = ent.info((y, m, k)) - base
                key = (-gain, m, k)
                if best_key is None or key < best_key:
                    best, best_key = (m, k), key
        m, k = best
        order.append(k)
        mother[k] = m
        remaining.remove(k)
        trace.add((k,), (y, m, k), -best_key[0])
    return GnbStructure(y, tuple(order), mother), trace


@dataclass(frozen=True, eq=False)
class ScoreMatrix:
    """``matrix[i, j]`` scores the edge j -> i; NO_EDGE marks absent edges.

    Vertex 0 is the class; ``labels[v]`` is the table column of vertex ``v``.
    """

    matrix: np.ndarray
    labels: tuple[int, ...]
    first_pair: tuple[int, int]

    @property
    def n_vertices(self) -> int:
        return self.matrix.shape[0]

    def edges(self) -> list[tuple[int, int, float]]:
        """(parent, child, weight) for every present edge."""
        out = []
        for child, parent in zip(*np.nonzero(np.isfinite(self.matrix))):
            out.append((int(parent), int(child), float(self.matrix[child, parent])))
        return out


def build_aux_graph(table: DiscreteTable, ent: Entropies | None = None) -> ScoreMatrix:
    _require_attributes(table)
    ent = ent or Entropies(table)
    y = table.class_column
    attrs = table.attributes
    labels = (y, *attrs)
    vertex = {a: v for v, a in enumerate(labels)}
    c1, c2 = best_triplet(table, ent)
    i1, i2 = vertex[c1], vertex[c2]
    n = len(labels)
    S = np.full((n, n), NO_EDGE)
    S[i1, 0] = ent.info((y, c1))
    S[i2, i1] = ent.info((c1, c2))
    for j1 in range(1, n):
        if j1 in (i1, i2):
            continue
        for j2 in range(1, n):
            if j2 == j1:
                continue
            a, m = labels[j1], labels[j2]
            S[j1, j2] = ent.info((y, m, a)) - ent.info((y, m))
    return ScoreMatrix(S, labels, (i1, i2))


def _best_incoming(n, edges, root):
    best = {}
    for e in edges:
        u, v, w = e[0], e[1], e[2]
        if v == root or u == v:
            continue
        b = best.get(v)
        if b is None or w > b[2] or (w == b[2] and u < b[0]):
            best[v] = e
    return best


def _find_cycle(best, n, root):
    color = [0] * n  # 0 unvisited, 1 on current walk, 2 done
    for start in range(n):
        if color[start]:
            continue
        path, v = [], start
        while v != root and color[v] == 0:
            color[v] = 1
            path.append(v)
            v = best[v][0]
        if v != root and color[v] == 1:
            return path[path.index(v):]
        for u in path:
            color[u] = 2
    return None


def _chu_liu_edmonds(n, edges, root):
    """Maximum-weight arborescence on vertices 0..n-1; returns {vertex: chosen edge}.

    Edges are tuples (parent, child, weight, origin) where origin is the edge
    one contraction level up (None at the top level).
    """
    best = _best_incoming(n, edges, root)
    for v in range(n):
        if v != root and v not in best:
            raise StructureError(f"vertex {v} is unreachable: no arborescence exists")
    cycle = _find_cycle(best, n, root)
    if cycle is None:
        return best
    in_cycle = set(cycle)
    new_id, nxt = {}, 0
    for v in range(n):
        if v not in in_cycle:
            new_id[v] = nxt
            nxt += 1
    c = nxt
    for v in cycle:
        new_id[v] = c
    contracted = []
    for e in edges:
        u, v, w = e[0], e[1], e[2]
        nu, nv = new_id[u], new_id[v]
        if nu == nv:
            continue
        if v in in_cycle:
            w = w - best[v][2]
        contracted.append((nu, nv, w, e))
    chosen = _chu_liu_edmonds(c + 1, contracted, new_id[root])
    result = {}
    for e in chosen.values():
        orig = e[3]
        result[orig[1]] = orig
    for v in cycle:
        result.setdefault(v, best[v])
    return result


def max_arborescence(S: ScoreMatrix | np.ndarray, root: int = 0) -> Arborescence:
    """Chu-Liu-Edmonds, maximising the summed edge scores of a root-0 spanning arborescence."""
    matrix = S.matrix if isinstance(S, ScoreMatrix) else np.asarray(S, dtype=float)
    labels = S.labels if isinstance(S, ScoreMatrix) else tuple(range(matrix.shape[0]))
    n = matrix.shape[0]
    edges = [(int(p), int(c), float(matrix[c, p]), None)
             for c, p in zip(*np.nonzero(np.isfinite(matrix))) if c != p]
    chosen = _chu_liu_edmonds(n, edges, root)
    parent = {v: e[0] for v, e in chosen.items()}
    weights = [matrix[v, p] for v, p in parent.items()]
    if not np.all(np.isfinite(weights)):
        raise StructureError("arborescence uses an absent edge")
    return Arborescence(dict(sorted(parent.items())), float(sum(weights)), labels, root)


def learn_gnb_o(table: DiscreteTable, ent: Entropies | None = None) -> tuple[GnbStructure, LearnTrace, float]:
    """Optimal GNB containing the most informative triplet, read off the
    maximum arborescence of the auxiliary graph."""
    ent = ent or Entropies(table)
    S = build_aux_graph(table, ent)
    arb = max_arborescence(S)
    i1, i2 = S.first_pair
    if arb.parent.get(i1) != 0 or arb.parent.get(i2) != i1:
        raise StructureError("arborescence misses the forced first edges")
    structure = chain_ordering(arb, S).check(table.n_columns)
    y = table.class_column
    c1, c2 = S.labels[i1], S.labels[i2]
    weight = arb.weight - S.matrix[i1, 0] - S.matrix[i2, i1] + ent.info((y, c1, c2))
    return structure, trace_from_structure(structure, ent), float(weight)


def learn_nb(table: DiscreteTable) -> NbStructure:
    _require_attributes(table, 1)
    return NbStructure(table.class_column, table.attributes)


def tan_edges(table: DiscreteTable, ent: Entropies | None = None) -> list[tuple[int, int, float]]:
    """Maximum spanning tree over conditional mutual information I(X_i; X_j | Y) (Kruskal)."""
    ent = ent or Entropies(table)
    y = table.class_column
    scored = sorted(
        ((ent.cond_mutual_info(i, j, y), i, j) for i, j in itertools.combinations(table.attributes, 2)),
        key=lambda t: (-t[0], t[1], t[2]),
    )
    parent = {a: a for a in table.attributes}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    tree = []
    for w, i, j in scored:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
            tree.append((i, j, w))
    return tree


def learn_tan(table: DiscreteTable, ent: Entropies | None = None) -> GnbStructure:
    _require_attributes(table)
    tree = tan_edges(table, ent)
    root = min(table.attributes)
    return from_tree(table.class_column, [(i, j) for i, j, _ in tree], root).check(table.n_columns)


def learn(table: DiscreteTable, algorithm: str):
    """Structure for ``algorithm``; one of ALGORITHMS."""
    if algorithm == "gnb-a":
        return learn_gnb_a(table)[0]
    if algorithm == "gnb-o":
        return learn_gnb_o(table)[0]
    if algorithm == "nb":
        return learn_nb(table)
    if algorithm == "tan":
        return learn_tan(table)
    raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {', '.join(ALGORITHMS)}")

