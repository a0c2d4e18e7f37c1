"""Directed multigraphs, ideal lattices and the subgraphs attached to an ideal.

Edge multiplicities are nonnegative ints or :data:`INF`.  An edge is the
triple ``(source, target, k)`` with ``1 <= k <= multiplicity``; this only
makes sense where the multiplicity is finite, and :meth:`Graph.edges_from`
refuses to enumerate infinitely many edges.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

INF = math.inf

Edge = tuple[str, str, int]


class GraphError(ValueError):
    pass


def _check_mult(m) -> int | float:
    if m == INF:
        return INF
    if isinstance(m, bool) or not isinstance(m, int) or m < 0:
        raise GraphError(f"bad multiplicity {m!r}")
    return m


@dataclass(frozen=True)
class Graph:
    vertices: tuple[str, ...]
    adjacency: Mapping[tuple[str, str], int | float]

    def __init__(self, vertices: Iterable[str], adjacency: Mapping[tuple[str, str], int | float] = ()):
        vertices = tuple(vertices)
        if len(set(vertices)) != len(vertices):
            raise GraphError("duplicate vertex names")
        vs = set(vertices)
        adj = {}
        for (v, w), m in dict(adjacency).items():
            if v not in vs or w not in vs:
                raise GraphError(f"edge {v}->{w} refers to an unknown vertex")
            m = _check_mult(m)
            if m:
                adj[(v, w)] = m
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "adjacency", adj)

    @classmethod
    def from_matrix(cls, matrix: Sequence[Sequence[int | float]], names: Sequence[str] | None = None) -> "Graph":
        n = len(matrix)
        names = list(names) if names is not None else [f"v{i + 1}" for i in range(n)]
        adj = {(names[i], names[j]): matrix[i][j] for i in range(n) for j in range(n) if matrix[i][j]}
        return cls(names, adj)

    def __hash__(self) -> int:
        return hash((self.vertices, tuple(sorted(self.adjacency.items()))))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.vertices == other.vertices and dict(self.adjacency) == dict(other.adjacency)

    # -- basic queries -----------------------------------------------------

    def mult(self, v: str, w: str) -> int | float:
        return self.adjacency.get((v, w), 0)

    def matrix(self) -> list[list[int | float]]:
        return [[self.mult(v, w) for w in self.vertices] for v in self.vertices]

    @cached_property
    def index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    def out_degree(self, v: str) -> int | float:
        return sum(self.mult(v, w) for w in self.vertices)

    def successors(self, v: str) -> list[str]:
        return [w for w in self.vertices if self.mult(v, w)]

    def is_regular(self, v: str) -> bool:
        return 0 < self.out_degree(v) < INF

    def edges_from(self, v: str, targets: Iterable[str] | None = None) -> list[Edge]:
        """Edges out of ``v`` (optionally only those landing in ``targets``)."""
        ws = self.vertices if targets is None else [w for w in self.vertices if w in set(targets)]
        out = []
        for w in ws:
            m = self.mult(v, w)
            if m == INF:
                raise GraphError(f"infinitely many edges {v}->{w}")
            out.extend((v, w, k) for k in range(1, m + 1))
        return out

    def ordered(self, vs: Iterable[str]) -> list[str]:
        s = set(vs)
        return [v for v in self.vertices if v in s]

    def subgraph(self, vs: Iterable[str]) -> "Graph":
        keep = self.ordered(vs)
        ks = set(keep)
        return Graph(keep, {k: m for k, m in self.adjacency.items() if k[0] in ks and k[1] in ks})

    # -- JSON ------------------------------------------------------------

    def to_json(self) -> dict:
        edges = []
        for v in self.vertices:
            for w in self.vertices:
                m = self.mult(v, w)
                if m:
                    edges.append([v, w, "inf" if m == INF else m])
        return {"vertices": list(self.vertices), "edges": edges}

    @classmethod
    def from_json(cls, obj: dict) -> "Graph":
        try:
            vertices = [str(v) for v in obj["vertices"]]
            edges = obj.get("edges", [])
        except (KeyError, TypeError) as exc:
            raise GraphError(f"malformed graph description: {exc}") from None
        adj: dict[tuple[str, str], int | float] = {}
        for entry in edges:
            if not isinstance(entry, (list, tuple)) or len(entry) != 3:
                raise GraphError(f"malformed edge entry {entry!r}")
            v, w, m = entry
            if m == "inf":
                m = INF
            elif isinstance(m, str) or isinstance(m, float):
                raise GraphError(f"bad multiplicity {m!r}; use a nonnegative int or \"inf\"")
            if (v, w) in adj:
                raise GraphError(f"duplicate entry for {v}->{w}")
            adj[(str(v), str(w))] = m
        return cls(vertices, adj)

    @classmethod
    def load(cls, path) -> "Graph":
        with open(path) as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise GraphError(f"{path}: {exc}") from None
        return cls.from_json(obj)


@dataclass(frozen=True)
class AdmissiblePair:
    H: frozenset[str]
    S: frozenset[str] = frozenset()

    def __init__(self, H: Iterable[str] = (), S: Iterable[str] = ()):
        object.__setattr__(self, "H", frozenset(H))
        object.__setattr__(self, "S", frozenset(S))

    def leq(self, other: "AdmissiblePair") -> bool:
        return self.H <= other.H and self.S <= other.H | other.S


@dataclass(frozen=True)
class RelativeGraph:
    graph: Graph
    relset: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "relset", frozenset(self.relset))
        bad = [v for v in self.relset if v not in self.graph.index or not self.graph.is_regular(v)]
        if bad:
            raise GraphError(f"relative set contains non-regular vertices {sorted(bad)}")

    @classmethod
    def full(cls, g: Graph) -> "RelativeGraph":
        return cls(g, frozenset(classify_vertices(g)[0]))

    @property
    def relset_ordered(self) -> list[str]:
        return self.graph.ordered(self.relset)


# -- vertex classes and the ideal lattice ---------------------------------------


def classify_vertices(g: Graph) -> tuple[list[str], list[str]]:
    regular = [v for v in g.vertices if g.is_regular(v)]
    singular = [v for v in g.vertices if not g.is_regular(v)]
    return regular, singular


def reachable(g: Graph, starts: Iterable[str]) -> set[str]:
    seen = set(starts)
    stack = list(seen)
    while stack:
        v = stack.pop()
        for w in g.successors(v):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def is_hereditary(g: Graph, H: Iterable[str]) -> bool:
    H = set(H)
    return all(w in H for v in H for w in g.successors(v))


def is_saturated(g: Graph, H: Iterable[str]) -> bool:
    H = set(H)
    for v in g.vertices:
        if v not in H and g.is_regular(v) and all(w in H for w in g.successors(v)):
            return False
    return True


def saturate(g: Graph, H0: Iterable[str]) -> frozenset[str]:
    """Smallest saturated hereditary set containing the hereditary set ``H0``."""
    H = set(H0)
    if not is_hereditary(g, H):
        raise GraphError("input set is not hereditary")
    changed = True
    while changed:
        changed = False
        for v in g.vertices:
            if v not in H and g.is_regular(v) and all(w in H for w in g.successors(v)):
                H.add(v)
                changed = True
    return frozenset(H)


def _require_saturated_hereditary(g: Graph, H) -> None:
    if not (is_hereditary(g, H) and is_saturated(g, H)):
        raise GraphError("set is not saturated hereditary")


def edges_leaving(g: Graph, v: str, H: Iterable[str]) -> int | float:
    H = set(H)
    return sum(g.mult(v, w) for w in g.vertices if w not in H)


def breaking_vertices(g: Graph, H: Iterable[str]) -> frozenset[str]:
    H = frozenset(H)
    _require_saturated_hereditary(g, H)
    return frozenset(
        v for v in g.vertices if g.out_degree(v) == INF and 0 < edges_leaving(g, v, H) < INF
    )


def validate_pair(g: Graph, p: AdmissiblePair) -> None:
    unknown = sorted((p.H | p.S) - set(g.vertices))
    if unknown:
        raise GraphError(f"unknown vertices {unknown}")
    if not is_hereditary(g, p.H):
        escaping = sorted(w for v in p.H for w in g.successors(v) if w not in p.H)
        raise GraphError(f"H is not hereditary: reaches {escaping}")
    if not is_saturated(g, p.H):
        missing = sorted(
            v for v in g.vertices
            if v not in p.H and g.is_regular(v) and all(w in p.H for w in g.successors(v))
        )
        raise GraphError(f"H is not saturated: missing {missing}")
    bad = sorted(p.S - breaking_vertices(g, p.H))
    if bad:
        raise GraphError(f"S contains non-breaking vertices {bad}")


def admissible_pairs(g: Graph) -> list[AdmissiblePair]:
    """All admissible pairs, by brute force over the ``2^n`` vertex subsets.

    Ordered by (|H|, vertex positions of H, |S|, positions of S).
    """
    n = len(g.vertices)
    out = []
    for size in range(n + 1):
        for combo in itertools.combinations(g.vertices, size):
            H = frozenset(combo)
            if not (is_hereditary(g, H) and is_saturated(g, H)):
                continue
            B = g.ordered(breaking_vertices(g, H))
            for k in range(len(B) + 1):
                for S in itertools.combinations(B, k):
                    out.append(AdmissiblePair(H, S))
    return out


def hasse_edges(pairs: Sequence[AdmissiblePair]) -> list[tuple[int, int]]:
    """Covering relations ``(i, j)`` meaning ``pairs[i] < pairs[j]`` with nothing between."""
    n = len(pairs)
    less = [[i != j and pairs[i].leq(pairs[j]) for j in range(n)] for i in range(n)]
    return [
        (i, j)
        for i in range(n)
        for j in range(n)
        if less[i][j] and not any(less[i][k] and less[k][j] for k in range(n))
    ]


# -- subgraphs attached to an ideal ---------------------------------------------


def ideal_subgraph(g: Graph, p: AdmissiblePair) -> RelativeGraph:
    """Vertices ``H u S``; all edges out of ``H`` and the edges from ``S`` into ``H``."""
    validate_pair(g, p)
    verts = g.ordered(p.H | p.S)
    adj = {}
    for (v, w), m in g.adjacency.items():
        if v in p.H or (v in p.S and w in p.H):
            adj[(v, w)] = m
    sub = Graph(verts, adj)
    regular = set(classify_vertices(g)[0])
    return RelativeGraph(sub, frozenset(regular & p.H))


def quotient_relative_graph(g: Graph, p: AdmissiblePair) -> RelativeGraph:
    """The graph with ``H`` deleted, relative to ``(regular \\ H) u S``."""
    validate_pair(g, p)
    sub = g.subgraph(v for v in g.vertices if v not in p.H)
    regular = set(classify_vertices(g)[0])
    return RelativeGraph(sub, frozenset((regular - p.H) | p.S))


# -- Condition (K) -------------------------------------------------------------


def _return_count(g: Graph, v: str, cap: int = 2) -> int:
    """Number of cycles based at ``v`` that do not pass through ``v`` before the end, capped."""
    others = [w for w in g.vertices if w != v]
    inner = g.subgraph(others)
    # vertices that can get back to v without touching v
    back = {w for w in others if g.mult(w, v)}
    grew = True
    while grew:
        grew = False
        for w in others:
            if w not in back and any(u in back for u in inner.successors(w)):
                back.add(w)
                grew = True
    start = {w for w in g.successors(v) if w != v and w in back}
    live = reachable(inner, start) & back
    # a cycle among live vertices gives infinitely many returns
    live_graph = inner.subgraph(live)
    if _has_cycle(live_graph):
        return cap if start else 0

    memo: dict[str, int] = {}

    def count(w):
        # walks from w (!= v) to v with interior avoiding v
        if w in memo:
            return memo[w]
        total = min(g.mult(w, v), cap)
        for u in live_graph.successors(w):
            total += min(live_graph.mult(w, u), cap) * count(u)
        memo[w] = total = min(total, cap)
        return total

    total = min(g.mult(v, v), cap)
    for w in start:
        total += min(g.mult(v, w), cap) * count(w)
    return int(min(total, cap))


def _has_cycle(g: Graph) -> bool:
    state: dict[str, int] = {}

    def visit(v):
        state[v] = 1
        for w in g.successors(v):
            if state.get(w) == 1:
                return True
            if w not in state and visit(w):
                return True
        state[v] = 2
        return False

    return any(v not in state and visit(v) for v in g.vertices)


def simple_cycle_count(g: Graph, v: str, cap: int = 2) -> int:
    return _return_count(g, v, cap)


def condition_K(g: Graph) -> bool:
    return all(_return_count(g, v) != 1 for v in g.vertices)


# -- the two example families -----------------------------------------------------


def family_e(x: int, y: int, z: int) -> Graph:
    return Graph.from_matrix([[0, 0, 0, 0], [x, 1, 1, 0], [y, 1, 1, 1], [z, 0, 1, 1]])


def family_f(y: int, z: int) -> Graph:
    return Graph.from_matrix([[0, 0, 0], [y, 3, 1], [INF, z, 3]])
