"""Symbolic computation in the Toeplitz algebra of a graph.

Elements are finite integer combinations of ``s_a s_b^*`` with ``a``, ``b``
paths ending at the same vertex.  These monomials are linearly independent
in the Toeplitz algebra, so two elements are equal exactly when their term
dictionaries agree.  Identities that only hold in a relative graph algebra
are checked by showing that a difference lies in the span of the gap
elements ``p_w - sum_{s(e)=w} s_e s_e^*``.

A path is ``(start, edges)`` where ``edges`` is a tuple of edge triples;
``(v, ())`` is the vertex ``v``.
"""
from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .graph import AdmissiblePair, Edge, Graph, RelativeGraph, classify_vertices, quotient_relative_graph
from .sixterm import decompose, kgroups_matrix

Path = tuple[str, tuple[Edge, ...]]


class ResidueError(ValueError):
    """A defect could not be written in the expected generators."""


class NotInKernel(ValueError):
    pass


def vertex_path(v: str) -> Path:
    return (v, ())


def edge_path(e: Edge) -> Path:
    return (e[0], (e,))


def path_range(p: Path) -> str:
    return p[1][-1][1] if p[1] else p[0]


def _mul_monomials(a: Path, b: Path, c: Path, d: Path):
    # (s_a s_b^*)(s_c s_d^*)
    if b[0] != c[0]:
        return None
    be, ce = b[1], c[1]
    if ce[: len(be)] == be:
        return (a[0], a[1] + ce[len(be):]), d
    if be[: len(ce)] == ce:
        return a, (d[0], d[1] + be[len(ce):])
    return None


class Element:
    """Integer combination of monomials ``s_a s_b^*``."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple[Path, Path], int] | None = None):
        self._terms = {k: c for k, c in (terms or {}).items() if c}

    @classmethod
    def monomial(cls, a: Path, b: Path, coeff: int = 1) -> "Element":
        if path_range(a) != path_range(b):
            raise ValueError(f"ranges differ: {a} vs {b}")
        return cls({(a, b): coeff})

    @classmethod
    def p(cls, v: str) -> "Element":
        return cls.monomial(vertex_path(v), vertex_path(v))

    @classmethod
    def s(cls, e: Edge) -> "Element":
        return cls.monomial(edge_path(e), vertex_path(e[1]))

    @classmethod
    def s_star(cls, e: Edge) -> "Element":
        return cls.monomial(vertex_path(e[1]), edge_path(e))

    @classmethod
    def range_projection(cls, e: Edge) -> "Element":
        """``s_e s_e^*``."""
        return cls.monomial(edge_path(e), edge_path(e))

    @classmethod
    def gap(cls, g: Graph, w: str, targets: Iterable[str] | None = None) -> "Element":
        """``p_w`` minus ``s_e s_e^*`` over the edges out of ``w`` (into ``targets`` if given)."""
        out = cls.p(w)
        for e in g.edges_from(w, targets):
            out = out - cls.range_projection(e)
        return out

    def terms(self) -> list[tuple[Path, Path, int]]:
        return [(a, b, c) for (a, b), c in sorted(self._terms.items())]

    def coeff(self, a: Path, b: Path) -> int:
        return self._terms.get((a, b), 0)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int) and other == 0:
            return not self._terms
        if not isinstance(other, Element):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def __add__(self, other: "Element") -> "Element":
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, 0) + c
        return Element(out)

    def __neg__(self) -> "Element":
        return Element({k: -c for k, c in self._terms.items()})

    def __sub__(self, other: "Element") -> "Element":
        return self + (-other)

    def scale(self, k: int) -> "Element":
        return Element({t: k * c for t, c in self._terms.items()})

    def __mul__(self, other: "Element") -> "Element":
        out: dict = defaultdict(int)
        for (a, b), c1 in self._terms.items():
            for (c, d), c2 in other._terms.items():
                prod = _mul_monomials(a, b, c, d)
                if prod is not None:
                    out[prod] += c1 * c2
        return Element(out)

    def adjoint(self) -> "Element":
        return Element({(b, a): c for (a, b), c in self._terms.items()})

    def __repr__(self) -> str:
        if not self._terms:
            return "0"
        return " + ".join(f"{c}*{_fmt(a)}{_fmt(b)}^*" for a, b, c in self.terms())


def _fmt(p: Path) -> str:
    if not p[1]:
        return f"[{p[0]}]"
    return "[" + ".".join(f"{s}>{t}#{k}" for s, t, k in p[1]) + "]"


def multiply(a: Element, b: Element) -> Element:
    return a * b


def adjoint(a: Element) -> Element:
    return a.adjoint()


class AlgMatrix:
    """Square matrix over the Toeplitz algebra, stored sparsely."""

    __slots__ = ("size", "_entries")

    def __init__(self, size: int, entries: Mapping[tuple[int, int], Element] | None = None):
        self.size = size
        self._entries = {ij: x for ij, x in (entries or {}).items() if x}

    @classmethod
    def scalar(cls, size: int, x: Element) -> "AlgMatrix":
        return cls(size, {(i, i): x for i in range(size)})

    def __getitem__(self, ij: tuple[int, int]) -> Element:
        return self._entries.get(ij, Element())

    def entries(self) -> dict[tuple[int, int], Element]:
        return dict(self._entries)

    def add_at(self, i: int, j: int, x: Element) -> None:
        self._entries[(i, j)] = self[i, j] + x
        if not self._entries[(i, j)]:
            del self._entries[(i, j)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AlgMatrix):
            return NotImplemented
        return self.size == other.size and self._entries == other._entries

    def __add__(self, other: "AlgMatrix") -> "AlgMatrix":
        out = AlgMatrix(self.size, self._entries)
        for (i, j), x in other._entries.items():
            out.add_at(i, j, x)
        return out

    def __neg__(self) -> "AlgMatrix":
        return AlgMatrix(self.size, {k: -x for k, x in self._entries.items()})

    def __sub__(self, other: "AlgMatrix") -> "AlgMatrix":
        return self + (-other)

    def __mul__(self, other: "AlgMatrix") -> "AlgMatrix":
        rows = defaultdict(list)
        for (k, j), x in other._entries.items():
            rows[k].append((j, x))
        out: dict = {}
        for (i, k), x in self._entries.items():
            for j, y in rows.get(k, ()):
                prod = x * y
                if prod:
                    out[(i, j)] = out[(i, j)] + prod if (i, j) in out else prod
        return AlgMatrix(self.size, out)

    def adjoint(self) -> "AlgMatrix":
        return AlgMatrix(self.size, {(j, i): x.adjoint() for (i, j), x in self._entries.items()})

    def off_diagonal(self) -> dict[tuple[int, int], Element]:
        return {ij: x for ij, x in self._entries.items() if ij[0] != ij[1]}

    def diagonal(self) -> list[Element]:
        return [self[i, i] for i in range(self.size)]


def unit(g: Graph) -> Element:
    out = Element()
    for v in g.vertices:
        out = out + Element.p(v)
    return out


# -- index sets for a kernel vector ------------------------------------------------

# An index is (item, i); item is a vertex name or an edge triple.
Index = tuple


def _item_range(item) -> str:
    return item if isinstance(item, str) else item[1]


def _item_key(g: Graph, index):
    item, i = index
    if isinstance(item, str):
        return (0, (g.index[item],), i)
    s, t, k = item
    return (1, (g.index[s], g.index[t], k), i)


@dataclass(frozen=True)
class WitnessIndex:
    x: dict[str, int]
    upindex: tuple[Index, ...]
    downindex: tuple[Index, ...]
    upm: dict[Index, int]
    downm: dict[Index, int]

    @property
    def h(self) -> int:
        return len(self.upindex)

    def check_goodchoice(self) -> bool:
        up_at = {pos: idx for idx, pos in self.upm.items()}
        return all(_item_range(up_at[pos][0]) == _item_range(idx[0]) for idx, pos in self.downm.items())


def _as_vertex_dict(rg: RelativeGraph, x) -> dict[str, int]:
    if isinstance(x, Mapping):
        return {v: int(c) for v, c in x.items() if c}
    order = rg.relset_ordered
    if len(x) != len(order):
        raise ValueError(f"vector of length {len(x)} for relative set of size {len(order)}")
    return {v: int(c) for v, c in zip(order, x) if c}


def index_sets(rg: RelativeGraph, x: Mapping[str, int]) -> tuple[list[Index], list[Index]]:
    g = rg.graph
    up, down = [], []
    for w in g.vertices:
        xw = x.get(w, 0)
        if xw > 0:
            up.extend((w, i) for i in range(1, xw + 1))
            down.extend((e, i) for e in g.edges_from(w) for i in range(1, xw + 1))
        elif xw < 0:
            down.extend((w, i) for i in range(1, -xw + 1))
            up.extend((e, i) for e in g.edges_from(w) for i in range(1, -xw + 1))
    return up, down


def range_classes(members: Iterable[Index]) -> dict[str, list[Index]]:
    out: dict[str, list[Index]] = defaultdict(list)
    for m in members:
        out[_item_range(m[0])].append(m)
    return out


def witness_index(rg: RelativeGraph, x, rng: random.Random | None = None) -> WitnessIndex:
    """Index sets and bijections for a kernel vector on the relative set.

    Without ``rng`` the bijections pair the sorted up- and down-members of
    each range class positionally, classes taken in vertex order.  With
    ``rng`` the pairing inside each class and the global positions are
    shuffled; the range condition is kept either way.
    """
    g = rg.graph
    xd = _as_vertex_dict(rg, x)
    if set(xd) - rg.relset:
        raise NotInKernel(f"vector is supported outside the relative set: {sorted(set(xd) - rg.relset)}")
    m, _, cols = kgroups_matrix(rg)
    if any(m.apply([xd.get(v, 0) for v in cols])):
        raise NotInKernel("vector is not in the kernel")
    up, down = index_sets(rg, xd)
    up_by, down_by = range_classes(up), range_classes(down)
    for v in g.vertices:
        if len(up_by.get(v, ())) != len(down_by.get(v, ())):
            raise AssertionError(f"index counts differ at {v}")
    if len(up) != len(down):
        raise AssertionError("index sets differ in size")

    key = lambda idx: _item_key(g, idx)  # noqa: E731
    positions = list(range(len(up)))
    if rng is not None:
        rng.shuffle(positions)
    upm, downm = {}, {}
    slot = 0
    for v in g.vertices:
        us = sorted(up_by.get(v, ()), key=key)
        ds = sorted(down_by.get(v, ()), key=key)
        if rng is not None:
            rng.shuffle(us)
            rng.shuffle(ds)
        for u, d in zip(us, ds):
            upm[u] = positions[slot]
            downm[d] = positions[slot]
            slot += 1
    return WitnessIndex(xd, tuple(sorted(up, key=key)), tuple(sorted(down, key=key)), upm, downm)


# -- the partial isometry V and projection P -------------------------------------------


def _edges(g: Graph, w: str) -> list[Edge]:
    return g.edges_from(w)


def build_VP(rg: RelativeGraph, w: WitnessIndex) -> tuple[AlgMatrix, AlgMatrix]:
    g = rg.graph
    V, P = AlgMatrix(w.h), AlgMatrix(w.h)
    for v, xv in w.x.items():
        for i in range(1, abs(xv) + 1):
            if xv > 0:
                P.add_at(w.upm[(v, i)], w.upm[(v, i)], Element.p(v))
                for e in _edges(g, v):
                    V.add_at(w.upm[(v, i)], w.downm[(e, i)], Element.s(e))
            else:
                for e in _edges(g, v):
                    V.add_at(w.upm[(e, i)], w.downm[(v, i)], Element.s_star(e))
                    P.add_at(w.upm[(e, i)], w.upm[(e, i)], Element.p(e[1]))
    return V, P


def build_VPU(rg: RelativeGraph, w: WitnessIndex, ambient: Graph | None = None):
    """``(V, P, U)`` with ``U = V + (1 - P)``; the unit is ``sum p_v`` over ``ambient``."""
    V, P = build_VP(rg, w)
    one = AlgMatrix.scalar(w.h, unit(ambient or rg.graph))
    return V, P, V + (one - P)


def expected_forms(rg: RelativeGraph, w: WitnessIndex) -> dict[str, AlgMatrix]:
    """Right-hand sides of the four identities for ``P``, ``V*``, ``VV*`` and ``V*V``."""
    g = rg.graph
    h = w.h
    P_down, Vstar, VVstar, VstarV = AlgMatrix(h), AlgMatrix(h), AlgMatrix(h), AlgMatrix(h)
    for v, xv in w.x.items():
        for i in range(1, abs(xv) + 1):
            if xv > 0:
                for e in _edges(g, v):
                    P_down.add_at(w.downm[(e, i)], w.downm[(e, i)], Element.p(e[1]))
                    Vstar.add_at(w.downm[(e, i)], w.upm[(v, i)], Element.s_star(e))
                    VVstar.add_at(w.upm[(v, i)], w.upm[(v, i)], Element.range_projection(e))
                    VstarV.add_at(w.downm[(e, i)], w.downm[(e, i)], Element.p(e[1]))
            else:
                P_down.add_at(w.downm[(v, i)], w.downm[(v, i)], Element.p(v))
                for e in _edges(g, v):
                    Vstar.add_at(w.downm[(v, i)], w.upm[(e, i)], Element.s(e))
                    VVstar.add_at(w.upm[(e, i)], w.upm[(e, i)], Element.p(e[1]))
                    VstarV.add_at(w.downm[(v, i)], w.downm[(v, i)], Element.range_projection(e))
    return {"P": P_down, "Vstar": Vstar, "VVstar": VVstar, "VstarV": VstarV}


def foureqs_report(rg: RelativeGraph, w: WitnessIndex, V: AlgMatrix, P: AlgMatrix) -> dict[str, bool]:
    exp = expected_forms(rg, w)
    Vs = V.adjoint()
    return {
        "P": P == exp["P"],
        "Vstar": Vs == exp["Vstar"],
        "VVstar": V * Vs == exp["VVstar"],
        "VstarV": Vs * V == exp["VstarV"],
    }


def verify_foureqs(rg: RelativeGraph, w: WitnessIndex, V: AlgMatrix, P: AlgMatrix) -> bool:
    return all(foureqs_report(rg, w, V, P).values())


def verify_partial_isometry(V: AlgMatrix, P: AlgMatrix) -> dict[str, bool]:
    Vs = V.adjoint()
    return {"VVstarV": V * Vs * V == V, "PV": P * V == V, "VP": V * P == V}


# -- defects -------------------------------------------------------------------------


def gap_coefficients(g: Graph, x: Element, allowed: Iterable[str]) -> dict[str, int]:
    """Write ``x`` as ``sum c_w (p_w - sum_{s(e)=w} s_e s_e^*)`` with ``w`` in ``allowed``."""
    allowed = set(allowed)
    coeffs: dict[str, int] = {}
    rest = x
    for a, b, c in x.terms():
        if a == b and not a[1] and a[0] in allowed:
            coeffs[a[0]] = coeffs.get(a[0], 0) + c
            rest = rest - Element.gap(g, a[0]).scale(c)
    if rest:
        raise ResidueError(f"not in the span of gap elements: {rest!r}")
    return coeffs


def _diagonal_only(m: AlgMatrix, what: str) -> list[Element]:
    off = m.off_diagonal()
    if off:
        raise ResidueError(f"{what} has off-diagonal entries at {sorted(off)}")
    return m.diagonal()


def gap_residue(rg: RelativeGraph, w: WitnessIndex, V: AlgMatrix, P: AlgMatrix) -> list[int]:
    """Coefficients of ``P - VV*`` minus those of ``P - V*V`` on the gap elements.

    Indexed by the relative set in vertex order; equals the kernel vector.
    """
    g = rg.graph
    Vs = V.adjoint()
    total: dict[str, int] = defaultdict(int)
    for sign, defect in ((1, P - V * Vs), (-1, P - Vs * V)):
        for entry in _diagonal_only(defect, "defect"):
            for v, c in gap_coefficients(g, entry, rg.relset).items():
                total[v] += sign * c
    return [total.get(v, 0) for v in rg.relset_ordered]


# -- the index map by lifting ------------------------------------------------------------


@dataclass(frozen=True)
class OracleResult:
    x: tuple[int, ...]
    witness: WitnessIndex
    defect_in: tuple[int, ...]
    defect_out: tuple[int, ...]

    @property
    def vector(self) -> list[int]:
        return [a - b for a, b in zip(self.defect_in, self.defect_out)]


def _extract_ideal_class(
    g: Graph, entry: Element, H: frozenset, S: frozenset, expand: set, coords: dict[str, int]
) -> list[int]:
    """K0 class in the ideal of one diagonal defect entry.

    ``p_w`` for regular ``w`` outside ``H`` is first rewritten as the sum of
    the ``s_e s_e^*`` below it.  A remaining ``p_v`` with ``v`` in ``S``
    must come with the full gap-projection pattern and counts as ``e_v``;
    every other term must be ``s_e s_e^*`` with ``r(e)`` in ``H`` and counts
    as ``e_{r(e)}``.
    """
    out = [0] * len(coords)
    rest = entry
    for a, b, c in entry.terms():
        if a == b and not a[1] and a[0] in expand:
            rest = rest - Element.gap(g, a[0]).scale(c)
    for a, b, c in rest.terms():
        if a == b and not a[1] and a[0] in S:
            outside = [v for v in g.vertices if v not in H]
            rest = rest - Element.gap(g, a[0], outside).scale(c)
            out[coords[a[0]]] += c
    for a, b, c in rest.terms():
        if a == b and len(a[1]) == 1 and a[1][0][1] in H:
            out[coords[a[1][0][1]]] += c
        else:
            raise ResidueError(f"unexpected defect term {c}*{_fmt(a)}{_fmt(b)}^*")
    return out


def index_oracle(g: Graph, p: AdmissiblePair, x: Sequence[int]) -> OracleResult:
    """Index map on a quotient K1 vector, computed from the defect of a lift.

    ``x`` is in the coordinates of the quotient presentation: regular
    vertices outside ``H`` followed by ``S``.  The result lives in the
    cover of the ideal K0 presentation: regular in ``H``, singular in ``H``,
    then ``S``.
    """
    d = decompose(g, p)
    qcols = d.classes[2] + d.classes[4]
    if len(x) != len(qcols):
        raise ValueError(f"vector of length {len(x)}, expected {len(qcols)}")
    rq = quotient_relative_graph(g, p)
    w = witness_index(rq, dict(zip(qcols, x)))
    V, P, U = build_VPU(rq, w, ambient=g)
    one = AlgMatrix.scalar(w.h, unit(g))
    Us = U.adjoint()
    coords_list = d.classes[0] + d.classes[1] + d.classes[4]
    coords = {v: i for i, v in enumerate(coords_list)}
    regular = set(classify_vertices(g)[0])
    expand = regular - p.H

    def extract(defect: AlgMatrix, what: str) -> tuple[int, ...]:
        out = [0] * len(coords)
        for entry in _diagonal_only(defect, what):
            out = [a + b for a, b in zip(out, _extract_ideal_class(g, entry, p.H, p.S, expand, coords))]
        return tuple(out)

    return OracleResult(
        tuple(x),
        w,
        extract(one - U * Us, "1 - UU*"),
        extract(one - Us * U, "1 - U*U"),
    )


def witness_report(rg: RelativeGraph, x) -> dict:
    w = witness_index(rg, x)
    V, P = build_VP(rg, w)
    return {
        "h": w.h,
        "upindex": [[_index_json(i), w.upm[i] + 1] for i in w.upindex],
        "downindex": [[_index_json(i), w.downm[i] + 1] for i in w.downindex],
        "residue_vector": gap_residue(rg, w, V, P),
        "foureqs": foureqs_report(rg, w, V, P),
        "partial_isometry": verify_partial_isometry(V, P),
    }


def _index_json(idx: Index):
    item, i = idx
    if isinstance(item, str):
        return {"vertex": item, "i": i}
    return {"edge": list(item), "i": i}
