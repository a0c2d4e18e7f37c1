"""K-theory of relative graph algebras and the six-term sequence of an ideal."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .abelian import (
    FgGroup,
    GroupHom,
    IntMatrix,
    block,
    cokernel,
    exactness_at,
    hstack,
    kernel_basis,
    make_hom,
    smith_normal_form,
    solve,
    zero_hom,
)
from .graph import (
    INF,
    AdmissiblePair,
    Graph,
    RelativeGraph,
    classify_vertices,
    validate_pair,
)

CLASS_NAMES = ("reg_H", "sing_H", "reg_out", "sing_out", "S")
NODE_NAMES = ("K0_full", "K0_quot", "K1_ideal", "K1_full", "K1_quot", "K0_ideal")


def _finite_block(g: Graph, rows: Sequence[str], cols: Sequence[str]) -> IntMatrix:
    data = []
    for v in rows:
        row = []
        for w in cols:
            m = g.mult(v, w)
            if m == INF:
                raise AssertionError(f"infinite entry {v}->{w} in a finite block")
            row.append(m)
        data.append(row)
    return IntMatrix(data, len(rows), len(cols))


@dataclass(frozen=True)
class BlockDecomposition:
    """Adjacency blocks with respect to the five vertex classes.

    Classes, in order: regular in H, singular in H, regular outside H,
    singular outside H u S, and S.  Only the ten finite blocks are kept.
    """

    classes: tuple[tuple[str, ...], ...]
    A: IntMatrix
    alpha: IntMatrix
    X: IntMatrix
    xi: IntMatrix
    B: IntMatrix
    beta: IntMatrix
    eta: IntMatrix
    Gamma: IntMatrix
    gamma: IntMatrix
    Z: IntMatrix

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.classes)

    def I(self, k: int) -> IntMatrix:
        return IntMatrix.identity(len(self.classes[k]))

    def O(self, i: int, j: int) -> IntMatrix:
        return IntMatrix.zeros(len(self.classes[i]), len(self.classes[j]))

    # The three presentation matrices; rows follow the class order noted.

    def ideal_matrix(self) -> IntMatrix:
        """Rows (1, 2, 5), columns 1."""
        return block([[self.A.T - self.I(0)], [self.alpha.T], [self.O(4, 0)]])

    def full_matrix(self) -> IntMatrix:
        """Rows (1..5), columns (1, 3)."""
        return block([
            [self.A.T - self.I(0), self.X.T],
            [self.alpha.T, self.xi.T],
            [self.O(2, 0), self.B.T - self.I(2)],
            [self.O(3, 0), self.beta.T],
            [self.O(4, 0), self.eta.T],
        ])

    def quotient_matrix(self) -> IntMatrix:
        """Rows (3, 4, 5), columns (3, 5)."""
        return block([
            [self.B.T - self.I(2), self.Gamma.T],
            [self.beta.T, self.gamma.T],
            [self.eta.T, self.Z.T - self.I(4)],
        ])

    def iota0_matrix(self) -> IntMatrix:
        """``I_125`` minus the S-column correction, ideal cover -> full cover."""
        return block([
            [self.I(0), self.O(0, 1), self.O(0, 4)],
            [self.O(1, 0), self.I(1), self.O(1, 4)],
            [self.O(2, 0), self.O(2, 1), -self.Gamma.T],
            [self.O(3, 0), self.O(3, 1), -self.gamma.T],
            [self.O(4, 0), self.O(4, 1), self.I(4) - self.Z.T],
        ])

    def pi0_matrix(self) -> IntMatrix:
        """Projection onto classes 3, 4, 5."""
        return block([
            [self.O(2, 0), self.O(2, 1), self.I(2), self.O(2, 3), self.O(2, 4)],
            [self.O(3, 0), self.O(3, 1), self.O(3, 2), self.I(3), self.O(3, 4)],
            [self.O(4, 0), self.O(4, 1), self.O(4, 2), self.O(4, 3), self.I(4)],
        ])

    def partial1_matrix(self) -> IntMatrix:
        """Quotient kernel cover (3, 5) -> ideal cover (1, 2, 5)."""
        return block([
            [self.X.T, self.O(0, 4)],
            [self.xi.T, self.O(1, 4)],
            [self.O(4, 2), self.I(4)],
        ])

    def iota1_matrix(self) -> IntMatrix:
        """Inclusion of column class 1 into columns (1, 3)."""
        return block([[self.I(0)], [self.O(2, 0)]])

    def pi1_matrix(self) -> IntMatrix:
        """Columns (1, 3) -> columns (3, 5): keep class 3, zero on S."""
        return block([[self.O(2, 0), self.I(2)], [self.O(4, 0), self.O(4, 2)]])


def decompose(g: Graph, p: AdmissiblePair) -> BlockDecomposition:
    validate_pair(g, p)
    regular, singular = classify_vertices(g)
    reg, sing = set(regular), set(singular)
    H, S = p.H, p.S
    classes = (
        tuple(v for v in g.vertices if v in reg and v in H),
        tuple(v for v in g.vertices if v in sing and v in H),
        tuple(v for v in g.vertices if v in reg and v not in H),
        tuple(v for v in g.vertices if v in sing and v not in H and v not in S),
        tuple(v for v in g.vertices if v in S),
    )
    c1, c2, c3, c4, c5 = classes
    # H is hereditary, so nothing leaves it
    for v in c1 + c2:
        for w in c3 + c4 + c5:
            if g.mult(v, w):
                raise AssertionError(f"edge {v}->{w} leaves H")
    fb = lambda r, c: _finite_block(g, r, c)  # noqa: E731
    return BlockDecomposition(
        classes=classes,
        A=fb(c1, c1),
        alpha=fb(c1, c2),
        X=fb(c3, c1),
        xi=fb(c3, c2),
        B=fb(c3, c3),
        beta=fb(c3, c4),
        eta=fb(c3, c5),
        Gamma=fb(c5, c3),
        gamma=fb(c5, c4),
        Z=fb(c5, c5),
    )


# -- K-groups of one relative graph algebra ------------------------------------


@dataclass(frozen=True)
class KGroups:
    K0: FgGroup
    K1: FgGroup
    matrix: IntMatrix
    kernel: IntMatrix
    rows: tuple[str, ...]
    cols: tuple[str, ...]


def kgroups_matrix(rg: RelativeGraph) -> tuple[IntMatrix, list[str], list[str]]:
    """``[A^t - I; alpha^t]`` with the relative set listed first."""
    g = rg.graph
    rel = rg.relset_ordered
    rows = rel + [v for v in g.vertices if v not in rg.relset]
    data = []
    for v in rows:
        data.append([_entry(g, w, v) - (v == w) for w in rel])
    return IntMatrix(data, len(rows), len(rel)), rows, rel


def _entry(g: Graph, v: str, w: str) -> int:
    m = g.mult(v, w)
    if m == INF:
        raise AssertionError(f"infinite entry {v}->{w} from a regular vertex")
    return m


def kgroups(rg: RelativeGraph) -> KGroups:
    m, rows, cols = kgroups_matrix(rg)
    k = kernel_basis(m)
    return KGroups(cokernel(m), FgGroup.free(k.ncols), m, k, tuple(rows), tuple(cols))


# -- the six-term sequence ---------------------------------------------------------


@dataclass(frozen=True)
class SixTermSequence:
    """Cyclic sequence ``K0_ideal -> K0_full -> K0_quot -> K1_ideal -> K1_full -> K1_quot -> K0_ideal``.

    K1 groups are free groups in the coordinates of the stored kernel bases.
    """

    decomposition: BlockDecomposition
    K0_ideal: FgGroup
    K0_full: FgGroup
    K0_quot: FgGroup
    K1_ideal: FgGroup
    K1_full: FgGroup
    K1_quot: FgGroup
    kernel_ideal: IntMatrix
    kernel_full: IntMatrix
    kernel_quot: IntMatrix
    iota0: GroupHom
    pi0: GroupHom
    partial0: GroupHom
    iota1: GroupHom
    pi1: GroupHom
    partial1: GroupHom

    def maps(self) -> dict[str, GroupHom]:
        return {
            "iota0": self.iota0,
            "pi0": self.pi0,
            "partial0": self.partial0,
            "iota1": self.iota1,
            "pi1": self.pi1,
            "partial1": self.partial1,
        }

    def groups(self) -> dict[str, FgGroup]:
        return {
            "K0_ideal": self.K0_ideal,
            "K0_full": self.K0_full,
            "K0_quot": self.K0_quot,
            "K1_ideal": self.K1_ideal,
            "K1_full": self.K1_full,
            "K1_quot": self.K1_quot,
        }

    def cycle(self) -> list[tuple[str, GroupHom, GroupHom]]:
        """``(node, incoming, outgoing)`` around the cycle."""
        return [
            ("K0_full", self.iota0, self.pi0),
            ("K0_quot", self.pi0, self.partial0),
            ("K1_ideal", self.partial0, self.iota1),
            ("K1_full", self.iota1, self.pi1),
            ("K1_quot", self.pi1, self.partial1),
            ("K0_ideal", self.partial1, self.iota0),
        ]


def kernel_coordinates(basis: IntMatrix, vectors: IntMatrix) -> IntMatrix:
    """Express each column of ``vectors`` in terms of the lattice basis ``basis``."""
    cols = []
    for v in vectors.columns():
        c = solve(basis, v)
        if c is None:
            raise ArithmeticError("vector is not in the kernel lattice")
        cols.append(c)
    return IntMatrix.from_columns(cols, basis.ncols)


def build_six_term(g: Graph, p: AdmissiblePair) -> SixTermSequence:
    d = decompose(g, p)
    m_ideal, m_full, m_quot = d.ideal_matrix(), d.full_matrix(), d.quotient_matrix()
    K0_ideal, K0_full, K0_quot = cokernel(m_ideal), cokernel(m_full), cokernel(m_quot)
    k_ideal, k_full, k_quot = kernel_basis(m_ideal), kernel_basis(m_full), kernel_basis(m_quot)
    K1_ideal, K1_full, K1_quot = (FgGroup.free(k.ncols) for k in (k_ideal, k_full, k_quot))

    iota0 = make_hom(d.iota0_matrix(), K0_ideal, K0_full)
    pi0 = make_hom(d.pi0_matrix(), K0_full, K0_quot)
    partial0 = zero_hom(K0_quot, K1_ideal)
    iota1 = make_hom(kernel_coordinates(k_full, d.iota1_matrix() @ k_ideal), K1_ideal, K1_full)
    pi1 = make_hom(kernel_coordinates(k_quot, d.pi1_matrix() @ k_full), K1_full, K1_quot)
    partial1 = make_hom(d.partial1_matrix() @ k_quot, K1_quot, K0_ideal)
    return SixTermSequence(
        d, K0_ideal, K0_full, K0_quot, K1_ideal, K1_full, K1_quot,
        k_ideal, k_full, k_quot, iota0, pi0, partial0, iota1, pi1, partial1,
    )


@dataclass(frozen=True)
class ExactnessReport:
    nodes: dict[str, bool]
    partial0_zero: bool

    @property
    def ok(self) -> bool:
        return self.partial0_zero and all(self.nodes.values())


def verify_exactness(seq: SixTermSequence) -> ExactnessReport:
    nodes = {name: exactness_at(f, h) for name, f, h in seq.cycle()}
    return ExactnessReport(nodes, seq.partial0.is_zero())


# -- positive cone ---------------------------------------------------------------


@dataclass(frozen=True)
class ConeGenerators:
    vertices: tuple[str, ...]
    vectors: tuple[tuple[int, ...], ...]
    bound: int


def cone_generators(rg: RelativeGraph, bound: int) -> ConeGenerators:
    """Generators of the preimage of the positive cone of K0.

    Besides every ``e_v`` this lists ``e_v - sum_{e in F} e_{r(e)}`` for the
    vertices outside the relative set and finite edge sets ``F`` out of
    them with ``|F| <= bound``.  Parallel edges are interchangeable, so an
    ``F`` is recorded by how many edges it takes to each target, each count
    capped at ``bound``.
    """
    g = rg.graph
    n = len(g.vertices)
    idx = g.index
    vecs: list[tuple[int, ...]] = []
    seen = set()

    def add(vec):
        t = tuple(vec)
        if any(t) and t not in seen:
            seen.add(t)
            vecs.append(t)

    for v in g.vertices:
        add([int(i == idx[v]) for i in range(n)])
    for v in g.vertices:
        if v in rg.relset:
            continue
        targets = g.successors(v)
        ranges = [range(int(min(g.mult(v, w), bound)) + 1) for w in targets]
        for counts in itertools.product(*ranges):
            if sum(counts) == 0 or sum(counts) > bound:
                continue
            vec = [int(i == idx[v]) for i in range(n)]
            for w, c in zip(targets, counts):
                vec[idx[w]] -= c
            add(vec)
    return ConeGenerators(g.vertices, tuple(vecs), bound)


def cone_contains(group: FgGroup, gens: Sequence[Sequence[int]], target: Sequence[int], max_terms: int) -> bool:
    """Bounded search: is ``target`` a sum of at most ``max_terms`` generators in ``group``?"""
    goal = group.coords(target)
    frontier = {group.coords([0] * group.ambient_rank)}
    if goal in frontier:
        return True
    seen = set(frontier)
    gen_coords = [group.coords(v) for v in gens]
    tors = len(group.invariant_factors)
    for _ in range(max_terms):
        nxt = set()
        for c in frontier:
            for gc in gen_coords:
                s = tuple(
                    (a + b) % group.invariant_factors[i] if i < tors else a + b
                    for i, (a, b) in enumerate(zip(c, gc))
                )
                if s == goal:
                    return True
                if s not in seen:
                    seen.add(s)
                    nxt.add(s)
        frontier = nxt
    return False


# -- summaries ---------------------------------------------------------------------


def map_factors(f: GroupHom) -> list[int]:
    """Nonzero Smith diagonal of the map in canonical coordinates.

    Rows for torsion summands of the target are read modulo their order by
    appending the torsion relations as extra columns.
    """
    m = f.canonical_matrix()
    tors = f.target.invariant_factors
    rel = IntMatrix.diag(list(tors), f.target.canonical_rank, len(tors))
    snf = smith_normal_form(hstack(m, rel))
    return [d for d in snf.diagonal if d]


def group_summary(G: FgGroup) -> dict:
    return {"invariant_factors": list(G.invariant_factors), "free_rank": G.free_rank}


def invariant_summary(seq: SixTermSequence) -> dict:
    """Fingerprint of the sequence.  Group data is basis independent; map data
    depends on the stored canonical bases."""
    return {
        "groups": {name: group_summary(G) for name, G in seq.groups().items()},
        "maps": {
            name: {"canonical_matrix": f.canonical_matrix().tolist(), "snf_factors": map_factors(f)}
            for name, f in seq.maps().items()
        },
    }
