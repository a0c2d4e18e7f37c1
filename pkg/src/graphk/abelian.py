"""Exact integer linear algebra and finitely generated abelian groups.

Everything here works over Python ints, so there is no overflow no matter
how large intermediate entries get during elimination.

A finitely generated abelian group is stored as a presentation: a free
cover ``Z^n`` modulo the span of the columns of a relation matrix.  Maps
between presentations are integer matrices on the free covers.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence


class IntMatrix:
    """Immutable integer matrix.  Zero rows or zero columns are allowed."""

    __slots__ = ("nrows", "ncols", "data")

    def __init__(self, rows: Iterable[Iterable[int]], nrows: int | None = None, ncols: int | None = None):
        data = tuple(tuple(int(a) for a in row) for row in rows)
        if nrows is None:
            nrows = len(data)
        if ncols is None:
            ncols = len(data[0]) if data else 0
        if len(data) != nrows:
            raise ValueError(f"expected {nrows} rows, got {len(data)}")
        for row in data:
            if len(row) != ncols:
                raise ValueError("ragged matrix")
        self.nrows = nrows
        self.ncols = ncols
        self.data = data

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "IntMatrix":
        return cls([[0] * ncols for _ in range(nrows)], nrows, ncols)

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)], n, n)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], nrows: int) -> "IntMatrix":
        return cls([[col[i] for col in columns] for i in range(nrows)], nrows, len(columns))

    @classmethod
    def diag(cls, entries: Sequence[int], nrows: int, ncols: int) -> "IntMatrix":
        m = [[0] * ncols for _ in range(nrows)]
        for i, d in enumerate(entries):
            m[i][i] = d
        return cls(m, nrows, ncols)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __getitem__(self, idx: tuple[int, int]) -> int:
        i, j = idx
        return self.data[i][j]

    def tolist(self) -> list[list[int]]:
        return [list(row) for row in self.data]

    def column(self, j: int) -> list[int]:
        return [row[j] for row in self.data]

    def columns(self) -> list[list[int]]:
        return [self.column(j) for j in range(self.ncols)]

    @property
    def T(self) -> "IntMatrix":
        return IntMatrix([self.column(j) for j in range(self.ncols)], self.ncols, self.nrows)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return self.shape == other.shape and self.data == other.data

    def __hash__(self) -> int:
        return hash((self.shape, self.data))

    def __repr__(self) -> str:
        return f"IntMatrix({self.tolist()!r}, {self.nrows}, {self.ncols})"

    def _check_same_shape(self, other: "IntMatrix") -> None:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        self._check_same_shape(other)
        return IntMatrix(
            [[a + b for a, b in zip(r, s)] for r, s in zip(self.data, other.data)], self.nrows, self.ncols
        )

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        self._check_same_shape(other)
        return IntMatrix(
            [[a - b for a, b in zip(r, s)] for r, s in zip(self.data, other.data)], self.nrows, self.ncols
        )

    def __neg__(self) -> "IntMatrix":
        return IntMatrix([[-a for a in r] for r in self.data], self.nrows, self.ncols)

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.ncols != other.nrows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        cols = other.columns()
        return IntMatrix(
            [[sum(a * b for a, b in zip(row, col)) for col in cols] for row in self.data],
            self.nrows,
            other.ncols,
        )

    def apply(self, x: Sequence[int]) -> list[int]:
        if len(x) != self.ncols:
            raise ValueError(f"vector of length {len(x)} for {self.shape} matrix")
        return [sum(a * b for a, b in zip(row, x)) for row in self.data]

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "IntMatrix":
        return IntMatrix([[self.data[i][j] for j in cols] for i in rows], len(rows), len(cols))

    def is_zero(self) -> bool:
        return all(a == 0 for row in self.data for a in row)


def hstack(*blocks: IntMatrix) -> IntMatrix:
    nrows = blocks[0].nrows
    if any(b.nrows != nrows for b in blocks):
        raise ValueError("hstack: row counts differ")
    rows = [[a for b in blocks for a in b.data[i]] for i in range(nrows)]
    return IntMatrix(rows, nrows, sum(b.ncols for b in blocks))


def vstack(*blocks: IntMatrix) -> IntMatrix:
    ncols = blocks[0].ncols
    if any(b.ncols != ncols for b in blocks):
        raise ValueError("vstack: column counts differ")
    rows = [row for b in blocks for row in b.data]
    return IntMatrix(rows, len(rows), ncols)


def block(grid: Sequence[Sequence[IntMatrix]]) -> IntMatrix:
    return vstack(*[hstack(*row) for row in grid])


def determinant(m: IntMatrix) -> int:
    """Fraction-free (Bareiss) determinant."""
    n = m.nrows
    if n != m.ncols:
        raise ValueError("determinant of non-square matrix")
    if n == 0:
        return 1
    a = m.tolist()
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


# --- Smith normal form ------------------------------------------------------


@dataclass(frozen=True)
class SmithForm:
    """``U @ M @ V == D`` with ``U``, ``V`` unimodular and ``D`` diagonal."""

    U: IntMatrix
    D: IntMatrix
    V: IntMatrix

    @property
    def diagonal(self) -> list[int]:
        return [self.D[i, i] for i in range(min(self.D.shape))]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)


def smith_normal_form(m: IntMatrix) -> SmithForm:
    """Diagonalize ``m`` by unimodular row and column operations.

    Pivots are chosen by smallest nonzero magnitude.  A pivot that fails to
    divide the rest of the active block gets the offending row added to its
    row, which forces the divisibility chain on the diagonal.
    """
    nr, nc = m.shape
    a = m.tolist()
    U = IntMatrix.identity(nr).tolist()
    V = IntMatrix.identity(nc).tolist()

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, c):
        # row[dst] += c * row[src]
        a[dst] = [x + c * y for x, y in zip(a[dst], a[src])]
        U[dst] = [x + c * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, c):
        for row in a:
            row[dst] += c * row[src]
        for row in V:
            row[dst] += c * row[src]

    for t in range(min(nr, nc)):
        while True:
            best = None
            for i in range(t, nr):
                for j in range(t, nc):
                    if a[i][j] and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                break
            swap_rows(t, best[0])
            swap_cols(t, best[1])
            p = a[t][t]
            dirty = False
            for i in range(t + 1, nr):
                if a[i][t]:
                    add_row(i, t, -(a[i][t] // p))
                    dirty = dirty or a[i][t] != 0
            for j in range(t + 1, nc):
                if a[t][j]:
                    add_col(j, t, -(a[t][j] // p))
                    dirty = dirty or a[t][j] != 0
            if dirty:
                continue
            bad = next((i for i in range(t + 1, nr) for j in range(t + 1, nc) if a[i][j] % p), None)
            if bad is None:
                break
            add_row(t, bad, 1)
        if t < nr and t < nc and a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            U[t] = [-x for x in U[t]]

    return SmithForm(IntMatrix(U, nr, nr), IntMatrix(a, nr, nc), IntMatrix(V, nc, nc))


# --- Hermite normal form, lattices --------------------------------------------


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def column_hnf(m: IntMatrix) -> IntMatrix:
    """Canonical basis of the lattice spanned by the columns of ``m``.

    The result is in column echelon form: each column has a positive pivot
    strictly below the pivot of the previous column, zeros above it, and
    the entries of earlier columns in a pivot row lie in ``[0, pivot)``.
    Two matrices span the same lattice iff their HNFs are equal.
    """
    n = m.nrows
    cols = [c for c in m.columns() if any(c)]
    basis: list[list[int]] = []
    for i in range(n):
        live = [c for c in cols if c[i] != 0]
        rest = [c for c in cols if c[i] == 0]
        if not live:
            continue
        piv = live[0]
        for c in live[1:]:
            g, s, t = _xgcd(piv[i], c[i])
            u, v = piv[i] // g, c[i] // g
            new_piv = [s * x + t * y for x, y in zip(piv, c)]
            other = [v * x - u * y for x, y in zip(piv, c)]
            piv = new_piv
            if any(other):
                rest.append(other)
        if piv[i] < 0:
            piv = [-x for x in piv]
        for k, b in enumerate(basis):
            q = b[i] // piv[i]
            if q:
                basis[k] = [x - q * y for x, y in zip(b, piv)]
        basis.append(piv)
        cols = [c for c in rest if any(c)]
    return IntMatrix.from_columns(basis, n)


def same_lattice(a: IntMatrix, b: IntMatrix) -> bool:
    return column_hnf(a) == column_hnf(b)


def kernel_basis(m: IntMatrix) -> IntMatrix:
    """Columns form a lattice basis of ``{x in Z^n : m x = 0}``."""
    snf = smith_normal_form(m)
    r = snf.rank
    cols = [snf.V.column(j) for j in range(r, m.ncols)]
    return IntMatrix.from_columns(cols, m.ncols)


def solve(m: IntMatrix, b: Sequence[int]) -> list[int] | None:
    """An integer solution of ``m x = b``, or ``None`` if there is none."""
    snf = smith_normal_form(m)
    c = snf.U.apply(b)
    diag = snf.diagonal
    y = [0] * m.ncols
    for i, ci in enumerate(c):
        d = diag[i] if i < len(diag) else 0
        if d == 0:
            if ci != 0:
                return None
        else:
            if ci % d:
                return None
            y[i] = ci // d
    return snf.V.apply(y)


def in_lattice(m: IntMatrix, x: Sequence[int]) -> bool:
    return solve(m, x) is not None


def inverse_unimodular(u: IntMatrix) -> IntMatrix:
    n = u.nrows
    cols = []
    for j in range(n):
        e = [int(i == j) for i in range(n)]
        sol = solve(u, e)
        if sol is None:
            raise ValueError("matrix is not unimodular")
        cols.append(sol)
    return IntMatrix.from_columns(cols, n)


# --- groups and homomorphisms ------------------------------------------------


class NotWellDefined(ValueError):
    """A matrix does not carry the source relations into the target relations."""


@dataclass(frozen=True, eq=False)
class FgGroup:
    """``Z^n / im(relations)``.

    Canonical coordinates of ``x`` are ``(U x)[i] mod d_i`` on the torsion
    positions followed by ``(U x)[i]`` on the free positions, where ``U`` is
    the left multiplier of the Smith form of the relations.
    """

    relations: IntMatrix
    _snf: SmithForm = field(init=False, repr=False)
    invariant_factors: tuple[int, ...] = field(init=False)
    free_rank: int = field(init=False)
    _torsion_pos: tuple[int, ...] = field(init=False, repr=False)
    _free_pos: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        snf = smith_normal_form(self.relations)
        n = self.relations.nrows
        diag = snf.diagonal + [0] * (n - len(snf.diagonal))
        torsion = tuple(i for i, d in enumerate(diag) if d > 1)
        free = tuple(i for i, d in enumerate(diag) if d == 0)
        object.__setattr__(self, "_snf", snf)
        object.__setattr__(self, "invariant_factors", tuple(diag[i] for i in torsion))
        object.__setattr__(self, "free_rank", len(free))
        object.__setattr__(self, "_torsion_pos", torsion)
        object.__setattr__(self, "_free_pos", free)

    @classmethod
    def free(cls, n: int) -> "FgGroup":
        return cls(IntMatrix.zeros(n, 0))

    @property
    def ambient_rank(self) -> int:
        return self.relations.nrows

    @property
    def is_trivial(self) -> bool:
        return not self.invariant_factors and self.free_rank == 0

    @property
    def order(self) -> int | None:
        """Number of elements, or ``None`` for an infinite group."""
        if self.free_rank:
            return None
        out = 1
        for d in self.invariant_factors:
            out *= d
        return out

    @property
    def canonical_rank(self) -> int:
        return len(self.invariant_factors) + self.free_rank

    def coords(self, x: Sequence[int]) -> tuple[int, ...]:
        y = self._snf.U.apply(x)
        tors = tuple(y[i] % d for i, d in zip(self._torsion_pos, self.invariant_factors))
        return tors + tuple(y[i] for i in self._free_pos)

    def is_zero(self, x: Sequence[int]) -> bool:
        return not any(self.coords(x))

    def equal(self, x: Sequence[int], y: Sequence[int]) -> bool:
        return self.is_zero([a - b for a, b in zip(x, y)])

    def generator_lifts(self) -> list[list[int]]:
        """Ambient vectors mapping to the canonical generators, in order."""
        uinv = self._uinv
        return [uinv.column(i) for i in self._torsion_pos + self._free_pos]

    @property
    def _uinv(self) -> IntMatrix:
        cached = self.__dict__.get("_uinv_cache")
        if cached is None:
            cached = inverse_unimodular(self._snf.U)
            object.__setattr__(self, "_uinv_cache", cached)
        return cached

    def from_coords(self, c: Sequence[int]) -> list[int]:
        lifts = self.generator_lifts()
        x = [0] * self.ambient_rank
        for ci, lift in zip(c, lifts):
            x = [a + ci * b for a, b in zip(x, lift)]
        return x

    def elements(self) -> Iterator[tuple[int, ...]]:
        """Canonical coordinates of every element of a finite group."""
        if self.free_rank:
            raise ValueError("infinite group")

        def rec(k):
            if k == len(self.invariant_factors):
                yield ()
                return
            for a in range(self.invariant_factors[k]):
                for rest in rec(k + 1):
                    yield (a,) + rest

        yield from rec(0)

    def same_presentation(self, other: "FgGroup") -> bool:
        return self.ambient_rank == other.ambient_rank and same_lattice(self.relations, other.relations)

    def describe(self) -> str:
        parts = [f"Z/{d}" for d in self.invariant_factors] + ["Z"] * self.free_rank
        return " + ".join(parts) if parts else "0"

    def __repr__(self) -> str:
        return f"FgGroup({self.describe()})"


def cokernel(m: IntMatrix) -> FgGroup:
    return FgGroup(m)


@dataclass(frozen=True, eq=False)
class GroupHom:
    source: FgGroup
    target: FgGroup
    lift: IntMatrix

    def __call__(self, x: Sequence[int]) -> list[int]:
        return self.lift.apply(x)

    def is_zero(self) -> bool:
        return all(self.target.is_zero(c) for c in self.lift.columns())

    def canonical_matrix(self) -> IntMatrix:
        """Matrix of the map in the canonical coordinates of both groups."""
        cols = [self.target.coords(self.lift.apply(g)) for g in self.source.generator_lifts()]
        return IntMatrix.from_columns(cols, self.target.canonical_rank)

    def then(self, other: "GroupHom") -> "GroupHom":
        """``other o self``."""
        return make_hom(other.lift @ self.lift, self.source, other.target)


def make_hom(t: IntMatrix, source: FgGroup, target: FgGroup) -> GroupHom:
    if t.shape != (target.ambient_rank, source.ambient_rank):
        raise ValueError(
            f"lift has shape {t.shape}, expected {(target.ambient_rank, source.ambient_rank)}"
        )
    image = t @ source.relations
    if not same_lattice(hstack(target.relations, image), target.relations):
        raise NotWellDefined("matrix does not respect the source relations")
    return GroupHom(source, target, t)


def zero_hom(source: FgGroup, target: FgGroup) -> GroupHom:
    return GroupHom(source, target, IntMatrix.zeros(target.ambient_rank, source.ambient_rank))


def image_lattice(f: GroupHom) -> IntMatrix:
    """HNF of the preimage in the free cover of ``im f``."""
    return column_hnf(hstack(f.lift, f.target.relations))


def kernel_lattice(g: GroupHom) -> IntMatrix:
    """HNF of ``{x : g(x) in relations of target}`` in the free cover of the source."""
    n = g.source.ambient_rank
    k = kernel_basis(hstack(g.lift, g.target.relations))
    return column_hnf(k.submatrix(range(n), range(k.ncols)))


def exactness_at(f: GroupHom, g: GroupHom) -> bool:
    if not f.target.same_presentation(g.source):
        raise ValueError("maps are not composable")
    return image_lattice(f) == kernel_lattice(g)
