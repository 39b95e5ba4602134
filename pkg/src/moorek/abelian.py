"""Exact arithmetic for finitely generated abelian groups.

Groups are stored in invariant-factor form ``Z_d1 + ... + Z_dk + Z^r`` with
``d1 | d2 | ... | dk`` and every ``di > 1``; a factor of ``0`` stands for an
infinite cyclic summand.  Homomorphisms are integer matrices acting on
coefficient column vectors.  All arithmetic is on Python ints but is checked
against a signed 64-bit bound, so an instance that would overflow a machine
integer raises :class:`ArithmeticOverflowError` instead of silently growing.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from math import gcd, prod
from typing import Iterable, Iterator, Sequence

from sympy import factorint

INT_MAX = 2**63 - 1

Matrix = list[list[int]]
Vector = tuple[int, ...]


class AbelianError(ValueError):
    """Malformed input to an abelian-group operation."""


class ArithmeticOverflowError(OverflowError):
    pass


class UnsupportedInputError(AbelianError):
    pass


def _chk(v: int) -> int:
    if -INT_MAX - 1 <= v <= INT_MAX:
        return v
    raise ArithmeticOverflowError(f"integer {v} exceeds 64-bit range")


# --------------------------------------------------------------------------
# plain integer matrices


def identity(k: int) -> Matrix:
    return [[int(i == j) for j in range(k)] for i in range(k)]


def zeros(r: int, c: int) -> Matrix:
    return [[0] * c for _ in range(r)]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if not a:
        return []
    inner = len(b)
    cols = len(b[0]) if b else 0
    if a and len(a[0]) != inner:
        raise AbelianError("matrix dimension mismatch")
    return [
        [_chk(sum(a[i][t] * b[t][j] for t in range(inner))) for j in range(cols)]
        for i in range(len(a))
    ]


def matvec(a: Matrix, v: Sequence[int]) -> list[int]:
    return [_chk(sum(x * y for x, y in zip(row, v))) for row in a]


def transpose(a: Matrix, cols: int | None = None) -> Matrix:
    if not a:
        return [[] for _ in range(cols or 0)]
    return [list(r) for r in zip(*a)]


def det(a: Matrix) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    m = [row[:] for row in a]
    k = len(m)
    if k == 0:
        return 1
    sign, prev = 1, 1
    for i in range(k - 1):
        if m[i][i] == 0:
            swap = next((r for r in range(i + 1, k) if m[r][i] != 0), None)
            if swap is None:
                return 0
            m[i], m[swap] = m[swap], m[i]
            sign = -sign
        for r in range(i + 1, k):
            for c in range(i + 1, k):
                m[r][c] = (m[r][c] * m[i][i] - m[r][i] * m[i][c]) // prev
        prev = m[i][i]
    return sign * m[-1][-1]


def smith_normal_form(m: Matrix) -> tuple[Matrix, Matrix, Matrix]:
    """Return ``(U, D, V)`` with ``U @ M @ V == D`` and U, V unimodular.

    D is diagonal with nonnegative entries satisfying ``d_i | d_{i+1}``;
    zero diagonal entries come last.
    """
    rows = len(m)
    cols = len(m[0]) if rows else 0
    if rows == 0 or cols == 0:
        raise AbelianError("smith_normal_form needs a matrix of size at least 1x1")
    if any(len(r) != cols for r in m):
        raise AbelianError("ragged matrix")
    d = [[_chk(int(x)) for x in r] for r in m]
    u = identity(rows)
    v = identity(cols)

    def swap_rows(i, j):
        d[i], d[j] = d[j], d[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for r in d:
            r[i], r[j] = r[j], r[i]
        for r in v:
            r[i], r[j] = r[j], r[i]

    def add_row(src, dst, q):  # row_dst -= q * row_src
        if q:
            d[dst] = [_chk(a - q * b) for a, b in zip(d[dst], d[src])]
            u[dst] = [_chk(a - q * b) for a, b in zip(u[dst], u[src])]

    def add_col(src, dst, q):  # col_dst -= q * col_src
        if q:
            for r in d:
                r[dst] = _chk(r[dst] - q * r[src])
            for r in v:
                r[dst] = _chk(r[dst] - q * r[src])

    for t in range(min(rows, cols)):
        while True:
            best = None
            for i in range(t, rows):
                for j in range(t, cols):
                    if d[i][j] and (best is None or abs(d[i][j]) < abs(d[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                return u, d, v
            swap_rows(t, best[0])
            swap_cols(t, best[1])
            p = d[t][t]
            dirty = False
            for i in range(t + 1, rows):
                add_row(t, i, d[i][t] // p)
                dirty |= d[i][t] != 0
            for j in range(t + 1, cols):
                add_col(t, j, d[t][j] // p)
                dirty |= d[t][j] != 0
            if dirty:
                continue
            bad = next(
                (i for i in range(t + 1, rows) for j in range(t + 1, cols) if d[i][j] % p),
                None,
            )
            if bad is None:
                break
            add_row(bad, t, -1)
        if d[t][t] < 0:
            d[t] = [-x for x in d[t]]
            u[t] = [-x for x in u[t]]
    return u, d, v


def diagonal(d: Matrix) -> list[int]:
    return [d[i][i] for i in range(min(len(d), len(d[0]) if d else 0))]


def hermite_normal_form(rows: Iterable[Sequence[int]], ncols: int) -> Matrix:
    """Row-style Hermite normal form of the lattice spanned by ``rows``.

    The result is the unique echelon basis with positive pivots and entries
    above each pivot reduced into ``[0, pivot)``; zero rows are dropped.
    """
    a = [[_chk(int(x)) for x in r] for r in rows if any(r)]
    for r in a:
        if len(r) != ncols:
            raise AbelianError("row length mismatch in hermite_normal_form")
    out: Matrix = []
    col = 0
    while a and col < ncols:
        nz = [r for r in a if r[col]]
        if not nz:
            col += 1
            continue
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            piv = nz[0]
            rest = []
            for r in nz[1:]:
                q = r[col] // piv[col]
                r[:] = [_chk(x - q * y) for x, y in zip(r, piv)]
                rest.append(r)
            nz = [piv] + [r for r in rest if r[col]]
        piv = nz[0]
        if piv[col] < 0:
            piv[:] = [-x for x in piv]
        a = [r for r in a if r is not piv and any(r)]
        out.append(piv)
        col += 1
    # reduce entries above pivots
    for i, row in enumerate(out):
        pc = next(j for j, x in enumerate(row) if x)
        for k in range(i):
            q = out[k][pc] // row[pc]
            if q:
                out[k] = [_chk(x - q * y) for x, y in zip(out[k], row)]
    return out


def integer_kernel(a: Matrix, ncols: int) -> Matrix:
    """Basis (as rows) of the integer null space ``{x : a x = 0}``."""
    if not a:
        return identity(ncols)
    _, d, v = smith_normal_form(a)
    r = sum(1 for x in diagonal(d) if x)
    return [[v[i][j] for i in range(ncols)] for j in range(r, ncols)]


def solve_integer(a: Matrix, target: Sequence[int], ncols: int) -> list[int] | None:
    """Some integer solution of ``a x = target`` or None."""
    if ncols == 0:
        return [] if not any(target) else None
    if not a:
        return [0] * ncols if not any(target) else None
    u, d, v = smith_normal_form(a)
    ut = matvec(u, target)
    y = [0] * ncols
    for i, val in enumerate(ut):
        di = d[i][i] if i < ncols else 0
        if di == 0:
            if val:
                return None
        else:
            if val % di:
                return None
            y[i] = val // di
    return matvec(v, y)


# --------------------------------------------------------------------------
# groups, elements, homomorphisms


@dataclass(frozen=True)
class BasisChange:
    """Coordinates of a presented group in its normalized basis.

    ``to_normal`` is (rank x num_gens): original generator vector -> normal
    coordinates.  ``from_normal`` is (num_gens x rank): normal generator i is
    the original-generator combination in column i.
    """

    to_normal: Matrix
    from_normal: Matrix


@dataclass(frozen=True)
class AbelianGroup:
    factors: tuple[int, ...]
    labels: tuple[str, ...] = field(default=(), compare=False)
    basis: BasisChange | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        f = tuple(int(x) for x in self.factors)
        object.__setattr__(self, "factors", f)
        if any(x < 0 or x == 1 for x in f):
            raise AbelianError(f"factors must be 0 or >= 2, got {f}")
        finite = [x for x in f if x]
        if f[: len(finite)] != tuple(finite):
            raise AbelianError(f"free summands must follow the finite ones: {f}")
        for a, b in zip(finite, finite[1:]):
            if b % a:
                raise AbelianError(f"divisibility chain broken: {f}")
        labels = tuple(self.labels) or tuple(f"e{i}" for i in range(len(f)))
        if len(labels) != len(f):
            raise AbelianError("one label per factor required")
        object.__setattr__(self, "labels", labels)

    @property
    def rank(self) -> int:
        """Number of cyclic summands (not the free rank)."""
        return len(self.factors)

    @property
    def free_rank(self) -> int:
        return sum(1 for x in self.factors if x == 0)

    @property
    def is_finite(self) -> bool:
        return self.free_rank == 0

    @property
    def is_trivial(self) -> bool:
        return not self.factors

    @property
    def order(self) -> int | None:
        return prod(self.factors) if self.is_finite else None

    def reduce(self, v: Sequence[int]) -> Vector:
        if len(v) != len(self.factors):
            raise AbelianError(f"vector of length {len(v)} for group of rank {self.rank}")
        return tuple(int(x) % d if d else int(x) for x, d in zip(v, self.factors))

    def zero(self) -> Vector:
        return (0,) * self.rank

    def gen(self, i: int) -> Vector:
        return tuple(int(i == j) for j in range(self.rank))

    def add(self, a: Sequence[int], b: Sequence[int]) -> Vector:
        return self.reduce([x + y for x, y in zip(a, b)])

    def sub(self, a: Sequence[int], b: Sequence[int]) -> Vector:
        return self.reduce([x - y for x, y in zip(a, b)])

    def scale(self, k: int, a: Sequence[int]) -> Vector:
        return self.reduce([k * x for x in a])

    def neg(self, a: Sequence[int]) -> Vector:
        return self.scale(-1, a)

    def elements(self) -> Iterator[Vector]:
        """All elements, lexicographic in coefficients (last coordinate fastest)."""
        if not self.is_finite:
            raise UnsupportedInputError("cannot enumerate an infinite group")
        return itertools.product(*(range(d) for d in self.factors))

    def index(self, v: Sequence[int]) -> int:
        i = 0
        for x, d in zip(self.reduce(v), self.factors):
            i = i * d + x
        return i

    def element_order(self, v: Sequence[int]) -> int | None:
        v = self.reduce(v)
        o = 1
        for x, d in zip(v, self.factors):
            if x == 0:
                continue
            if d == 0:
                return None
            o = o * (d // gcd(x, d)) // gcd(o, d // gcd(x, d))
        return o

    def element(self, coeffs: Sequence[int]) -> "Element":
        return Element(self, self.reduce(coeffs))

    def relabel(self, labels: Sequence[str]) -> "AbelianGroup":
        return AbelianGroup(self.factors, tuple(labels), self.basis)

    def relation_rows(self) -> Matrix:
        return [[d if i == j else 0 for j in range(self.rank)] for i, d in enumerate(self.factors) if d]

    def __str__(self) -> str:
        if not self.factors:
            return "0"
        return " ⊕ ".join("Z" if d == 0 else f"Z_{d}" for d in self.factors)

    def describe(self) -> str:
        if not self.factors:
            return "0"
        return " ⊕ ".join(
            f"{'Z' if d == 0 else f'Z_{d}'}⟨{lab}⟩" for d, lab in zip(self.factors, self.labels)
        )

    def to_json(self) -> dict:
        return {"factors": list(self.factors), "labels": list(self.labels)}

    @classmethod
    def from_json(cls, data: dict) -> "AbelianGroup":
        return cls(tuple(data["factors"]), tuple(data.get("labels", ())))


TRIVIAL = AbelianGroup(())


def cyclic(d: int, label: str | None = None) -> AbelianGroup:
    if d == 1:
        return TRIVIAL
    return AbelianGroup((d,), (label,) if label else ())


def free(r: int, labels: Sequence[str] = ()) -> AbelianGroup:
    return AbelianGroup((0,) * r, tuple(labels))


@dataclass(frozen=True)
class Element:
    group: AbelianGroup
    coeffs: Vector

    def __post_init__(self):
        object.__setattr__(self, "coeffs", self.group.reduce(self.coeffs))

    def _same(self, other: "Element"):
        if other.group != self.group:
            raise AbelianError("elements of different groups")

    def __add__(self, other: "Element") -> "Element":
        self._same(other)
        return Element(self.group, self.group.add(self.coeffs, other.coeffs))

    def __sub__(self, other: "Element") -> "Element":
        self._same(other)
        return Element(self.group, self.group.sub(self.coeffs, other.coeffs))

    def __neg__(self) -> "Element":
        return Element(self.group, self.group.neg(self.coeffs))

    def __rmul__(self, k: int) -> "Element":
        return Element(self.group, self.group.scale(k, self.coeffs))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __str__(self) -> str:
        return format_vector(self.group, self.coeffs)


def format_vector(g: AbelianGroup, v: Sequence[int]) -> str:
    terms = []
    for c, lab in zip(v, g.labels):
        if c == 0:
            continue
        terms.append(lab if c == 1 else f"{c}·{lab}")
    return " + ".join(terms) if terms else "0"


@dataclass(frozen=True)
class GroupHom:
    """Homomorphism ``domain -> codomain`` given by a (codomain.rank x domain.rank) matrix."""

    domain: AbelianGroup
    codomain: AbelianGroup
    matrix: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = [list(r) for r in self.matrix]
        if len(rows) != self.codomain.rank or any(len(r) != self.domain.rank for r in rows):
            raise AbelianError(
                f"matrix shape does not match {self.codomain.rank}x{self.domain.rank}"
            )
        for i, d in enumerate(self.codomain.factors):
            if d:
                rows[i] = [x % d for x in rows[i]]
        object.__setattr__(self, "matrix", tuple(tuple(r) for r in rows))
        for j, dj in enumerate(self.domain.factors):
            if not dj:
                continue
            for i, di in enumerate(self.codomain.factors):
                x = self.matrix[i][j] * dj
                if (di == 0 and x != 0) or (di and x % di):
                    raise AbelianError(
                        f"not well defined: generator {self.domain.labels[j]} of order {dj} "
                        f"maps to an element of order not dividing {dj}"
                    )

    @classmethod
    def from_columns(cls, domain, codomain, columns: Sequence[Sequence[int]]) -> "GroupHom":
        cols = [list(c) for c in columns]
        if len(cols) != domain.rank:
            raise AbelianError("one column per domain generator required")
        mat = [[cols[j][i] for j in range(domain.rank)] for i in range(codomain.rank)]
        return cls(domain, codomain, tuple(tuple(r) for r in mat))

    @classmethod
    def zero(cls, domain, codomain) -> "GroupHom":
        return cls(domain, codomain, tuple((0,) * domain.rank for _ in range(codomain.rank)))

    @classmethod
    def identity(cls, g: AbelianGroup) -> "GroupHom":
        return cls(g, g, tuple(tuple(r) for r in identity(g.rank)))

    @classmethod
    def scalar(cls, g: AbelianGroup, k: int) -> "GroupHom":
        return cls(g, g, tuple(tuple(k * x for x in r) for r in identity(g.rank)))

    def __call__(self, v: Sequence[int]) -> Vector:
        return self.codomain.reduce(matvec([list(r) for r in self.matrix], v))

    def column(self, j: int) -> Vector:
        return tuple(r[j] for r in self.matrix)

    def then(self, other: "GroupHom") -> "GroupHom":
        """``other ∘ self``."""
        if self.codomain != other.domain:
            raise AbelianError("homomorphisms are not composable")
        cols = [other(self.column(j)) for j in range(self.domain.rank)]
        return GroupHom.from_columns(self.domain, other.codomain, cols)

    def is_zero(self) -> bool:
        return all(not any(r) for r in self.matrix)

    def to_json(self) -> list[list[int]]:
        return [list(r) for r in self.matrix]


# --------------------------------------------------------------------------
# presentations and derived groups


def _combo_label(labels: Sequence[str], v: Sequence[int]) -> str:
    terms = []
    for c, lab in zip(v, labels):
        if c == 0:
            continue
        if c == 1:
            terms.append(lab)
        elif c == -1:
            terms.append(f"-{lab}")
        else:
            terms.append(f"{c}·{lab}")
    return "+".join(terms).replace("+-", "-") if terms else "0"


def from_presentation(
    num_gens: int, relations: Sequence[Sequence[int]], labels: Sequence[str] | None = None
) -> AbelianGroup:
    """Cokernel of the relation rows, i.e. ``Z^num_gens / rowspan(relations)``.

    The returned group carries a :class:`BasisChange` relating original
    generators to the normalized ones.  Labels of normalized generators are
    the original labels when the normal generator is an original generator,
    otherwise a formal combination.
    """
    rel = [list(map(int, r)) for r in relations if any(r)]
    if any(len(r) != num_gens for r in rel):
        raise AbelianError(f"relation rows must have {num_gens} columns")
    labels = list(labels) if labels is not None else [f"e{i}" for i in range(num_gens)]
    if len(labels) != num_gens:
        raise AbelianError("one label per generator required")
    if num_gens == 0:
        return AbelianGroup((), (), BasisChange([], []))
    if rel:
        _, d, v = smith_normal_form(rel)
        diag = diagonal(d) + [0] * (num_gens - min(len(rel), num_gens))
    else:
        v = identity(num_gens)
        diag = [0] * num_gens
    vinv = _unimodular_inverse(v)
    keep = [i for i, x in enumerate(diag) if x != 1]
    factors = tuple(diag[i] for i in keep)
    # row-vector convention: x -> x V carries rowspan(R) onto rowspan(D)
    to_normal = [[v[r][i] for r in range(num_gens)] for i in keep]
    from_normal = [[vinv[i][r] for i in keep] for r in range(num_gens)]
    to_normal = [[x % f if f else x for x in row] for row, f in zip(to_normal, factors)]
    new_labels = []
    for c in range(len(keep)):
        col = [from_normal[r][c] for r in range(num_gens)]
        new_labels.append(_combo_label(labels, col))
    return AbelianGroup(factors, tuple(new_labels), BasisChange(to_normal, from_normal))


def _unimodular_inverse(v: Matrix) -> Matrix:
    k = len(v)
    cols = []
    for j in range(k):
        e = [int(i == j) for i in range(k)]
        x = solve_integer(v, e, k)
        if x is None:
            raise AbelianError("matrix is not unimodular")
        cols.append(x)
    return transpose(cols)


def normalize_cyclic(
    orders: Sequence[int], labels: Sequence[str] | None = None
) -> AbelianGroup:
    """Normalize ``⊕ Z_{orders[i]}`` (orders may be 0 or 1, any order)."""
    k = len(orders)
    rels = [[o if i == j else 0 for j in range(k)] for i, o in enumerate(orders) if o]
    return from_presentation(k, rels, labels)


def express(g: AbelianGroup, v: Sequence[int]) -> Vector:
    """Normal coordinates of an original-generator vector of a presented group."""
    if g.basis is None:
        return g.reduce(v)
    return g.reduce(matvec(g.basis.to_normal, v))


def direct_sum(*groups: AbelianGroup) -> tuple[AbelianGroup, list[GroupHom], list[GroupHom]]:
    """Normalized direct sum with its injections and projections."""
    orders = [d for g in groups for d in g.factors]
    labels = [lab for g in groups for lab in g.labels]
    s = normalize_cyclic(orders, labels)
    inj, proj = [], []
    offset = 0
    for g in groups:
        cols = []
        for j in range(g.rank):
            raw = [0] * len(orders)
            raw[offset + j] = 1
            cols.append(express(s, raw))
        inj.append(GroupHom.from_columns(g, s, cols))
        pcols = []
        for c in range(s.rank):
            raw = [s.basis.from_normal[r][c] for r in range(len(orders))]
            pcols.append(g.reduce(raw[offset : offset + g.rank]))
        proj.append(GroupHom.from_columns(s, g, pcols))
        offset += g.rank
    return s, inj, proj


def lattice_of_subgroup(g: AbelianGroup, gens: Iterable[Sequence[int]]) -> Matrix:
    """Canonical Hermite basis of ``span(gens) + relations`` in ``Z^rank``."""
    rows = [list(x) for x in gens] + g.relation_rows()
    return hermite_normal_form(rows, g.rank)


def subgroups_equal(g: AbelianGroup, a: Iterable[Sequence[int]], b: Iterable[Sequence[int]]) -> bool:
    return lattice_of_subgroup(g, a) == lattice_of_subgroup(g, b)


def solve_in_group(
    g: AbelianGroup, gens: Sequence[Sequence[int]], target: Sequence[int]
) -> list[int] | None:
    """Integer coefficients c with ``sum c_i gens_i == target`` in g, or None."""
    cols = [list(x) for x in gens] + [list(r) for r in g.relation_rows()]
    if g.rank == 0:
        return [0] * len(gens)
    a = [[c[i] for c in cols] for i in range(g.rank)] if cols else []
    if not cols:
        return [] if not any(g.reduce(target)) else None
    x = solve_integer(a, list(target), len(cols))
    if x is None:
        return None
    return x[: len(gens)]


@dataclass(frozen=True)
class Subquotients:
    kernel: AbelianGroup
    image: AbelianGroup
    cokernel: AbelianGroup
    kernel_inclusion: GroupHom
    image_inclusion: GroupHom
    cokernel_projection: GroupHom
    kernel_lattice: Matrix = field(repr=False)


def _kernel_lattice(h: GroupHom) -> Matrix:
    a, b = h.domain.rank, h.codomain.rank
    if a == 0:
        return []
    dh = h.codomain.factors
    big = [list(h.matrix[i]) + [dh[i] if k == i else 0 for k in range(b)] for i in range(b)]
    if b == 0:
        gens = identity(a)
    else:
        gens = [row[:a] for row in integer_kernel(big, a + b)]
    return hermite_normal_form(gens + h.domain.relation_rows(), a)


def subquotients(h: GroupHom) -> Subquotients:
    dom, cod = h.domain, h.codomain
    a = dom.rank
    klat = _kernel_lattice(h)
    r = len(klat)
    # kernel = klat / relations(domain)
    rel_coords = []
    for row in dom.relation_rows():
        c = _solve_echelon(klat, row)
        rel_coords.append(c)
    klabels = [_combo_label(dom.labels, row) for row in klat]
    kernel = from_presentation(r, rel_coords, klabels)
    kcols = []
    for c in range(kernel.rank):
        coef = [kernel.basis.from_normal[t][c] for t in range(r)]
        vec = [sum(coef[t] * klat[t][j] for t in range(r)) for j in range(a)]
        kcols.append(dom.reduce(vec))
    k_incl = GroupHom.from_columns(kernel, dom, kcols)
    # image = Z^a / klat
    image = from_presentation(a, klat, [f"h({lab})" for lab in dom.labels])
    icols = []
    for c in range(image.rank):
        pre = [image.basis.from_normal[t][c] for t in range(a)]
        icols.append(h(pre))
    i_incl = GroupHom.from_columns(image, cod, icols)
    # cokernel = Z^b / (im + relations)
    cols = [h.column(j) for j in range(a)]
    coker = from_presentation(cod.rank, [list(c) for c in cols] + cod.relation_rows(), cod.labels)
    c_proj = GroupHom.from_columns(
        cod, coker, [express(coker, cod.gen(j)) for j in range(cod.rank)]
    )
    return Subquotients(kernel, image, coker, k_incl, i_incl, c_proj, klat)


def _solve_echelon(basis: Matrix, v: Sequence[int]) -> list[int]:
    """Coefficients of v in an echelon (Hermite) basis; v must lie in the span."""
    v = list(v)
    out = []
    for row in basis:
        pc = next(j for j, x in enumerate(row) if x)
        q, rem = divmod(v[pc], row[pc])
        if rem:
            raise AbelianError("vector not in lattice")
        out.append(q)
        v = [x - q * y for x, y in zip(v, row)]
    if any(v):
        raise AbelianError("vector not in lattice")
    return out


def kernel_generators(h: GroupHom) -> Matrix:
    return _kernel_lattice(h)


def image_generators(h: GroupHom) -> list[Vector]:
    return [h.column(j) for j in range(h.domain.rank)]


@dataclass(frozen=True)
class NodeReport:
    position: int
    group: AbelianGroup
    exact: bool
    image_order: int | None
    kernel_order: int | None

    def __str__(self):
        mark = "exact" if self.exact else "NOT exact"
        return f"node {self.position} ({self.group}): {mark}"


@dataclass(frozen=True)
class ExactnessReport:
    exact: bool
    nodes: tuple[NodeReport, ...]


def is_exact(sequence: Sequence[GroupHom], cyclic: bool = False) -> ExactnessReport:
    """Check ``im(h_i) == ker(h_{i+1})`` at every interior node.

    With ``cyclic=True`` the last map is also composed back into the first,
    as for the six-term Bockstein cycle.
    """
    seq = list(sequence)
    if not seq:
        raise AbelianError("empty sequence")
    pairs = list(zip(seq, seq[1:]))
    if cyclic:
        pairs.append((seq[-1], seq[0]))
    nodes = []
    for pos, (f, g) in enumerate(pairs):
        if f.codomain != g.domain:
            raise AbelianError(f"maps {pos} and {pos + 1} are not composable")
        mid = f.codomain
        im = image_generators(f)
        ker = kernel_generators(g)
        ok = subgroups_equal(mid, im, ker)
        sq = subquotients(f)
        nodes.append(
            NodeReport(pos + 1 if not cyclic else (pos + 1) % len(seq), mid, ok,
                       sq.image.order, subquotients(g).kernel.order)
        )
    return ExactnessReport(all(n.exact for n in nodes), tuple(nodes))


def _check_modulus(n: int):
    if n < 2:
        raise AbelianError(f"modulus must be >= 2, got {n}")


def tensor_projection(g: AbelianGroup, n: int) -> GroupHom:
    """The reduction ``G -> G ⊗ Z_n``."""
    _check_modulus(n)
    keep, factors, labels = [], [], []
    for i, d in enumerate(g.factors):
        e = gcd(d, n)
        if e > 1:
            keep.append(i)
            factors.append(e)
            labels.append(g.labels[i])
    t = AbelianGroup(tuple(factors), tuple(labels))
    cols = []
    for j in range(g.rank):
        cols.append(tuple(int(j == i) for i in keep))
    return GroupHom.from_columns(g, t, cols)


def tensor_Zn(g: AbelianGroup, n: int) -> AbelianGroup:
    return tensor_projection(g, n).codomain


def torsion_inclusion(g: AbelianGroup, n: int) -> GroupHom:
    """Inclusion of the n-torsion ``Tor(G, Z_n) = {x : n x = 0}`` into G."""
    _check_modulus(n)
    keep, factors, labels = [], [], []
    for i, d in enumerate(g.factors):
        e = gcd(d, n) if d else 1
        if e > 1:
            keep.append((i, d // e))
            factors.append(e)
            labels.append(g.labels[i] if d // e == 1 else f"{d // e}·{g.labels[i]}")
    t = AbelianGroup(tuple(factors), tuple(labels))
    cols = []
    for i, mult in keep:
        v = [0] * g.rank
        v[i] = mult
        cols.append(tuple(v))
    return GroupHom.from_columns(t, g, cols)


def tor_Zn(g: AbelianGroup, n: int) -> AbelianGroup:
    return torsion_inclusion(g, n).domain


def tensor(a: AbelianGroup, b: AbelianGroup) -> list[tuple[int, int, int]]:
    """Cyclic summands of ``A ⊗ B`` as ``(order, i, j)`` (order 0 = free)."""
    out = []
    for i, x in enumerate(a.factors):
        for j, y in enumerate(b.factors):
            g = gcd(x, y)
            if g != 1:
                out.append((g, i, j))
    return out


def tor(a: AbelianGroup, b: AbelianGroup) -> list[tuple[int, int, int]]:
    """Cyclic summands of ``Tor(A, B)`` as ``(order, i, j)``."""
    out = []
    for i, x in enumerate(a.factors):
        for j, y in enumerate(b.factors):
            if x and y and gcd(x, y) > 1:
                out.append((gcd(x, y), i, j))
    return out


def primary_part(d: int, n: int) -> int:
    """Largest divisor of d whose prime factors all divide n."""
    out = 1
    for p, e in factorint(d).items():
        if n % p == 0:
            out *= p**e
    return out


def n_primary_part(g: AbelianGroup, n: int) -> AbelianGroup:
    _check_modulus(n)
    if not g.is_finite:
        raise UnsupportedInputError("localization of free summands is not supported")
    return normalize_cyclic([primary_part(d, n) for d in g.factors])


def is_n_primary(order: int, n: int) -> bool:
    return primary_part(order, n) == order


def group_to_json(g: AbelianGroup) -> str:
    return json.dumps(g.to_json(), ensure_ascii=False)
