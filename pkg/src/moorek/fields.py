"""Counting for continuous fields of Cuntz algebras, at the level of finite rings.

``a ~_n b`` when ``(n + a)(1 + z) = n + b`` for some z, i.e. ``b = a + n z + a z``.
The unit ``r^{-1}`` of ``Z_(n)`` that appears when comparing bundles of rank
``nr + 1`` is absorbed into the ring element and not modeled separately.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .abelian import (
    AbelianError,
    AbelianGroup,
    GroupHom,
    UnsupportedInputError,
    express,
    is_n_primary,
    normalize_cyclic,
    subquotients,
    tensor_Zn,
    tor_Zn,
)
from .kprofile import KProfile, _mul_vec
from . import spaces

R_INVERSE_NOTE = "the unit r^-1 of Z_(n) is absorbed into the ring element and not modeled separately"


class RingError(ValueError):
    pass


# --------------------------------------------------------------------------
# finite nilpotent rings


@dataclass(frozen=True, eq=False)
class FiniteNilRing:
    """Commutative nilpotent ring on ``⊕ Z_{orders[i]}`` with structure constants.

    ``products[a][b]`` is the product of generators a and b in generator
    coordinates.  Orders need not be in invariant-factor form.
    """

    orders: tuple[int, ...]
    products: tuple[tuple[tuple[int, ...], ...], ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        k = len(self.orders)
        if any(o < 1 for o in self.orders):
            raise RingError("generator orders must be positive (finite rings only)")
        prods = tuple(tuple(tuple(int(c) % o for c, o in zip(v, self.orders)) for v in row) for row in self.products)
        if len(prods) != k or any(len(row) != k or any(len(v) != k for v in row) for row in prods):
            raise RingError("product table must be k x k x k")
        object.__setattr__(self, "products", prods)
        object.__setattr__(self, "labels", tuple(self.labels) or tuple(f"e{i}" for i in range(k)))
        self._validate()

    @property
    def rank(self) -> int:
        return len(self.orders)

    @property
    def order(self) -> int:
        return int(np.prod(self.orders, dtype=object)) if self.orders else 1

    @property
    def additive(self) -> AbelianGroup:
        return AbelianGroup(normalize_cyclic(list(self.orders)).factors)

    def elements(self) -> np.ndarray:
        if not self.orders:
            return np.zeros((1, 0), dtype=np.int64)
        grids = np.meshgrid(*[np.arange(o) for o in self.orders], indexing="ij")
        return np.stack([g.reshape(-1) for g in grids], axis=1).astype(np.int64)

    def _table(self) -> np.ndarray:
        return np.array(self.products, dtype=np.int64).reshape(self.rank, self.rank, self.rank)

    def reduce(self, x: np.ndarray) -> np.ndarray:
        return np.mod(x, np.array(self.orders, dtype=np.int64))

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Broadcast product of (…, k) coefficient arrays."""
        if self.rank == 0:
            return np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.int64)
        a, b = np.broadcast_arrays(a, b)
        outer = (a[..., :, None] * b[..., None, :]).reshape(*a.shape[:-1], self.rank * self.rank)
        return self.reduce(outer @ self._table().reshape(self.rank * self.rank, self.rank))

    def index(self, x: np.ndarray) -> np.ndarray:
        radix = np.ones(self.rank, dtype=np.int64)
        for i in range(self.rank - 2, -1, -1):
            radix[i] = radix[i + 1] * self.orders[i + 1]
        return x @ radix

    def _validate(self):
        k = self.rank
        t = self._table() if k else None
        for a in range(k):
            for b in range(k):
                if self.products[a][b] != self.products[b][a]:
                    raise RingError(f"not commutative at {self.labels[a]}·{self.labels[b]}")
                for o in (self.orders[a], self.orders[b]):
                    if any((o * c) % m for c, m in zip(self.products[a][b], self.orders)):
                        raise RingError(f"{self.labels[a]}·{self.labels[b]} is not killed by {o}")
        eye = np.eye(k, dtype=np.int64)
        for a in range(k):
            for b in range(k):
                ab = self.reduce(t[a, b])
                for c in range(k):
                    if not np.array_equal(self.mul(ab, eye[c]), self.mul(eye[a], self.reduce(t[b, c]))):
                        raise RingError("not associative")
        # generators suffice: sums of commuting nilpotents are nilpotent
        bound = self.order.bit_length() + 1
        for a in range(k):
            cur = eye[a]
            for _ in range(bound):
                if not cur.any():
                    break
                cur = self.mul(cur, eye[a])
            if cur.any():
                raise RingError(f"generator {self.labels[a]} is not nilpotent")

    def to_json(self) -> dict:
        prods = [[a, b, list(self.products[a][b])] for a in range(self.rank) for b in range(self.rank)
                 if any(self.products[a][b])]
        return {"orders": list(self.orders), "labels": list(self.labels), "products": prods}

    @classmethod
    def from_json(cls, data: dict) -> "FiniteNilRing":
        orders = [int(o) for o in data["orders"]]
        k = len(orders)
        table = [[[0] * k for _ in range(k)] for _ in range(k)]
        for a, b, v in data.get("products", []):
            table[a][b] = list(v)
        return cls(tuple(orders), tuple(tuple(tuple(v) for v in row) for row in table), tuple(data.get("labels", ())))


def zero_ring(orders: Sequence[int]) -> FiniteNilRing:
    k = len(orders)
    return FiniteNilRing(tuple(orders), tuple(tuple((0,) * k for _ in range(k)) for _ in range(k)))


def truncated_polynomial_ring(modulus: int, degree: int, labels: str = "t") -> FiniteNilRing:
    """``t Z_m[t] / (t^degree)`` with basis ``t, t², …, t^{degree-1}``."""
    k = degree - 1
    prods = [[[0] * k for _ in range(k)] for _ in range(k)]
    for a in range(k):
        for b in range(k):
            if a + b + 2 < degree:
                prods[a][b][a + b + 1] = 1
    names = tuple(labels if e == 1 else f"{labels}^{e}" for e in range(1, degree))
    return FiniteNilRing((modulus,) * k, tuple(tuple(tuple(v) for v in row) for row in prods), names)


def monomial_ring(p: int, variables: int, degree: int, exponents: Sequence[int]) -> FiniteNilRing:
    """Monomials of degree 1..degree-1 in commuting variables, order ``p^exponents[deg-1]``.

    The exponents must be nonincreasing in the degree so that the relations form
    an ideal; multiplication is strictly upper triangular in the degree order.
    """
    if any(b > a for a, b in zip(exponents, exponents[1:])):
        raise RingError("exponents must be nonincreasing in the degree")
    monos = []
    for d in range(1, degree):
        monos += _monomials(variables, d)
    pos = {m: i for i, m in enumerate(monos)}
    orders = tuple(p ** exponents[sum(m) - 1] for m in monos)
    k = len(monos)
    prods = [[[0] * k for _ in range(k)] for _ in range(k)]
    for a, ma in enumerate(monos):
        for b, mb in enumerate(monos):
            m = tuple(x + y for x, y in zip(ma, mb))
            if m in pos:
                prods[a][b][pos[m]] = 1
    labels = tuple("".join(f"x{v}" + (f"^{e}" if e > 1 else "") for v, e in enumerate(m) if e) for m in monos)
    return FiniteNilRing(orders, tuple(tuple(tuple(v) for v in row) for row in prods), labels)


def _monomials(nvars: int, d: int) -> list[tuple[int, ...]]:
    if nvars == 1:
        return [(d,)]
    out = []
    for first in range(d, -1, -1):
        for rest in _monomials(nvars - 1, d - first):
            out.append((first,) + rest)
    return out


def random_nil_ring(rng: np.random.Generator, n: int, max_order: int = 256) -> FiniteNilRing:
    """A random n-primary monomial ring of order at most ``max_order``."""
    primes = [q for q in range(2, n + 1) if n % q == 0 and all(q % r for r in range(2, q))]
    while True:
        p = int(rng.choice(primes))
        variables = int(rng.integers(1, 3))
        degree = int(rng.integers(2, 6))
        top = int(rng.integers(1, 4))
        exps = sorted((int(x) for x in rng.integers(1, top + 1, size=degree - 1)), reverse=True)
        ring = monomial_ring(p, variables, degree, exps)
        if ring.order <= max_order:
            return ring


def filtered_ring(weights: Sequence[int], bound: int, n: int,
                  scales: dict[tuple[int, ...], int] | None = None) -> FiniteNilRing:
    """Localized truncation of a free filtered ring.

    The free ring has basis ``s_m · x^m`` over the monomials of weight in
    ``[1, bound)``, where variable v has weight ``weights[v]`` and ``s_m`` is a
    positive scale (default 1).  Scales must satisfy ``s_{m+m'} | s_m s_{m'}``
    so the span is closed under multiplication.  Filtering by weight gives free
    quotients.  If ``R^{N+1} = 0`` then ``n^N R ⊆ (n+a) R`` for every a, so the
    ``~_n`` classes of ``R ⊗ Z_(n)`` are unions of cosets of ``n^N R`` and can be
    counted on ``R ⊗ Z_{n^N}``, which is what this returns.
    """
    if not weights or min(weights) < 1:
        raise RingError("weights must be positive")
    depth = (bound - 1) // min(weights)
    monos = _weighted_monomials(weights, bound)
    if depth < 1 or not monos:
        return zero_ring(())
    scales = dict(scales or {})
    s = [int(scales.get(m, 1)) for m in monos]
    pos = {m: i for i, m in enumerate(monos)}
    k = len(monos)
    prods = [[[0] * k for _ in range(k)] for _ in range(k)]
    for a, ma in enumerate(monos):
        for b, mb in enumerate(monos):
            m = tuple(x + y for x, y in zip(ma, mb))
            if m in pos:
                c, r = divmod(s[a] * s[b], s[pos[m]])
                if r:
                    raise RingError(f"scale of {m} does not divide the product of scales")
                prods[a][b][pos[m]] = c
    labels = tuple((f"{sc}·" if sc != 1 else "")
                   + "".join(f"x{v}" + (f"^{e}" if e > 1 else "") for v, e in enumerate(m) if e)
                   for m, sc in zip(monos, s))
    return FiniteNilRing((n ** depth,) * k, tuple(tuple(tuple(v) for v in row) for row in prods), labels)


def _weighted_monomials(weights: Sequence[int], bound: int) -> list[tuple[int, ...]]:
    ranges = [range((bound - 1) // w + 1) for w in weights]
    monos = [m for m in itertools.product(*ranges) if 0 < sum(e * w for e, w in zip(m, weights)) < bound]
    return sorted(monos, key=lambda m: (sum(e * w for e, w in zip(m, weights)), [-e for e in m]))


def random_filtered_ring(rng: np.random.Generator, n: int, max_order: int = 256) -> FiniteNilRing:
    """A random ring from :func:`filtered_ring` of order at most ``max_order``."""
    while True:
        weights = [int(w) for w in rng.integers(1, 4, size=int(rng.integers(1, 4)))]
        bound = int(rng.integers(2, 8))
        depth = (bound - 1) // min(weights)
        monos = _weighted_monomials(weights, bound)
        if depth < 1 or not monos or (n ** depth) ** len(monos) > max_order:
            continue
        # q^min(wt, cap) is subadditive in the weight, so the scales divide correctly
        q, cap = int(rng.integers(1, 4)), int(rng.integers(0, 3))
        scales = {m: q ** min(sum(e * w for e, w in zip(m, weights)), cap) for m in monos}
        return filtered_ring(weights, bound, n, scales)


# --------------------------------------------------------------------------
# the ~_n quotient


def _find(parent: np.ndarray, x: int) -> int:
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        parent[x], x = root, parent[x]
    return root


def sim_n_quotient(ring: FiniteNilRing, n: int) -> list[list[tuple[int, ...]]]:
    """Classes of ``b = a + n z + a z``, each sorted, in order of first element."""
    if n < 2:
        raise AbelianError("modulus must be >= 2")
    if not is_n_primary(ring.order, n):
        raise UnsupportedInputError(f"ring of order {ring.order} is not {n}-primary; take the n-primary part first")
    els = ring.elements()
    size = len(els)
    parent = np.arange(size)
    chunk = max(1, 2_000_000 // (size * max(ring.rank, 1) ** 2))
    for start in range(0, size, chunk):
        a = els[start:start + chunk]
        b = ring.reduce(a[:, None, :] + n * els[None, :, :] + ring.mul(a[:, None, :], els[None, :, :]))
        idx_b = ring.index(b)
        for i in range(len(a)):
            ra = _find(parent, start + i)
            for j in np.unique(idx_b[i]):
                rb = _find(parent, int(j))
                if rb != ra:
                    lo, hi = min(ra, rb), max(ra, rb)
                    parent[hi] = lo
                    ra = lo
    classes: dict[int, list[tuple[int, ...]]] = {}
    for i in range(size):
        classes.setdefault(_find(parent, i), []).append(tuple(int(x) for x in els[i]))
    return [classes[k] for k in sorted(classes)]


@dataclass(frozen=True)
class LemmaReport:
    classes: int
    tensor_order: int

    @property
    def inequality(self) -> bool:
        return self.classes >= self.tensor_order

    def to_json(self) -> dict:
        return {"classes": self.classes, "tensor_order": self.tensor_order, "inequality": self.inequality}

    def __str__(self) -> str:
        rel = ">=" if self.inequality else "<"
        return f"|R/~_n| = {self.classes} {rel} |R⊗Z_n| = {self.tensor_order}  (note: {R_INVERSE_NOTE})"


def lemma_tec_check(ring: FiniteNilRing, n: int) -> LemmaReport:
    classes = sim_n_quotient(ring, n)
    return LemmaReport(len(classes), tensor_Zn(ring.additive, n).order or 1)


# --------------------------------------------------------------------------
# cohomology counts


@dataclass(frozen=True)
class CohomologyProfile:
    """``groups[k-1] = H^k(X)`` for k = 1..len(groups)."""

    groups: tuple[AbelianGroup, ...]
    dim: int | None = None

    def __post_init__(self):
        gs = tuple(AbelianGroup(normalize_cyclic(list(g.factors)).factors) for g in self.groups)
        object.__setattr__(self, "groups", gs)
        if self.dim is not None and any(g.rank for g in gs[self.dim:]):
            raise AbelianError(f"nonzero cohomology above the stated dimension {self.dim}")

    def at(self, k: int) -> AbelianGroup:
        if 1 <= k <= len(self.groups):
            return self.groups[k - 1]
        return AbelianGroup(())

    @classmethod
    def from_expr(cls, e: "spaces.SpaceExpr | str") -> "CohomologyProfile":
        if isinstance(e, str):
            e = spaces.parse(e)
        h = spaces.reduced_cohomology(e)
        return cls(tuple(h[1:]), spaces.dimension(e))


def mod_n_cohomology(c: CohomologyProfile, m: int, n: int) -> AbelianGroup:
    """``H^m(X;Z_n) = H^m⊗Z_n ⊕ Tor(H^{m+1}, Z_n)``."""
    a, b = tensor_Zn(c.at(m), n), tor_Zn(c.at(m + 1), n)
    return AbelianGroup(normalize_cyclic(list(a.factors) + list(b.factors)).factors)


def heven_order(c: CohomologyProfile, n: int) -> int:
    if c.dim is None:
        if c.groups and c.groups[-1].rank:
            raise AbelianError("the top listed group is nonzero; state the dimension explicitly")
        top = len(c.groups)
    else:
        top = c.dim
    out = 1
    for m in range(2, top + 1, 2):
        out *= mod_n_cohomology(c, m, n).order or 1
    return out


@dataclass(frozen=True)
class CountReport:
    k0_tensor_order: int
    heven_order: int
    hypothesis: bool
    tor_groups: tuple[str, ...]

    @property
    def asserted(self) -> bool:
        return self.hypothesis

    @property
    def equal(self) -> bool:
        return self.k0_tensor_order == self.heven_order

    @property
    def ok(self) -> bool:
        return self.equal or not self.hypothesis

    def to_json(self) -> dict:
        return {
            "k0_tensor_order": self.k0_tensor_order,
            "heven_order": self.heven_order,
            "hypothesis": self.hypothesis,
            "asserted": self.asserted,
            "equal": self.equal,
            "tor_groups": list(self.tor_groups),
        }


def dadarlat_count_check(p: KProfile, c: CohomologyProfile, n: int) -> CountReport:
    """Compare ``|K̃^0(X)⊗Z_n|`` with ``|H̃^even(X;Z_n)|`` under ``Tor(H^*, Z_n) = 0``."""
    top = c.dim if c.dim is not None else len(c.groups)
    tors = [(k, tor_Zn(c.at(k), n)) for k in range(1, top + 1)]
    bad = tuple(f"Tor(H^{k},Z_{n}) = {g}" for k, g in tors if g.rank)
    return CountReport(tensor_Zn(p.k0red, n).order or 1, heven_order(c, n), not bad, bad)


# --------------------------------------------------------------------------
# Pimsner pieces


@dataclass(frozen=True)
class PimsnerPieces:
    coker0: AbelianGroup
    ker0: AbelianGroup
    coker1: AbelianGroup
    ker1: AbelianGroup
    note: str = ("K_0(O_E) is an extension of ker1 by coker0 and K_1(O_E) one of ker0 by coker1; "
                 "the extensions are not determined by the six-term sequence")

    def to_json(self) -> dict:
        return {
            "coker0": self.coker0.to_json(),
            "ker0": self.ker0.to_json(),
            "coker1": self.coker1.to_json(),
            "ker1": self.ker1.to_json(),
            "note": self.note,
        }


def _unitalized(p: KProfile) -> AbelianGroup:
    orders = [0] + list(p.k0red.factors)
    return normalize_cyclic(orders, ["1"] + list(p.k0red.labels))


def pimsner_pieces(p: KProfile, rank: int, e_tilde: Sequence[int] | None = None) -> PimsnerPieces:
    """Kernel and cokernel of multiplication by ``1 - [E] = (1 - r) - ẽ`` on ``K^0`` and ``K^1``."""
    if rank < 2:
        raise AbelianError("the bundle rank must be >= 2")
    e = tuple(e_tilde) if e_tilde is not None else p.k0red.zero()
    if len(e) != p.k0red.rank:
        raise AbelianError("ẽ must be a vector in K̃^0")
    e = p.k0red.reduce(e)
    c = 1 - rank
    k0 = _unitalized(p)
    k = p.k0red.rank
    cols = []
    for j in range(k + 1):
        if j == 0:
            raw = [c] + [-x for x in e]
        else:
            x = p.k0red.gen(j - 1)
            ex = _mul_vec(p.red, p.ring, 0, e, 0, x)
            raw = [0] + [c * xi - exi for xi, exi in zip(x, ex)]
        cols.append(express(k0, raw))
    basis = k0.basis.from_normal
    ncols = [
        k0.reduce([sum(cols[r][i] * basis[r][j] for r in range(k + 1)) for i in range(k0.rank)])
        for j in range(k0.rank)
    ]
    h0 = GroupHom.from_columns(k0, k0, ncols)
    k1 = p.k1red
    cols1 = []
    for j in range(k1.rank):
        y = k1.gen(j)
        ey = _mul_vec(p.red, p.ring, 0, e, 1, y)
        cols1.append(k1.reduce([c * yi - eyi for yi, eyi in zip(y, ey)]))
    h1 = GroupHom.from_columns(k1, k1, cols1)
    s0, s1 = subquotients(h0), subquotients(h1)
    return PimsnerPieces(s0.cokernel, s0.kernel, s1.cokernel, s1.kernel)


def ring_from_json_text(text: str) -> FiniteNilRing:
    return FiniteNilRing.from_json(json.loads(text))
