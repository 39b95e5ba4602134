"""The twisted group law ``a∘b = a + b - a·β(b)`` on ``K^1(X; Z_n)``.

Elements are coefficient tuples in the normalized carrier group.  ``a·s`` is
the action of a torsion class ``s ∈ T ⊂ K̃^0(X)`` on the mod-n class ``a``;
for degree-0 classes left and right actions agree.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import reduce
from math import lcm
from typing import Iterable, Sequence

import numpy as np
from sympy import factorint

from .abelian import AbelianGroup, GroupHom, format_vector, solve_in_group
from .kprofile import KProfile, _act_vec, _mul_vec

Vector = tuple[int, ...]

EXHAUSTIVE_ASSOC_LIMIT = 256
RANDOM_TRIPLES = 20000


class TwistedError(ValueError):
    """A twisted-group invariant or group axiom failed."""


class ResourceError(RuntimeError):
    """A closure grew past the configured bound."""


def max_closure() -> int:
    return int(float(os.environ.get("MOOREK_MAX_CLOSURE", "100000")))


# --------------------------------------------------------------------------
# element indexing


def _radix(g: AbelianGroup) -> np.ndarray:
    f = list(g.factors)
    out = [1] * len(f)
    for i in range(len(f) - 2, -1, -1):
        out[i] = out[i + 1] * f[i + 1]
    return np.array(out, dtype=np.int64)


def all_elements(g: AbelianGroup) -> np.ndarray:
    """Elements as an (order x rank) array in lexicographic order."""
    if not g.is_finite:
        raise TwistedError("carrier must be finite")
    if g.rank == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.meshgrid(*[np.arange(d) for d in g.factors], indexing="ij")
    return np.stack([x.reshape(-1) for x in grids], axis=1).astype(np.int64)


# --------------------------------------------------------------------------
# the group


@dataclass(frozen=True, eq=False)
class TwistedGroup:
    name: str
    n: int
    carrier: AbelianGroup
    torsion: AbelianGroup  # T = Tor(K̃^0, Z_n) (or the modeled part of it)
    beta: GroupHom  # carrier -> T
    inclusion: GroupHom  # T -> K̃^0
    ring: np.ndarray = field(repr=False)  # (|T gens|, |T gens|, |T gens|) structure constants
    pairing: np.ndarray = field(repr=False)  # (carrier gens, T gens, carrier gens)
    assumptions: tuple[str, ...] = ()

    @property
    def order(self) -> int:
        return self.carrier.order or 1

    def elements(self) -> list[Vector]:
        return [tuple(int(x) for x in row) for row in all_elements(self.carrier)]

    def index(self, a: Sequence[int]) -> int:
        return self.carrier.index(a)

    def label(self, a: Sequence[int]) -> str:
        return format_vector(self.carrier, a)

    def find(self, label: str) -> Vector:
        return self.carrier.gen(self.carrier.labels.index(label))

    # bilinear maps
    def act(self, a: Sequence[int], s: Sequence[int]) -> Vector:
        """``a·s`` for a carrier element and a torsion class."""
        v = np.einsum("c,t,ctk->k", np.array(a, dtype=np.int64), np.array(s, dtype=np.int64), self.pairing)
        return self.carrier.reduce([int(x) for x in v])

    def tmul(self, s: Sequence[int], t: Sequence[int]) -> Vector:
        v = np.einsum("a,b,abk->k", np.array(s, dtype=np.int64), np.array(t, dtype=np.int64), self.ring)
        return self.torsion.reduce([int(x) for x in v])

    def to_json(self) -> dict:
        return {"name": self.name, "n": self.n, "carrier": self.carrier.to_json(),
                "torsion": self.torsion.to_json(), "beta": self.beta.to_json(),
                "assumptions": list(self.assumptions)}


def _check(cond: bool, msg: str):
    if not cond:
        raise TwistedError(msg)


def build(p: KProfile, check: bool = True) -> TwistedGroup:
    """Twisted group on ``p.k1n`` with all invariants and group axioms checked."""
    layer = p.mod[1]
    carrier = layer.group
    if not carrier.is_finite:
        raise TwistedError("K^1(X;Z_n) must be finite")
    if (0, 1) not in p.act:
        raise TwistedError(f"the action of K̃^0 on K^1(;Z_{p.n}) is not modeled for {p.name}")
    tors = layer.tors
    t = tors.domain
    cols = [tors.column(c) for c in range(t.rank)]
    bcols = []
    for c in range(carrier.rank):
        x = solve_in_group(tors.codomain, cols, layer.beta.column(c))
        _check(x is not None, f"β({carrier.labels[c]}) is outside the modeled torsion")
        bcols.append(t.reduce(x))
    beta = GroupHom.from_columns(carrier, t, bcols)
    ring = np.zeros((t.rank, t.rank, t.rank), dtype=np.int64)
    for a in range(t.rank):
        for b in range(t.rank):
            prod = _mul_vec(p.red, p.ring, 0, tors.column(a), 0, tors.column(b))
            x = solve_in_group(tors.codomain, cols, prod)
            _check(x is not None, "the torsion is not closed under products")
            ring[a, b] = t.reduce(x)
    pairing = np.zeros((carrier.rank, t.rank, carrier.rank), dtype=np.int64)
    for c in range(carrier.rank):
        for s in range(t.rank):
            pairing[c, s] = _act_vec(p, 0, tors.column(s), 1, carrier.gen(c))
    tg = TwistedGroup(p.name, p.n, carrier, t, beta, GroupHom(t, tors.codomain, tors.matrix), ring, pairing,
                      p.assumptions)
    if check:
        check_invariants(tg)
        check_axioms(tg)
    return tg


def check_invariants(tg: TwistedGroup) -> None:
    c, t = tg.carrier, tg.torsion
    for a in range(c.rank):
        for s in range(t.rank):
            lhs = tg.beta(tg.act(c.gen(a), t.gen(s)))
            rhs = tg.tmul(tg.beta(c.gen(a)), t.gen(s))
            _check(lhs == rhs, f"β(a·s) != β(a)·s at a={c.labels[a]}, s={t.labels[s]}")
            for u in range(t.rank):
                lhs = tg.act(tg.act(c.gen(a), t.gen(s)), t.gen(u))
                rhs = tg.act(c.gen(a), tg.tmul(t.gen(s), t.gen(u)))
                _check(lhs == rhs, f"(a·s)·t != a·(st) at a={c.labels[a]}, s={t.labels[s]}, t={t.labels[u]}")
    bound = max(t.order or 1, 1)
    for s in t.elements():
        _check(_power_vanishes(tg, s, bound), f"{format_vector(t, s)} is not nilpotent")


def _power_vanishes(tg: TwistedGroup, s: Vector, bound: int) -> bool:
    cur = s
    for _ in range(bound + 1):
        if not any(cur):
            return True
        cur = tg.tmul(cur, s)
    return False


# --------------------------------------------------------------------------
# vectorized arithmetic


def _reduce_arr(g: AbelianGroup, x: np.ndarray) -> np.ndarray:
    mods = np.array(g.factors, dtype=np.int64)
    return np.mod(x, mods)


def _beta_arr(tg: TwistedGroup, a: np.ndarray) -> np.ndarray:
    m = np.array(tg.beta.matrix, dtype=np.int64).reshape(tg.torsion.rank, tg.carrier.rank)
    return _reduce_arr(tg.torsion, a @ m.T)


def compose_arr(tg: TwistedGroup, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise ``a∘b`` for broadcastable (…, rank) arrays."""
    if tg.carrier.rank == 0:
        return np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.int64)
    sb = _beta_arr(tg, b)
    tw = np.einsum("...c,...t,ctk->...k", a, sb, tg.pairing) if tg.torsion.rank else 0
    return _reduce_arr(tg.carrier, a + b - tw)


def table(tg: TwistedGroup) -> np.ndarray:
    """Full ``∘`` table as element indices in lexicographic order."""
    els = all_elements(tg.carrier)
    out = compose_arr(tg, els[:, None, :], els[None, :, :])
    if tg.carrier.rank == 0:
        return np.zeros((1, 1), dtype=np.int64)
    return out @ _radix(tg.carrier)


def check_axioms(tg: TwistedGroup, seed: int = 0) -> None:
    """Identity, two-sided inverses and associativity of ∘."""
    els = all_elements(tg.carrier)
    zero = np.zeros_like(els)
    _check(np.array_equal(compose_arr(tg, els, zero), els), "0 is not a right identity")
    _check(np.array_equal(compose_arr(tg, zero, els), els), "0 is not a left identity")
    inv = np.array([inverse(tg, tuple(int(x) for x in a)) for a in els], dtype=np.int64).reshape(els.shape)
    _check(not compose_arr(tg, inv, els).any(), "inverse formula fails on the left")
    _check(not compose_arr(tg, els, inv).any(), "inverse formula fails on the right")
    n = len(els)
    if n <= EXHAUSTIVE_ASSOC_LIMIT:
        tab = table(tg)
        lhs = tab[tab, :]  # lhs[i, j, k] = (i∘j)∘k
        rhs = tab[:, tab]  # rhs[i, j, k] = i∘(j∘k)
        ok = np.array_equal(lhs, rhs)
    else:
        rng = np.random.default_rng(seed)
        idx = rng.integers(0, n, size=(RANDOM_TRIPLES, 3))
        a, b, c = els[idx[:, 0]], els[idx[:, 1]], els[idx[:, 2]]
        ok = np.array_equal(compose_arr(tg, compose_arr(tg, a, b), c), compose_arr(tg, a, compose_arr(tg, b, c)))
    _check(ok, "∘ is not associative")


# --------------------------------------------------------------------------
# operations


def _vec(tg: TwistedGroup, a: Sequence[int]) -> Vector:
    if len(a) != tg.carrier.rank:
        raise TwistedError(f"element {tuple(a)} does not belong to the carrier {tg.carrier}")
    return tg.carrier.reduce(a)


def compose(tg: TwistedGroup, a: Sequence[int], b: Sequence[int]) -> Vector:
    a, b = _vec(tg, a), _vec(tg, b)
    c = tg.carrier
    return c.sub(c.add(a, b), tg.act(a, tg.beta(b)))


def inverse(tg: TwistedGroup, a: Sequence[int]) -> Vector:
    """``-a·(1-β(a))^{-1}`` with the geometric series ``1 + s + s² + …``."""
    a = _vec(tg, a)
    c = tg.carrier
    s = tg.beta(a)
    acc = a
    power = s
    for _ in range(tg.order + 1):
        if not any(power):
            return c.neg(acc)
        acc = c.add(acc, tg.act(a, power))
        power = tg.tmul(power, s)
    raise TwistedError(f"geometric series for {tg.label(a)} does not terminate within {tg.order} terms")


def conjugate(tg: TwistedGroup, a: Sequence[int], b: Sequence[int]) -> Vector:
    """``a^{∘-1}∘b∘a``, checked against ``b + a·β(b) - β(a)·b``."""
    out = compose(tg, inverse(tg, a), compose(tg, b, a))
    c = tg.carrier
    formula = c.sub(c.add(b, tg.act(a, tg.beta(b))), tg.act(b, tg.beta(a)))
    if out != formula:
        raise TwistedError(f"conjugation formula fails for a={tg.label(a)}, b={tg.label(b)}")
    return out


@dataclass(frozen=True)
class Unit:
    """The unit ``1 - t`` for a torsion class t."""

    torsion: AbelianGroup
    t: Vector

    def __str__(self) -> str:
        if not any(self.t):
            return "1"
        return f"1 - ({format_vector(self.torsion, self.t)})"


def beta_hat(tg: TwistedGroup, a: Sequence[int]) -> Unit:
    return Unit(tg.torsion, tg.beta(_vec(tg, a)))


def unit_mul(tg: TwistedGroup, u: Unit, v: Unit) -> Unit:
    """``(1-s)(1-t) = 1 - (s + t - s·t)``."""
    t = tg.torsion
    return Unit(t, t.sub(t.add(u.t, v.t), tg.tmul(u.t, v.t)))


@dataclass(frozen=True)
class UnitGroup:
    torsion: AbelianGroup
    elements: tuple[Vector, ...]
    table: tuple[tuple[int, ...], ...]

    @property
    def order(self) -> int:
        return len(self.elements)


def unit_group(tg: TwistedGroup) -> UnitGroup:
    t = tg.torsion
    els = tuple(t.elements())
    pos = {e: i for i, e in enumerate(els)}
    tab = tuple(
        tuple(pos[unit_mul(tg, Unit(t, s), Unit(t, u)).t] for u in els) for s in els
    )
    return UnitGroup(t, els, tab)


# --------------------------------------------------------------------------
# subgroups and tables


@dataclass(frozen=True, eq=False)
class SubgroupTable:
    """A finite group given by its multiplication table.

    ``elements`` are carrier vectors sorted lexicographically; ``table[i][j]``
    is the index of ``elements[i] ∘ elements[j]``.
    """

    elements: tuple[Vector, ...]
    table: np.ndarray
    n: int | None = None
    labels: tuple[str, ...] = ()
    assumptions: tuple[str, ...] = ()

    @property
    def order(self) -> int:
        return len(self.elements)

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "elements": [list(e) for e in self.elements],
            "table": [[int(x) for x in row] for row in self.table],
        }


def subgroup(tg: TwistedGroup, generators: Iterable[Sequence[int]]) -> SubgroupTable:
    """Closure of the generators under ∘ (inverses come for free in a finite group)."""
    gens = [_vec(tg, g) for g in generators]
    bound = max_closure()
    zero = tg.carrier.zero()
    seen = {zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                b = compose(tg, a, g)
                if b not in seen:
                    seen.add(b)
                    if len(seen) > bound:
                        raise ResourceError(f"subgroup closure exceeds {bound} elements (MOOREK_MAX_CLOSURE)")
                    nxt.append(b)
        frontier = nxt
    els = tuple(sorted(seen))
    arr = np.array(els, dtype=np.int64).reshape(len(els), tg.carrier.rank)
    prod = compose_arr(tg, arr[:, None, :], arr[None, :, :])
    pos = {e: i for i, e in enumerate(els)}
    tab = np.array([[pos[tuple(int(x) for x in prod[i, j])] for j in range(len(els))] for i in range(len(els))],
                   dtype=np.int64)
    return SubgroupTable(els, tab, tg.n, tuple(tg.label(e) for e in els), tg.assumptions)


def full_table(tg: TwistedGroup) -> SubgroupTable:
    els = tuple(tg.elements())
    return SubgroupTable(els, table(tg), tg.n, tuple(tg.label(e) for e in els), tg.assumptions)


def heisenberg_generators(tg: TwistedGroup) -> list[Vector]:
    """``ρ(1⊗u), ρ(g⊗u), x`` in a twisted group built from the MxSM catalog entry."""
    return [tg.find("ρ(1⊗u)"), tg.find("ρ(g⊗u)"), tg.find("x")]


# --------------------------------------------------------------------------
# classification of finite tables


class _Table:
    def __init__(self, t: np.ndarray):
        self.t = np.asarray(t, dtype=np.int64)
        self.size = self.t.shape[0]
        ids = [e for e in range(self.size) if np.array_equal(self.t[e], np.arange(self.size))]
        if not ids:
            raise TwistedError("table has no identity")
        self.e = ids[0]
        self.inv = np.empty(self.size, dtype=np.int64)
        for a in range(self.size):
            b = np.nonzero(self.t[a] == self.e)[0]
            if len(b) != 1:
                raise TwistedError("table is not a group (missing inverse)")
            self.inv[a] = b[0]
        self.orders = np.array([self.order_of(a) for a in range(self.size)])

    def order_of(self, a: int) -> int:
        k, x = 1, a
        while x != self.e:
            x = self.t[x, a]
            k += 1
        return k

    def power(self, a: int, k: int) -> int:
        x = self.e
        for _ in range(k):
            x = self.t[x, a]
        return x

    def comm(self, a: int, b: int) -> int:
        # a^-1 b^-1 a b
        return int(self.t[self.t[self.t[self.inv[a], self.inv[b]], a], b])

    def closure(self, gens: Iterable[int], limit: int | None = None) -> set[int]:
        gens = [int(g) for g in gens]
        seen = {self.e}
        frontier = [self.e]
        while frontier:
            nxt = []
            for a in frontier:
                for g in gens:
                    b = int(self.t[a, g])
                    if b not in seen:
                        seen.add(b)
                        nxt.append(b)
                        if limit and len(seen) > limit:
                            return seen
            frontier = nxt
        return seen

    def center(self) -> list[int]:
        return [z for z in range(self.size) if np.array_equal(self.t[z, :], self.t[:, z])]

    def derived(self) -> set[int]:
        comms = {self.comm(a, b) for a in range(self.size) for b in range(self.size)}
        return self.closure(comms)


def _abelian_invariants(tb: _Table) -> list[int]:
    """Invariant factors of an abelian table from p-power torsion counts."""
    parts: dict[int, list[int]] = {}
    for p, e in factorint(tb.size).items():
        counts = []
        k = 0
        while True:
            k += 1
            c = sum(1 for a in range(tb.size) if (p**k) % int(tb.orders[a]) == 0)
            m = round(np.log(c) / np.log(p))
            counts.append(m)
            if m == e:
                break
        prev, exps = 0, []
        at_least = []
        for m in counts:
            at_least.append(m - prev)
            prev = m
        # at_least[k-1] = number of cyclic p-factors of exponent >= k
        for k in range(len(at_least)):
            nxt = at_least[k + 1] if k + 1 < len(at_least) else 0
            exps += [k + 1] * (at_least[k] - nxt)
        parts[p] = sorted(exps, reverse=True)
    width = max((len(v) for v in parts.values()), default=0)
    factors = []
    for i in range(width):
        d = 1
        for p, exps in parts.items():
            if i < len(exps):
                d *= p ** exps[i]
        factors.append(d)
    return sorted(factors)


@dataclass
class Classification:
    order: int
    abelian: bool
    exponent: int
    center_order: int
    derived_order: int
    abelian_invariants: list[int] | None
    heisenberg: bool
    heisenberg_witness: dict | None
    direct_factor: dict | None
    assumptions: list[str]
    n: int | None

    @property
    def summary(self) -> str:
        if self.abelian:
            inv = " ⊕ ".join(f"Z_{d}" for d in self.abelian_invariants) or "trivial"
            return f"abelian, order {self.order}, {inv}"
        head = f"nonabelian, order {self.order}, exponent {self.exponent}"
        if self.heisenberg:
            return f"{head}, Heisenberg"
        if self.direct_factor:
            return f"{head}, Heisenberg × Z_{self.direct_factor['central_factor_order']}"
        return head

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "abelian": self.abelian,
            "exponent": self.exponent,
            "center_order": self.center_order,
            "derived_order": self.derived_order,
            "abelian_invariants": self.abelian_invariants,
            "heisenberg": self.heisenberg,
            "heisenberg_witness": self.heisenberg_witness,
            "direct_factor": self.direct_factor,
            "assumptions": self.assumptions,
            "summary": self.summary,
        }


def _icbrt(x: int) -> int | None:
    r = round(x ** (1 / 3))
    for c in (r - 1, r, r + 1):
        if c >= 2 and c**3 == x:
            return c
    return None


def _heisenberg_pair(tb: _Table, n: int, center: set[int], need: int) -> tuple[int, int, int] | None:
    """x, y of order n with ``[x,y]`` central of order n generating a group of order ``need``."""
    cands = [a for a in range(tb.size) if tb.orders[a] == n]
    for x in cands:
        for y in cands:
            if y <= x:
                continue
            z = tb.comm(x, y)
            if z == tb.e or z not in center or tb.orders[z] != n:
                continue
            h = tb.closure([x, y], limit=need)
            if len(h) == need:
                return x, y, z
    return None


def classify(g: SubgroupTable | TwistedGroup, n: int | None = None) -> Classification:
    if isinstance(g, TwistedGroup):
        g = full_table(g)
    n = n or g.n
    tb = _Table(g.table)
    size = tb.size
    abelian = bool(np.array_equal(tb.t, tb.t.T))
    exponent = reduce(lcm, [int(o) for o in tb.orders], 1)
    center = tb.center()
    cset = set(center)
    derived = tb.derived()
    labels = g.labels or tuple(str(e) for e in g.elements)
    heis, witness, direct = False, None, None
    if not abelian:
        m = _icbrt(size)
        if m and (n is None or n == m):
            found = _heisenberg_pair(tb, m, cset, size)
            if found:
                heis = True
                witness = {k: labels[v] for k, v in zip("xyz", found)}
        if not heis and n and size == n**4:
            found = _heisenberg_pair(tb, n, cset, n**3)
            if found:
                h = tb.closure(found[:2])
                for c in center:
                    if tb.orders[c] != n:
                        continue
                    if all(tb.power(c, k) not in h for k in range(1, n)):
                        direct = {"heisenberg_order": n**3, "central_factor_order": n,
                                  "central_generator": labels[c],
                                  "heisenberg_witness": {k: labels[v] for k, v in zip("xyz", found)}}
                        break
    return Classification(
        order=size,
        abelian=abelian,
        exponent=exponent,
        center_order=len(center),
        derived_order=len(derived),
        abelian_invariants=_abelian_invariants(tb) if abelian else None,
        heisenberg=heis,
        heisenberg_witness=witness,
        direct_factor=direct,
        assumptions=list(g.assumptions),
        n=n,
    )


def brute_inverse(sub: SubgroupTable) -> list[int]:
    """Inverse indices found by scanning the table."""
    tb = _Table(sub.table)
    return [int(x) for x in tb.inv]


def noncommuting_pair(tg: TwistedGroup, candidates: Sequence[Sequence[int]] | None = None):
    """First pair with ``a∘b != b∘a`` (None if the group is abelian)."""
    els = [tuple(c) for c in candidates] if candidates is not None else tg.elements()
    for a in els:
        for b in els:
            if compose(tg, a, b) != compose(tg, b, a):
                return a, b
    return None
