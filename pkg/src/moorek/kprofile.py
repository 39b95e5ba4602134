"""K-theoretic records of spaces.

A :class:`KProfile` stores the reduced integral groups ``K̃^0, K̃^1`` with their
graded product, the mod-n groups with reduction ``ρ`` and Bockstein ``β``, and
the left action of integral classes on mod-n classes.  Leaves carry built-in
data; suspension, smash and product are assembled from Künneth and the product
splitting.  Every constructor validates before returning.

Mod-n layer of degree j: the Bockstein sequence gives

    0 -> K̃^j ⊗ Z_n --ρ--> K^j(;Z_n) --β--> Tor(K̃^{j+1}, Z_n) -> 0

and a layer stores, besides ρ and β, a section ``lift`` of β defined on a
subgroup ``T`` of the n-torsion (all of it, except in slice profiles).  The
action of integral classes on mod-n classes is derived from that section::

    x · (ρ(y) + lift(t)) = ρ(x·y) + lift((-1)^i x·t)      for x in K̃^i
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import gcd
from typing import Callable, Iterable, Mapping, Sequence

from .abelian import (
    AbelianError,
    AbelianGroup,
    Element,
    GroupHom,
    direct_sum,
    express,
    format_vector,
    group_to_json,
    is_exact,
    normalize_cyclic,
    solve_in_group,
    tensor,
    tensor_projection,
    tor,
    torsion_inclusion,
)
from . import spaces
from .spaces import SpaceExpr

Vector = tuple[int, ...]
Table = tuple[tuple[Vector, ...], ...]
DEGREES = ((0, 0), (0, 1), (1, 0), (1, 1))


class ProfileError(ValueError):
    """A constructed profile failed validation."""

    def __init__(self, message: str, report: "ValidationReport | None" = None):
        self.report = report
        super().__init__(message)


class AmbiguityError(ValueError):
    """The data does not determine a group or product; splitting data is needed."""

    def __init__(self, message: str, key: str = "*", options: Sequence[str] = ()):
        self.key = key
        self.options = tuple(options)
        super().__init__(message)


class UnsupportedCatalogError(ValueError):
    pass


def _empty() -> AbelianGroup:
    return AbelianGroup(())


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


# --------------------------------------------------------------------------
# data model


@dataclass(frozen=True)
class ModLayer:
    """Mod-n group of one degree j with its Bockstein data."""

    group: AbelianGroup
    rho: GroupHom  # K̃^j -> group
    beta: GroupHom  # group -> K̃^{j+1}
    tors: GroupHom  # T -> K̃^{j+1}, the n-torsion (or part of it) carrying a section
    lift: GroupHom  # T -> group with beta ∘ lift = tors
    complete: bool = True


@dataclass(frozen=True, eq=False)
class KProfile:
    name: str
    n: int
    red: tuple[AbelianGroup, AbelianGroup]
    mod: tuple[ModLayer, ModLayer]
    ring: Mapping[tuple[int, int], Table]
    act: Mapping[tuple[int, int], Table]
    connected: bool = True
    suspension: bool = False
    slice: bool = False
    assumptions: tuple[str, ...] = ()
    flags: tuple[str, ...] = ()
    summands: tuple | None = field(default=None, repr=False)

    k0red = property(lambda self: self.red[0])
    k1red = property(lambda self: self.red[1])
    k0n = property(lambda self: self.mod[0].group)
    k1n = property(lambda self: self.mod[1].group)
    rho0 = property(lambda self: self.mod[0].rho)
    rho1 = property(lambda self: self.mod[1].rho)
    beta0 = property(lambda self: self.mod[0].beta)
    beta1 = property(lambda self: self.mod[1].beta)

    @property
    def trivial(self) -> bool:
        return self.red[0].rank == 0 and self.red[1].rank == 0

    def red_element(self, i: int, coeffs: Sequence[int]) -> Element:
        return Element(self.red[i], tuple(coeffs))

    def mod_element(self, j: int, coeffs: Sequence[int]) -> Element:
        return Element(self.mod[j].group, tuple(coeffs))

    def find(self, label: str) -> tuple[str, int, Vector]:
        """Locate a generator by label: ``("red"|"mod", degree, vector)``."""
        for kind, groups in (("red", self.red), ("mod", [m.group for m in self.mod])):
            for d, g in enumerate(groups):
                if label in g.labels:
                    return kind, d, g.gen(g.labels.index(label))
        raise KeyError(label)

    def to_json(self) -> dict:
        def sparse(t: Table):
            return [[a, b, list(v)] for a, row in enumerate(t) for b, v in enumerate(row) if any(v)]

        out = {
            "name": self.name,
            "n": self.n,
            "k0red": self.red[0].to_json(),
            "k1red": self.red[1].to_json(),
            "k0n": self.k0n.to_json(),
            "k1n": self.k1n.to_json(),
            "rho0": self.rho0.to_json(),
            "rho1": self.rho1.to_json(),
            "beta0": self.beta0.to_json(),
            "beta1": self.beta1.to_json(),
            "ring": {f"{i}{j}": sparse(self.ring[(i, j)]) for i, j in DEGREES},
            "act": {f"{i}{j}": sparse(self.act[(i, j)]) for i, j in DEGREES if (i, j) in self.act},
            "connected": self.connected,
            "suspension": self.suspension,
            "slice": self.slice,
            "assumptions": list(self.assumptions),
            "flags": list(self.flags),
        }
        return out


# --------------------------------------------------------------------------
# arithmetic on profiles


def _mul_vec(red, ring, i: int, u: Sequence[int], j: int, v: Sequence[int]) -> Vector:
    k = (i + j) % 2
    acc = [0] * red[k].rank
    table = ring[(i, j)]
    for a, ua in enumerate(u):
        if not ua:
            continue
        for b, vb in enumerate(v):
            if not vb:
                continue
            for c, w in enumerate(table[a][b]):
                acc[c] += ua * vb * w
    return red[k].reduce(acc)


def _act_vec(p: KProfile, i: int, x: Sequence[int], j: int, b: Sequence[int]) -> Vector:
    if (i, j) not in p.act:
        raise AbelianError(f"action K̃^{i} x K^{j}(;Z_{p.n}) is not modeled in {p.name}")
    k = (i + j) % 2
    acc = [0] * p.mod[k].group.rank
    table = p.act[(i, j)]
    for a, xa in enumerate(x):
        if not xa:
            continue
        for c, bc in enumerate(b):
            if not bc:
                continue
            for e, w in enumerate(table[a][c]):
                acc[e] += xa * bc * w
    return p.mod[k].group.reduce(acc)


def _degree_of(groups: Sequence[AbelianGroup], g: AbelianGroup, given: int | None, what: str) -> int:
    if given is not None:
        if groups[given] != g:
            raise AbelianError(f"element does not belong to {what} degree {given}")
        return given
    same = [d for d in (0, 1) if groups[d] is g]
    if len(same) == 1:
        return same[0]
    equal = [d for d in (0, 1) if groups[d] == g]
    if len(same) == 2 or len(equal) == 2:
        if g.rank == 0:
            return 0
        raise AbelianError(f"cannot tell the degree of the element; pass it explicitly")
    if len(equal) == 1:
        return equal[0]
    raise AbelianError(f"element does not belong to the profile's {what} groups")


def mult(p: KProfile, x: Element, y: Element, i: int | None = None, j: int | None = None) -> Element:
    """Internal product ``x·y`` of reduced integral classes."""
    i = _degree_of(p.red, x.group, i, "reduced integral")
    j = _degree_of(p.red, y.group, j, "reduced integral")
    k = (i + j) % 2
    return Element(p.red[k], _mul_vec(p.red, p.ring, i, x.coeffs, j, y.coeffs))


def act(
    p: KProfile, x: Element, b: Element, side: str = "left", i: int | None = None, j: int | None = None
) -> Element:
    """Action of an integral class on a mod-n class; ``side="right"`` is ``b·x``."""
    if side not in ("left", "right"):
        raise AbelianError("side must be 'left' or 'right'")
    i = _degree_of(p.red, x.group, i, "reduced integral")
    j = _degree_of([m.group for m in p.mod], b.group, j, "mod-n")
    k = (i + j) % 2
    v = _act_vec(p, i, x.coeffs, j, b.coeffs)
    if side == "right" and (i * j) % 2:
        v = p.mod[k].group.neg(v)
    return Element(p.mod[k].group, v)


def _solve_tors(layer: ModLayer, target: Sequence[int]) -> list[int] | None:
    g = layer.tors.codomain
    if not any(g.reduce(target)):
        return [0] * layer.tors.domain.rank
    cols = [layer.tors.column(c) for c in range(layer.tors.domain.rank)]
    return solve_in_group(g, cols, target)


class _Unmodeled(Exception):
    pass


def _action_value(red, mod, ring, i: int, x: Vector, j: int, b: Vector) -> Vector:
    src = mod[j]
    k = (i + j) % 2
    tgt = mod[k]
    t = src.beta(b)
    tau = _solve_tors(src, t)
    if tau is None:
        raise _Unmodeled
    rest = src.group.sub(b, src.lift(tau))
    y = solve_in_group(src.group, [src.rho.column(c) for c in range(red[j].rank)], rest)
    if y is None:
        raise _Unmodeled
    part = tgt.rho(_mul_vec(red, ring, i, x, j, y))
    xt = red[(k + 1) % 2].scale(_sign(i), _mul_vec(red, ring, i, x, (j + 1) % 2, t))
    tau2 = _solve_tors(tgt, xt)
    if tau2 is None:
        raise _Unmodeled
    return tgt.group.add(part, tgt.lift(tau2))


def derive_action(red, mod, ring) -> dict[tuple[int, int], Table]:
    """Action tables from the section rule; tables needing unmodeled values are omitted."""
    out = {}
    for i, j in DEGREES:
        try:
            out[(i, j)] = tuple(
                tuple(
                    _action_value(red, mod, ring, i, red[i].gen(a), j, mod[j].group.gen(b))
                    for b in range(mod[j].group.rank)
                )
                for a in range(red[i].rank)
            )
        except _Unmodeled:
            continue
    return out


# --------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str = ""
    skipped: bool = False


@dataclass(frozen=True)
class ValidationReport:
    profile: str
    checks: tuple[Check, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.ok]

    def __str__(self) -> str:
        lines = [f"validation of {self.profile}:"]
        for c in self.checks:
            mark = "skip" if c.skipped else ("ok" if c.ok else "FAIL")
            lines.append(f"  [{mark}] {c.name}" + (f": {c.detail}" if c.detail else ""))
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "profile": self.profile,
            "ok": self.ok,
            "checks": [
                {"name": c.name, "ok": c.ok, "skipped": c.skipped, "detail": c.detail} for c in self.checks
            ],
        }


def _lab(g: AbelianGroup, v: Sequence[int]) -> str:
    return format_vector(g, v)


def _check_tables(p: KProfile) -> Check:
    for (i, j), t in p.ring.items():
        k = (i + j) % 2
        for a, da in enumerate(p.red[i].factors):
            for b, db in enumerate(p.red[j].factors):
                for d in (da, db):
                    if d and any(p.red[k].scale(d, t[a][b])):
                        return Check("tables-well-defined", False,
                                     f"{p.red[i].labels[a]}·{p.red[j].labels[b]} not killed by {d}")
    for (i, j), t in p.act.items():
        k = (i + j) % 2
        g = p.mod[k].group
        for a, da in enumerate(p.red[i].factors):
            for b, db in enumerate(p.mod[j].group.factors):
                for d in (da, db):
                    if d and any(g.scale(d, t[a][b])):
                        return Check("tables-well-defined", False,
                                     f"{p.red[i].labels[a]}·{p.mod[j].group.labels[b]} not killed by {d}")
    return Check("tables-well-defined", True)


def _bockstein_cycle(p: KProfile) -> list[GroupHom]:
    m0 = GroupHom.scalar(p.red[0], -p.n)
    m1 = GroupHom.scalar(p.red[1], -p.n)
    return [m0, p.rho0, p.beta0, m1, p.rho1, p.beta1]


def _check_exact(p: KProfile) -> list[Check]:
    cyc = _bockstein_cycle(p)
    names = ["K̃^0", "K̃^0", "K^0(;Z_n)", "K̃^1", "K̃^1", "K^1(;Z_n)"]
    bad = []
    for pos, (f, g) in enumerate(zip(cyc, cyc[1:] + cyc[:1])):
        if not f.then(g).is_zero():
            bad.append(names[(pos + 1) % 6])
    out = [Check("bockstein-complex", not bad, f"composite nonzero at {', '.join(bad)}" if bad else "")]
    if p.slice:
        out.append(Check("bockstein-exact", True, "slice profile: mod-n groups are partial", skipped=True))
        return out
    rep = is_exact(cyc, cyclic=True)
    fails = [names[nd.position % 6] for nd in rep.nodes if not nd.exact]
    out.append(Check("bockstein-exact", rep.exact, f"not exact at {', '.join(fails)}" if fails else ""))
    return out


def _check_section(p: KProfile) -> Check:
    for j, layer in enumerate(p.mod):
        if layer.lift.then(layer.beta).matrix != layer.tors.matrix:
            return Check("bockstein-section", False, f"β∘lift differs from the torsion inclusion in degree {j}")
    return Check("bockstein-section", True)


def _check_sign(p: KProfile) -> Check:
    for i, j in DEGREES:
        k = (i + j) % 2
        for a in range(p.red[i].rank):
            for b in range(p.red[j].rank):
                lhs = p.ring[(j, i)][b][a]
                rhs = p.red[k].scale(_sign(i * j), p.ring[(i, j)][a][b])
                if lhs != rhs:
                    return Check("sign-rule", False,
                                 f"{p.red[j].labels[b]}·{p.red[i].labels[a]} = {_lab(p.red[k], lhs)} but "
                                 f"(-1)^{i * j} {p.red[i].labels[a]}·{p.red[j].labels[b]} = {_lab(p.red[k], rhs)}")
    return Check("sign-rule", True)


def _power_is_nil(p: KProfile, i: int, z: Vector, bound: int) -> bool:
    cur, deg = z, i
    for _ in range(bound):
        if not any(cur):
            return True
        cur = _mul_vec(p.red, p.ring, deg, cur, i, z)
        deg = (deg + i) % 2
    return not any(cur)


def _check_nilpotent(p: KProfile) -> Check:
    if not p.connected:
        return Check("nilpotency", True, "not connected: reduced ring may have idempotents", skipped=True)
    bound = p.red[0].rank + p.red[1].rank + 1
    for i in (0, 1):
        g = p.red[i]
        cands: list[Vector] = []
        if g.is_finite and (g.order or 1) <= 4096:
            cands = list(g.elements())
        else:
            cands = [g.gen(a) for a in range(g.rank)]
            if g.rank:
                cands.append(tuple([1] * g.rank))
        for z in cands:
            if not _power_is_nil(p, i, z, bound):
                return Check("nilpotency", False, f"{_lab(g, z)} has no vanishing power up to {bound}")
    return Check("nilpotency", True)


def _check_ring_assoc(p: KProfile) -> Check:
    for i in (0, 1):
        for j in (0, 1):
            for k in (0, 1):
                for a in range(p.red[i].rank):
                    for b in range(p.red[j].rank):
                        xy = p.ring[(i, j)][a][b]
                        for c in range(p.red[k].rank):
                            lhs = _mul_vec(p.red, p.ring, (i + j) % 2, xy, k, p.red[k].gen(c))
                            yz = p.ring[(j, k)][b][c]
                            rhs = _mul_vec(p.red, p.ring, i, p.red[i].gen(a), (j + k) % 2, yz)
                            if lhs != rhs:
                                names = (p.red[i].labels[a], p.red[j].labels[b], p.red[k].labels[c])
                                return Check("ring-associativity", False, "(%s·%s)·%s differs" % names)
    return Check("ring-associativity", True)


def _check_action(p: KProfile) -> list[Check]:
    out = []
    missing = [f"{i}{j}" for i, j in DEGREES if (i, j) not in p.act]
    if missing and not p.slice:
        out.append(Check("action-tables", False, f"missing tables {missing}"))
    else:
        out.append(Check("action-tables", True, f"unmodeled in slice: {missing}" if missing else ""))
    rho_l = rho_r = beta_l = beta_r = assoc = None
    for i, j in DEGREES:
        if (i, j) not in p.act:
            continue
        k = (i + j) % 2
        tgt = p.mod[k]
        for a in range(p.red[i].rank):
            x = p.red[i].gen(a)
            xl = p.red[i].labels[a]
            for c in range(p.red[j].rank):
                y = p.red[j].gen(c)
                ry = p.mod[j].rho(y)
                left = _act_vec(p, i, x, j, ry)
                if rho_l is None and left != tgt.rho(_mul_vec(p.red, p.ring, i, x, j, y)):
                    rho_l = f"{xl}·ρ({p.red[j].labels[c]})"
                right = tgt.group.scale(_sign(i * j), left)
                if rho_r is None and right != tgt.rho(_mul_vec(p.red, p.ring, j, y, i, x)):
                    rho_r = f"ρ({p.red[j].labels[c]})·{xl}"
            for b in range(p.mod[j].group.rank):
                bv = p.mod[j].group.gen(b)
                bl = p.mod[j].group.labels[b]
                xb = _act_vec(p, i, x, j, bv)
                beta_b = p.mod[j].beta(bv)
                lhs = tgt.beta(xb)
                want = p.red[(k + 1) % 2].scale(_sign(i), _mul_vec(p.red, p.ring, i, x, (j + 1) % 2, beta_b))
                if beta_l is None and lhs != want:
                    beta_l = f"β({xl}·{bl})"
                bx = tgt.group.scale(_sign(i * j), xb)
                want_r = _mul_vec(p.red, p.ring, (j + 1) % 2, beta_b, i, x)
                if beta_r is None and tgt.beta(bx) != want_r:
                    beta_r = f"β({bl}·{xl})"
                for e in (0, 1):
                    if (e, k) not in p.act or (((e + i) % 2), j) not in p.act:
                        continue
                    for f in range(p.red[e].rank):
                        w = p.red[e].gen(f)
                        lhs2 = _act_vec(p, e, w, k, xb)
                        wx = _mul_vec(p.red, p.ring, e, w, i, x)
                        rhs2 = _act_vec(p, (e + i) % 2, wx, j, bv)
                        if assoc is None and lhs2 != rhs2:
                            assoc = f"{p.red[e].labels[f]}·({xl}·{bl})"
    for name, bad in (("rho-compat-left", rho_l), ("rho-compat-right", rho_r),
                      ("beta-compat-left", beta_l), ("beta-compat-right", beta_r),
                      ("action-associativity", assoc)):
        out.append(Check(name, bad is None, f"fails at {bad}" if bad else ""))
    return out


def validate(p: KProfile) -> ValidationReport:
    checks = [_check_tables(p)]
    checks += _check_exact(p)
    checks.append(_check_section(p))
    checks.append(_check_sign(p))
    checks.append(_check_nilpotent(p))
    checks.append(_check_ring_assoc(p))
    checks += _check_action(p)
    return ValidationReport(p.name, tuple(checks))


# --------------------------------------------------------------------------
# mod-n assembly


SPLITTING_FORMS = (
    '"split": the mod-n group is the direct sum of the two ends',
    '"slice": keep only the reduction image (partial profile)',
    '{"factors": [...], "rho": matrix, "lift": matrix}: explicit extension with a section',
)
PRODUCT_FORMS = (
    '{"products": {"L*R": {label: coeff}}}: value of an undetermined product of Tor classes',
)


def _ambiguous(what: str, key: str, degree: int, a: AbelianGroup, b: AbelianGroup) -> AmbiguityError:
    msg = (f"{what} is an extension of {b} by {a} that the data does not determine; "
           f"supply splitting data as {{{key!r}: {{\"k{degree}n\": ...}}}}")
    return AmbiguityError(msg, key, SPLITTING_FORMS)


def modn_layer(kj: AbelianGroup, knext: AbelianGroup, n: int, how=None, key: str = "*",
               degree: int = 0) -> ModLayer:
    """Mod-n group of degree ``degree`` from the Bockstein short exact sequence."""
    pi = tensor_projection(kj, n)
    a = pi.codomain.relabel([f"ρ({lab})" for lab in pi.codomain.labels])
    pi = GroupHom(kj, a, pi.matrix)
    iota = torsion_inclusion(knext, n)
    t = iota.domain
    b = t.relabel([f"β⁻¹({lab})" for lab in t.labels])
    if b.rank == 0:
        return ModLayer(a, pi, GroupHom.zero(a, knext), iota, GroupHom.zero(t, a))
    if a.rank == 0:
        return ModLayer(b, GroupHom.zero(kj, b), GroupHom(b, knext, iota.matrix), iota,
                        GroupHom(t, b, GroupHom.identity(t).matrix))
    if how is None and all(gcd(x, y) == 1 for x in a.factors for y in b.factors):
        how = "split"
    if how == "slice":
        t0 = _empty()
        return ModLayer(a, pi, GroupHom.zero(a, knext), GroupHom.zero(t0, knext), GroupHom.zero(t0, a), False)
    if how == "split":
        e, (ia, ib), (_, pb) = direct_sum(a, b)
        beta = pb.then(GroupHom(b, knext, iota.matrix))
        return ModLayer(e, pi.then(ia), beta, iota, GroupHom(t, e, ib.matrix))
    if isinstance(how, Mapping):
        try:
            e = AbelianGroup(tuple(how["factors"]), tuple(how.get("labels", ())))
            rho_a = GroupHom(a, e, tuple(tuple(r) for r in how["rho"]))
            lift = GroupHom(t, e, tuple(tuple(r) for r in how["lift"]))
        except (KeyError, TypeError, AbelianError) as exc:
            raise AmbiguityError(f"bad splitting data for K^{degree}: {exc}", key, SPLITTING_FORMS) from None
        gens = [rho_a.column(c) for c in range(a.rank)] + [lift.column(c) for c in range(t.rank)]
        cols = []
        for c in range(e.rank):
            x = solve_in_group(e, gens, e.gen(c))
            if x is None:
                raise AmbiguityError(f"splitting data for K^{degree} does not generate {e}", key, SPLITTING_FORMS)
            cols.append(iota(x[a.rank:]))
        try:
            beta = GroupHom.from_columns(e, knext, cols)
        except AbelianError as exc:
            raise AmbiguityError(f"splitting data for K^{degree} gives no Bockstein: {exc}", key,
                                 SPLITTING_FORMS) from None
        return ModLayer(e, pi.then(rho_a), beta, iota, lift)
    if how is not None:
        raise AmbiguityError(f"unknown splitting form {how!r}", key, SPLITTING_FORMS)
    raise _ambiguous(f"K^{degree}(;Z_{n})", key, degree, a, b)


def zero_ring(red) -> dict[tuple[int, int], Table]:
    return {
        (i, j): tuple(tuple(red[(i + j) % 2].zero() for _ in range(red[j].rank)) for _ in range(red[i].rank))
        for i, j in DEGREES
    }


def ring_from(red, entries: Callable[[int, int, int, int], Sequence[int] | None]) -> dict:
    """Ring tables from ``entries(i, a, j, b)`` (None means zero)."""
    out = {}
    for i, j in DEGREES:
        k = (i + j) % 2
        out[(i, j)] = tuple(
            tuple(red[k].reduce(entries(i, a, j, b) or red[k].zero()) for b in range(red[j].rank))
            for a in range(red[i].rank)
        )
    return out


def assemble(name, n, red, mod, ring, *, connected=True, suspension=False, assumptions=(), flags=(),
             summands=None, check=True) -> KProfile:
    """Derive the action, build the profile and refuse it unless it validates."""
    action = derive_action(red, mod, ring)
    p = KProfile(name, n, tuple(red), tuple(mod), ring, action, connected, suspension,
                 slice=not all(m.complete for m in mod), assumptions=tuple(dict.fromkeys(assumptions)),
                 flags=tuple(dict.fromkeys(flags)), summands=summands)
    if check:
        rep = validate(p)
        if not rep.ok:
            raise ProfileError(f"profile {name} failed validation\n{rep}", rep)
    return p


def build_profile(name, n, red, ring, splitting: Mapping | None = None, key="*", **kw) -> KProfile:
    splitting = splitting or {}
    mod = [modn_layer(red[j], red[(j + 1) % 2], n, splitting.get(f"k{j}n"), key, j) for j in (0, 1)]
    extra = [splitting["assumption"]] if splitting.get("assumption") else []
    kw["assumptions"] = tuple(kw.get("assumptions", ())) + tuple(extra)
    return assemble(name, n, red, mod, ring, **kw)


# --------------------------------------------------------------------------
# relabeling


def relabel(p: KProfile, fn: Callable[[str], str], name: str | None = None) -> KProfile:
    """Same profile with every generator label passed through ``fn``."""

    def rg(g: AbelianGroup) -> AbelianGroup:
        return g.relabel([fn(lab) for lab in g.labels])

    def rh(h: GroupHom, dom, cod) -> GroupHom:
        return GroupHom(dom, cod, h.matrix)

    red = (rg(p.red[0]), rg(p.red[1]))
    mod = []
    for j, m in enumerate(p.mod):
        e, t = rg(m.group), rg(m.tors.domain)
        nxt = red[(j + 1) % 2]
        mod.append(ModLayer(e, rh(m.rho, red[j], e), rh(m.beta, e, nxt), rh(m.tors, t, nxt),
                            rh(m.lift, t, e), m.complete))
    return replace(p, name=name or p.name, red=red, mod=tuple(mod))


def label_map(pairs: Sequence[tuple[str, str]]) -> Callable[[str], str]:
    def fn(lab: str) -> str:
        for old, new in pairs:
            lab = lab.replace(old, new)
        return lab

    return fn


# --------------------------------------------------------------------------
# leaves


def point(n: int) -> KProfile:
    red = (_empty(), _empty())
    return build_profile("point", n, red, zero_ring(red))


def sphere(k: int, n: int) -> KProfile:
    if k < 0:
        raise UnsupportedCatalogError("sphere dimension must be >= 0")
    z = AbelianGroup((0,), ("t",))
    red = (z, _empty()) if k % 2 == 0 else (_empty(), z)
    if k == 0:
        ring = ring_from(red, lambda i, a, j, b: (1,) if (i, j) == (0, 0) else None)
    else:
        ring = zero_ring(red)
    return build_profile(f"S({k})", n, red, ring, connected=k > 0, suspension=k > 0,
                         flags=("standard-topology",))


def moore(m: int, n: int) -> KProfile:
    if m < 2:
        raise UnsupportedCatalogError("Moore parameter must be >= 2")
    if n % m:
        raise UnsupportedCatalogError(
            f"M({m}) with modulus {n}: only parameters dividing the modulus are catalogued"
        )
    red = (AbelianGroup((m,), ("g",)), _empty())
    p = build_profile(f"M({m})", n, red, zero_ring(red))
    return relabel(p, label_map([("β⁻¹(g)", "a_λ")]))


def complex_projective(k: int, n: int) -> KProfile:
    if k < 1:
        raise UnsupportedCatalogError("CP(k) needs k >= 1")
    labels = tuple("x" if e == 1 else f"x^{e}" for e in range(1, k + 1))
    red = (AbelianGroup((0,) * k, labels), _empty())

    def entry(i, a, j, b):
        if (i, j) != (0, 0) or a + b + 2 > k:
            return None
        v = [0] * k
        v[a + b + 1] = 1
        return v

    return build_profile(f"CP({k})", n, red, ring_from(red, entry), flags=("standard-topology",))


# --------------------------------------------------------------------------
# suspension


def suspend(p: KProfile, name: str | None = None) -> KProfile:
    """Degree shift: K̃^j(ΣX) = K̃^{j+1}(X); all products vanish."""

    def sg(g: AbelianGroup) -> AbelianGroup:
        return g.relabel([f"σ({lab})" for lab in g.labels])

    red = (sg(p.red[1]), sg(p.red[0]))
    mod = []
    for j in (0, 1):
        m = p.mod[(j + 1) % 2]
        e, t = sg(m.group), sg(m.tors.domain)
        nxt = red[(j + 1) % 2]
        mod.append(ModLayer(e, GroupHom(red[j], e, m.rho.matrix), GroupHom(e, nxt, m.beta.matrix),
                            GroupHom(t, nxt, m.tors.matrix), GroupHom(t, e, m.lift.matrix), m.complete))
    return assemble(name or f"susp({p.name})", p.n, red, mod, zero_ring(red), connected=True,
                    suspension=True, assumptions=p.assumptions, flags=p.flags)


# --------------------------------------------------------------------------
# smash products


@dataclass(frozen=True)
class _Rec:
    kind: str  # "T" tensor class, "R" Tor class
    i: int
    a: int
    j: int
    b: int
    order: int
    label: str

    @property
    def degree(self) -> int:
        return (self.i + self.j + (1 if self.kind == "R" else 0)) % 2


def _unit_vec(k: int, r: int) -> list[int]:
    v = [0] * k
    v[r] = 1
    return v


class _Smash:
    """Künneth data for ``X ∧ Y`` in raw (unnormalized) Tensor/Tor coordinates."""

    def __init__(self, p: KProfile, q: KProfile, splitting: Mapping | None, key: str):
        if p.n != q.n:
            raise AbelianError("profiles have different moduli")
        self.p, self.q, self.key = p, q, key
        self.split = dict(splitting or {})
        self.recs: list[list[_Rec]] = [[], []]
        for i in (0, 1):
            for j in (0, 1):
                for o, a, b in tensor(p.red[i], q.red[j]):
                    lab = f"{p.red[i].labels[a]}⊗{q.red[j].labels[b]}"
                    self.recs[(i + j) % 2].append(_Rec("T", i, a, j, b, o, lab))
        for i in (0, 1):
            for j in (0, 1):
                for o, a, b in tor(p.red[i], q.red[j]):
                    lab = f"τ({p.red[i].labels[a]},{q.red[j].labels[b]})"
                    self.recs[(i + j + 1) % 2].append(_Rec("R", i, a, j, b, o, lab))
        self.index = [{(r.kind, r.i, r.a, r.j, r.b): k for k, r in enumerate(recs)} for recs in self.recs]
        self.groups = [
            normalize_cyclic([r.order for r in recs], [r.label for r in recs]) if recs else _empty()
            for recs in self.recs
        ]
        self.null = p.suspension or q.suspension or p.trivial or q.trivial
        self.products = dict(self.split.get("products", {}))
        self._cache: dict = {}

    # raw helpers
    def raw_zero(self, d: int) -> list[int]:
        return [0] * len(self.recs[d])

    def has_tensor(self, d: int) -> bool:
        return any(r.kind == "T" for r in self.recs[d])

    def tensor_vec(self, d: int, xi: int, xv: Sequence[int], yj: int, yv: Sequence[int], sign: int = 1):
        """Raw vector of ``x ⊗ y`` (bilinear in the coefficient vectors)."""
        out = self.raw_zero(d)
        for c, xc in enumerate(xv):
            if not xc:
                continue
            for e, ye in enumerate(yv):
                if not ye:
                    continue
                k = self.index[d].get(("T", xi, c, yj, e))
                if k is not None:
                    out[k] += sign * xc * ye
        return out

    def stipulated(self, left: str, right: str, d: int, sign: int):
        for (l, r, s) in ((left, right, 1), (right, left, sign)):
            given = self.products.get(f"{l}*{r}")
            if given is None:
                continue
            out = self.raw_zero(d)
            labels = [rec.label for rec in self.recs[d]]
            for lab, c in given.items():
                if lab not in labels:
                    raise AmbiguityError(f"stipulated product {l}·{r} names unknown class {lab!r}", self.key)
                out[labels.index(lab)] += s * int(c)
            return out
        return None

    def undetermined(self, left: str, right: str) -> AmbiguityError:
        return AmbiguityError(
            f"the product {left}·{right} in the smash product is not determined by the Künneth data; "
            f'stipulate it under key {self.key!r} as "products": {{"{left}*{right}": {{label: coeff}}}}',
            self.key,
            PRODUCT_FORMS,
        )

    def raw_mult(self, du: int, u: int, dv: int, v: int) -> list[int]:
        ck = (du, u, dv, v)
        if ck in self._cache:
            return self._cache[ck]
        d = (du + dv) % 2
        ru, rv = self.recs[du][u], self.recs[dv][v]
        p, q = self.p, self.q
        out = self.raw_zero(d)
        if self.null or not self.recs[d]:
            pass
        elif ru.kind == "T" and rv.kind == "T":
            xx = _mul_vec(p.red, p.ring, ru.i, p.red[ru.i].gen(ru.a), rv.i, p.red[rv.i].gen(rv.a))
            yy = _mul_vec(q.red, q.ring, ru.j, q.red[ru.j].gen(ru.b), rv.j, q.red[rv.j].gen(rv.b))
            out = self.tensor_vec(d, (ru.i + rv.i) % 2, xx, (ru.j + rv.j) % 2, yy, _sign(ru.j * rv.i))
        else:
            out = self._tor_product(du, ru, dv, rv, d)
        self._cache[ck] = out
        return out

    def _tor_product(self, du, ru: _Rec, dv, rv: _Rec, d) -> list[int]:
        p, q = self.p, self.q
        sign = _sign(du * dv)
        if ru.kind == "R" and rv.kind == "R":
            if ru == rv and du % 2 == 1 and self.groups[d].is_finite and (self.groups[d].order or 1) % 2:
                return self.raw_zero(d)
        else:
            tau, w = (ru, rv) if ru.kind == "R" else (rv, ru)
            xx = _mul_vec(p.red, p.ring, w.i, p.red[w.i].gen(w.a), tau.i, p.red[tau.i].gen(tau.a))
            yy = _mul_vec(q.red, q.ring, w.j, q.red[w.j].gen(w.b), tau.j, q.red[tau.j].gen(tau.b))
            if (not any(xx) or not any(yy)) and not self.has_tensor(d):
                return self.raw_zero(d)
        got = self.stipulated(ru.label, rv.label, d, sign)
        if got is None:
            raise self.undetermined(ru.label, rv.label)
        return got

    def side_mult(self, side: str, e: int, gen: int, dz: int, u: int) -> list[int]:
        """Raw product ``(x×1)·u`` (side "X") or ``(1×y)·u`` (side "Y") for a raw smash class u."""
        p, q = self.p, self.q
        d = (e + dz) % 2
        r = self.recs[dz][u]
        if not self.recs[d]:
            return self.raw_zero(d)
        if side == "X":
            if p.suspension:
                return self.raw_zero(d)
            xx = _mul_vec(p.red, p.ring, e, p.red[e].gen(gen), r.i, p.red[r.i].gen(r.a))
            if r.kind == "T":
                return self.tensor_vec(d, (e + r.i) % 2, xx, r.j, q.red[r.j].gen(r.b))
            lab = f"{p.red[e].labels[gen]}×1"
        else:
            if q.suspension:
                return self.raw_zero(d)
            yy = _mul_vec(q.red, q.ring, e, q.red[e].gen(gen), r.j, q.red[r.j].gen(r.b))
            if r.kind == "T":
                return self.tensor_vec(d, r.i, p.red[r.i].gen(r.a), (e + r.j) % 2, yy, _sign(e * r.i))
            lab = f"1×{q.red[e].labels[gen]}"
            xx = yy
        if not any(xx) and not self.has_tensor(d):
            return self.raw_zero(d)
        got = self.stipulated(lab, r.label, d, _sign(e * dz))
        if got is None:
            raise self.undetermined(lab, r.label)
        return got

    def normal_ring(self) -> dict:
        red = self.groups

        def entry(i, a, j, b):
            va = [row[a] for row in red[i].basis.from_normal] if red[i].basis else red[i].gen(a)
            vb = [row[b] for row in red[j].basis.from_normal] if red[j].basis else red[j].gen(b)
            k = (i + j) % 2
            acc = self.raw_zero(k)
            for u, cu in enumerate(va):
                if not cu:
                    continue
                for v, cv in enumerate(vb):
                    if not cv:
                        continue
                    for w, x in enumerate(self.raw_mult(i, u, j, v)):
                        acc[w] += cu * cv * x
            return express(red[k], acc) if red[k].rank else ()

        return ring_from(red, entry)

    def express_raw(self, d: int, raw: Sequence[int]) -> Vector:
        return express(self.groups[d], raw) if self.groups[d].rank else ()

    def raw_of(self, d: int, c: int) -> list[int]:
        g = self.groups[d]
        return [row[c] for row in g.basis.from_normal]

    def profile(self, name: str) -> KProfile:
        p, q = self.p, self.q
        red = tuple(self.groups)
        return build_profile(
            name, p.n, red, self.normal_ring(), self.split, self.key,
            connected=p.connected or q.connected,
            suspension=p.suspension or q.suspension,
            assumptions=p.assumptions + q.assumptions,
            flags=p.flags + q.flags,
        )


def smash(p: KProfile, q: KProfile, splitting: Mapping | None = None, name: str | None = None,
          key: str | None = None) -> KProfile:
    """Künneth assembly of ``X ∧ Y``; the integral sequence is taken split."""
    name = name or f"smash({p.name},{q.name})"
    return _Smash(p, q, splitting, key or name).profile(name)


# --------------------------------------------------------------------------
# products


def _block_hom(dom, cod, homs: Sequence[GroupHom]) -> GroupHom:
    """Block-diagonal map between direct sums given as ``(group, injections, projections)``."""
    dg, _, dproj = dom
    cg, cinj, _ = cod
    cols = []
    for c in range(dg.rank):
        acc = cg.zero()
        for k, h in enumerate(homs):
            acc = cg.add(acc, cinj[k](h(dproj[k](dg.gen(c)))))
        cols.append(acc)
    return GroupHom.from_columns(dg, cg, cols)


def product(p: KProfile, q: KProfile, splitting: Mapping | None = None, name: str | None = None,
            key: str | None = None) -> KProfile:
    """``X × Y`` via ``K̃(X×Y) = K̃X ⊕ K̃Y ⊕ K̃(X∧Y)`` in every degree and coefficient."""
    name = name or f"prod({p.name},{q.name})"
    skey = key or f"smash({p.name},{q.name})"
    sm = _Smash(p, q, splitting, skey)
    z = sm.profile(skey)

    def xl(g):
        return g.relabel([f"{lab}×1" for lab in g.labels])

    def yl(g):
        return g.relabel([f"1×{lab}" for lab in g.labels])

    red_sums = [direct_sum(xl(p.red[d]), yl(q.red[d]), z.red[d]) for d in (0, 1)]
    red = tuple(s[0] for s in red_sums)

    def block_vec(k: int, part: int, v: Sequence[int]) -> Vector:
        return red_sums[k][1][part](v)

    def part_mult(d1, part1, a, d2, part2, b) -> Vector:
        k = (d1 + d2) % 2
        if part1 == part2:
            src = (p, q, z)[part1]
            return block_vec(k, part1, src.ring[(d1, d2)][a][b])
        if part1 > part2:
            v = part_mult(d2, part2, b, d1, part1, a)
            return red[k].scale(_sign(d1 * d2), v)
        if (part1, part2) == (0, 1):
            raw = sm.tensor_vec(k, d1, p.red[d1].gen(a), d2, q.red[d2].gen(b))
            return block_vec(k, 2, sm.express_raw(k, raw)) if sm.recs[k] else red[k].zero()
        side = "X" if part1 == 0 else "Y"
        acc = sm.raw_zero(k)
        for u, cu in enumerate(sm.raw_of(d2, b)):
            if cu:
                for w, x in enumerate(sm.side_mult(side, d1, a, d2, u)):
                    acc[w] += cu * x
        return block_vec(k, 2, sm.express_raw(k, acc)) if sm.recs[k] else red[k].zero()

    def entry(i, a, j, b):
        ga, gb = red[i].gen(a), red[j].gen(b)
        k = (i + j) % 2
        acc = red[k].zero()
        pa = [red_sums[i][2][s](ga) for s in range(3)]
        pb = [red_sums[j][2][s](gb) for s in range(3)]
        for s1 in range(3):
            for c1, x1 in enumerate(pa[s1]):
                if not x1:
                    continue
                for s2 in range(3):
                    for c2, x2 in enumerate(pb[s2]):
                        if x2:
                            acc = red[k].add(acc, red[k].scale(x1 * x2, part_mult(i, s1, c1, j, s2, c2)))
        return acc

    ring = ring_from(red, entry)

    mod = []
    for d in (0, 1):
        layers = (p.mod[d], q.mod[d], z.mod[d])
        groups = (xl(layers[0].group), yl(layers[1].group), layers[2].group)
        tdoms = (xl(layers[0].tors.domain), yl(layers[1].tors.domain), layers[2].tors.domain)
        e_sum = direct_sum(*groups)
        t_sum = direct_sum(*tdoms)
        nxt = red_sums[(d + 1) % 2]
        mod.append(ModLayer(
            e_sum[0],
            _block_hom(red_sums[d], e_sum, [m.rho for m in layers]),
            _block_hom(e_sum, nxt, [m.beta for m in layers]),
            _block_hom(t_sum, nxt, [m.tors for m in layers]),
            _block_hom(t_sum, e_sum, [m.lift for m in layers]),
            all(m.complete for m in layers),
        ))
    suspension = (p.trivial and q.suspension) or (q.trivial and p.suspension)
    return assemble(
        name, p.n, red, mod, ring,
        connected=p.connected and q.connected,
        suspension=suspension,
        assumptions=p.assumptions + q.assumptions + z.assumptions,
        flags=p.flags + q.flags,
        summands=(tuple(red_sums), (p, q, z)),
    )


# --------------------------------------------------------------------------
# the distinguished example and the catalog


FULL_CARRIER_ASSUMPTION = (
    "K^*(M_n∧ΣM_n;Z_n) taken as the split extension Z_n⊕Z_n, so K^1(M_n×ΣM_n;Z_n) ≅ Z_n^4"
)

_MXSM_LABELS = [
    ("β⁻¹(τ(g,u))", "y"),
    ("β⁻¹(g⊗u)", "β⁻¹(g⊗u)"),
    ("τ(g,u)", "g∧u'"),
    ("a_λ×1", "x"),
    ("ρ(g)×1", "ρ(g×1)"),
    ("1×ρ(u)", "ρ(1⊗u)"),
    ("1×β⁻¹(u)", "β⁻¹(1⊗u)"),
    ("1×u", "1⊗u"),
]


def mn_x_sigma_mn(n: int, level: str = "auto") -> KProfile:
    """``M_n × ΣM_n`` with generators ``g×1, g∧u'`` (degree 0), ``1⊗u, g⊗u`` (degree 1).

    ``level="slice"`` keeps only the reduction image of the smash summand in the
    mod-n groups, which carries the order-n³ subgroup generated by ``x``,
    ``ρ(1⊗u)`` and ``ρ(g⊗u)``.  ``level="full"`` adds the class ``y`` with
    ``β(y) = g∧u'`` under the split-carrier assumption; it is refused for even n.
    ``"auto"`` picks full for odd n and slice for even n.
    """
    if n < 2:
        raise AbelianError("modulus must be >= 2")
    if level == "auto":
        level = "full" if n % 2 else "slice"
    if level == "full":
        if n % 2 == 0:
            raise UnsupportedCatalogError(
                f"the full carrier K^1(M_{n}×ΣM_{n};Z_{n}) is not determined for even n; use level='slice'"
            )
        split = {"k0n": "split", "k1n": "split", "assumption": FULL_CARRIER_ASSUMPTION}
    elif level == "slice":
        split = {"k0n": "slice", "k1n": "slice"}
    else:
        raise AbelianError(f"unknown level {level!r}")
    m = moore(n, n)
    sm = relabel(suspend(m), label_map([("σ(ρ(g))", "ρ(u)"), ("σ(a_λ)", "β⁻¹(u)"), ("σ(g)", "u")]),
                 name=f"susp(M({n}))")
    p = product(m, sm, split, name=f"MxSM({n})")
    return relabel(p, label_map(_MXSM_LABELS))


def catalog(expr: SpaceExpr | str, n: int, splitting: Mapping | None = None) -> KProfile:
    """Profile of a space expression; ``splitting`` maps smash keys (or "*") to extension data."""
    if isinstance(expr, str):
        expr = spaces.parse(expr)
    if n < 2:
        raise AbelianError("modulus must be >= 2")
    splitting = splitting or {}

    def split_for(key: str):
        return splitting.get(key, splitting.get("*"))

    def go(e: SpaceExpr) -> KProfile:
        if isinstance(e, spaces.Point):
            return point(n)
        if isinstance(e, spaces.Sphere):
            return sphere(e.k, n)
        if isinstance(e, spaces.Moore):
            return moore(e.m, n)
        if isinstance(e, spaces.CP):
            return complex_projective(e.k, n)
        if isinstance(e, spaces.MnXSigmaMn):
            if e.m != n:
                raise UnsupportedCatalogError(f"MxSM({e.m}) requires modulus {e.m}, got {n}")
            return mn_x_sigma_mn(n)
        if isinstance(e, spaces.Susp):
            return suspend(go(e.inner), name=str(e))
        key = str(spaces.Smash(e.left, e.right))
        if isinstance(e, spaces.Smash):
            return smash(go(e.left), go(e.right), split_for(key), name=str(e), key=key)
        if isinstance(e, spaces.Prod):
            return product(go(e.left), go(e.right), split_for(key), name=str(e), key=key)
        raise TypeError(e)

    return go(expr)


def profile_json_text(p: KProfile) -> str:
    import json

    return json.dumps(p.to_json(), ensure_ascii=False, sort_keys=True)


__all__ = [
    "AmbiguityError", "Check", "KProfile", "ModLayer", "ProfileError", "UnsupportedCatalogError",
    "ValidationReport", "act", "assemble", "catalog", "complex_projective", "derive_action", "mn_x_sigma_mn",
    "modn_layer", "moore", "mult", "point", "product", "relabel", "smash", "sphere", "suspend", "validate",
    "group_to_json",
]
