"""Space expressions: AST, text syntax and integral cohomology.

Grammar::

    expr := 'point' | 'S(' int ')' | 'M(' int ')' | 'CP(' int ')' | 'MxSM(' int ')'
          | 'susp(' expr ')' | 'smash(' expr ',' expr ')' | 'prod(' expr ',' expr ')'
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .abelian import TRIVIAL, AbelianGroup, cyclic, free, normalize_cyclic, tensor, tor


class ParseError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        self.text = text
        self.pos = pos
        super().__init__(f"{message} at position {pos}\n  {text}\n  {' ' * pos}^")


class SpaceExpr:
    """Base class for space expressions; subclasses are immutable dataclasses."""


@dataclass(frozen=True)
class Point(SpaceExpr):
    def __str__(self):
        return "point"


@dataclass(frozen=True)
class Sphere(SpaceExpr):
    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("sphere dimension must be >= 0")

    def __str__(self):
        return f"S({self.k})"


@dataclass(frozen=True)
class Moore(SpaceExpr):
    m: int

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("Moore parameter must be >= 2")

    def __str__(self):
        return f"M({self.m})"


@dataclass(frozen=True)
class CP(SpaceExpr):
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("CP(k) needs k >= 1")

    def __str__(self):
        return f"CP({self.k})"


@dataclass(frozen=True)
class MnXSigmaMn(SpaceExpr):
    m: int

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("MxSM parameter must be >= 2")

    def __str__(self):
        return f"MxSM({self.m})"


@dataclass(frozen=True)
class Susp(SpaceExpr):
    inner: SpaceExpr

    def __str__(self):
        return f"susp({self.inner})"


@dataclass(frozen=True)
class Smash(SpaceExpr):
    left: SpaceExpr
    right: SpaceExpr

    def __str__(self):
        return f"smash({self.left},{self.right})"


@dataclass(frozen=True)
class Prod(SpaceExpr):
    left: SpaceExpr
    right: SpaceExpr

    def __str__(self):
        return f"prod({self.left},{self.right})"


_LEAVES = {"S": Sphere, "M": Moore, "CP": CP, "MxSM": MnXSigmaMn}
_UNARY = {"susp": Susp}
_BINARY = {"smash": Smash, "prod": Prod}
_TOKEN = re.compile(r"\s*(?:(?P<name>[A-Za-z]+)|(?P<int>-?\d+)|(?P<punct>[(),]))")


def parse(text: str) -> SpaceExpr:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    i = 0

    def peek():
        return tokens[i]

    def take(kind=None, value=None):
        nonlocal i
        tok = tokens[i]
        if (kind and tok[0] != kind) or (value and tok[1] != value):
            want = value or kind
            got = tok[1] or "end of input"
            raise ParseError(f"expected {want!r}, got {got!r}", text, tok[2])
        i += 1
        return tok

    def expr():
        kind, val, at = peek()
        if kind != "name":
            raise ParseError(f"expected a space constructor, got {val or 'end of input'!r}", text, at)
        take()
        if val == "point":
            return Point()
        if val in _LEAVES:
            take("punct", "(")
            _, num, numat = take("int")
            take("punct", ")")
            try:
                return _LEAVES[val](int(num))
            except ValueError as exc:
                raise ParseError(str(exc), text, numat) from None
        if val in _UNARY:
            take("punct", "(")
            inner = expr()
            take("punct", ")")
            return _UNARY[val](inner)
        if val in _BINARY:
            take("punct", "(")
            a = expr()
            take("punct", ",")
            b = expr()
            take("punct", ")")
            return _BINARY[val](a, b)
        raise ParseError(f"unknown constructor {val!r}", text, at)

    e = expr()
    if peek()[0] != "end":
        raise ParseError(f"trailing input {peek()[1]!r}", text, peek()[2])
    return e


def dimension(e: SpaceExpr) -> int:
    if isinstance(e, Point):
        return 0
    if isinstance(e, Sphere):
        return e.k
    if isinstance(e, Moore):
        return 2
    if isinstance(e, CP):
        return 2 * e.k
    if isinstance(e, MnXSigmaMn):
        return 5
    if isinstance(e, Susp):
        return dimension(e.inner) + 1
    if isinstance(e, (Smash, Prod)):
        return dimension(e.left) + dimension(e.right)
    raise TypeError(e)


def reduced_cohomology(e: SpaceExpr) -> list[AbelianGroup]:
    """Reduced integral cohomology ``[H̃^0, ..., H̃^dim]``."""
    d = dimension(e)
    out = [TRIVIAL] * (d + 1)
    if isinstance(e, Point):
        return out
    if isinstance(e, Sphere):
        out[e.k] = free(1)
        return out
    if isinstance(e, Moore):
        out[2] = cyclic(e.m)
        return out
    if isinstance(e, CP):
        for j in range(1, e.k + 1):
            out[2 * j] = free(1)
        return out
    if isinstance(e, MnXSigmaMn):
        return reduced_cohomology(Prod(Moore(e.m), Susp(Moore(e.m))))
    if isinstance(e, Susp):
        return [TRIVIAL] + reduced_cohomology(e.inner)
    a, b = reduced_cohomology(e.left), reduced_cohomology(e.right)
    sm = _kunneth(a, b, d)
    if isinstance(e, Smash):
        return sm
    for k in range(d + 1):
        parts = [g for g in (_at(a, k), _at(b, k), sm[k]) if g.rank]
        out[k] = normalize_cyclic([f for g in parts for f in g.factors]) if parts else TRIVIAL
        out[k] = AbelianGroup(out[k].factors)
    return out


def _at(h: list[AbelianGroup], k: int) -> AbelianGroup:
    return h[k] if 0 <= k < len(h) else TRIVIAL


def _kunneth(a: list[AbelianGroup], b: list[AbelianGroup], d: int) -> list[AbelianGroup]:
    out = []
    for m in range(d + 1):
        orders = []
        for i in range(m + 1):
            orders += [o for o, _, _ in tensor(_at(a, i), _at(b, m - i))]
        for i in range(m + 2):
            orders += [o for o, _, _ in tor(_at(a, i), _at(b, m + 1 - i))]
        out.append(AbelianGroup(normalize_cyclic(orders).factors) if orders else TRIVIAL)
    return out
