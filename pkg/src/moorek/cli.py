"""Command-line front end.

Exit status: 0 on success, 1 when a check fails, 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import fields, kprofile, spaces, twisted
from .abelian import AbelianError, AbelianGroup, ArithmeticOverflowError, GroupHom

EXIT_OK, EXIT_CHECK, EXIT_INPUT = 0, 1, 2


class InputError(ValueError):
    pass


def dumps(obj) -> str:
    """The JSON form used for every report: sorted keys, UTF-8 kept as is."""
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=2)


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None


def _profile(args) -> kprofile.KProfile:
    splitting = _load_json(args.splitting) if args.splitting else None
    if splitting is not None and not isinstance(splitting, dict):
        raise InputError("splitting file must hold a JSON object")
    return kprofile.catalog(spaces.parse(args.expr), args.n, splitting)


def _group_line(name: str, g: AbelianGroup) -> str:
    return f"{name} = {g.describe()}"


def _hom_lines(name: str, h: GroupHom) -> list[str]:
    rows = [" ".join(str(x) for x in r) for r in h.matrix]
    head = f"{name}: {h.domain} -> {h.codomain}"
    if not rows or not h.domain.rank:
        return [head + "  (zero)"]
    return [head] + [f"  [{r}]" for r in rows]


# --------------------------------------------------------------------------
# verbs


def cmd_kgroups(args) -> tuple[int, object, str]:
    p = _profile(args)
    n = args.n
    lines = [
        f"space {p.name}, n = {n}",
        _group_line("K̃^0", p.k0red),
        _group_line("K̃^1", p.k1red),
        _group_line(f"K^0(;Z_{n})", p.k0n),
        _group_line(f"K^1(;Z_{n})", p.k1n),
    ]
    lines += _hom_lines("ρ^0", p.rho0) + _hom_lines("ρ^1", p.rho1)
    lines += _hom_lines("β^0", p.beta0) + _hom_lines("β^1", p.beta1)
    if p.slice:
        lines.append("partial profile: mod-n layers keep only the reduction image")
    lines += [f"assumption: {a}" for a in p.assumptions]
    return EXIT_OK, p.to_json(), "\n".join(lines)


def cmd_verify(args) -> tuple[int, object, str]:
    p = _profile(args)
    report = kprofile.validate(p)
    return (EXIT_OK if report.ok else EXIT_CHECK), report.to_json(), str(report)


def _table_for(args) -> twisted.SubgroupTable:
    tg = twisted.build(_profile(args))
    if args.subgroup:
        try:
            gens = twisted.heisenberg_generators(tg)
        except (KeyError, ValueError):
            raise InputError("--subgroup needs the MxSM catalog entry (generators ρ(1⊗u), ρ(g⊗u), x)") from None
        return twisted.subgroup(tg, gens)
    if tg.order > twisted.max_closure():
        raise twisted.ResourceError(f"group of order {tg.order} exceeds MOOREK_MAX_CLOSURE")
    return twisted.full_table(tg)


def cmd_twisted_table(args) -> tuple[int, object, str]:
    sub = _table_for(args)
    data = sub.to_json()
    data["labels"] = list(sub.labels)
    data["assumptions"] = list(sub.assumptions)
    width = len(str(sub.order - 1))
    lines = [f"twisted group of order {sub.order} under a∘b = a + b - a·β(b)", "elements:"]
    lines += [f"  {i:>{width}}  {lab}" for i, lab in enumerate(sub.labels)]
    lines.append("table (row ∘ column, by element index):")
    lines += ["  " + " ".join(f"{int(x):>{width}}" for x in row) for row in sub.table]
    lines += [f"assumption: {a}" for a in sub.assumptions]
    return EXIT_OK, data, "\n".join(lines)


def cmd_identify(args) -> tuple[int, object, str]:
    c = twisted.classify(_table_for(args), args.n)
    lines = [c.summary, f"center order {c.center_order}, derived subgroup order {c.derived_order}"]
    if c.heisenberg_witness:
        w = c.heisenberg_witness
        lines.append(f"Heisenberg pair: {w['x']} and {w['y']} with commutator {w['z']}")
    if c.direct_factor:
        lines.append(f"central factor generated by {c.direct_factor['central_generator']}")
    lines += [f"assumption: {a}" for a in c.assumptions]
    return EXIT_OK, c.to_json(), "\n".join(lines)


def cmd_count_fields(args) -> tuple[int, object, str]:
    p = _profile(args)
    report = fields.dadarlat_count_check(p, fields.CohomologyProfile.from_expr(args.expr), args.n)
    data = report.to_json()
    lines = [
        f"|K̃^0 ⊗ Z_{args.n}| = {report.k0_tensor_order}",
        f"|H̃^even(;Z_{args.n})| = {report.heven_order}",
    ]
    if report.hypothesis:
        lines.append("no n-torsion in cohomology: counts " + ("agree" if report.equal else "DISAGREE"))
    else:
        lines.append("cohomology has n-torsion, so equality is not asserted: " + ", ".join(report.tor_groups))
    return (EXIT_OK if report.ok else EXIT_CHECK), data, "\n".join(lines)


def cmd_pimsner(args) -> tuple[int, object, str]:
    p = _profile(args)
    rank = args.rank if args.rank is not None else args.n + 1
    e = None
    if args.e:
        try:
            e = [int(x) for x in args.e.split(",")]
        except ValueError:
            raise InputError(f"--e expects comma-separated integers, got {args.e!r}") from None
    pieces = fields.pimsner_pieces(p, rank, e)
    lines = [
        f"multiplication by 1 - [E] with rank {rank}",
        _group_line("coker on K^0", pieces.coker0),
        _group_line("ker on K^0", pieces.ker0),
        _group_line("coker on K^1", pieces.coker1),
        _group_line("ker on K^1", pieces.ker1),
        pieces.note,
    ]
    return EXIT_OK, pieces.to_json(), "\n".join(lines)


def cmd_simn(args) -> tuple[int, object, str]:
    try:
        ring = fields.FiniteNilRing.from_json(_load_json(args.ring))
    except (KeyError, TypeError, IndexError) as exc:
        raise InputError(f"malformed ring file {args.ring}: {exc!r}") from None
    classes = fields.sim_n_quotient(ring, args.n)
    report = fields.LemmaReport(len(classes), fields.tensor_Zn(ring.additive, args.n).order or 1)
    data = report.to_json()
    data["class_list"] = [[list(x) for x in c] for c in classes]
    lines = [f"{len(classes)} classes of ~_{args.n} on a ring of order {ring.order}"]
    lines += ["  {" + ", ".join("(" + ",".join(map(str, x)) + ")" for x in c) + "}" for c in classes]
    lines.append(str(report))
    return EXIT_OK, data, "\n".join(lines)


VERBS = {
    "kgroups": (cmd_kgroups, "reduced and mod-n K-groups with ρ and β"),
    "verify": (cmd_verify, "run all profile checks"),
    "twisted-table": (cmd_twisted_table, "table of the twisted law ∘"),
    "identify": (cmd_identify, "classify the twisted group"),
    "count-fields": (cmd_count_fields, "compare |K̃^0⊗Z_n| with |H̃^even(;Z_n)|"),
    "pimsner": (cmd_pimsner, "kernel and cokernel pieces of 1 - [E]"),
    "simn": (cmd_simn, "classes of ~_n on a ring file"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="moorek", description="Mod-n K-theory of Moore-type spaces.")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, (_, help_text) in VERBS.items():
        sp = sub.add_parser(verb, help=help_text)
        if verb == "simn":
            sp.add_argument("ring", help="ring file (JSON with orders, labels, products)")
        else:
            sp.add_argument("expr", help='space expression such as "smash(M(3),S(1))"')
            sp.add_argument("--splitting", metavar="FILE", help="JSON extension data keyed by smash or '*'")
        sp.add_argument("-n", type=int, required=True, help="modulus, at least 2")
        sp.add_argument("--output", choices=("text", "json"), default="text")
        if verb in ("twisted-table", "identify"):
            sp.add_argument("--subgroup", action="store_true",
                            help="use the subgroup generated by ρ(1⊗u), ρ(g⊗u), x")
        if verb == "pimsner":
            sp.add_argument("--rank", type=int, help="bundle rank r (default n+1)")
            sp.add_argument("--e", help="ẽ as comma-separated coordinates in K̃^0")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.n < 2:
        parser.exit(EXIT_INPUT, "moorek: error: -n must be at least 2\n")
    handler = VERBS[args.verb][0]
    try:
        status, data, text = handler(args)
    except kprofile.AmbiguityError as exc:
        forms = "\n".join(f"  {f}" for f in exc.options)
        print(f"moorek: ambiguous: {exc}\nadmissible splitting data (pass with --splitting FILE):\n{forms}",
              file=sys.stderr)
        return EXIT_INPUT
    except (kprofile.ProfileError, twisted.TwistedError) as exc:
        print(f"moorek: check failed: {exc}", file=sys.stderr)
        report = getattr(exc, "report", None)
        if report is not None:
            print(report, file=sys.stderr)
        return EXIT_CHECK
    except (spaces.ParseError, InputError, AbelianError, fields.RingError, twisted.ResourceError,
            kprofile.UnsupportedCatalogError, ArithmeticOverflowError) as exc:
        print(f"moorek: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(dumps(data) if args.output == "json" else text)
    return status


if __name__ == "__main__":
    sys.exit(main())
