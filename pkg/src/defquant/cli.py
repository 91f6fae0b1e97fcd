"""Command-line front end.

A document is a text file of ``key = expression`` lines; ``#`` starts a
comment.  The header keys are ``grammar_version``, ``d``, ``N`` and ``kind``
(``assoc`` or ``poisson``).  Bindings:

    omega            the MC candidate (degree 1)
    gamma, gamma1..  gauge elements (degree 0)
    alpha, alpha1..  2-morphisms, written as series of functions
    a, b, c          elements of the deformed algebra
    s, t             localization elements (polynomials, no h)
    op               a degree-0 operator (recognize-op round trip)
    T[e1,..,ed]      table entries T(x^e) (recognize-op)
    m, coeff_degree  integer bounds for recognize-op

Exit codes: 0 when every check passes, 1 when a check fails, 2 for parse
and usage errors.
"""

from __future__ import annotations

import argparse
import itertools
import random
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import __version__
from .deform import (DeformedAlgebra, GaugeMap, check_localization, cover_compat,
                     gauge_transport, geo_verify, star_inverse)
from .deligne import (broken_fixture, deligne_build, normal_subgroup_fixture,
                      verify_crossed_axioms)
from .dpoly import OpTable, moyal_mc, op_order, recognize_diffop
from .errors import (DefQuantError, InsufficientTestDegreeError, NotInvertibleError,
                     ParseError, RecognitionError)
from .grammar import GRAMMAR_VERSION, format_value, parse_expr
from .mc import MCElement, bch, host_for, mc_defect
from .polyring import Poly, monomials
from .report import Report, timed_check
from .sampling import monomial_grid, random_grid
from .series import Series

HEADER = ("grammar_version", "d", "N", "kind")
_KEY = re.compile(r"^(omega|gamma\d*|alpha\d*|[abc]|[st]|op|m|coeff_degree"
                  r"|T\[\s*\d+(?:\s*,\s*\d+)*\s*\])$")


class UsageError(DefQuantError):
    """Bad command line or a document missing what the command needs."""


@dataclass
class Document:
    path: str
    nvars: int
    order: int
    kind: str
    values: dict[str, object] = field(default_factory=dict)
    table: dict[tuple, Poly] = field(default_factory=dict)
    params: dict[str, int] = field(default_factory=dict)

    def require(self, *names: str):
        missing = [n for n in names if n not in self.values]
        if missing:
            raise UsageError(f"{self.path}: missing binding(s) {', '.join(missing)}")
        return [self.values[n] for n in names]

    def numbered(self, stem: str) -> list[Series]:
        keys = [k for k in self.values if re.fullmatch(stem + r"\d*", k)]
        keys.sort(key=lambda k: int(k[len(stem):] or 0))
        return [self.values[k] for k in keys]


def _expect(key: str, kind: str):
    if key == "omega":
        return ("op", 1) if kind == "assoc" else ("polyvec", 1)
    if key.startswith("gamma") or key == "op":
        return ("op", 0) if kind == "assoc" or key == "op" else ("polyvec", 0)
    return "poly"


def parse_document(text: str, path: str = "<doc>") -> Document:
    """Parse a document; errors carry ``path:line:column``."""
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if "=" not in line:
            raise ParseError("expected 'key = expression'", lineno, 1, path)
        key, _, expr = line.partition("=")
        col = len(key) + 2 + (len(expr) - len(expr.lstrip()))
        entries.append((lineno, key.strip(), expr.strip(), col))

    header = {}
    seen = set()
    for lineno, key, expr, _ in entries:
        if key in seen:
            raise ParseError(f"duplicate key {key!r}", lineno, 1, path)
        seen.add(key)
        if key in HEADER:
            header[key] = (lineno, expr)
        elif not _KEY.match(key):
            raise ParseError(f"unknown key {key!r}", lineno, 1, path)
    for key in HEADER:
        if key not in header:
            raise ParseError(f"missing header {key!r}", 1, 1, path)

    def header_int(key, low):
        lineno, expr = header[key]
        if not re.fullmatch(r"\d+", expr) or int(expr) < low:
            raise ParseError(f"{key} must be an integer >= {low}", lineno, 1, path)
        return int(expr)

    version = header_int("grammar_version", 0)
    if version != GRAMMAR_VERSION:
        raise ParseError(f"unsupported grammar_version {version}",
                         header["grammar_version"][0], 1, path)
    nvars, order = header_int("d", 1), header_int("N", 1)
    kind = header["kind"][1]
    if kind not in ("assoc", "poisson"):
        raise ParseError("kind must be assoc or poisson", header["kind"][0], 1, path)
    doc = Document(path, nvars, order, kind)

    def parse(lineno, col, expr, **kw):
        try:
            return parse_expr(expr, nvars, **kw)
        except ParseError as e:
            raise ParseError(e.message, lineno + e.line - 1,
                             col + e.column - 1 if e.line == 1 else e.column, path) from None

    body = [e for e in entries if e[1] not in HEADER]
    # s and t first so that a, b, c may use negative powers of s
    body.sort(key=lambda e: e[1] not in ("s", "t"))
    for lineno, key, expr, col in body:
        if key in ("m", "coeff_degree"):
            if not re.fullmatch(r"\d+", expr):
                raise ParseError(f"{key} must be a nonnegative integer", lineno, col, path)
            doc.params[key] = int(expr)
        elif key in ("s", "t") or key.startswith("T["):
            value = parse(lineno, col, expr, expect="poly",
                          s=doc.values.get("s") if key.startswith("T[") else None)
            if key.startswith("T["):
                e = tuple(int(x) for x in key[2:-1].split(","))
                if len(e) != nvars:
                    raise ParseError(f"table index needs {nvars} entries", lineno, 1, path)
                doc.table[e] = value
            else:
                doc.values[key] = value
        elif key == "op":
            doc.values[key] = parse(lineno, col, expr, expect=("op", 0))
        else:
            doc.values[key] = parse(lineno, col, expr, order=order, expect=_expect(key, kind),
                                    s=doc.values.get("s"))
    return doc


def read_document(path: str) -> Document:
    if path == "-":
        return parse_document(sys.stdin.read(), "<stdin>")
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    return parse_document(text, path)


def moyal_document(nvars: int, pi: Sequence[Sequence], order: int) -> str:
    omega = moyal_mc(pi, order)
    rows = "; ".join(" ".join(str(Fraction(x)) for x in row) for row in pi)
    return (f"# Moyal star product, pi = [{rows}]\n"
            f"grammar_version = {GRAMMAR_VERSION}\nd = {nvars}\nN = {order}\nkind = assoc\n"
            f"omega = {format_value(omega)}\n")


def _parse_matrix(text: str) -> list[list[Fraction]]:
    try:
        rows = [[Fraction(x) for x in row.split()] for row in text.split(";")]
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot read matrix {text!r}") from None
    return rows


# commands

def _grid(doc: Document, args) -> list[Series]:
    rng = random.Random(args.seed)
    return (monomial_grid(doc.nvars, args.grid_degree, doc.order)
            + random_grid(rng, doc.nvars, args.grid_degree, doc.order, args.samples))


def _w(**kw) -> dict[str, str]:
    return {k: format_value(v) for k, v in kw.items()}


def _algebra(doc: Document, s=None) -> DeformedAlgebra:
    (omega,) = doc.require("omega")
    return DeformedAlgebra(doc.kind, omega, doc.nvars, s)


def _mc_checks(rep: Report, doc: Document, omega: Series, name: str = "mc_defect"):
    host = host_for(doc.kind, doc.nvars)
    with timed_check(rep, "membership") as tl:
        for j, c in enumerate(omega):
            tl.record(host.contains(c), lambda: {"omega": format_value(omega), "power": str(j)},
                      f"coefficient of h^{j} is not in {host!r}")
    with timed_check(rep, name) as tl:
        defect = mc_defect(host, omega) if not omega.is_zero() else None
        tl.record(defect is None or defect.is_zero(),
                  lambda: _w(omega=omega, defect=defect),
                  f"MC defect is nonzero at h^{defect.valuation() if defect else 0}")


def cmd_check_mc(doc: Document, args) -> Report:
    rep = Report("check-mc")
    (omega,) = doc.require("omega")
    _mc_checks(rep, doc, omega)
    return rep


def cmd_star_mul(doc: Document, args) -> Report:
    rep = Report("star-mul")
    A = _algebra(doc, doc.values.get("s"))
    A._require("assoc")
    a, b = (A.element(x) for x in doc.require("a", "b"))
    ab, ba = A.star(a, b), A.star(b, a)
    rep.values.update({"a*b": format_value(ab), "b*a": format_value(ba),
                       "[a,b]": format_value(ab - ba)})
    with timed_check(rep, "unit") as tl:
        one = A.one()
        for x in (a, b):
            tl.record(A.star(one, x) == x and A.star(x, one) == x, lambda: _w(a=x),
                      "1 is not a unit")
    with timed_check(rep, "augmentation") as tl:
        tl.record(ab[0] == a[0] * b[0], lambda: _w(a=a, b=b),
                  "augmentation is not multiplicative")
    if "c" in doc.values:
        c = A.element(doc.values["c"])
        with timed_check(rep, "associativity") as tl:
            d = A.assoc_defect(a, b, c)
            tl.record(d.is_zero(), lambda: _w(a=a, b=b, c=c, defect=d),
                      "(a*b)*c differs from a*(b*c)")
    return rep


def cmd_poisson(doc: Document, args) -> Report:
    rep = Report("poisson")
    A = _algebra(doc, doc.values.get("s"))
    A._require("poisson")
    a, b = (A.element(x) for x in doc.require("a", "b"))
    rep.values["{a,b}"] = format_value(A.bracket(a, b))
    grid = [A.element(x) for x in _grid(doc, args)]
    elems = [a, b] + ([A.element(doc.values["c"])] if "c" in doc.values else [])
    with timed_check(rep, "antisymmetry") as tl:
        for x, y in itertools.combinations_with_replacement(elems, 2):
            tl.record((A.bracket(x, y) + A.bracket(y, x)).is_zero(), lambda: _w(a=x, b=y),
                      "{a,b} + {b,a} is nonzero")
    with timed_check(rep, "leibniz") as tl:
        for x, y, z in itertools.product(elems, elems + grid[:4], elems + grid[:4]):
            tl.record(A.leibniz_defect(x, y, z).is_zero(), lambda: _w(a=x, b=y, c=z),
                      "bracket is not a derivation")
    with timed_check(rep, "jacobi_grid") as tl:
        for x, y, z in itertools.combinations_with_replacement(elems + grid, 3):
            if not tl.record(A.jacobi_defect(x, y, z).is_zero(),
                             lambda: _w(a=x, b=y, c=z, defect=A.jacobi_defect(x, y, z)),
                             "Jacobi identity fails"):
                break
    return rep


def cmd_gauge_apply(doc: Document, args) -> Report:
    rep = Report("gauge-apply")
    A = _algebra(doc)
    gammas = doc.numbered("gamma")
    if not gammas:
        raise UsageError(f"{doc.path}: gauge-apply needs a gamma binding")
    grid = _grid(doc, args)
    for k, gamma in enumerate(gammas):
        B, g = gauge_transport(A, gamma)
        rep.values[f"omega'[{k}]" if len(gammas) > 1 else "omega'"] = format_value(B.omega)
        with timed_check(rep, f"transport[{k}]") as tl:
            if A.is_mc():
                tl.record(B.is_mc(), lambda: _w(gamma=gamma, omega=B.omega),
                          "image of an MC element is not MC")
            for a, b in itertools.product(grid, repeat=2):
                if not tl.record(g(A.operation(a, b)) == B.operation(g(a), g(b)),
                                 lambda: _w(gamma=gamma, a=a, b=b),
                                 "g(a o b) differs from g(a) o' g(b)"):
                    break
            for a in grid:
                tl.record(g(a)[0] == a[0], lambda: _w(gamma=gamma, a=a),
                          "transport does not commute with the augmentation")
    return rep


def cmd_bch(doc: Document, args) -> Report:
    rep = Report("bch")
    gammas = doc.numbered("gamma")
    if len(gammas) < 2:
        raise UsageError(f"{doc.path}: bch needs gamma1 and gamma2")
    g1, g2 = gammas[:2]
    host = host_for(doc.kind, doc.nvars)
    z = bch(g1, g2, host.sbracket)
    rep.values["bch(gamma1,gamma2)"] = format_value(z)
    E1, E2, Ez = GaugeMap(host, g1), GaugeMap(host, g2), GaugeMap(host, z)
    with timed_check(rep, "exp_product") as tl:
        for a in _grid(doc, args):
            tl.record(Ez(a) == E1(E2(a)), lambda: _w(gamma1=g1, gamma2=g2, a=a),
                      "exp(bch(g1, g2)) differs from exp(g1) o exp(g2)")
    with timed_check(rep, "inverse") as tl:
        tl.record(bch(g1, -g1, host.sbracket).is_zero(), lambda: _w(gamma1=g1),
                  "bch(g, -g) is nonzero")
    return rep


def cmd_star_inverse(doc: Document, args) -> Report:
    rep = Report("star-inverse")
    A = _algebra(doc, doc.values.get("s"))
    A._require("assoc")
    (a,) = doc.require("a")
    a = A.element(a)
    with timed_check(rep, "invertible") as tl:
        try:
            inv = star_inverse(A, a)
            tl.record(True)
        except NotInvertibleError as e:
            inv = None
            tl.record(False, {"a": format_value(a), "s": format_value(e.needed)}, str(e))
    if inv is not None:
        rep.values["a^-1"] = format_value(inv)
        with timed_check(rep, "two_sided") as tl:
            tl.record(A.star(a, inv) == A.one() and A.star(inv, a) == A.one(),
                      lambda: _w(a=a), "a * a^-1 is not 1")
    return rep


def cmd_localize(doc: Document, args) -> Report:
    rep = Report("localize")
    (s,) = doc.require("s")
    A = _algebra(doc)
    grid = _grid(doc, args)
    rep.extend(check_localization(A, s, grid))
    if "t" in doc.values:
        rep.extend(cover_compat(A, s, doc.values["t"], grid), "cover.")
    return rep


def cmd_deligne_verify(doc: Document | None, args) -> Report:
    if doc is None:
        fixture = {"normal": normal_subgroup_fixture, "broken": broken_fixture}[args.fixture]
        rep = verify_crossed_axioms(fixture(("p", "q"), 3), None, args.seed)
        rep.command = "deligne-verify"
        return rep
    (omega,) = doc.require("omega")
    host = host_for(doc.kind, doc.nvars)
    rep = Report("deligne-verify")
    _mc_checks(rep, doc, omega)
    if not rep.ok:
        return rep
    x = MCElement(host, omega)
    D = deligne_build(host, [x], [(0, g) for g in doc.numbered("gamma")],
                      [(0, a.map(host.function)) for a in doc.numbered("alpha")])
    with timed_check(rep, "arrows_valid") as tl:
        for i, y in enumerate(D.objects()):
            for z in D.objects():
                for f in D.arrows(y, z):
                    tl.record(D.arrow_is_valid(f), lambda: {"gamma": D.show1(f)},
                              "gauge element does not map source to target")
    rep.extend(verify_crossed_axioms(D, args.budget, args.seed))
    return rep


def cmd_geo_verify(doc: Document, args) -> Report:
    (omega,) = doc.require("omega")
    alphas = doc.numbered("alpha") or None
    return geo_verify(doc.kind, omega, doc.numbered("gamma"), alphas,
                      s=doc.values.get("s"), t=doc.values.get("t"),
                      grid_degree=args.grid_degree, samples=args.samples, seed=args.seed,
                      crossed_budget=args.budget)


def cmd_recognize_op(doc: Document, args) -> Report:
    rep = Report("recognize-op")
    m = doc.params.get("m", 2)
    cdeg = doc.params.get("coeff_degree", 2)
    tdeg = args.test_degree if args.test_degree is not None else max(m + cdeg, m + 2)
    n = doc.nvars
    if "op" in doc.values:
        table = OpTable.from_op(doc.values["op"], tdeg)
    elif doc.table:
        # the largest degree through which every monomial has an entry
        full = 0
        while all(e in doc.table for e in monomials(n, full + 1)):
            full += 1
        if not all(e in doc.table for e in monomials(n, 0)):
            raise UsageError(f"{doc.path}: the table needs T[0,..,0]")
        if args.test_degree is not None:
            if args.test_degree > full:
                raise UsageError(f"{doc.path}: table is complete only through degree {full}")
            full = args.test_degree
        table = OpTable(n, {e: v for e, v in doc.table.items() if sum(e) <= full}, full)
    else:
        raise UsageError(f"{doc.path}: recognize-op needs op or T[...] entries")
    with timed_check(rep, "recognized") as tl:
        try:
            op = recognize_diffop(table, m, cdeg)
            tl.record(True)
        except RecognitionError as e:
            op = None
            tl.record(False, {"monomial": format_value(Poly.monomial(e.witness))}, str(e))
        except InsufficientTestDegreeError as e:
            raise UsageError(str(e)) from None
    if op is not None:
        rep.values["operator"] = format_value(op)
        rep.values["order"] = str(op.order())
        if "op" in doc.values:
            with timed_check(rep, "round_trip") as tl:
                tl.record(op == doc.values["op"], {"op": format_value(doc.values["op"])},
                          "recognized operator differs from the input")
        if table.test_degree >= m + 2:
            with timed_check(rep, "op_order") as tl:
                k = op_order(table, m, table.test_degree)
                tl.record(k == max(op.order(), 0), {"operator": format_value(op)},
                          f"commutator test gives order {k}, recognized {op.order()}")
    return rep


COMMANDS = {
    "check-mc": cmd_check_mc,
    "star-mul": cmd_star_mul,
    "gauge-apply": cmd_gauge_apply,
    "bch": cmd_bch,
    "poisson": cmd_poisson,
    "deligne-verify": cmd_deligne_verify,
    "geo-verify": cmd_geo_verify,
    "localize": cmd_localize,
    "star-inverse": cmd_star_inverse,
    "recognize-op": cmd_recognize_op,
}

HELP = {
    "check-mc": "check omega for membership and the MC equation",
    "star-mul": "star products of a and b, with unit and associativity checks",
    "gauge-apply": "transport omega along each gamma and check the result",
    "bch": "bch(gamma1, gamma2) and the composition law of gauge maps",
    "poisson": "brackets of a and b, with Leibniz and Jacobi checks",
    "deligne-verify": "crossed groupoid axioms for a document or a built-in fixture",
    "geo-verify": "run every check that the document supports",
    "localize": "restriction to the localization at s",
    "star-inverse": "two-sided star inverse of a, or the element to localize at",
    "recognize-op": "recover a differential operator from op or a T[...] table",
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="defquant",
                                description="Exact checks for deformation quantization data.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--grid-degree", type=int, default=3, metavar="D")
    common.add_argument("--samples", type=int, default=0, metavar="K",
                        help="random grid elements added to the monomials")
    common.add_argument("--test-degree", type=int, default=None, metavar="D_TEST")
    common.add_argument("--budget", type=int, default=12,
                        help="sampled instances per crossed-groupoid check")
    common.add_argument("--json", metavar="PATH",
                        help="also write the machine report to PATH ('-' for stdout only)")
    common.add_argument("--no-timings", action="store_true")

    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common], help=HELP[name])
        if name == "deligne-verify":
            sp.add_argument("document", nargs="?")
            sp.add_argument("--fixture", choices=["normal", "broken"])
        else:
            sp.add_argument("document", help="document file, or - for stdin")

    mp = sub.add_parser("moyal", help="print a document with the Moyal MC element")
    mp.add_argument("--d", type=int, required=True)
    mp.add_argument("--pi", required=True, help='rows separated by ";", e.g. "0 1; -1 0"')
    mp.add_argument("--N", type=int, required=True)
    return p


def emit_report(rep: Report, fmt: str = "text", timings: bool = True) -> bytes:
    if fmt == "machine":
        return rep.to_json().encode()
    return rep.to_text(timings).encode()


def run_command(argv: Sequence[str] | None = None) -> tuple[int, Report | None]:
    """Parse ``argv``, run the command and print its report; returns the exit code."""
    args = build_parser().parse_args(argv)
    if args.command == "moyal":
        pi = _parse_matrix(args.pi)
        if len(pi) != args.d:
            raise UsageError(f"pi has {len(pi)} rows, expected {args.d}")
        sys.stdout.write(moyal_document(args.d, pi, args.N))
        return 0, None
    if args.command == "deligne-verify" and args.document is None:
        if args.fixture is None:
            raise UsageError("deligne-verify needs a document or --fixture")
        doc = None
    else:
        doc = read_document(args.document)
    rep = COMMANDS[args.command](doc, args)
    if args.json == "-":
        sys.stdout.write(emit_report(rep, "machine").decode())
    else:
        sys.stdout.write(emit_report(rep, "text", not args.no_timings).decode())
        if args.json:
            with open(args.json, "wb") as fh:
                fh.write(emit_report(rep, "machine"))
    return (0 if rep.ok else 1), rep


def main(argv: Sequence[str] | None = None) -> int:
    try:
        code, _ = run_command(argv)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return 2
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except DefQuantError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    return code


if __name__ == "__main__":
    sys.exit(main())
