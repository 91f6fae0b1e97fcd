"""The shared expression grammar (version 1).

Atoms are rationals ``p/q``, variables ``x1 .. xd``, the parameter ``h``,
vector fields ``dx<i>`` and polydifferential atoms ``D[a|b|...]`` whose slots
list 1-based variable indices with repetition (``D[1,1|2]`` is
``d_1^2 (x) d_2``; an empty slot is the identity).  Operators are ``+ - *``,
``^`` (integer power when followed by an integer, wedge otherwise) and
parentheses.  ``^`` binds tighter than unary minus, which binds tighter than
``*``.  A negative power ``f^-k`` is accepted when a localization element is
in scope and ``f`` is a unit there.

Printing is canonical (descending graded-lex order, fixed spacing) and
``parse_expr(format_value(v)) == v``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .dpoly import PolyDiffOp
from .errors import NotInvertibleError, ParseError
from .polyring import LocPoly, Poly, grlex_key
from .series import Series
from .tpoly import PolyVec, wedge

GRAMMAR_VERSION = 1

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<num>\d+(?:/\d+)?)
  | (?P<dx>dx(?P<dxi>\d+))
  | (?P<var>x(?P<vi>\d+))
  | (?P<dop>D\[(?P<slots>[^\]]*)\])
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*^()])
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int
    value: Any = None


def _tokenize(text: str, nvars: int) -> list[_Tok]:
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group(0)
        if m.group("ws"):
            for k, ch in enumerate(s):
                if ch == "\n":
                    line += 1
                    line_start = pos + k + 1
        elif m.group("num"):
            p, _, q = s.partition("/")
            if q and int(q) == 0:
                raise ParseError("zero denominator", line, col)
            out.append(_Tok("num", s, line, col, Fraction(int(p), int(q) if q else 1)))
        elif m.group("dx"):
            i = int(m.group("dxi"))
            if not 1 <= i <= nvars:
                raise ParseError(f"wedge index {s} out of range for d = {nvars}", line, col)
            out.append(_Tok("dx", s, line, col, i - 1))
        elif m.group("var"):
            i = int(m.group("vi"))
            if not 1 <= i <= nvars:
                raise ParseError(f"unknown variable {s} (d = {nvars})", line, col)
            out.append(_Tok("var", s, line, col, i - 1))
        elif m.group("dop"):
            out.append(_Tok("dop", s, line, col, _parse_slots(m.group("slots"), nvars, line, col)))
        elif m.group("ident"):
            if s != "h":
                raise ParseError(f"unknown identifier {s!r}", line, col)
            out.append(_Tok("h", s, line, col))
        else:
            out.append(_Tok(s, s, line, col))
        pos = m.end()
    out.append(_Tok("eof", "", line, pos - line_start + 1))
    return out


def _parse_slots(body: str, nvars: int, line: int, col: int) -> tuple:
    slots = []
    for part in body.split("|"):
        part = part.strip()
        e = [0] * nvars
        if part:
            for item in part.split(","):
                item = item.strip()
                if not item.isdigit():
                    raise ParseError(f"bad slot entry {item!r}", line, col)
                i = int(item)
                if not 1 <= i <= nvars:
                    raise ParseError(f"derivative index {i} out of range for d = {nvars}",
                                     line, col)
                e[i - 1] += 1
        slots.append(tuple(e))
    return tuple(slots)


# values during evaluation: {power of h: nonzero component}

def _kind(c) -> tuple:
    if isinstance(c, (Poly, LocPoly)):
        return ("f",)
    if isinstance(c, PolyVec):
        return ("v", c.degree)
    if isinstance(c, PolyDiffOp):
        return ("o", c.degree)
    raise TypeError(type(c))


def _vkind(v: dict):
    for c in v.values():
        return _kind(c)
    return None


_KIND_NAMES = {"f": "function", "v": "polyvector", "o": "operator"}


def _kind_name(k) -> str:
    if k is None:
        return "zero"
    if k[0] == "f":
        return "function"
    return f"degree {k[1]} {_KIND_NAMES[k[0]]}"


class _Parser:
    def __init__(self, text: str, nvars: int, order: int | None, s: Poly | None):
        self.toks = _tokenize(text, nvars)
        self.i = 0
        self.nvars = nvars
        self.order = order
        self.s = s

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind: str) -> _Tok:
        t = self.peek()
        if t.kind != kind:
            what = t.text or "end of input"
            raise ParseError(f"expected {kind!r}, found {what!r}", t.line, t.col)
        return self.take()

    def err(self, msg: str, tok: _Tok):
        raise ParseError(msg, tok.line, tok.col)

    # grammar

    def parse(self) -> dict:
        v = self.sum()
        t = self.peek()
        if t.kind != "eof":
            self.err(f"unexpected {t.text!r}", t)
        return v

    def sum(self) -> dict:
        v = self.product()
        while self.peek().kind in "+-":
            op = self.take()
            w = self.product()
            v = self.add(v, w if op.kind == "+" else self.neg(w), op)
        return v

    def product(self) -> dict:
        v = self.unary()
        while self.peek().kind == "*":
            op = self.take()
            v = self.mul(v, self.unary(), op)
        return v

    def unary(self) -> dict:
        if self.peek().kind == "-":
            self.take()
            return self.neg(self.unary())
        if self.peek().kind == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> dict:
        v = self.atom()
        while self.peek().kind == "^":
            op = self.take()
            t = self.peek()
            if t.kind == "num" or (t.kind == "-" and self.toks[self.i + 1].kind == "num"):
                negative = t.kind == "-"
                if negative:
                    self.take()
                n = self.take()
                if n.value.denominator != 1:
                    self.err("exponent must be an integer", n)
                k = int(n.value)
                v = self.pow(v, -k if negative else k, op)
            else:
                v = self.wedge(v, self.atom(), op)
        return v

    def atom(self) -> dict:
        t = self.take()
        n = self.nvars
        if t.kind == "num":
            return {0: Poly.const(t.value, n)} if t.value else {}
        if t.kind == "var":
            return {0: Poly.var(t.value, n)}
        if t.kind == "h":
            if self.order is None:
                self.err("the parameter h is not allowed here", t)
            return {1: Poly.one(n)} if self.order >= 1 else {}
        if t.kind == "dx":
            return {0: PolyVec.vector(t.value, Poly.one(n), n)}
        if t.kind == "dop":
            return {0: PolyDiffOp(n, len(t.value) - 1, {t.value: 1})}
        if t.kind == "(":
            v = self.sum()
            self.expect(")")
            return v
        self.err(f"unexpected {t.text or 'end of input'!r}", t)

    # semantics

    def add(self, a: dict, b: dict, tok: _Tok) -> dict:
        ka, kb = _vkind(a), _vkind(b)
        if ka is not None and kb is not None and ka != kb:
            self.err(f"mixed degrees: cannot add {_kind_name(ka)} and {_kind_name(kb)}", tok)
        out = dict(a)
        for j, c in b.items():
            # zeros are kept: they still carry their degree
            out[j] = out[j] + c if j in out else c
        return out

    def neg(self, a: dict) -> dict:
        return {j: -c for j, c in a.items()}

    def _cmul(self, x, y, tok):
        kx, ky = _kind(x), _kind(y)
        if kx[0] == "f":
            return x * y if ky[0] == "f" else y.__rmul__(x)
        if ky[0] == "f":
            return x.__rmul__(y)
        self.err(f"cannot multiply {_kind_name(kx)} by {_kind_name(ky)}"
                 + ("; use ^ for the wedge product" if kx[0] == ky[0] == "v" else ""), tok)

    def mul(self, a: dict, b: dict, tok: _Tok) -> dict:
        out: dict = {}
        top = 0 if self.order is None else self.order
        for i, x in a.items():
            for j, y in b.items():
                if i + j > top:
                    continue
                v = self._cmul(x, y, tok)
                out[i + j] = out[i + j] + v if i + j in out else v
        return out

    def wedge(self, a: dict, b: dict, tok: _Tok) -> dict:
        out: dict = {}
        top = 0 if self.order is None else self.order
        for i, x in a.items():
            for j, y in b.items():
                if not (isinstance(x, PolyVec) and isinstance(y, PolyVec)) \
                        or x.degree < 0 or y.degree < 0:
                    self.err("wedge needs polyvectors of degree >= 0; "
                             "powers need an integer exponent", tok)
                if i + j > top:
                    continue
                if x.degree + y.degree + 1 > self.nvars - 1:
                    continue
                v = wedge(x, y)
                out[i + j] = out[i + j] + v if i + j in out else v
        return out

    def pow(self, a: dict, k: int, tok: _Tok) -> dict:
        kind = _vkind(a)
        if kind is not None and kind[0] != "f":
            self.err(f"cannot raise a {_kind_name(kind)} to a power", tok)
        if k < 0:
            if set(a) - {0}:
                self.err("negative powers are only defined for h-free functions", tok)
            if self.s is None:
                self.err("negative powers need a localization element s", tok)
            base = a.get(0)
            if base is None:
                self.err("zero is not invertible", tok)
            base = base if isinstance(base, LocPoly) else LocPoly(base, self.s, 0)
            try:
                inv = base.inverse()
            except NotInvertibleError as e:
                self.err(str(e), tok)
            return {0: inv ** (-k)}
        result = {0: Poly.one(self.nvars)}
        for _ in range(k):
            result = self.mul(result, a, tok)
        return result


def _coerce(c, expect, nvars: int):
    """Convert a parsed component to the expected species (or its zero)."""
    if expect is None:
        return c if c is not None else Poly.zero(nvars)
    kind, deg = (expect, None) if isinstance(expect, str) else expect
    if c is None:
        if kind == "poly":
            return Poly.zero(nvars)
        if kind == "polyvec":
            return PolyVec.zero(nvars, deg)
        return PolyDiffOp.zero(nvars, deg)
    k = _kind(c)
    if kind == "poly" and k[0] == "f":
        return c
    if kind == "polyvec":
        if k == ("v", deg):
            return c
        if deg == -1 and k[0] == "f":
            return PolyVec.function(c)
    if kind == "op":
        if k == ("o", deg):
            return c
        if deg == -1 and k[0] == "f":
            return PolyDiffOp.function(c)
    raise ParseError(f"expected {kind}{'' if deg is None else f' of degree {deg}'}, "
                     f"got {_kind_name(k)}")


def parse_expr(text: str, nvars: int, order: int | None = None,
               s: Poly | None = None, expect=None):
    """Parse ``text`` in ``nvars`` variables.

    With ``order=None`` the parameter ``h`` is rejected and a plain component
    is returned; otherwise the result is a :class:`Series` truncated at
    ``order``.  ``expect`` is ``"poly"``, ``("polyvec", p)`` or ``("op", p)``
    and fixes the species of zero components and degree -1 lifts.
    """
    value = _Parser(text, nvars, order, s).parse()
    if order is None:
        return _coerce(value.get(0), expect, nvars)
    if expect is None:
        k = _vkind(value)
        if k is not None:
            expect = "poly" if k[0] == "f" else ("polyvec" if k[0] == "v" else "op", k[1])
    return Series(_coerce(value.get(j), expect, nvars) for j in range(order + 1))


# printing

def _monomial_text(e) -> str:
    parts = []
    for i, k in enumerate(e):
        if k == 1:
            parts.append(f"x{i + 1}")
        elif k:
            parts.append(f"x{i + 1}^{k}")
    return "*".join(parts)


def _join(terms: list[str]) -> str:
    if not terms:
        return "0"
    out = terms[0]
    for t in terms[1:]:
        out += f" - {t[1:]}" if t.startswith("-") else f" + {t}"
    return out


def format_poly(p: Poly) -> str:
    terms = []
    for e, c in p.sorted_terms():
        m = _monomial_text(e)
        if not m:
            terms.append(str(c))
        elif c == 1:
            terms.append(m)
        elif c == -1:
            terms.append("-" + m)
        else:
            terms.append(f"{c}*{m}")
    return _join(terms)


def _format_function(f) -> str:
    if isinstance(f, LocPoly):
        if f.k == 0:
            return format_poly(f.numerator)
        return f"({format_poly(f.numerator)})*({format_poly(f.s)})^-{f.k}"
    return format_poly(f)


def _coef_prefix(c) -> str:
    if c == 1:
        return ""
    if c == -1:
        return "-"
    text = _format_function(c)
    if text.startswith("-") and " " not in text:
        # a single negative term: pull the sign out so _join prints " - "
        return f"-({_format_function(-c)})*"
    return f"({text})*"


def _slot_text(a) -> str:
    return ",".join(str(i + 1) for i, k in enumerate(a) for _ in range(k))


def format_component(v) -> str:
    if isinstance(v, (Poly, LocPoly)):
        return _format_function(v)
    if isinstance(v, PolyVec):
        if v.degree == -1:
            return _format_function(v.as_function())
        terms = [_coef_prefix(c) + "^".join(f"dx{i + 1}" for i in idx)
                 for idx, c in sorted(v.terms.items())]
        return _join(terms)
    if isinstance(v, PolyDiffOp):
        if v.degree == -1:
            return _format_function(v.as_function())
        items = sorted(v.terms.items(),
                       key=lambda t: tuple(grlex_key(a) for a in t[0]), reverse=True)
        terms = [_coef_prefix(c) + "D[" + "|".join(_slot_text(a) for a in slots) + "]"
                 for slots, c in items]
        return _join(terms)
    if isinstance(v, Fraction) or isinstance(v, int):
        return str(Fraction(v))
    raise TypeError(f"cannot format {type(v).__name__}")


def format_value(v) -> str:
    """Canonical text of a component or a series of components."""
    if not isinstance(v, Series):
        return format_component(v)
    terms = []
    for j, c in enumerate(v.coeffs):
        if not c:
            continue
        body = format_component(c)
        if j == 0:
            terms.append(body)
        elif j == 1:
            terms.append(f"h*({body})")
        else:
            terms.append(f"h^{j}*({body})")
    return " + ".join(terms) if terms else "0"
