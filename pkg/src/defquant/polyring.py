"""Exact polynomials over Q and fractions over a principal localization.

Variables are indexed from 0 internally; the expression grammar prints
variable ``i`` as ``x{i+1}``.  Exponent tuples double as derivative
multi-indices throughout the package.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Iterator, Mapping

from .errors import ContextMismatchError, NotInvertibleError

Exps = tuple[int, ...]


def _is_scalar(q) -> bool:
    return isinstance(q, (int, Fraction, Rational)) and not isinstance(q, bool)


def grlex_key(exps: Exps):
    """Graded-lexicographic sort key (ascending)."""
    return (sum(exps), exps)


class Poly:
    """A polynomial in ``nvars`` variables with rational coefficients.

    ``terms`` maps exponent tuples to nonzero :class:`Fraction` coefficients.
    Instances are immutable and hashable.
    """

    __slots__ = ("nvars", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Exps, object] | None = None):
        self.nvars = nvars
        clean = {}
        if terms:
            for e, c in terms.items():
                if len(e) != nvars:
                    raise ContextMismatchError(
                        f"exponent {e} does not match {nvars} variables")
                if c:
                    clean[tuple(e)] = c if isinstance(c, Fraction) else Fraction(c)
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, nvars: int, terms: dict) -> Poly:
        p = cls.__new__(cls)
        p.nvars = nvars
        p._terms = terms
        p._hash = None
        return p

    @classmethod
    def const(cls, c, nvars: int) -> Poly:
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def one(cls, nvars: int) -> Poly:
        return cls.const(1, nvars)

    @classmethod
    def zero(cls, nvars: int) -> Poly:
        return cls._raw(nvars, {})

    @classmethod
    def var(cls, i: int, nvars: int) -> Poly:
        if not 0 <= i < nvars:
            raise IndexError(f"variable index {i} out of range for {nvars} variables")
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): 1})

    @classmethod
    def monomial(cls, exps: Iterable[int], coeff=1) -> Poly:
        exps = tuple(exps)
        return cls(len(exps), {exps: coeff})

    @property
    def terms(self) -> Mapping[Exps, Fraction]:
        return self._terms

    # comparisons and hashing

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self._terms == other._terms
        if _is_scalar(other):
            if not other:
                return not self._terms
            return self._terms == {(0,) * self.nvars: Fraction(other)}
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self):
        from .grammar import format_poly
        return f"Poly({format_poly(self)!r})"

    def __str__(self):
        from .grammar import format_poly
        return format_poly(self)

    # structure

    def sorted_terms(self) -> list[tuple[Exps, Fraction]]:
        """Terms in descending graded-lex order."""
        return sorted(self._terms.items(), key=lambda t: grlex_key(t[0]), reverse=True)

    def total_degree(self) -> int:
        return max((sum(e) for e in self._terms), default=-1)

    def is_constant(self) -> bool:
        return all(not any(e) for e in self._terms)

    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * self.nvars, Fraction(0))

    def leading_term(self) -> tuple[Exps, Fraction]:
        return max(self._terms.items(), key=lambda t: grlex_key(t[0]))

    def _check(self, other: Poly):
        if other.nvars != self.nvars:
            raise ContextMismatchError(
                f"variable counts differ: {self.nvars} vs {other.nvars}")

    # arithmetic

    def __add__(self, other):
        if isinstance(other, Poly):
            self._check(other)
            out = dict(self._terms)
            for e, c in other._terms.items():
                v = out.get(e, 0) + c
                if v:
                    out[e] = v
                else:
                    out.pop(e, None)
            return Poly._raw(self.nvars, out)
        if _is_scalar(other):
            return self + Poly.const(other, self.nvars)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(self.nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        if isinstance(other, Poly) or _is_scalar(other):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        if _is_scalar(other):
            return (-self) + other
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, Poly):
            self._check(other)
            out: dict = {}
            for e1, c1 in self._terms.items():
                for e2, c2 in other._terms.items():
                    e = tuple(a + b for a, b in zip(e1, e2))
                    v = out.get(e, 0) + c1 * c2
                    if v:
                        out[e] = v
                    else:
                        out.pop(e, None)
            return Poly._raw(self.nvars, out)
        if _is_scalar(other):
            if not other:
                return Poly.zero(self.nvars)
            q = Fraction(other)
            return Poly._raw(self.nvars, {e: c * q for e, c in self._terms.items()})
        return NotImplemented

    def __rmul__(self, other):
        if _is_scalar(other):
            return self.__mul__(other)
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers")
        result = Poly.one(self.nvars)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def diff(self, i: int, m: int = 1) -> Poly:
        """``m``-fold partial derivative in variable ``i``."""
        if m == 0:
            return self
        out = {}
        for e, c in self._terms.items():
            if e[i] >= m:
                f = c * math.perm(e[i], m)
                ne = e[:i] + (e[i] - m,) + e[i + 1:]
                out[ne] = f
        return Poly._raw(self.nvars, out)

    def diff_multi(self, alpha: Exps) -> Poly:
        """Apply ``d^alpha`` for a multi-index ``alpha``."""
        out = {}
        for e, c in self._terms.items():
            f = c
            for a, k in zip(e, alpha):
                if k > a:
                    f = 0
                    break
                if k:
                    f *= math.perm(a, k)
            if f:
                out[tuple(a - k for a, k in zip(e, alpha))] = f
        return Poly._raw(self.nvars, out)

    def divmod(self, divisor: Poly) -> tuple[Poly, Poly]:
        """Multivariate division by one polynomial in graded-lex order."""
        self._check(divisor)
        if not divisor:
            raise ZeroDivisionError("division by the zero polynomial")
        lead_e, lead_c = divisor.leading_term()
        quotient: dict = {}
        remainder: dict = {}
        rest = dict(self._terms)
        while rest:
            e, c = max(rest.items(), key=lambda t: grlex_key(t[0]))
            if all(a >= b for a, b in zip(e, lead_e)):
                qe = tuple(a - b for a, b in zip(e, lead_e))
                qc = c / lead_c
                quotient[qe] = quotient.get(qe, 0) + qc
                for de, dc in divisor._terms.items():
                    te = tuple(a + b for a, b in zip(qe, de))
                    v = rest.get(te, 0) - qc * dc
                    if v:
                        rest[te] = v
                    else:
                        rest.pop(te, None)
            else:
                remainder[e] = c
                del rest[e]
        return Poly(self.nvars, quotient), Poly._raw(self.nvars, remainder)

    def divexact(self, divisor: Poly) -> Poly | None:
        """Quotient if ``divisor`` divides ``self`` exactly, else ``None``."""
        q, r = self.divmod(divisor)
        return None if r else q

    def __call__(self, *point) -> Fraction:
        if len(point) != self.nvars:
            raise ContextMismatchError("wrong number of coordinates")
        total = Fraction(0)
        for e, c in self._terms.items():
            v = c
            for x, k in zip(point, e):
                if k:
                    v *= Fraction(x) ** k
            total += v
        return total

    def inverse(self) -> Poly:
        if self.is_constant() and self:
            return Poly.const(1 / self.constant_term(), self.nvars)
        raise NotInvertibleError(f"{self} is not a unit of the polynomial ring", needed=self)

    def lift(self, s: Poly | None) -> Poly | LocPoly:
        return self if s is None else LocPoly(self, s, 0)


class LocPoly:
    """The fraction ``numerator / s**k`` in the localization ``C_s``.

    Normal form: ``s`` does not divide ``numerator`` whenever ``k > 0``.
    """

    __slots__ = ("numerator", "s", "k", "_hash")

    def __init__(self, numerator: Poly, s: Poly, k: int = 0):
        if not s:
            raise ZeroDivisionError("cannot localize at zero")
        numerator._check(s)
        if k < 0:
            numerator = numerator * s ** (-k)
            k = 0
        while k > 0 and numerator:
            q = numerator.divexact(s)
            if q is None:
                break
            numerator, k = q, k - 1
        if not numerator:
            k = 0
        self.numerator = numerator
        self.s = s
        self.k = k
        self._hash = None

    @property
    def nvars(self) -> int:
        return self.s.nvars

    def __bool__(self):
        return bool(self.numerator)

    def __eq__(self, other):
        if isinstance(other, LocPoly):
            return (self.s == other.s and self.k == other.k
                    and self.numerator == other.numerator)
        if isinstance(other, Poly) or _is_scalar(other):
            return self.k == 0 and self.numerator == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.numerator, self.s, self.k)) if self.k else hash(self.numerator)
        return self._hash

    def __repr__(self):
        from .grammar import format_value
        return f"LocPoly({format_value(self)!r})"

    def __str__(self):
        from .grammar import format_value
        return format_value(self)

    def _coerce(self, other) -> LocPoly | None:
        if isinstance(other, LocPoly):
            if other.s != self.s:
                raise ContextMismatchError(
                    f"localizations differ: C_({self.s}) vs C_({other.s})")
            return other
        if isinstance(other, Poly):
            return LocPoly(other, self.s, 0)
        if _is_scalar(other):
            return LocPoly(Poly.const(other, self.nvars), self.s, 0)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        k = max(self.k, o.k)
        num = self.numerator * self.s ** (k - self.k) + o.numerator * self.s ** (k - o.k)
        return LocPoly(num, self.s, k)

    __radd__ = __add__

    def __neg__(self):
        return LocPoly._raw(-self.numerator, self.s, self.k)

    @classmethod
    def _raw(cls, numerator, s, k):
        x = cls.__new__(cls)
        x.numerator, x.s, x.k, x._hash = numerator, s, k, None
        return x

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        if _is_scalar(other):
            return LocPoly._raw(self.numerator * other, self.s, self.k if other else 0)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return LocPoly(self.numerator * o.numerator, self.s, self.k + o.k)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        return LocPoly(self.numerator ** n, self.s, self.k * n)

    def diff(self, i: int, m: int = 1) -> LocPoly:
        """Quotient rule ``d(f/s^k) = (df s - k f ds) / s^(k+1)``, iterated ``m`` times."""
        out = self
        for _ in range(m):
            f, s, k = out.numerator, out.s, out.k
            if k == 0:
                out = LocPoly(f.diff(i), s, 0)
            else:
                out = LocPoly(f.diff(i) * s - k * f * s.diff(i), s, k + 1)
        return out

    def diff_multi(self, alpha: Exps) -> LocPoly:
        out = self
        for i, m in enumerate(alpha):
            if m:
                out = out.diff(i, m)
        return out

    def restrict(self, t: Poly) -> LocPoly:
        """Image in ``C_{st}``: ``f/s^k = f t^k / (st)^k``."""
        return LocPoly(self.numerator * t ** self.k, self.s * t, self.k)

    def inverse(self) -> LocPoly:
        """Inverse in ``C_s``; exists iff the numerator divides a power of ``s``."""
        num = self.numerator
        if not num:
            raise NotInvertibleError("zero is not invertible", needed=num)
        if num.is_constant():
            return LocPoly(self.s ** self.k * (1 / num.constant_term()), self.s, 0)
        sp = Poly.one(self.nvars)
        for m in range(1, num.total_degree() + 1):
            sp = sp * self.s
            q = sp.divexact(num)
            if q is not None:
                return LocPoly(q * self.s ** self.k, self.s, m)
        raise NotInvertibleError(
            f"{num} is not a unit of C_({self.s}); localize at it", needed=num)

    def to_poly(self) -> Poly | None:
        return self.numerator if self.k == 0 else None

    def lift(self, s):
        return self


def loc_restrict(f: Poly | LocPoly, t: Poly) -> LocPoly:
    """Restriction ``C_s -> C_{st}`` (a polynomial is viewed in ``C_1``)."""
    if not t:
        raise ZeroDivisionError("cannot localize at zero")
    if isinstance(f, Poly):
        return LocPoly(f, t, 0)
    return f.restrict(t)


def partial_derivative(f: Poly | LocPoly, i: int, m: int = 1):
    return f.diff(i, m)


def poly_arith(a, b=None, mode: str = "add"):
    if mode == "add":
        return a + b
    if mode == "mul":
        return a * b
    if mode == "neg":
        return -a
    raise ValueError(f"unknown mode {mode!r}")


def monomials(nvars: int, max_degree: int) -> Iterator[Exps]:
    """All exponent tuples of total degree ``<= max_degree``, ascending grlex."""
    for deg in range(max_degree + 1):
        batch = []
        for combo in itertools.combinations_with_replacement(range(nvars), deg):
            e = [0] * nvars
            for i in combo:
                e[i] += 1
            batch.append(tuple(e))
        yield from sorted(batch)


def monomial_grid(nvars: int, max_degree: int) -> list[Poly]:
    return [Poly.monomial(e) for e in monomials(nvars, max_degree)]
