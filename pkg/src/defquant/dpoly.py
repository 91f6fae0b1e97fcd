"""Polydifferential operators in coordinate form.

A :class:`PolyDiffOp` of degree ``p`` has ``p + 1`` slots and is stored as a
map from slot tuples ``(a_0, ..., a_p)`` of derivative multi-indices to
coefficients, acting by

    (c_0, ..., c_p) -> sum coeff * d^{a_0}(c_0) * ... * d^{a_p}(c_p).

Degree ``-1`` operators are functions, stored under the empty slot tuple.
The Gerstenhaber composition is

    (phi o psi) = sum_i (-1)^{i q} phi(id^i (x) psi (x) id^{p-i})

and the Hochschild differential is ``d = [mu, -]``; with this choice
``mu + omega`` is associative exactly when ``omega`` solves the Maurer-Cartan
equation.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping, Sequence

from .errors import (ArityError, ContextMismatchError, DegreeError,
                     InsufficientTestDegreeError, PreconditionError,
                     RecognitionError)
from .polyring import LocPoly, Poly, _is_scalar, monomials
from .series import Series, multilinear

Exps = tuple[int, ...]
Slots = tuple[Exps, ...]


class PolyDiffOp:
    """Polydifferential operator of degree ``p >= -1`` (arity ``p + 1``)."""

    __slots__ = ("nvars", "degree", "_terms", "_hash")

    def __init__(self, nvars: int, degree: int, terms: Mapping[Slots, object] | None = None):
        if degree < -1 and terms:
            raise DegreeError("operator degree must be >= -1")
        self.nvars = nvars
        self.degree = degree
        clean: dict = {}
        for slots, c in (terms or {}).items():
            slots = tuple(tuple(a) for a in slots)
            if len(slots) != degree + 1:
                raise ArityError(f"{len(slots)} slots given for degree {degree}")
            for a in slots:
                if len(a) != nvars or any(k < 0 for k in a):
                    raise ContextMismatchError(f"bad multi-index {a}")
            if _is_scalar(c):
                c = Poly.const(c, nvars)
            if c.nvars != nvars:
                raise ContextMismatchError("coefficient has the wrong variable count")
            v = clean[slots] + c if slots in clean else c
            if v:
                clean[slots] = v
            else:
                clean.pop(slots, None)
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, nvars, degree, terms):
        x = cls.__new__(cls)
        x.nvars, x.degree, x._terms, x._hash = nvars, degree, terms, None
        return x

    @classmethod
    def zero(cls, nvars: int, degree: int) -> PolyDiffOp:
        return cls._raw(nvars, degree, {})

    @classmethod
    def mu(cls, nvars: int) -> PolyDiffOp:
        """The multiplication cochain ``(c_0, c_1) -> c_0 c_1``."""
        z = (0,) * nvars
        return cls(nvars, 1, {(z, z): 1})

    @classmethod
    def identity(cls, nvars: int) -> PolyDiffOp:
        return cls(nvars, 0, {((0,) * nvars,): 1})

    @classmethod
    def function(cls, f) -> PolyDiffOp:
        return cls(f.nvars, -1, {(): f})

    @classmethod
    def basis(cls, slots: Sequence[Exps], coeff=1, nvars: int | None = None) -> PolyDiffOp:
        slots = tuple(tuple(a) for a in slots)
        if nvars is None:
            nvars = len(slots[0]) if slots else coeff.nvars
        return cls(nvars, len(slots) - 1, {slots: coeff})

    @property
    def terms(self) -> Mapping[Slots, Poly | LocPoly]:
        return self._terms

    def as_function(self):
        if self.degree != -1:
            raise DegreeError("not a degree -1 element")
        return self._terms.get((), Poly.zero(self.nvars))

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if isinstance(other, PolyDiffOp):
            return (self.nvars == other.nvars and self.degree == other.degree
                    and self._terms == other._terms)
        if _is_scalar(other) and other == 0:
            return not self._terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.degree, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self):
        from .grammar import format_value
        return f"PolyDiffOp({format_value(self)!r})"

    def __str__(self):
        from .grammar import format_value
        return format_value(self)

    def _check(self, other):
        if not isinstance(other, PolyDiffOp):
            raise TypeError("expected PolyDiffOp")
        if other.nvars != self.nvars or other.degree != self.degree:
            raise ContextMismatchError("operators of different degree or dimension")

    def __add__(self, other):
        if not isinstance(other, PolyDiffOp):
            return NotImplemented
        self._check(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            v = out[k] + c if k in out else c
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        return PolyDiffOp._raw(self.nvars, self.degree, out)

    def __neg__(self):
        return PolyDiffOp._raw(self.nvars, self.degree, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, PolyDiffOp):
            return NotImplemented
        return self + (-other)

    def __rmul__(self, q):
        if _is_scalar(q) or isinstance(q, (Poly, LocPoly)):
            out = {}
            for k, c in self._terms.items():
                v = q * c
                if v:
                    out[k] = v
            return PolyDiffOp._raw(self.nvars, self.degree, out)
        return NotImplemented

    __mul__ = __rmul__

    def map_coeffs(self, fn) -> PolyDiffOp:
        out = {}
        for k, c in self._terms.items():
            v = fn(c)
            if v:
                out[k] = v
        return PolyDiffOp._raw(self.nvars, self.degree, out)

    def order(self) -> int:
        """Largest total order appearing in any slot (``-1`` for the zero operator)."""
        return max((sum(a) for slots in self._terms for a in slots), default=-1)

    def apply(self, *args):
        """Evaluate on ``p + 1`` functions (polynomials or fractions)."""
        if len(args) != self.degree + 1:
            raise ArityError(f"degree {self.degree} operator takes {self.degree + 1} "
                             f"arguments, got {len(args)}")
        if self.degree == -1:
            return self.as_function()
        cache: dict = {}
        total = None
        for slots, c in self._terms.items():
            val = c
            for i, (a, f) in enumerate(zip(slots, args)):
                key = (i, a)
                if key not in cache:
                    cache[key] = f.diff_multi(a)
                val = cache[key] * val
                if not val:
                    break
            total = val if total is None else total + val
        if total is None:
            total = 0 * args[0]
        return total

    __call__ = apply


def is_normalized(phi: PolyDiffOp) -> bool:
    """True iff no slot is the identity, so ``phi`` vanishes when an argument is 1."""
    if phi.degree == -1:
        return True
    return all(any(a) for slots in phi.terms for a in slots)


@lru_cache(maxsize=None)
def _compositions(n: int, parts: int) -> tuple[tuple[tuple[int, ...], int], ...]:
    """All ways to write ``n`` as an ordered sum of ``parts`` naturals, with multinomials."""
    out = []
    for combo in itertools.combinations_with_replacement(range(parts), n):
        c = [0] * parts
        for j in combo:
            c[j] += 1
        mult = math.factorial(n)
        for k in c:
            mult //= math.factorial(k)
        out.append((tuple(c), mult))
    return tuple(out)


def _leibniz(alpha: Exps, parts: int):
    """Distribute ``d^alpha`` over a product of ``parts`` factors.

    Yields ``(multinomial, [beta_0, ..., beta_{parts-1}])``.
    """
    per_var = [_compositions(k, parts) for k in alpha]
    for choice in itertools.product(*per_var):
        mult = 1
        for _, m in choice:
            mult *= m
        split = [tuple(choice[v][0][j] for v in range(len(alpha))) for j in range(parts)]
        yield mult, split


def _add_exps(a: Exps, b: Exps) -> Exps:
    return tuple(x + y for x, y in zip(a, b))


def compose_at(phi: PolyDiffOp, i: int, psi: PolyDiffOp) -> PolyDiffOp:
    """Insert ``psi`` into slot ``i`` of ``phi``; degree ``p + q``."""
    if phi.nvars != psi.nvars:
        raise ContextMismatchError("dimension mismatch")
    if not 0 <= i <= phi.degree:
        raise ArityError(f"slot {i} out of range for degree {phi.degree}")
    q = psi.degree
    deg = phi.degree + q
    out: dict = {}
    for slots, c in phi.terms.items():
        alpha = slots[i]
        before, after = slots[:i], slots[i + 1:]
        for pslots, e in psi.terms.items():
            for mult, split in _leibniz(alpha, q + 2):
                de = e.diff_multi(split[0])
                if not de:
                    continue
                mid = tuple(_add_exps(b, s) for b, s in zip(pslots, split[1:]))
                key = before + mid + after
                v = (mult * c) * de
                v = out[key] + v if key in out else v
                if v:
                    out[key] = v
                else:
                    out.pop(key, None)
    return PolyDiffOp._raw(phi.nvars, deg, out)


def _accumulate(acc: dict, op: PolyDiffOp, sign: int):
    for k, c in op.terms.items():
        v = acc[k] + sign * c if k in acc else sign * c
        if v:
            acc[k] = v
        else:
            acc.pop(k, None)


def gerstenhaber_circ(phi: PolyDiffOp, psi: PolyDiffOp) -> PolyDiffOp:
    p, q = phi.degree, psi.degree
    out: dict = {}
    for i in range(p + 1):
        _accumulate(out, compose_at(phi, i, psi), -1 if (i * q) % 2 else 1)
    return PolyDiffOp._raw(phi.nvars, p + q, out)


def gerstenhaber_bracket(phi: PolyDiffOp, psi: PolyDiffOp) -> PolyDiffOp:
    """``[phi, psi] = phi o psi - (-1)^{pq} psi o phi``."""
    if phi.nvars != psi.nvars:
        raise ContextMismatchError("dimension mismatch")
    p, q = phi.degree, psi.degree
    if p + q < -1:
        return PolyDiffOp.zero(phi.nvars, p + q)
    out: dict = {}
    _accumulate(out, gerstenhaber_circ(phi, psi), 1)
    _accumulate(out, gerstenhaber_circ(psi, phi), 1 if (p * q) % 2 else -1)
    return PolyDiffOp._raw(phi.nvars, p + q, out)


def hochschild_d(phi: PolyDiffOp) -> PolyDiffOp:
    """Shifted Hochschild differential ``d(phi) = [mu, phi]``."""
    return gerstenhaber_bracket(PolyDiffOp.mu(phi.nvars), phi)


def compose(a: PolyDiffOp, b: PolyDiffOp) -> PolyDiffOp:
    """Composition ``a . b`` of two degree-0 operators."""
    if a.degree != 0 or b.degree != 0:
        raise DegreeError("composition is defined on degree-0 operators")
    return compose_at(a, 0, b)


def slotwise_mul(a: PolyDiffOp, b: PolyDiffOp) -> PolyDiffOp:
    """Product of constant-coefficient operators, multiplying symbols slot by slot."""
    if a.degree != b.degree:
        raise DegreeError("slotwise product needs equal degrees")
    out: dict = {}
    for s1, c1 in a.terms.items():
        for s2, c2 in b.terms.items():
            if not (c1.is_constant() and c2.is_constant()):
                raise PreconditionError("slotwise product needs constant coefficients")
            key = tuple(_add_exps(x, y) for x, y in zip(s1, s2))
            v = c1 * c2
            v = out[key] + v if key in out else v
            if v:
                out[key] = v
            else:
                out.pop(key, None)
    return PolyDiffOp._raw(a.nvars, a.degree, out)


# series level

def _as_series(x, order: int) -> Series:
    return x if isinstance(x, Series) else Series.constant(x, order)


def apply_op(phi: Series, args: Sequence) -> Series:
    """R-multilinear evaluation of a series of operators on series of functions."""
    n = phi.order
    deg = phi[0].degree
    if len(args) != deg + 1:
        raise ArityError(f"degree {deg} operator takes {deg + 1} arguments, got {len(args)}")
    series_args = [_as_series(a, n) for a in args]
    if deg == -1:
        return phi.map(lambda op: op.as_function())

    def ev(op, *xs):
        return op.apply(*xs)

    return multilinear(ev, [phi] + series_args)


def sbracket(a: Series, b: Series) -> Series:
    return multilinear(gerstenhaber_bracket, [a, b])


def sd(a: Series) -> Series:
    return a.map(hochschild_d)


def scompose(a: Series, b: Series) -> Series:
    return a.mul(b, compose)


# operator tables and recognition

class OpTable:
    """A linear map ``C -> C`` known through its values on monomials of degree ``<= D_test``."""

    def __init__(self, nvars: int, values: Mapping[Exps, Poly], test_degree: int):
        self.nvars = nvars
        self.test_degree = test_degree
        self.values = {tuple(e): v for e, v in values.items()}
        for e in monomials(nvars, test_degree):
            if e not in self.values:
                raise PreconditionError(f"table lacks the monomial {e}")

    @classmethod
    def from_callable(cls, fn: Callable[[Poly], Poly], nvars: int, test_degree: int) -> OpTable:
        return cls(nvars, {e: fn(Poly.monomial(e)) for e in monomials(nvars, test_degree)},
                   test_degree)

    @classmethod
    def from_op(cls, op: PolyDiffOp, test_degree: int) -> OpTable:
        if op.degree != 0:
            raise DegreeError("only degree-0 operators have tables")
        return cls.from_callable(op.apply, op.nvars, test_degree)

    def __call__(self, f: Poly) -> Poly:
        if f.total_degree() > self.test_degree:
            raise PreconditionError("argument exceeds the tested degree")
        total = Poly.zero(self.nvars)
        for e, c in f.terms.items():
            total = total + c * self.values[e]
        return total


def _iterated_commutator(T, f: Poly, coords: Sequence[int], nvars: int) -> Poly:
    """``[...[T, x_{j0}], ..., x_{jm}](f)`` by inclusion-exclusion over subsets."""
    xs = [Poly.var(j, nvars) for j in coords]
    k = len(xs)
    total = Poly.zero(nvars)
    for mask in range(1 << k):
        inside = Poly.one(nvars)
        outside = Poly.one(nvars)
        for b in range(k):
            if mask >> b & 1:
                inside = inside * xs[b]
            else:
                outside = outside * xs[b]
        sign = -1 if (k - bin(mask).count("1")) % 2 else 1
        total = total + sign * (outside * T(inside * f))
    return total


def op_order(phi, max_order: int, test_degree: int | None = None) -> int | None:
    """Least ``m <= max_order`` such that every ``(m+1)``-fold commutator with
    coordinates vanishes on the tested space; ``None`` means "exceeds".
    """
    if isinstance(phi, PolyDiffOp):
        if test_degree is None:
            raise PreconditionError("a test degree is required")
        table = OpTable.from_op(phi, test_degree)
    else:
        table = phi
        if test_degree is None:
            test_degree = table.test_degree
        elif test_degree > table.test_degree:
            raise InsufficientTestDegreeError("table is smaller than the requested test degree")
    if test_degree < max_order + 2:
        raise InsufficientTestDegreeError(
            f"test degree {test_degree} < max_order + 2 = {max_order + 2}")
    n = table.nvars
    for m in range(max_order + 1):
        ok = True
        fdeg = test_degree - (m + 1)
        for coords in itertools.combinations_with_replacement(range(n), m + 1):
            for e in monomials(n, fdeg):
                if _iterated_commutator(table, Poly.monomial(e), coords, n):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return m
    return None


def _falling(e: Exps, a: Exps) -> int:
    out = 1
    for x, y in zip(e, a):
        out *= math.perm(x, y)
    return out


def recognize_diffop(table: OpTable, m: int, coeff_degree: int) -> PolyDiffOp:
    """Recover ``sum f_a d^a`` (``|a| <= m``, ``deg f_a <= coeff_degree``) from a table.

    The coefficients are solved for by the triangular system
    ``T(x^g) = sum_{a <= g} f_a g!/(g-a)! x^{g-a}``; a :class:`RecognitionError`
    carries the first monomial where the recovered operator disagrees or a
    coefficient exceeds the degree bound.
    """
    if table.test_degree < m + coeff_degree:
        raise InsufficientTestDegreeError(
            f"test degree {table.test_degree} < m + coeff_degree = {m + coeff_degree}")
    n = table.nvars
    coeffs: dict[Exps, Poly] = {}
    for g in monomials(n, m):
        r = table.values[g]
        for a, fa in coeffs.items():
            if all(x <= y for x, y in zip(a, g)):
                shift = tuple(y - x for x, y in zip(a, g))
                r = r - _falling(g, a) * (fa * Poly.monomial(shift))
        gfact = _falling(g, g)
        fg = r * Fraction(1, gfact)
        if fg.total_degree() > coeff_degree:
            raise RecognitionError(
                f"coefficient of d^{g} has degree {fg.total_degree()} > {coeff_degree}",
                witness=g)
        if fg:
            coeffs[g] = fg
    op = PolyDiffOp(n, 0, {(a,): f for a, f in coeffs.items()})
    for e in monomials(n, table.test_degree):
        if op.apply(Poly.monomial(e)) != table.values[e]:
            raise RecognitionError(f"table disagrees with every operator of order <= {m} "
                                   f"at monomial {e}", witness=e)
    return op


def extract_gauge(tables: Sequence[OpTable], m: int, coeff_degree: int) -> Series:
    """Differential logarithm of a gauge transformation given order by order.

    ``tables[k-1]`` holds the coefficient ``g_k`` of ``h^k`` in
    ``g = 1 + h g_1 + ... + h^N g_N``.  Each ``g_k`` is recognized as a
    differential operator and ``gamma = log(g)`` is formed under composition.
    """
    if not tables:
        raise PreconditionError("need at least one order")
    n = tables[0].nvars
    ops = [PolyDiffOp.identity(n)] + [recognize_diffop(t, m, coeff_degree) for t in tables]
    return Series(ops).log(PolyDiffOp.identity(n), compose)


def moyal_mc(pi: Sequence[Sequence], order: int) -> Series:
    """``omega_k = P^k / k!`` with ``P = sum_{i,j} pi^{ij} d_i (x) d_j``."""
    d = len(pi)
    pi = [[Fraction(x) for x in row] for row in pi]
    if any(len(row) != d for row in pi):
        raise PreconditionError("pi must be a square matrix")
    for i in range(d):
        for j in range(d):
            if pi[i][j] != -pi[j][i]:
                raise PreconditionError(f"pi is not antisymmetric at ({i + 1}, {j + 1})")
    unit = [tuple(1 if k == i else 0 for k in range(d)) for i in range(d)]
    P = PolyDiffOp(d, 1, {(unit[i], unit[j]): pi[i][j]
                          for i in range(d) for j in range(d) if pi[i][j]})
    coeffs = [PolyDiffOp.zero(d, 1)]
    power = None
    for k in range(1, order + 1):
        power = P if power is None else slotwise_mul(power, P)
        coeffs.append(Fraction(1, math.factorial(k)) * power)
    return Series(coeffs)
