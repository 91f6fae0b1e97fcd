"""Truncated power series in one formal parameter ``h``.

A :class:`Series` is the element ``v_0 + h v_1 + ... + h^N v_N`` of
``Q[h]/(h^{N+1}) (x) V``.  Coefficients may be anything that supports
``+``, ``-``, multiplication by a rational scalar and a truthiness test
(``not v`` iff ``v`` is zero); products are supplied by the caller, so the
same class carries functions, polyvector fields and polydifferential
operators.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Any, Callable, Iterable, Sequence

from .errors import NotLocalError, OrderMismatchError, PreconditionError

Product = Callable[[Any, Any], Any]


def _scalar(q) -> Fraction:
    if isinstance(q, Fraction):
        return q
    if isinstance(q, (int, Rational)):
        return Fraction(q)
    raise TypeError(f"not a rational scalar: {q!r}")


def _is_scalar(q) -> bool:
    return isinstance(q, (int, Fraction, Rational)) and not isinstance(q, bool)


@dataclass(frozen=True)
class ParameterAlgebra:
    """``R_N = Q[h]/(h^{N+1})`` with its filtered basis ``r_j = h^j``."""

    order: int

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("truncation order must be nonnegative")

    def basis(self) -> list[Series]:
        return [Series.monomial(Fraction(1), j, self.order) for j in range(self.order + 1)]

    def structure_constant(self, i: int, j: int, k: int) -> Fraction:
        """Multiplication constant ``mu_{i,j;k}`` of ``r_i r_j = sum_k mu_{i,j;k} r_k``."""
        return Fraction(1) if i + j == k <= self.order else Fraction(0)


class Series:
    """Immutable truncated series; ``order`` is the truncation order ``N``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Any]):
        coeffs = tuple(coeffs)
        if not coeffs:
            raise ValueError("a series needs at least the h^0 coefficient")
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, name, value):
        raise AttributeError("Series is immutable")

    # construction

    @classmethod
    def constant(cls, value, order: int) -> Series:
        zero = 0 * value
        return cls((value,) + (zero,) * order)

    @classmethod
    def monomial(cls, value, power: int, order: int) -> Series:
        zero = 0 * value
        return cls(value if j == power else zero for j in range(order + 1))

    @classmethod
    def zeros(cls, zero, order: int) -> Series:
        return cls((zero,) * (order + 1))

    # basic protocol

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, j):
        return self.coeffs[j]

    def __iter__(self):
        return iter(self.coeffs)

    def __len__(self):
        return len(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, Series):
            return self.coeffs == other.coeffs
        if _is_scalar(other) and other == 0:
            return self.is_zero()
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __bool__(self):
        return not self.is_zero()

    def is_zero(self) -> bool:
        return all(not c for c in self.coeffs)

    def __repr__(self):
        return f"Series({list(self.coeffs)!r})"

    def _check(self, other: Series):
        if not isinstance(other, Series):
            raise TypeError(f"expected Series, got {type(other).__name__}")
        if other.order != self.order:
            raise OrderMismatchError(
                f"truncation orders differ: {self.order} vs {other.order}")

    # linear structure

    def __add__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        self._check(other)
        return Series(a + b for a, b in zip(self.coeffs, other.coeffs))

    def __sub__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        self._check(other)
        return Series(a - b for a, b in zip(self.coeffs, other.coeffs))

    def __neg__(self):
        return Series(-a for a in self.coeffs)

    def __rmul__(self, q):
        if _is_scalar(q):
            q = _scalar(q)
            return Series(q * a for a in self.coeffs)
        return NotImplemented

    def __mul__(self, other):
        if _is_scalar(other):
            return self.__rmul__(other)
        if isinstance(other, Series):
            return self.mul(other)
        return NotImplemented

    def map(self, fn: Callable[[Any], Any]) -> Series:
        return Series(fn(a) for a in self.coeffs)

    # products

    def mul(self, other: Series, product: Product = operator.mul, zero=None) -> Series:
        """Cauchy product with a bilinear ``product``; degrees above ``N`` are dropped."""
        self._check(other)
        n = self.order
        out: list[Any] = [None] * (n + 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j in range(n + 1 - i):
                b = other.coeffs[j]
                if not b:
                    continue
                term = product(a, b)
                out[i + j] = term if out[i + j] is None else out[i + j] + term
        if any(c is None for c in out):
            if zero is None:
                zero = 0 * product(self.coeffs[0], other.coeffs[0])
            out = [zero if c is None else c for c in out]
        return Series(out)

    def valuation(self) -> int:
        for j, c in enumerate(self.coeffs):
            if c:
                return j
        return self.order + 1

    def truncate(self, order: int) -> Series:
        if order > self.order:
            raise OrderMismatchError("cannot raise the truncation order")
        return Series(self.coeffs[: order + 1])

    # exponential and logarithm

    def exp(self, one, product: Product = operator.mul) -> Series:
        """``sum_k a^k / k!``; requires valuation >= 1."""
        if self.valuation() < 1:
            raise PreconditionError("exp needs an element of valuation >= 1")
        result = Series.constant(one, self.order)
        power = result
        for k in range(1, self.order + 1):
            power = power.mul(self, product)
            if power.is_zero():
                break
            result = result + Fraction(1, math.factorial(k)) * power
        return result

    def log(self, one, product: Product = operator.mul) -> Series:
        """Inverse of :meth:`exp` on ``one + (valuation >= 1)``."""
        if self.coeffs[0] != one:
            raise PreconditionError("log needs an element of the form 1 + (valuation >= 1)")
        x = self - Series.constant(one, self.order)
        result = Series.zeros(0 * one, self.order)
        power = Series.constant(one, self.order)
        for k in range(1, self.order + 1):
            power = power.mul(x, product)
            if power.is_zero():
                break
            sign = 1 if k % 2 else -1
            result = result + Fraction(sign, k) * power
        return result

    # base change

    def reparametrize(self, subst: Sequence, order: int) -> Series:
        """Substitute ``h -> sum_{j>=1} subst[j] h'^j`` and truncate at ``order``.

        ``subst[0]`` must be zero (the substitution is a local homomorphism).
        """
        subst = [_scalar(q) for q in subst]
        if subst and subst[0] != 0:
            raise NotLocalError("substitution has a nonzero constant term")
        base = [subst[j] if j < len(subst) else Fraction(0) for j in range(order + 1)]
        base[0] = Fraction(0)
        zero = 0 * self.coeffs[0]
        out = [zero] * (order + 1)
        power = [Fraction(1)] + [Fraction(0)] * order
        for j, v in enumerate(self.coeffs):
            if j > 0:
                power = _mul_scalar_series(power, base)
            if not any(power):
                break
            if not v:
                continue
            for k, q in enumerate(power):
                if q:
                    out[k] = out[k] + q * v
        return Series(out)


def _mul_scalar_series(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    n = len(a)
    out = [Fraction(0)] * n
    for i, x in enumerate(a):
        if x:
            for j in range(n - i):
                if b[j]:
                    out[i + j] += x * b[j]
    return out


def series_arith(a: Series, b: Series | None = None, mode: str = "add",
                 q=None, product: Product = operator.mul) -> Series:
    """Dispatcher over ``add``, ``mul`` and ``scalar`` (``q * a``)."""
    if mode == "add":
        return a + b
    if mode == "mul":
        return a.mul(b, product)
    if mode == "scalar":
        return _scalar(q) * a
    raise ValueError(f"unknown mode {mode!r}")


def valuation(a: Series) -> int:
    return a.valuation()


def exp_log(a: Series, direction: str, one, product: Product = operator.mul) -> Series:
    if direction == "exp":
        return a.exp(one, product)
    if direction == "log":
        return a.log(one, product)
    raise ValueError(f"unknown direction {direction!r}")


def reparametrize(a: Series, subst: Sequence, order: int) -> Series:
    return a.reparametrize(subst, order)


def multilinear(fn: Callable[..., Any], args: Sequence[Series], zero=None) -> Series:
    """Extend a multilinear map of plain values to series arguments.

    Terms whose total ``h`` degree exceeds the common truncation order vanish.
    """
    if not args:
        raise ValueError("need at least one argument")
    n = args[0].order
    for a in args[1:]:
        args[0]._check(a)
    out: list[Any] = [None] * (n + 1)

    def rec(pos: int, deg: int, chosen: list):
        if pos == len(args):
            term = fn(*chosen)
            out[deg] = term if out[deg] is None else out[deg] + term
            return
        for j in range(n + 1 - deg):
            c = args[pos].coeffs[j]
            if c:
                chosen.append(c)
                rec(pos + 1, deg + j, chosen)
                chosen.pop()

    rec(0, 0, [])
    if any(c is None for c in out):
        if zero is None:
            zero = 0 * fn(*(a.coeffs[0] for a in args))
        out = [zero if c is None else c for c in out]
    return Series(out)
