"""Maurer-Cartan theory over a truncated parameter algebra.

Elements of ``m (x) g`` are :class:`Series` of graded elements with zero
constant term.  The gauge action is the time-one flow

    omega' = exp(ad g)(omega) - phi(ad g)(d g),   phi(L) = sum L^k / (k+1)!,

which is the convention under which ``d_{omega'} = e^{ad g} d_omega e^{-ad g}``
holds with ``[mu, -]`` as the Hochschild differential.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from fractions import Fraction
from functools import lru_cache
from typing import Callable

from .dpoly import PolyDiffOp, gerstenhaber_bracket, hochschild_d, is_normalized
from .errors import (ContextMismatchError, DegreeError, MorphismInvalidError,
                     NotMaurerCartanError, PreconditionError)
from .series import Series, multilinear
from .tpoly import PolyVec, schouten_bracket

Bracket = Callable[[Series, Series], Series]


class QuantumDGLA(ABC):
    """A DG Lie algebra living in degrees ``>= -1`` with functions in degree ``-1``."""

    tag: str = ""

    def __init__(self, nvars: int):
        self.nvars = nvars

    def __eq__(self, other):
        return type(self) is type(other) and self.nvars == other.nvars

    def __hash__(self):
        return hash((self.tag, self.nvars))

    def __repr__(self):
        return f"{type(self).__name__}({self.nvars})"

    @abstractmethod
    def zero(self, degree: int): ...

    @abstractmethod
    def d(self, x): ...

    @abstractmethod
    def bracket(self, x, y): ...

    @abstractmethod
    def contains(self, x) -> bool: ...

    @abstractmethod
    def function(self, f):
        """The degree -1 element attached to a function."""

    @abstractmethod
    def act(self, g, f):
        """Action of a degree-0 element on a function."""

    def degree(self, x) -> int:
        return x.degree

    # series level

    def szero(self, degree: int, order: int) -> Series:
        return Series.zeros(self.zero(degree), order)

    def sd(self, a: Series) -> Series:
        return a.map(self.d)

    def sbracket(self, a: Series, b: Series) -> Series:
        return multilinear(self.bracket, [a, b])

    def sact(self, g: Series, f: Series) -> Series:
        return multilinear(self.act, [g, f])

    def sfunction(self, f: Series) -> Series:
        return f.map(self.function)


class TPoly(QuantumDGLA):
    """Polyvector fields with zero differential and the Schouten bracket."""

    tag = "tpoly"

    def zero(self, degree):
        return PolyVec.zero(self.nvars, degree)

    def d(self, x):
        return PolyVec.zero(self.nvars, x.degree + 1)

    def bracket(self, x, y):
        return schouten_bracket(x, y)

    def contains(self, x):
        return isinstance(x, PolyVec) and x.nvars == self.nvars

    def function(self, f):
        return PolyVec.function(f)

    def act(self, g, f):
        return g.derivation(f)

    def sd(self, a):
        return Series.zeros(self.zero(a[0].degree + 1), a.order)


class DPoly(QuantumDGLA):
    """All polydifferential operators, ``d = [mu, -]``, Gerstenhaber bracket."""

    tag = "dpoly"

    def zero(self, degree):
        return PolyDiffOp.zero(self.nvars, degree)

    def d(self, x):
        return hochschild_d(x)

    def bracket(self, x, y):
        return gerstenhaber_bracket(x, y)

    def contains(self, x):
        return isinstance(x, PolyDiffOp) and x.nvars == self.nvars

    def function(self, f):
        return PolyDiffOp.function(f)

    def act(self, g, f):
        return g.apply(f)


class DPolyNor(DPoly):
    """The normalized sub DG Lie algebra."""

    tag = "dpoly_nor"

    def contains(self, x):
        return super().contains(x) and is_normalized(x)


def host_for(tag: str, nvars: int) -> QuantumDGLA:
    table = {"tpoly": TPoly, "dpoly": DPoly, "dpoly_nor": DPolyNor,
             "poisson": TPoly, "assoc": DPolyNor}
    if tag not in table:
        raise ValueError(f"unknown DG Lie algebra {tag!r}")
    return table[tag](nvars)


def _require_positive(a: Series, what: str):
    if a.valuation() < 1:
        raise PreconditionError(f"{what} must have valuation >= 1")


# MC equation and twisting

def mc_defect(host: QuantumDGLA, omega: Series) -> Series:
    """``d(omega) + 1/2 [omega, omega]``."""
    _require_positive(omega, "an MC candidate")
    return host.sd(omega) + Fraction(1, 2) * host.sbracket(omega, omega)


def twisted_d(host: QuantumDGLA, omega: Series, alpha: Series) -> Series:
    """``d_omega(alpha) = d(alpha) + [omega, alpha]``."""
    return host.sd(alpha) + host.sbracket(omega, alpha)


def twisted_bracket(host: QuantumDGLA, omega: Series, a1: Series, a2: Series) -> Series:
    """``[a1, a2]_omega = [d_omega(a1), a2]`` on degree -1."""
    return host.sbracket(twisted_d(host, omega, a1), a2)


def exp_ad(host: QuantumDGLA, gamma: Series, x: Series) -> Series:
    """``exp(ad gamma)(x)``; finite since ``gamma`` has positive valuation."""
    total = x
    term = x
    for k in range(1, x.order + 1):
        term = host.sbracket(gamma, term)
        if term.is_zero():
            break
        total = total + Fraction(1, math.factorial(k)) * term
    return total


def gauge_apply(host: QuantumDGLA, gamma: Series, omega: Series) -> Series:
    """Image of ``omega`` under the gauge transformation ``exp(gamma)``."""
    if gamma.is_zero():
        return omega
    _require_positive(gamma, "a gauge element")
    out = exp_ad(host, gamma, omega)
    term = host.sd(gamma)
    k = 0
    while not term.is_zero() and k <= omega.order:
        out = out - Fraction(1, math.factorial(k + 1)) * term
        term = host.sbracket(gamma, term)
        k += 1
    return out


# Baker-Campbell-Hausdorff

def _block_splits(word: str, pos: int):
    """Ways to cut ``word[pos:]`` into blocks ``X^r Y^s`` with ``r + s >= 1``."""
    if pos == len(word):
        yield []
        return
    r = 0
    while pos + r < len(word) and word[pos + r] == "X":
        r += 1
    for rr in range(r + 1):
        if rr < r:
            options = [(rr, 0)] if rr else []
        else:
            s = 0
            while pos + r + s < len(word) and word[pos + r + s] == "Y":
                s += 1
            options = [(rr, ss) for ss in range(s + 1) if rr + ss]
        for block in options:
            for rest in _block_splits(word, pos + sum(block)):
                yield [block] + rest


@lru_cache(maxsize=None)
def dynkin_coefficients(length: int) -> dict[str, Fraction]:
    """Coefficients of right-nested bracket words of the given length in Dynkin's series."""
    out = {}
    for mask in range(1 << length):
        word = "".join("Y" if mask >> (length - 1 - i) & 1 else "X" for i in range(length))
        if length >= 2 and word[-1] == word[-2]:
            continue
        c = Fraction(0)
        for blocks in _block_splits(word, 0):
            n = len(blocks)
            denom = n * length
            for r, s in blocks:
                denom *= math.factorial(r) * math.factorial(s)
            c += Fraction(-1 if n % 2 == 0 else 1, denom)
        if c:
            out[word] = c
    return out


def bch(a: Series, b: Series, bracket: Bracket) -> Series:
    """``log(exp(a) exp(b))`` by Dynkin's formula, to bracket depth ``N``."""
    a._check(b)
    if a.is_zero():
        return b
    if b.is_zero():
        return a
    _require_positive(a, "a BCH argument")
    _require_positive(b, "a BCH argument")
    letters = {"X": a, "Y": b}
    memo: dict[str, Series] = {}

    def nested(word: str) -> Series:
        if word in memo:
            return memo[word]
        if len(word) == 1:
            v = letters[word]
        else:
            v = bracket(letters[word[0]], nested(word[1:]))
        memo[word] = v
        return v

    total = a + b
    for length in range(2, a.order + 1):
        for word, c in dynkin_coefficients(length).items():
            v = nested(word)
            if not v.is_zero():
                total = total + c * v
    return total


# element types

class MCElement:
    """A Maurer-Cartan element ``omega`` of ``m (x) g^1``."""

    __slots__ = ("host", "omega")

    def __init__(self, host: QuantumDGLA, omega: Series, *, check: bool = True):
        if omega.coeffs and host.degree(omega[0]) != 1:
            raise DegreeError("MC elements live in degree 1")
        if check:
            if not all(host.contains(c) for c in omega):
                raise ContextMismatchError(f"element does not lie in {host!r}")
            defect = mc_defect(host, omega)
            if not defect.is_zero():
                raise NotMaurerCartanError(
                    f"MC defect is nonzero at h^{defect.valuation()}")
        self.host = host
        self.omega = omega

    @classmethod
    def unchecked(cls, host: QuantumDGLA, omega: Series) -> MCElement:
        return cls(host, omega, check=False)

    @property
    def order(self) -> int:
        return self.omega.order

    def __eq__(self, other):
        return (isinstance(other, MCElement) and self.host == other.host
                and self.omega == other.omega)

    def __hash__(self):
        return hash(self.omega)

    def __repr__(self):
        from .grammar import format_value
        return f"MCElement({format_value(self.omega)!r})"


class GaugeElement:
    """``exp(gamma)`` for ``gamma`` in ``m (x) g^0``, stored by ``gamma``."""

    __slots__ = ("host", "gamma")

    def __init__(self, host: QuantumDGLA, gamma: Series):
        if host.degree(gamma[0]) != 0:
            raise DegreeError("gauge elements live in degree 0")
        if not gamma.is_zero():
            _require_positive(gamma, "a gauge element")
        self.host = host
        self.gamma = gamma

    def __mul__(self, other: GaugeElement) -> GaugeElement:
        return GaugeElement(self.host, bch(self.gamma, other.gamma, self.host.sbracket))

    def inverse(self) -> GaugeElement:
        return GaugeElement(self.host, -self.gamma)

    def __call__(self, omega: Series) -> Series:
        return gauge_apply(self.host, self.gamma, omega)

    def __eq__(self, other):
        return isinstance(other, GaugeElement) and self.gamma == other.gamma

    def __hash__(self):
        return hash(self.gamma)

    def __repr__(self):
        from .grammar import format_value
        return f"GaugeElement({format_value(self.gamma)!r})"


class TwoMorphism:
    """An element ``exp(alpha)`` of ``N_omega`` in log coordinates."""

    __slots__ = ("base", "alpha")

    def __init__(self, base: MCElement, alpha: Series):
        if base.host.degree(alpha[0]) != -1:
            raise DegreeError("2-morphisms live in degree -1")
        if not alpha.is_zero():
            _require_positive(alpha, "a 2-morphism")
        self.base = base
        self.alpha = alpha

    def __mul__(self, other: TwoMorphism) -> TwoMorphism:
        if other.base != self.base:
            raise ContextMismatchError("2-morphisms at different objects")
        host, omega = self.base.host, self.base.omega
        br = lambda x, y: twisted_bracket(host, omega, x, y)
        return TwoMorphism(self.base, bch(self.alpha, other.alpha, br))

    def inverse(self) -> TwoMorphism:
        return TwoMorphism(self.base, -self.alpha)

    def __eq__(self, other):
        return (isinstance(other, TwoMorphism) and self.base == other.base
                and self.alpha == other.alpha)

    def __hash__(self):
        return hash(self.alpha)

    def __repr__(self):
        from .grammar import format_value
        return f"TwoMorphism({format_value(self.alpha)!r})"


# morphisms of DG Lie algebras

class DGLAMorphism:
    """A degreewise map between DG Lie algebras, applied coefficientwise."""

    def __init__(self, source: QuantumDGLA, target: QuantumDGLA, fn: Callable):
        self.source = source
        self.target = target
        self.fn = fn

    @classmethod
    def identity(cls, host: QuantumDGLA) -> DGLAMorphism:
        return cls(host, host, lambda x: x)

    @classmethod
    def inclusion(cls, sub: QuantumDGLA, ambient: QuantumDGLA) -> DGLAMorphism:
        return cls(sub, ambient, lambda x: x)

    def __call__(self, a: Series) -> Series:
        return a.map(self.fn)


def mc_pushforward(phi: DGLAMorphism, omega: MCElement) -> MCElement:
    """Image of an MC element; d and the bracket are checked on ``omega``."""
    if omega.host != phi.source:
        raise ContextMismatchError("MC element does not live in the source")
    w = omega.omega
    image = phi(w)
    if not all(phi.target.contains(c) for c in image):
        raise MorphismInvalidError("image leaves the target algebra")
    if phi(phi.source.sd(w)) != phi.target.sd(image):
        raise MorphismInvalidError("the map does not commute with d")
    if phi(phi.source.sbracket(w, w)) != phi.target.sbracket(image, image):
        raise MorphismInvalidError("the map does not respect the bracket")
    return MCElement(phi.target, image)


def gauge_compose(host: QuantumDGLA, g1: Series, g2: Series) -> Series:
    """Log of ``exp(g1) exp(g2)`` in the gauge group."""
    return bch(g1, g2, host.sbracket)


def conjugation_defect(host: QuantumDGLA, gamma: Series, omega: Series, x: Series) -> Series:
    """``d_{omega'}(x) - e^{ad g} d_omega e^{-ad g}(x)``, zero under the chosen convention."""
    omega2 = gauge_apply(host, gamma, omega)
    lhs = twisted_d(host, omega2, x)
    rhs = exp_ad(host, gamma, twisted_d(host, omega, exp_ad(host, -gamma, x)))
    return lhs - rhs
