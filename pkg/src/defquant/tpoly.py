"""Polyvector fields with the Schouten-Nijenhuis bracket.

A :class:`PolyVec` of degree ``p`` is a sum of terms ``f d_{i0} ^ ... ^ d_{ip}``
with strictly increasing indices; degree ``-1`` holds a plain function under
the empty index tuple.  Internally each wedge monomial is the Grassmann
monomial ``theta_{i0} ... theta_{ip}`` in odd variables dual to the
coordinates, and the bracket is

    [P, Q] = sum_k (P <d/dtheta_k) (d/dx_k Q) - (-1)^{pq} (Q <d/dtheta_k) (d/dx_k P)

with right derivatives in ``theta``.  This agrees with the decomposable
formula ``sum_{i,j} (-1)^{i+j} [xi_i, eta_j] ^ ...`` and gives
``[d_1, x_1] = 1``.
"""

from __future__ import annotations

from typing import Mapping

from .errors import ContextMismatchError, DegreeError, PreconditionError
from .polyring import LocPoly, Poly, _is_scalar
from .series import Series

Indices = tuple[int, ...]


def _sort_sign(idx: list[int]) -> tuple[int, Indices] | None:
    """Sign of the permutation sorting ``idx``; ``None`` on a repeated index."""
    if len(set(idx)) != len(idx):
        return None
    sign = 1
    arr = list(idx)
    for i in range(len(arr)):
        for j in range(len(arr) - 1 - i):
            if arr[j] > arr[j + 1]:
                arr[j], arr[j + 1] = arr[j + 1], arr[j]
                sign = -sign
    return sign, tuple(arr)


def _merge(a: Indices, b: Indices) -> tuple[int, Indices] | None:
    return _sort_sign(list(a) + list(b))


class PolyVec:
    """Polyvector field of degree ``p >= -1`` (``p + 1`` wedge factors)."""

    __slots__ = ("nvars", "degree", "_terms", "_hash")

    def __init__(self, nvars: int, degree: int, terms: Mapping[Indices, object] | None = None):
        if degree < -1 and terms:
            raise DegreeError("polyvector degree must be >= -1")
        if degree > nvars - 1 and terms:
            raise DegreeError(f"degree {degree} exceeds top degree {nvars - 1}")
        self.nvars = nvars
        self.degree = degree
        clean = {}
        for idx, c in (terms or {}).items():
            if len(idx) != degree + 1:
                raise DegreeError(f"index tuple {idx} does not have degree {degree}")
            if any(not 0 <= i < nvars for i in idx):
                raise IndexError(f"wedge index out of range in {idx}")
            res = _sort_sign(list(idx))
            if res is None:
                continue
            sign, key = res
            if _is_scalar(c):
                c = Poly.const(c, nvars)
            if c.nvars != nvars:
                raise ContextMismatchError("coefficient has the wrong variable count")
            v = clean.get(key)
            v = sign * c if v is None else v + sign * c
            if v:
                clean[key] = v
            else:
                clean.pop(key, None)
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, nvars, degree, terms):
        x = cls.__new__(cls)
        x.nvars, x.degree, x._terms, x._hash = nvars, degree, terms, None
        return x

    @classmethod
    def function(cls, f) -> PolyVec:
        return cls(f.nvars, -1, {(): f})

    @classmethod
    def vector(cls, i: int, coeff, nvars: int | None = None) -> PolyVec:
        if nvars is None:
            nvars = coeff.nvars
        return cls(nvars, 0, {(i,): coeff})

    @classmethod
    def basis(cls, indices: Indices, nvars: int, coeff=1) -> PolyVec:
        return cls(nvars, len(indices) - 1, {tuple(indices): coeff})

    @classmethod
    def zero(cls, nvars: int, degree: int) -> PolyVec:
        return cls._raw(nvars, degree, {})

    @property
    def terms(self) -> Mapping[Indices, Poly | LocPoly]:
        return self._terms

    def as_function(self):
        if self.degree != -1:
            raise DegreeError("not a degree -1 element")
        return self._terms.get((), Poly.zero(self.nvars))

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if isinstance(other, PolyVec):
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
        return f"PolyVec({format_value(self)!r})"

    def _check(self, other):
        if not isinstance(other, PolyVec):
            raise TypeError("expected PolyVec")
        if other.nvars != self.nvars or other.degree != self.degree:
            raise ContextMismatchError("polyvectors of different degree or dimension")

    def __add__(self, other):
        if not isinstance(other, PolyVec):
            return NotImplemented
        self._check(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            v = out[k] + c if k in out else c
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        return PolyVec._raw(self.nvars, self.degree, out)

    def __neg__(self):
        return PolyVec._raw(self.nvars, self.degree, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, PolyVec):
            return NotImplemented
        return self + (-other)

    def __rmul__(self, q):
        if _is_scalar(q) or isinstance(q, (Poly, LocPoly)):
            if _is_scalar(q) and not q:
                return PolyVec.zero(self.nvars, self.degree)
            out = {}
            for k, c in self._terms.items():
                v = q * c
                if v:
                    out[k] = v
            return PolyVec._raw(self.nvars, self.degree, out)
        return NotImplemented

    __mul__ = __rmul__

    def map_coeffs(self, fn) -> PolyVec:
        out = {}
        for k, c in self._terms.items():
            v = fn(c)
            if v:
                out[k] = v
        return PolyVec._raw(self.nvars, self.degree, out)

    def derivation(self, f):
        """Action of a vector field on a function."""
        if self.degree != 0:
            raise DegreeError("only vector fields act as derivations")
        total = 0 * f
        for (i,), c in self._terms.items():
            total = total + c * f.diff(i)
        return total


def wedge(a: PolyVec, b: PolyVec) -> PolyVec:
    if a.degree < 0 or b.degree < 0:
        raise DegreeError("wedge is defined for degrees >= 0 only")
    if a.nvars != b.nvars:
        raise ContextMismatchError("dimension mismatch")
    deg = a.degree + b.degree + 1
    if deg > a.nvars - 1:
        return _zero_overflow(a.nvars, deg)
    out: dict = {}
    for i, f in a._terms.items():
        for j, g in b._terms.items():
            res = _merge(i, j)
            if res is None:
                continue
            sign, key = res
            v = sign * (f * g)
            v = out[key] + v if key in out else v
            if v:
                out[key] = v
            else:
                out.pop(key, None)
    return PolyVec._raw(a.nvars, deg, out)


def _zero_overflow(nvars: int, degree: int) -> PolyVec:
    # wedge powers above the top degree vanish; keep the nominal degree
    return PolyVec._raw(nvars, degree, {})


def _right_deriv(idx: Indices, k: int) -> tuple[int, Indices] | None:
    """``theta_idx <d/dtheta_k`` as (sign, remaining indices)."""
    if k not in idx:
        return None
    r = idx.index(k)
    sign = -1 if (len(idx) - 1 - r) % 2 else 1
    return sign, idx[:r] + idx[r + 1:]


def _one_side(P: PolyVec, Q: PolyVec) -> dict:
    """``sum_k (P <d/dtheta_k)(d/dx_k Q)`` as a term dictionary."""
    out: dict = {}
    for I, f in P._terms.items():
        for k in I:
            sign, rest = _right_deriv(I, k)
            for J, g in Q._terms.items():
                dg = g.diff(k)
                if not dg:
                    continue
                res = _merge(rest, J)
                if res is None:
                    continue
                s2, key = res
                v = (sign * s2) * (f * dg)
                v = out[key] + v if key in out else v
                if v:
                    out[key] = v
                else:
                    out.pop(key, None)
    return out


def schouten_bracket(a: PolyVec, b: PolyVec) -> PolyVec:
    """Schouten-Nijenhuis bracket; degree ``deg a + deg b``."""
    if a.nvars != b.nvars:
        raise ContextMismatchError("dimension mismatch")
    p, q = a.degree, b.degree
    deg = p + q
    if deg < -1:
        # the bracket of two functions lands in the zero space of degree -2
        return PolyVec.zero(a.nvars, deg)
    if deg > a.nvars - 1:
        return _zero_overflow(a.nvars, deg)
    first = _one_side(a, b)
    second = _one_side(b, a)
    sign = -1 if (p * q) % 2 == 0 else 1
    for key, v in second.items():
        w = first[key] + sign * v if key in first else sign * v
        if w:
            first[key] = w
        else:
            first.pop(key, None)
    return PolyVec._raw(a.nvars, deg, first)


def poisson_bracket(pi: PolyVec, f, g):
    """``{f, g}_pi = sum_{i<j} pi^{ij} (d_i f d_j g - d_j f d_i g)`` for a bivector ``pi``.

    This is the displayed formula ``1/2 (a1(f) a2(g) - a1(g) a2(f))`` with the
    factor 1/2 absorbed in the identification of ``d_i ^ d_j`` with an
    alternating tensor, so that ``{x1, x2}_{d1^d2} = 1``.
    """
    if pi.degree != 1:
        raise DegreeError("a Poisson structure is a bivector")
    total = 0 * (f * g)
    for (i, j), c in pi._terms.items():
        fi, fj = f.diff(i), f.diff(j)
        gi, gj = g.diff(i), g.diff(j)
        total = total + c * (fi * gj - fj * gi)
    return total


def bracket_of_functions(omega: Series, c1: Series, c2: Series) -> Series:
    """R-bilinear extension of :func:`poisson_bracket` to truncated series."""
    if omega.valuation() < 1:
        raise PreconditionError("a formal Poisson bracket must vanish modulo h")
    from .series import multilinear
    return multilinear(poisson_bracket, [omega, c1, c2])


def jacobiator(omega: Series, c1, c2, c3) -> Series:
    """Cyclic sum ``{{c1,c2},c3} + {{c2,c3},c1} + {{c3,c1},c2}``."""
    n = omega.order
    args = [c if isinstance(c, Series) else Series.constant(c, n) for c in (c1, c2, c3)]
    a, b, c = args
    br = lambda u, v: bracket_of_functions(omega, u, v)
    return br(br(a, b), c) + br(br(b, c), a) + br(br(c, a), b)
