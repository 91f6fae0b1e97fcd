from fractions import Fraction

import pytest
from hypothesis import assume, given, strategies as st

from conftest import polys
from defquant import ContextMismatchError, LocPoly, NotInvertibleError, Poly, loc_restrict, monomials
from defquant.polyring import grlex_key, partial_derivative, poly_arith

x, y = Poly.var(0, 2), Poly.var(1, 2)


def test_arith_examples():
    assert poly_arith(x + y, x - y, "mul") == x * x - y * y
    s = x + 1
    assert LocPoly(x, s, 1) + LocPoly(y, s, 1) == LocPoly(x + y, s, 1)
    # (x s) / s normalizes to x / s^0
    q = LocPoly(x * s, s, 1)
    assert q.k == 0 and q.numerator == x
    assert poly_arith(x, mode="neg") == -x


def test_context_mismatch():
    with pytest.raises(ContextMismatchError):
        x + Poly.var(0, 3)
    with pytest.raises(ContextMismatchError):
        LocPoly(x, x, 1) + LocPoly(x, y, 1)


def test_partial_derivative_examples():
    assert partial_derivative(x * x * y, 0) == 2 * x * y
    inv = LocPoly(Poly.one(2), x, 1)
    assert partial_derivative(inv, 0) == LocPoly(-Poly.one(2), x, 2)
    assert (x * y).diff(0).diff(1) == 1
    assert (x ** 3).diff(0, 2) == 6 * x


def test_division_and_inverse():
    q, r = (x * x + y).divmod(x)
    assert q * x + r == x * x + y
    assert (x * x - y * y).divexact(x - y) == x + y
    assert (x * x + 1).divexact(x) is None
    assert Poly.const(4, 2).inverse() == Fraction(1, 4)
    with pytest.raises(NotInvertibleError) as err:
        x.inverse()
    assert err.value.needed == x


def test_loc_inverse():
    s = x * y
    assert LocPoly(x, s, 0).inverse() * LocPoly(x, s, 0) == 1
    with pytest.raises(NotInvertibleError):
        LocPoly(x + 1, s, 0).inverse()


def test_loc_restrict_examples():
    s, t = x + 1, y
    f = LocPoly(x, s, 1)
    g = loc_restrict(f, t)
    assert g.s == s * t and g.numerator == x * t and g.k == 1
    assert loc_restrict(x * y, t) == LocPoly(x * y, t, 0)
    p = x * x - y
    assert loc_restrict(loc_restrict(p, s), t) == loc_restrict(p, s * t)


def test_evaluation():
    assert (x * x + 3 * y)(2, Fraction(1, 3)) == 5
    with pytest.raises(ContextMismatchError):
        x(1)


def test_monomials_ascending_grlex():
    ms = list(monomials(2, 2))
    assert ms == sorted(ms, key=grlex_key)
    assert len(ms) == 6 and ms[0] == (0, 0)


P = polys(2, 3)
S = polys(2, 1, 2).filter(bool)


@given(P, P, st.sampled_from([0, 1]))
def test_leibniz(f, g, i):
    assert (f * g).diff(i) == f.diff(i) * g + f * g.diff(i)


@given(P)
def test_partials_commute(f):
    assert f.diff(0).diff(1) == f.diff(1).diff(0)


@given(P, P, S, st.integers(0, 2), st.integers(0, 2), st.sampled_from([0, 1]))
def test_loc_leibniz(f, g, s, k, m, i):
    a, b = LocPoly(f, s, k), LocPoly(g, s, m)
    assert (a * b).diff(i) == a.diff(i) * b + a * b.diff(i)
    assert a.diff(0).diff(1) == a.diff(1).diff(0)


@given(P, P, S)
def test_embedding_is_ring_map(f, g, s):
    e = lambda p: LocPoly(p, s, 0)
    assert e(f + g) == e(f) + e(g)
    assert e(f * g) == e(f) * e(g)
    assert e(f).diff(0) == e(f.diff(0))


@given(P, S, st.integers(1, 3))
def test_loc_normal_form(f, s, k):
    assume(not s.is_constant())
    a = LocPoly(f * s, s, k)
    assert a == LocPoly(f, s, k - 1)
    if a.k > 0:
        assert a.numerator.divexact(s) is None
