import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import ops, polys, polyvecs, series
from defquant import (KindMismatchError, LocPoly, NotInvertibleError, Poly, PolyDiffOp, PolyVec,
                      PreconditionError, Series, bch, mc_defect, moyal_mc, twisted_bracket)
from defquant.deform import (DeformedAlgebra, GaugeMap, ad_exp, assoc_defect, check_localization,
                             cover_compat, gauge_transport, geo_verify, inner_gauge,
                             jacobi_defect, leibniz_defect, localize_deformation, poisson_ops,
                             star_inverse, star_mul)
from defquant.grammar import parse_expr
from defquant.sampling import monomial_grid

x1, x2 = Poly.var(0, 2), Poly.var(1, 2)
MOYAL = DeformedAlgebra("assoc", moyal_mc([[0, 1], [-1, 0]], 3), 2)
FLAT = DeformedAlgebra("assoc", Series.zeros(PolyDiffOp.zero(2, 1), 3), 2)
GRID = monomial_grid(2, 2, 3)


def h(v, order=3, power=1):
    return Series.monomial(v, power, order)


def poisson(text, d, N):
    return DeformedAlgebra("poisson", parse_expr(text, d, order=N, expect=("polyvec", 1)), d)


def test_construction_errors():
    with pytest.raises(KindMismatchError):
        DeformedAlgebra("poisson", MOYAL.omega, 2)
    with pytest.raises(PreconditionError):
        DeformedAlgebra("assoc", Series.constant(PolyDiffOp.basis([(1, 0), (0, 1)], 1, 2), 2), 2)
    with pytest.raises(ValueError):
        DeformedAlgebra("lie", MOYAL.omega, 2)


def test_star_examples():
    a = MOYAL.element(x1 * x1 + x2)
    assert star_mul(MOYAL, 1, a) == a and star_mul(MOYAL, a, 1) == a
    assert star_mul(FLAT, x1, x2) == star_mul(FLAT, x2, x1) == FLAT.element(x1 * x2)
    # omega_1 = D[1|2] - D[2|1] gives [x1, x2]_* = h (1 - (-1))
    assert MOYAL.commutator(MOYAL.element(x1), MOYAL.element(x2)) == h(2 * Poly.one(2))
    with pytest.raises(KindMismatchError):
        star_mul(poisson("h*(dx1^dx2)", 2, 2), x1, x2)


@given(series(polys(2, 2), Poly.zero(2), 3), series(polys(2, 2), Poly.zero(2), 3))
def test_star_is_bilinear_and_augmented(a, b):
    ab = MOYAL.star(a, b)
    assert ab[0] == a[0] * b[0]
    assert MOYAL.star(a + b, b) == ab + MOYAL.star(b, b)
    assert MOYAL.star(Fraction(2, 3) * a, b) == Fraction(2, 3) * ab


def test_assoc_defect_examples():
    grid = [x for x in monomial_grid(2, 3, 3)]
    assert all(FLAT.assoc_defect(a, b, c).is_zero() for a, b, c in itertools.product(grid[:5], repeat=3))
    for a, b, c in itertools.product(grid, repeat=3):
        assert MOYAL.assoc_defect(a, b, c).is_zero()


def test_non_mc_control_has_matching_witness():
    om = h(PolyDiffOp.basis([(1,), (1,)], 1, 1), 2)
    A = DeformedAlgebra("assoc", om, 1)
    y = Poly.var(0, 1)
    # (a*b)*c - a*(b*c) = h^2 (a''b'c' - a'b'c''), so (y^2, y, y) gives 2 h^2
    assert assoc_defect(A, y * y, y, y) == Series([Poly.zero(1), Poly.zero(1), 2 * Poly.one(1)])
    defect = mc_defect(A.host, om)
    assert defect[2].apply(y * y, y, y) == 2
    assert not A.is_mc()


def test_poisson_examples():
    A = poisson("h*(x1*dx1^dx2)", 2, 2)
    a = A.element(x1 * x2 + 1)
    assert poisson_ops(A, a, 1).is_zero()
    assert poisson_ops(A, x1, x2) == h(x1, 2)
    assert (poisson_ops(A, x2, a) + poisson_ops(A, a, x2)).is_zero()
    grid = monomial_grid(2, 3, 2)
    for p, q, r in itertools.combinations_with_replacement(grid, 3):
        assert A.jacobi_defect(p, q, r).is_zero()
        assert A.leibniz_defect(p, q, r).is_zero()
    with pytest.raises(KindMismatchError):
        poisson_ops(MOYAL, x1, x2)


def test_poisson_negative_control():
    A = poisson("h*(x1*dx1^dx2 + x2*dx1^dx3)", 3, 2)
    y1, y2, y3 = (Poly.var(i, 3) for i in range(3))
    assert not A.is_mc()
    assert not jacobi_defect(A, y3, y2, y1).is_zero()
    # Leibniz holds for any bivector
    assert leibniz_defect(A, y1, y2, y3 * y1).is_zero()


def test_transport_examples():
    zero = h(PolyDiffOp.zero(2, 0))
    B, g = gauge_transport(MOYAL, zero)
    assert B.omega == MOYAL.omega and g(GRID[4]) == GRID[4]
    # Poisson, omega = 0: omega stays 0 and g is an automorphism of the product
    P = DeformedAlgebra("poisson", Series.zeros(PolyVec.zero(2, 1), 3), 2)
    v = h(PolyVec.vector(0, x2 * x2) + PolyVec.vector(1, x1))
    B, g = gauge_transport(P, v)
    assert B.omega.is_zero()
    for a, b in itertools.product(GRID, repeat=2):
        assert g(a * b) == g(a) * g(b)


def test_transport_of_flat_product():
    gam0 = PolyDiffOp.basis([(2, 0)], x2, 2) + PolyDiffOp.basis([(0, 1)], 1, 2)
    B, g = gauge_transport(FLAT, h(gam0))
    ginv = GaugeMap(FLAT.host, -h(gam0))
    for a, b in itertools.product(GRID, repeat=2):
        assert B.star(a, b) == g(ginv(a) * ginv(b))
        assert ginv(g(a)) == a


def test_transport_species():
    with pytest.raises(KindMismatchError):
        gauge_transport(MOYAL, h(PolyVec.vector(0, x1)))
    with pytest.raises(KindMismatchError):
        gauge_transport(MOYAL, h(PolyDiffOp(2, 0, {((0, 0),): x1})))
    P = poisson("h*(dx1^dx2)", 2, 3)
    with pytest.raises(KindMismatchError):
        gauge_transport(P, h(PolyDiffOp.basis([(1, 0)], 1, 2)))
    with pytest.raises(PreconditionError):
        gauge_transport(MOYAL, Series.constant(PolyDiffOp.basis([(1, 0)], 1, 2), 3))


@settings(max_examples=10)
@given(series(ops(2, 0, max_order=2, coeff_degree=1, max_terms=2), PolyDiffOp.zero(2, 0), 3))
def test_assoc_transport_is_isomorphism(gamma):
    B, g = gauge_transport(MOYAL, gamma)
    assert B.is_mc()
    for a, b in itertools.product(GRID[:4], repeat=2):
        assert g(MOYAL.star(a, b)) == B.star(g(a), g(b))


@settings(max_examples=10)
@given(series(polyvecs(2, 0, max_degree=2), PolyVec.zero(2, 0), 2))
def test_poisson_transport_is_isomorphism(gamma):
    A = poisson("h*(x1*dx1^dx2) + h^2*(x2^2*dx1^dx2)", 2, 2)
    B, g = gauge_transport(A, gamma)
    assert B.is_mc()
    for a, b in itertools.product(monomial_grid(2, 2, 2), repeat=2):
        assert g(A.bracket(a, b)) == B.bracket(g(a), g(b))
        assert g(a)[0] == a[0]


def test_inner_gauge_examples():
    unit, conj = inner_gauge(MOYAL, h(Poly.zero(2)))
    assert unit == MOYAL.one() and conj(GRID[3]) == GRID[3]
    unit, conj = inner_gauge(FLAT, h(x1 * x2))
    assert all(conj(b) == b for b in GRID)
    # Moyal, alpha = h x1: [x1, x2]_* = 2h, so conj(x2) = x2 + h * 2h
    unit, conj = inner_gauge(MOYAL, h(x1))
    expect = MOYAL.element(x2) + Series.monomial(2 * Poly.one(2), 2, 3)
    assert conj(MOYAL.element(x2)) == expect == ad_exp(MOYAL, h(x1), MOYAL.element(x2))
    with pytest.raises(PreconditionError):
        inner_gauge(MOYAL, x1)
    with pytest.raises(KindMismatchError):
        inner_gauge(poisson("h*(dx1^dx2)", 2, 3), h(x1))


ALPHA = series(polys(2, 2, max_terms=2), Poly.zero(2), 3, valuation=1)


@settings(max_examples=15)
@given(ALPHA, ALPHA)
def test_exp_star_is_homomorphism_from_bch(a1, a2):
    host = MOYAL.host
    br = lambda u, v: twisted_bracket(host, MOYAL.omega, u, v)
    prod = MOYAL.from_host(bch(MOYAL.to_host(a1), MOYAL.to_host(a2), br))
    assert MOYAL.star_exp(prod) == MOYAL.star(MOYAL.star_exp(a1), MOYAL.star_exp(a2))
    # the twisted bracket on functions is the star commutator
    assert MOYAL.from_host(br(MOYAL.to_host(a1), MOYAL.to_host(a2))) == MOYAL.commutator(a1, a2)


@settings(max_examples=15)
@given(ALPHA)
def test_conjugation_is_exp_ad(a):
    _, conj = inner_gauge(MOYAL, a)
    for b in GRID[:5]:
        assert conj(b) == ad_exp(MOYAL, a, b)


def test_star_inverse_examples():
    assert star_inverse(MOYAL, 1) == MOYAL.one()
    a = MOYAL.one() - h(x1)
    inv = star_inverse(MOYAL, a)
    expect = sum((MOYAL.star_pow(h(x1), k) for k in range(1, 4)), MOYAL.one())
    assert inv == expect
    assert MOYAL.star(a, inv) == MOYAL.one() == MOYAL.star(inv, a)
    with pytest.raises(NotInvertibleError) as err:
        star_inverse(MOYAL, x1)
    assert err.value.needed == x1 and "s = x1" in str(err.value)
    with pytest.raises(KindMismatchError):
        star_inverse(poisson("h*(dx1^dx2)", 2, 3), 1)


def test_localization_examples():
    one = Poly.one(2)
    B, r = localize_deformation(MOYAL, one)
    for a, b in itertools.product(GRID[:4], repeat=2):
        assert r(MOYAL.star(a, b)) == B.star(r(a), r(b))
        assert r(a).map(lambda c: c.numerator) == a
    B, r = localize_deformation(MOYAL, x1)
    inv = star_inverse(B, x1)
    assert B.star(B.element(x1), inv) == B.one()
    assert inv[0] == LocPoly(one, x1, 1)
    with pytest.raises(ZeroDivisionError):
        localize_deformation(MOYAL, Poly.zero(2))


def test_localization_reports():
    assert check_localization(MOYAL, x1, GRID[:4]).ok
    P = poisson("h*(x1*dx1^dx2)", 2, 2)
    rep = check_localization(P, x1 + x2, monomial_grid(2, 1, 2))
    assert rep.ok and rep.get("jacobi_on_fractions").count > 0


def test_cover_compat_examples():
    assert cover_compat(MOYAL, x1, x2, GRID[:4]).ok
    assert cover_compat(MOYAL, x1, x1, GRID[:4]).ok


@settings(max_examples=6)
@given(polys(2, 1, max_terms=2).filter(bool), polys(2, 1, max_terms=2).filter(bool))
def test_cover_compat_random_poisson(s, t):
    P = poisson("h*(x1*dx1^dx2) + h^2*(dx1^dx2)", 2, 2)
    assert cover_compat(P, s, t, monomial_grid(2, 1, 2)).ok


@pytest.mark.parametrize("kind, zero", [("assoc", PolyDiffOp.zero(2, 1)),
                                        ("poisson", PolyVec.zero(2, 1))])
def test_geo_verify_flat(kind, zero):
    rep = geo_verify(kind, Series.zeros(zero, 2), grid_degree=2, s=x1, t=x2)
    assert rep.ok, rep.to_text()


def test_geo_verify_moyal_with_gauge():
    om = moyal_mc([[0, 1], [-1, 0]], 2)
    gam = h(PolyDiffOp.basis([(1, 1)], x1, 2), 2)
    rep = geo_verify("assoc", om, [gam], grid_degree=2, crossed_budget=6)
    assert rep.ok, rep.to_text()
    assert rep.checks[0].name == "mc_defect"


def test_geo_verify_negative_control_stops_early():
    om = h(PolyDiffOp.basis([(1,), (1,)], 1, 1), 2)
    rep = geo_verify("assoc", om, grid_degree=2)
    assert [c.name for c in rep.checks] == ["mc_defect", "assoc_grid", "unit"]
    first = rep.checks[0]
    assert not first.passed and "omega" in first.witness
    assert not rep.get("assoc_grid").passed
