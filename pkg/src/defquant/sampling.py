"""Seeded random generators for polynomials, polyvectors, operators and series."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Callable

from .dpoly import PolyDiffOp
from .polyring import Poly, monomials
from .series import Series
from .tpoly import PolyVec


def random_exps(rng: random.Random, nvars: int, max_degree: int, min_degree: int = 0):
    deg = rng.randint(min_degree, max_degree)
    e = [0] * nvars
    for _ in range(deg):
        e[rng.randrange(nvars)] += 1
    return tuple(e)


def random_coeff(rng: random.Random, bound: int = 3, fractions: bool = False) -> Fraction:
    c = 0
    while c == 0:
        c = rng.randint(-bound, bound)
    if fractions and rng.random() < 0.3:
        return Fraction(c, rng.randint(2, 3))
    return Fraction(c)


def random_poly(rng: random.Random, nvars: int, max_degree: int = 2, terms: int = 2,
                fractions: bool = False) -> Poly:
    out = {}
    for _ in range(rng.randint(1, terms)):
        out[random_exps(rng, nvars, max_degree)] = random_coeff(rng, fractions=fractions)
    return Poly(nvars, out)


def random_polyvec(rng: random.Random, nvars: int, degree: int, max_degree: int = 2,
                   terms: int = 2) -> PolyVec:
    out = {}
    for _ in range(rng.randint(1, terms)):
        idx = tuple(sorted(rng.sample(range(nvars), degree + 1))) if degree >= 0 else ()
        out[idx] = random_poly(rng, nvars, max_degree, 2)
    return PolyVec(nvars, degree, out)


def random_op(rng: random.Random, nvars: int, degree: int, max_order: int = 2,
              coeff_degree: int = 1, terms: int = 2, normalized: bool = True) -> PolyDiffOp:
    if degree == -1:
        return PolyDiffOp.function(random_poly(rng, nvars, coeff_degree + 1, terms))
    out = {}
    for _ in range(rng.randint(1, terms)):
        slots = tuple(random_exps(rng, nvars, max_order, 1 if normalized else 0)
                      for _ in range(degree + 1))
        out[slots] = random_poly(rng, nvars, coeff_degree, 2)
    return PolyDiffOp(nvars, degree, out)


def random_series(rng: random.Random, gen: Callable[[], object], zero, order: int,
                  valuation: int = 1, density: float = 0.7) -> Series:
    """Series with coefficients drawn from ``gen`` in degrees ``valuation .. order``."""
    coeffs = [zero] * (order + 1)
    for j in range(valuation, order + 1):
        if j == valuation or rng.random() < density:
            coeffs[j] = gen()
    return Series(coeffs)


def monomial_grid(nvars: int, max_degree: int, order: int) -> list[Series]:
    return [Series.constant(Poly.monomial(e), order) for e in monomials(nvars, max_degree)]


def random_grid(rng: random.Random, nvars: int, max_degree: int, order: int,
                count: int) -> list[Series]:
    return [Series.constant(random_poly(rng, nvars, max_degree, 3), order) for _ in range(count)]
