"""Shared hypothesis strategies and small helpers."""

from __future__ import annotations

import os
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from defquant import LocPoly, Poly, PolyDiffOp, PolyVec, Series

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.register_profile("thorough", deadline=None, max_examples=400,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def sign(k: int) -> int:
    return -1 if k % 2 else 1


def rationals(bound: int = 3):
    return st.builds(Fraction, st.integers(-bound, bound), st.integers(1, 3))


def exps(nvars: int, max_degree: int, min_degree: int = 0):
    return (st.lists(st.integers(0, max_degree), min_size=nvars, max_size=nvars)
            .map(tuple).filter(lambda e: min_degree <= sum(e) <= max_degree))


def polys(nvars: int, max_degree: int = 2, max_terms: int = 3):
    return st.dictionaries(exps(nvars, max_degree), rationals(), max_size=max_terms).map(
        lambda t: Poly(nvars, t))


def polyvecs(nvars: int, degree: int, max_degree: int = 2, max_terms: int = 2):
    if degree == -1:
        return polys(nvars, max_degree).map(PolyVec.function)
    idx = st.lists(st.integers(0, nvars - 1), min_size=degree + 1, max_size=degree + 1,
                   unique=True).map(lambda l: tuple(sorted(l)))
    return st.dictionaries(idx, polys(nvars, max_degree, 2), max_size=max_terms).map(
        lambda t: PolyVec(nvars, degree, t))


def ops(nvars: int, degree: int, max_order: int = 2, coeff_degree: int = 1,
        max_terms: int = 2, normalized: bool = True):
    if degree == -1:
        return polys(nvars, coeff_degree + 1).map(PolyDiffOp.function)
    slot = exps(nvars, max_order, 1 if normalized else 0)
    slots = st.tuples(*[slot] * (degree + 1))
    return st.dictionaries(slots, polys(nvars, coeff_degree, 2), max_size=max_terms).map(
        lambda t: PolyDiffOp(nvars, degree, t))


def series(elements, zero, order: int, valuation: int = 1):
    """Series with coefficients drawn from ``elements`` above ``valuation``."""
    return st.lists(elements, min_size=order + 1 - valuation,
                    max_size=order + 1 - valuation).map(
        lambda cs: Series([zero] * valuation + cs))


def const(p, order: int) -> Series:
    return Series.constant(p, order)


def frac(num: Poly, s: Poly, k: int) -> LocPoly:
    return LocPoly(num, s, k)


# acceptance verdicts, printed once at the end of the run

ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def acceptance(request):
    """Record ``(criterion, passed, seconds, note)`` for the final summary."""
    table = request.config.stash.setdefault(ACCEPTANCE, {})

    def record(k, passed, seconds, note=""):
        table[k] = (passed, seconds, note)
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    table = config.stash.get(ACCEPTANCE, {})
    if not table:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(table):
        passed, seconds, note = table[k]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{status} criterion {k:>2} ({seconds:.1f}s) {note}")
