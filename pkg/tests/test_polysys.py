"""Exact arithmetic and Groebner bases, checked against sympy as an oracle."""
import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from entsub.polysys import (GREVLEX, LEX, GaussianRational, GroebnerLimitError,
                            IrrationalEntryError, NonHomogeneousError, Polynomial,
                            analyze_charts, buchberger, contains_unit, exact_scalar,
                            is_groebner_basis, linear_form, only_trivial_root, parse_dump,
                            reduce)

NAMES = ("x", "y", "z")
SYMS = sympy.symbols(NAMES)

coeff = st.integers(-3, 3)
monomial = st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2))
polynomial = st.dictionaries(monomial, coeff, min_size=1, max_size=4).map(
    lambda t: Polynomial(NAMES, t))
systems = st.lists(polynomial, min_size=1, max_size=3)


def to_sympy(p: Polynomial):
    return sympy.Add(*[sympy.Rational(c.numerator, c.denominator)
                       * sympy.Mul(*[s ** e for s, e in zip(SYMS, m)])
                       for m, c in p.terms.items()])


def sympy_reduced_basis(gens, order="grevlex"):
    exprs = [to_sympy(g) for g in gens if not g.is_zero()]
    if not exprs:
        return set()
    gb = sympy.groebner(exprs, *SYMS, order=order)
    out = set()
    for e in gb.exprs:
        poly = sympy.Poly(e, *SYMS)
        out.add(sympy.expand(e / poly.LC(order=order)))
    return out


def test_gaussian_rational_arithmetic():
    a = GaussianRational(Fraction(1, 2), 3)
    b = GaussianRational(-2, Fraction(1, 3))
    for got, want in ((a + b, complex(a) + complex(b)), (a - b, complex(a) - complex(b)),
                      (a * b, complex(a) * complex(b)), (a / b, complex(a) / complex(b))):
        assert complex(got) == pytest.approx(want, abs=1e-15)
    assert a * a.conjugate() == GaussianRational(Fraction(37, 4), 0)
    with pytest.raises(ZeroDivisionError):
        a / GaussianRational(0, 0)


def test_exact_scalar_accepts_short_rationals_only():
    assert exact_scalar(0.5) == Fraction(1, 2)
    assert exact_scalar(1 / 3) == Fraction(1, 3)
    assert exact_scalar("2/7") == Fraction(2, 7)
    assert exact_scalar(0.25 - 1j) == GaussianRational(Fraction(1, 4), -1)
    with pytest.raises(IrrationalEntryError):
        exact_scalar(math.sqrt(2))


def test_polynomial_arithmetic_and_evaluation():
    x, y = (Polynomial.variable(("x", "y"), i) for i in range(2))
    p = (x + y) * (x - y) - x * x
    assert p == -(y * y)
    assert p.evaluate([2, 3]) == -9
    assert p.is_homogeneous() and p.total_degree() == 2
    assert (x + 1).substitute(0, 2).variables == ("y",)


def test_dump_parse_roundtrip():
    v = ("b1", "b2", "b3")
    p = Polynomial(v, {(2, 0, 1): Fraction(-1, 2), (0, 1, 0): GaussianRational(0, 3),
                       (0, 0, 0): 5})
    assert parse_dump(p.dump(), v) == p


def test_known_basis_lex():
    # x^2 - y, x*y - 1  (lex x > y):  {x - y^2, y^3 - 1}
    x, y = (Polynomial.variable(("x", "y"), i) for i in range(2))
    gb = buchberger([x * x - y, x * y - 1], LEX)
    assert set(gb) == {x - y * y, y * y * y - 1}


@settings(max_examples=60, deadline=None)
@given(systems)
def test_reduced_basis_matches_sympy(gens):
    gb = buchberger(gens, GREVLEX)
    assert {sympy.expand(to_sympy(g)) for g in gb} == sympy_reduced_basis(gens)


@settings(max_examples=40, deadline=None)
@given(systems)
def test_basis_properties(gens):
    gb = buchberger(gens)
    assert is_groebner_basis(gb)
    # generators lie in the ideal
    assert all(reduce(g, gb).is_zero() for g in gens)
    # self-reduction is idempotent
    assert buchberger(gb) == gb
    # reduced: no term of g is divisible by another leading monomial
    lms = [g.leading_monomial() for g in gb]
    for i, g in enumerate(gb):
        for mon in g.terms:
            assert not any(j != i and all(a >= b for a, b in zip(mon, lm))
                           for j, lm in enumerate(lms))


def test_unit_detection():
    x, y = (Polynomial.variable(("x", "y"), i) for i in range(2))
    assert contains_unit([x, x - 1])
    assert not contains_unit([x * y - 1, x - y])


def test_spair_cap_raises():
    x, y, z = (Polynomial.variable(NAMES, i) for i in range(3))
    gens = [x * x * y - z * z * z, y * y * z - x * x * x, z * z * x - y * y * y + x * y]
    with pytest.raises(GroebnerLimitError):
        buchberger(gens, cap=1)


def test_trivial_root_decisions():
    x, y = (Polynomial.variable(("x", "y"), i) for i in range(2))
    assert only_trivial_root([x * y, x * x - y * y])
    assert not only_trivial_root([x * y])
    assert not only_trivial_root([], ("x", "y"))
    report = analyze_charts([x * y])
    assert report.summary().startswith("chart x=1")
    with pytest.raises(NonHomogeneousError):
        analyze_charts([x * y - 1])


def test_trivial_root_matches_rank_for_linear_systems(rng):
    names = ("a", "b", "c")
    for _ in range(20):
        m = rng.integers(-2, 3, size=(rng.integers(1, 4), 3))
        forms = [linear_form(names, row) for row in m]
        assert only_trivial_root(forms, names) == (np.linalg.matrix_rank(m) == 3)
