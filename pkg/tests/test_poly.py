from __future__ import annotations

import cmath
import warnings
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from helpers import to_sympy
from riflab.errors import RootToleranceWarning
from riflab.poly import (
    I,
    ONE,
    GaussianRational,
    MultiPoly,
    UnimodularPoint,
    divmod_univariate,
    exact_divide,
    format_coefficient,
    gcd_multivariate,
    gcd_univariate,
    reflect,
    roots_on_unit_circle,
    squarefree_decompose,
)
from riflab.cli.parser import parse_poly

fractions = st.fractions(min_value=-5, max_value=5, max_denominator=6)
gaussians = st.builds(GaussianRational, fractions, fractions)


def polys(nvars: int, max_deg: int = 2, max_terms: int = 5):
    idx = st.tuples(*[st.integers(0, max_deg)] * nvars)
    return st.dictionaries(idx, gaussians, max_size=max_terms).map(lambda t: MultiPoly(nvars, t))


def univariate(max_deg: int = 5):
    return st.lists(gaussians, min_size=1, max_size=max_deg + 1).map(MultiPoly.from_dense)


X = sympy.symbols("x0:3")


# --- GaussianRational -----------------------------------------------------------

@given(gaussians, gaussians)
def test_gaussian_field_ops_match_complex(a, b):
    assert complex(a + b) == pytest.approx(complex(a) + complex(b))
    assert complex(a * b) == pytest.approx(complex(a) * complex(b))
    if b:
        assert (a / b) * b == a


@given(gaussians)
def test_conjugate_and_abs2(a):
    assert a * a.conjugate() == GaussianRational(a.abs2())
    assert a.conjugate().conjugate() == a


def test_from_complex_is_exact_binary_value():
    g = GaussianRational.from_complex(0.1 + 0.25j)
    assert g.re == Fraction(0.1) and g.im == Fraction(1, 4)


@pytest.mark.parametrize("c", [GaussianRational(Fraction(3, 5), Fraction(-4, 5)), I, -I, ONE * 7,
                               GaussianRational(0, Fraction(2, 3)), GaussianRational(Fraction(-1, 2), 1)])
def test_format_coefficient_parses_back(c):
    assert parse_poly(format_coefficient(c), 0).constant_term() == c


# --- MultiPoly arithmetic against sympy --------------------------------------------

@settings(max_examples=60, deadline=None)
@given(polys(2), polys(2))
def test_ring_ops_match_sympy(a, b):
    assert to_sympy(a * b, X) == sympy.expand(to_sympy(a, X) * to_sympy(b, X))
    assert to_sympy(a - b, X) == sympy.expand(to_sympy(a, X) - to_sympy(b, X))


@settings(max_examples=40, deadline=None)
@given(polys(2), st.integers(0, 3))
def test_power_matches_repeated_product(a, k):
    expected = MultiPoly.constant(2, 1)
    for _ in range(k):
        expected = expected * a
    assert a**k == expected


@settings(max_examples=40, deadline=None)
@given(polys(3, max_deg=2))
def test_reflection_is_an_involution(p):
    n = tuple(max(2, k) for k in p.polydegree)
    assert reflect(reflect(p, n), n) == p


@settings(max_examples=40, deadline=None)
@given(polys(2), gaussians, gaussians)
def test_exact_eval_matches_sympy(p, a, b):
    val = p.eval((a, b))
    ref = to_sympy(p, X).subs({X[0]: sympy.nsimplify(complex(a)), X[1]: sympy.nsimplify(complex(b))})
    assert complex(val) == pytest.approx(complex(sympy.N(ref)), abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(polys(2))
def test_eval_many_agrees_with_eval(p):
    pts = np.array([[0.3 + 0.1j, -0.5j], [1j, 0.7]])
    many = p.eval_many(pts)
    for row, v in zip(pts, many):
        assert complex(p.eval(tuple(row))) == pytest.approx(v, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(polys(2), st.sampled_from([(ONE, ONE), (I, -ONE), (GaussianRational(Fraction(3, 5), Fraction(4, 5)), -I)]))
def test_local_expansion_recentres(p, center):
    Q = p.local_expansion(center)
    w = (GaussianRational(Fraction(1, 3)), GaussianRational(0, Fraction(-1, 7)))
    shifted = tuple(c * (ONE + x) for c, x in zip(center, w))
    assert Q.eval(w) == p.eval(shifted)


def test_diff_and_split():
    p = parse_poly("3z1^2z2 + i*z1 - 2z2 + 5", 2)
    assert p.diff(0) == parse_poly("6z1z2 + i", 2)
    parts = p.split_var(1)
    assert parts[0] == parse_poly("i*z1 + 5", 1) and parts[1] == parse_poly("3z1^2 - 2", 1)


def test_nvars_mismatch_rejected():
    with pytest.raises(ValueError):
        MultiPoly.variable(2, 0) + MultiPoly.variable(3, 0)


def test_canonical_text_round_trip():
    p = parse_poly("(1/2)*z1^2 + i*z2 - (3/5 - 4/5*i) z1 z2 - 7", 2)
    assert parse_poly(p.to_text(), 2) == p


# --- univariate algebra -------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(univariate(), univariate())
def test_gcd_matches_sympy(a, b):
    if a.is_zero() and b.is_zero():
        return
    g = gcd_univariate(a, b)
    x = X[0]
    ref = sympy.Poly(sympy.gcd(to_sympy(a, X), to_sympy(b, X)), x, domain="QQ_I")
    assert g.degree(0) == (ref.degree() if not ref.is_zero else 0)
    if not g.is_constant():
        assert divmod_univariate(a, g)[1].is_zero() and divmod_univariate(b, g)[1].is_zero()


@settings(max_examples=60, deadline=None)
@given(univariate(4), univariate(3))
def test_divmod_reconstructs(a, b):
    if b.is_zero():
        return
    q, r = divmod_univariate(a, b)
    assert q * b + r == a
    assert r.is_zero() or r.degree(0) < b.degree(0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(univariate(2), st.integers(1, 3)), min_size=1, max_size=3))
def test_squarefree_product_reconstructs(factors):
    a = MultiPoly.constant(1, 1)
    for f, k in factors:
        a = a * f**k
    if a.is_zero() or a.is_constant():
        return
    parts = squarefree_decompose(a)
    prod = MultiPoly.constant(1, 1)
    for f, k in parts:
        prod = prod * f**k
        assert gcd_univariate(f, f.diff(0)).is_constant()
    lead = a.coeff((a.degree(0),))
    assert prod.scale(lead) == a


def test_squarefree_of_slice_determinant():
    det = parse_poly("-(z1 - 1)^2 (z1 + 1)^4", 1)
    parts = {k: f for f, k in squarefree_decompose(det)}
    assert parts == {2: parse_poly("z1 - 1", 1), 4: parse_poly("z1 + 1", 1)}


def test_multivariate_gcd_and_division():
    f = parse_poly("z1 + z2 - 2", 2)
    a = f * parse_poly("z1 - 3", 2)
    b = f * parse_poly("z2^2 + i", 2)
    g = gcd_multivariate(a, b)
    assert exact_divide(f, g).is_constant()
    assert exact_divide(a, g) * g == a
    with pytest.raises(ValueError):
        exact_divide(a, parse_poly("z1 + 5", 2))
    assert gcd_multivariate(parse_poly("z1", 2), parse_poly("z2 + 1", 2)).is_constant()


@settings(max_examples=40, deadline=None)
@given(polys(2, max_deg=2, max_terms=3), polys(2, max_deg=1, max_terms=3), polys(2, max_deg=1, max_terms=3))
def test_multivariate_gcd_is_greatest(f, a, b):
    if f.is_zero() or a.is_zero() or b.is_zero():
        return
    A, B = f * a, f * b
    g = gcd_multivariate(A, B)
    ca, cb = exact_divide(A, g), exact_divide(B, g)
    assert ca * g == A and cb * g == B
    if not f.is_constant():
        exact_divide(g, f)  # raises unless f divides g
    gens = X[:2]
    oracle = sympy.Poly(to_sympy(ca, gens), *gens, domain="QQ_I").gcd(
        sympy.Poly(to_sympy(cb, gens), *gens, domain="QQ_I"))
    assert oracle.is_ground


def test_coprime_shortcut_is_exact():
    # a shared factor whose leading part in z1 vanishes at small integers is still found
    f = parse_poly("(z2 - 2) z1 + 1", 2)
    a, b = f * parse_poly("z1 + z2", 2), f * parse_poly("z1 - 3 z2 + i", 2)
    assert gcd_multivariate(a, b) == f.scale(GaussianRational(1) / f.coeff((1, 1)))


# --- unimodular roots -------------------------------------------------------------

def test_roots_exact_multiplicities():
    det = parse_poly("-(z1 - 1)^2 (z1 + 1)^4 (z1 - 3)", 1)
    roots = roots_on_unit_circle(det)
    assert [(pt.describe(), k) for pt, k in roots] == [(["1"], 2), (["-1"], 4)]
    assert all(pt.is_exact for pt, _ in roots)


def test_roots_irrational_on_circle():
    # z^2 - z + 1 has roots exp(+-i pi/3)
    roots = roots_on_unit_circle(parse_poly("(z1^2 - z1 + 1)^2 (2z1 - 1)", 1))
    angles = sorted(float(pt.angles()[0]) for pt, _ in roots)
    assert angles == pytest.approx([-np.pi / 3, np.pi / 3], abs=1e-12)
    assert all(k == 2 for _, k in roots)


@pytest.mark.parametrize("k, warns", [(4, False), (7, True)])
def test_roots_off_circle_rejected(k, warns):
    # symmetric pair a, 1/conj(a) at modulus 1 +- 10^-k
    a = GaussianRational(Fraction(3, 5), Fraction(4, 5)) * (1 + Fraction(1, 10**k))
    p = MultiPoly.from_dense([a / a.conjugate(), -(a + ONE / a.conjugate()), ONE])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        assert roots_on_unit_circle(p) == []
    assert any(issubclass(w.category, RootToleranceWarning) for w in caught) == warns


def test_unimodular_point_helpers():
    pt = UnimodularPoint([GaussianRational(Fraction(3, 5), Fraction(4, 5)), 0.5])
    assert not pt.is_exact
    assert pt.to_complex()[1] == pytest.approx(cmath.exp(0.5j))
    assert pt.distance(UnimodularPoint.from_angles(pt.angles())) < 1e-15
