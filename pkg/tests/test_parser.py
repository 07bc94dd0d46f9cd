from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from riflab.cli.parser import Add, Imag, Mul, Neg, Num, Pow, Var, lower, parse_ast, parse_poly, to_source
from riflab.cli.registry import available, registry
from riflab.errors import NonconstantExponent, PolySyntaxError, UnknownVariable
from riflab.poly import I, GaussianRational, MultiPoly


def z(k, n=2):
    return MultiPoly.variable(n, k - 1)


@pytest.mark.parametrize("text, expected", [
    ("2 - z1 - z2", 2 - z(1) - z(2)),
    ("2z1z2 - z1 - z2", 2 * z(1) * z(2) - z(1) - z(2)),
    ("z1^2z2", z(1) ** 2 * z(2)),
    ("(1/2) z1 + 3/4", z(1).scale(GaussianRational(Fraction(1, 2))) + MultiPoly.constant(2, Fraction(3, 4))),
    ("1.25 z2", z(2).scale(GaussianRational(Fraction(5, 4)))),
    ("i z1 - i", (z(1) - 1).scale(I)),
    ("-(z1 - 1)^2 (z1 + 1)^4", -((z(1) - 1) ** 2) * (z(1) + 1) ** 4),
    ("--z1", z(1)),
    ("2^(3)", MultiPoly.constant(2, 8)),
    ("z1^2^2", z(1) ** 4),
])
def test_examples(text, expected):
    assert parse_poly(text, 2) == expected


def test_nvars_defaults_to_largest_index():
    assert parse_poly("z3 + 1").nvars == 3
    assert parse_poly("7").nvars == 1


@pytest.mark.parametrize("text, error, offset", [
    ("z1 + (", PolySyntaxError, 6),
    ("", PolySyntaxError, 0),
    ("z1 + * 2", PolySyntaxError, 5),
    ("z1 $ 2", PolySyntaxError, 3),
    ("z1^z2", NonconstantExponent, 3),
    ("2^(1/2)", PolySyntaxError, 2),
    ("z1 / z2", PolySyntaxError, 3),
    ("1/0", PolySyntaxError, 2),
    ("q + 1", UnknownVariable, 0),
    ("z0", UnknownVariable, 0),
    ("1 + z3", UnknownVariable, 4),
])
def test_errors_carry_offsets(text, error, offset):
    with pytest.raises(error) as info:
        parse_poly(text, 2)
    assert info.value.offset == offset


def test_error_is_a_value_error():
    with pytest.raises(ValueError):
        parse_poly("(z1", 1)


# --- printing round trips ---------------------------------------------------------

def _nodes():
    leaves = st.one_of(
        st.fractions(min_value=0, max_value=20, max_denominator=5).map(Num),
        st.just(Imag()),
        st.integers(1, 3).map(Var),
    )
    return st.recursive(leaves, lambda kids: st.one_of(
        kids.map(Neg),
        st.builds(Add, kids, kids, st.booleans()),
        st.builds(Mul, kids, kids),
        st.builds(Pow, kids, st.integers(0, 3)),
    ), max_leaves=8)


@settings(max_examples=200, deadline=None)
@given(_nodes())
def test_source_round_trip_preserves_value(node):
    text = to_source(node)
    assert lower(parse_ast(text), 3) == lower(node, 3)


@settings(max_examples=200, deadline=None)
@given(_nodes())
def test_source_is_a_fixed_point(node):
    text = to_source(node)
    assert to_source(parse_ast(text)) == text


fractions = st.fractions(min_value=-9, max_value=9, max_denominator=7)
polys = st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 2)),
                        st.builds(GaussianRational, fractions, fractions), max_size=6).map(
    lambda t: MultiPoly(2, t))


@settings(max_examples=150, deadline=None)
@given(polys)
def test_canonical_text_round_trip(p):
    assert parse_poly(p.to_text(), 2) == p


@pytest.mark.parametrize("name", available())
def test_registry_text_round_trip(name):
    r = registry(name)
    assert parse_poly(r.p.to_text(), r.d) == r.p
    assert parse_poly(r.ptilde.to_text(), r.d) == r.ptilde
