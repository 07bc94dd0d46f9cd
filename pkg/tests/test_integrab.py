from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.special import hyp2f1

from riflab.cli.parser import parse_poly
from riflab.cli.registry import registry
from riflab.config import DEFAULT
from riflab.errors import BudgetExceeded, OverlapError
from riflab.integrab import (
    Aggregate,
    CutoffEstimate,
    aggregate,
    criterion_integral,
    cutoff_from_order,
    direct_lp_norm,
    estimate_boundary,
    estimate_cutoff,
    integrability_report,
    model_sampler,
    _lp_inner,
)
from riflab.rif import decompose, make_rif, zd_derivative_many
from riflab.singular import find_singularities


def plus_lp_oracle(p: float) -> float:
    """Independent value for plus phi: p1 = 2 - z1, p2 = -1, inner integral by hyp2f1, outer by quad."""
    def f(t):
        r2 = 1 / abs(2 - np.exp(1j * t)) ** 2
        return (1 - r2) ** (1 - p) * hyp2f1(1 - p, 1 - p, 1, r2)
    value, _ = quad(f, 0, np.pi, limit=400, points=[0])
    return value / np.pi


@pytest.mark.parametrize("order, d, expected", [(2, 2, Fraction(3, 2)), (4, 2, Fraction(5, 4)),
                                                (2, 3, Fraction(2)), (4, 3, Fraction(3, 2))])
def test_closed_form_cutoff(order, d, expected):
    assert cutoff_from_order(order, d) == expected


def test_closed_form_needs_positive_order():
    with pytest.raises(ValueError):
        cutoff_from_order(0, 2)
    assert cutoff_from_order(2.5, 2) == pytest.approx(1.4)


@pytest.mark.parametrize("dim, m", [(1, 1), (1, 2), (2, 1), (2, 2), (3, 1)])
def test_model_boundary(dim, m):
    est = estimate_boundary(model_sampler(dim, m))
    exact = 1 + dim / (2 * m)
    assert abs(est.value - exact) < 0.005
    assert est.contains(exact)


@pytest.mark.parametrize("dim, m, p", [(1, 1, 1.25), (1, 2, 1.1), (2, 1, 1.5), (3, 1, 1.8)])
def test_model_integral_matches_closed_form(dim, m, p):
    # integral of |x|^{2m(1-p)} over the ball of radius eps in R^dim
    eps = 0.1
    area = 2 * math.pi ** (dim / 2) / math.gamma(dim / 2)
    power = 2 * m * (1 - p) + dim
    exact = area * eps**power / power
    got = model_sampler(dim, m, eps=eps, normalize=False).evaluate(p)
    assert got.converges
    assert got.unnormalized() == pytest.approx(exact, rel=0.01)


@settings(max_examples=25, deadline=None)
@given(st.floats(1.0, 1.45), st.floats(0.0, 0.4))
def test_criterion_monotone_in_p(p, dp):
    sampler = model_sampler(2, 2)
    a, b = sampler.evaluate(p), sampler.evaluate(p + dp)
    assert b.value >= a.value * (1 - 1e-12)
    assert b.tail_exponent <= a.tail_exponent + 1e-12


def test_divergence_is_read_from_the_tail():
    r = registry("bps_phi_plus")
    (s,) = find_singularities(r)
    res = criterion_integral(r, s, 1.6)
    assert not res.converges and math.isinf(res.value)
    assert res.tail_exponent == pytest.approx(-1.2, abs=0.02)
    ok = criterion_integral(r, s, 1.4)
    assert ok.converges and math.isfinite(ok.value)


def test_phi3_converges_below_two():
    r = registry("phi_d:3")
    (s,) = find_singularities(r)
    res = criterion_integral(r, s, 1.9)
    assert res.converges
    assert res.tail_exponent == pytest.approx(-0.8, abs=0.05)


@pytest.mark.parametrize("name, expected", [("bps_phi_plus", [1.5]), ("bps_psi", [1.25]),
                                            ("pascoe_74", [1.5, 1.25]), ("phi_d:3", [2.0])])
def test_numeric_cutoffs(name, expected):
    r = registry(name)
    sings = find_singularities(r)
    got = [estimate_cutoff(r, s, singularities=sings) for s in sings]
    assert [round(e.value, 2) for e in got] == expected
    assert all(e.contains(x, slack=1e-3) for e, x in zip(got, expected))


def test_budget_exceeded_outside_bracket():
    # boundary 1 + 3/0.8 lies above the bracket
    with pytest.raises(BudgetExceeded):
        estimate_boundary(model_sampler(3, 0.4))


def test_overlapping_balls_rejected():
    r = registry("pascoe_74")
    sings = find_singularities(r)
    with pytest.raises(OverlapError):
        criterion_integral(r, sings[0], 1.2, eps=3.5, singularities=sings)
    assert criterion_integral(r, sings[0], 1.2, eps=0.5, singularities=sings).converges


# --- direct L^p norm ----------------------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 0.95), st.floats(1.0, 3.0))
def test_inner_mean_is_hypergeometric(rad, p):
    got = _lp_inner(np.array([rad**2]), p, DEFAULT)[0]
    assert got == pytest.approx(hyp2f1(1 - p, 1 - p, 1, rad**2), rel=1e-9)


@pytest.mark.parametrize("name, zhat", [("bps_phi_plus", (0.05,)), ("pascoe_74", (2.5,)), ("bps_psi", (-1.0,)),
                                         ("phi_d:3", (0.4, -0.2)), ("p_32", (0.1, 1.7))])
@pytest.mark.parametrize("p", [1.0, 1.3, 2.2])
def test_slice_mean_matches_substitution(name, zhat, p):
    # adaptive quadrature of |d phi / d z_d|^p along one slice, with no change of variable
    r = registry(name)
    zeta = np.exp(1j * np.array(zhat))

    def f(t):
        z = np.append(zeta, np.exp(1j * t))[None, :]
        return abs(complex(zd_derivative_many(r, z)[0])) ** p

    p1, p2, _, _ = decompose(r)
    a = abs(complex(p1.eval_many(zeta[None, :])[0])) ** 2
    b = abs(complex(p2.eval_many(zeta[None, :])[0])) ** 2
    gap = (a - b) / a
    expected = gap ** (1 - p) * hyp2f1(1 - p, 1 - p, 1, 1 - gap)
    value, _ = quad(f, -np.pi, np.pi, limit=800, epsabs=0, epsrel=1e-10)
    assert value / (2 * np.pi) == pytest.approx(expected, rel=1e-8)


@pytest.mark.parametrize("name", ["bps_phi_plus", "bps_psi", "pascoe_74", "phi_d:3", "p_32"])
def test_norm_at_one_is_one(name):
    r = registry(name)
    assert direct_lp_norm(r, 1.0, grid=16) == pytest.approx(1.0, abs=1e-12)


def test_norm_converges_below_cutoff():
    r = registry("bps_phi_plus")
    exact = plus_lp_oracle(1.2)
    values = [direct_lp_norm(r, 1.2, grid=g) for g in (64, 256, 1024)]
    errors = [abs(v - exact) for v in values]
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 0.01 * exact


def test_norm_grows_above_cutoff():
    # integrand ~ |t|^{-1.6} near the singularity, so midpoint sums grow like grid^0.6
    r = registry("bps_phi_plus")
    a, b = direct_lp_norm(r, 1.8, grid=128), direct_lp_norm(r, 1.8, grid=512)
    assert b / a == pytest.approx(4**0.6, rel=0.1)


def test_norm_of_nonsingular_rif_is_grid_stable():
    r = make_rif(parse_poly("4 - z1 - z2", 2))
    a, b = direct_lp_norm(r, 3.0, grid=32), direct_lp_norm(r, 3.0, grid=64)
    assert a == pytest.approx(b, rel=1e-8)


def test_norm_rejects_small_exponent():
    with pytest.raises(ValueError):
        direct_lp_norm(registry("bps_phi_plus"), 0.5)


# --- reports and aggregates ---------------------------------------------------------

def test_aggregate_is_labelled_min_max():
    agg = aggregate([Fraction(3, 2), Fraction(5, 4), CutoffEstimate(1.4, 0.01)])
    assert agg == Aggregate(Fraction(5, 4), Fraction(3, 2))
    assert agg.as_dict()["aggregate_min"] == {"exact": "5/4", "value": 1.25}


def test_aggregate_of_nothing():
    with pytest.raises(ValueError):
        aggregate([])


def test_report_for_pascoe():
    rep = integrability_report(registry("pascoe_74"), numeric=True)
    assert [e.theoretical for e in rep.per_singularity] == [Fraction(3, 2), Fraction(5, 4)]
    assert (rep.aggregate_min, rep.aggregate_max) == (Fraction(5, 4), Fraction(3, 2))
    for e in rep.per_singularity:
        assert e.numeric.contains(e.theoretical, slack=0.01)
    assert rep.method_metadata["numeric"] is True


def test_report_without_singularities():
    assert integrability_report(make_rif(parse_poly("4 - z1 - z2", 2))) is None
