from __future__ import annotations

import numpy as np
import pytest

from helpers import PYTHAGOREAN, random_strictly_stable
from riflab.cli.parser import parse_poly
from riflab.cli.registry import registry
from riflab.config import DEFAULT
from riflab.errors import OrderAnomaly, PolydegreeDrop
from riflab.poly import ONE, GaussianRational, UnimodularPoint
from riflab.rif import make_rif, rotate_rif, slice_det
from riflab.singular import (
    LocalV,
    contact_order_scaling,
    estimate_order,
    find_singularities,
    ray_directions,
)

MINUS_ONE = GaussianRational(-1)


def _summary(r):
    return [(s.zhat.describe(), s.eta, s.order) for s in find_singularities(r)]


@pytest.mark.parametrize("name, expected", [
    ("bps_phi_plus", [(["1"], ONE, 2)]),
    ("bps_phi_minus", [(["1"], ONE, 2)]),
    ("bps_psi", [(["1"], ONE, 4)]),
    ("pascoe_74", [(["1"], MINUS_ONE, 2), (["-1"], MINUS_ONE, 4)]),
])
def test_two_variable_singularities(name, expected):
    assert _summary(registry(name)) == expected


@pytest.mark.parametrize("name, order", [("phi_d:3", 2), ("phi_d:4", 2), ("p_32", 4)])
def test_higher_dimensional_singularity_at_one(name, order):
    r = registry(name)
    (s,) = find_singularities(r)
    assert s.order == order and s.isotropic
    assert s.zhat.is_exact and s.zhat.distance(UnimodularPoint([ONE] * (r.d - 1))) == 0
    assert s.order_estimate == pytest.approx(order, abs=0.05)
    assert s.eta == ONE


def test_rotated_singularity_moves_with_rotation():
    lam = (PYTHAGOREAN[0], PYTHAGOREAN[2], PYTHAGOREAN[1])
    r = rotate_rif(registry("phi_d:3"), lam)
    (s,) = find_singularities(r)
    target = np.conj([complex(x) for x in lam[:2]])
    assert np.allclose(s.zhat.to_complex(), target, atol=1e-7)
    assert s.order == 2
    assert abs(complex(s.eta) - np.conj(complex(lam[2]))) < 1e-6


@pytest.mark.parametrize("name", ["pascoe_74", "bps_psi", "phi_d:3"])
def test_singular_points_are_common_zeros(name):
    r = registry(name)
    for s in find_singularities(r):
        z = np.array([list(s.zhat.to_complex()) + [complex(s.eta)]])
        scale = r.p.coefficient_scale()
        assert abs(r.p.eval_many(z)[0]) < 1e-7 * scale
        assert abs(r.ptilde.eval_many(z)[0]) < 1e-7 * scale
        assert abs(abs(complex(s.eta)) - 1) < 1e-12


@pytest.mark.parametrize("d, seed", [(2, 0), (2, 1), (3, 2)])
def test_strictly_stable_has_no_singularities(d, seed):
    rng = np.random.default_rng(seed)
    p = random_strictly_stable(rng, d, (2,) * (d - 1))
    assert find_singularities(make_rif(p)) == []


def test_local_v_is_torus_modulus_of_det():
    r = registry("pascoe_74")
    sd = slice_det(r)
    local = LocalV(sd.poly, UnimodularPoint([MINUS_ONE]))
    delta = np.linspace(-0.3, 0.3, 13)
    z = -np.exp(1j * delta)[:, None]
    assert np.allclose(local(delta[:, None]), sd.V(z), atol=1e-13)
    assert local(np.zeros((1, 1)))[0] == 0


def test_estimated_order_of_model():
    # near (1, 1) this is -(d1^2 + d2^2) to leading order
    det = parse_poly("(z1 - 1)^2 + (z2 - 1)^2", 2)
    local = LocalV(det, UnimodularPoint([ONE, ONE]))
    est = estimate_order(local, np.random.default_rng(0), DEFAULT)
    assert est[0] == pytest.approx(2, abs=0.02)


def test_ray_directions_are_unit_vectors():
    u = ray_directions(np.random.default_rng(1), 16, 3)
    assert u.shape == (16, 3)
    assert np.allclose(np.linalg.norm(u, axis=1), 1)


def test_odd_order_is_flagged():
    r = make_rif(parse_poly("2 + z2 (1 + z1 + z1^2)", 2), validate=False)
    with pytest.warns(OrderAnomaly):
        found = find_singularities(r)
    assert [s.order for s in found] == [1, 1]
    assert all(s.anomalies for s in found)


# --- contact orders under composition -------------------------------------------

@pytest.mark.parametrize("N, expected", [(2, [4]), (3, [6])])
def test_contact_order_scales_for_plus(N, expected):
    assert contact_order_scaling(registry("bps_phi_plus"), N) == expected


def test_pascoe_square_drops_polydegree():
    with pytest.raises(PolydegreeDrop):
        contact_order_scaling(registry("pascoe_74"), 2)


def test_pascoe_with_unit_i_scales():
    r = make_rif(registry("pascoe_74").p, unit=GaussianRational(0, 1))
    assert contact_order_scaling(r, 2) == [4, 8]


def test_contact_order_scaling_needs_two_variables():
    with pytest.raises(ValueError):
        contact_order_scaling(registry("phi_d:3"), 2)
