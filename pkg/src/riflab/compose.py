"""Iterates ``phi^N`` built by powering the slice matrix.

For fixed ``zhat`` the slice of ``phi^N`` is the N-fold composition of the
slice Moebius map, so its coefficient matrix is ``M^N``.  Factors common to
all four entries of ``M^N`` are cancelled, which lowers the polydegree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Config
from .errors import NotInner, ValidationError
from .poly import GaussianRational, MultiPoly, _is_exact_scalar, exact_divide, gcd_multivariate, reflect
from .rif import Rif, SliceMatrix, make_rif, slice_matrix


def matrix_power(M: SliceMatrix, N: int) -> SliceMatrix:
    """Exact ``M**N`` by repeated squaring."""
    if N < 1:
        raise ValueError("N must be at least 1")
    result = None
    base = M
    while N:
        if N & 1:
            result = base if result is None else result @ base
        N >>= 1
        if N:
            base = base @ base
    return result


@dataclass(frozen=True)
class CompositionResult:
    rif_N: Rif
    N: int
    cancelled_factor: MultiPoly
    polydegree_drop: bool
    matrix_power: SliceMatrix
    base: Rif

    @property
    def reduced_matrix(self) -> SliceMatrix:
        return slice_matrix(self.rif_N)


def _unit_between(ptilde: MultiPoly, reflected: MultiPoly) -> GaussianRational | None:
    if reflected.is_zero() or len(ptilde) != len(reflected):
        return None
    idx, c = next(iter(reflected.items()))
    u = ptilde.coeff(idx) / c
    if not u.is_unimodular() or ptilde != reflected.scale(u):
        return None
    return u


def compose(r: Rif, N: int, config: Config = DEFAULT, validate: bool = True) -> CompositionResult:
    """Build ``phi^N`` with every factor common to the four entries of ``M^N`` cancelled.

    The cancelled factor is monic; its scalar ambiguity is absorbed into the
    unit of the returned RIF.  Raises :class:`NotInner` if the result fails
    validation, which would indicate a bug rather than bad input.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    M = slice_matrix(r)
    MN = matrix_power(M, N)
    g = gcd_multivariate(*MN.entries)
    drop = not g.is_constant()
    reduced = MN.map_entries(lambda e: exact_divide(e, g)) if drop else MN
    p_N, pt_N = reduced.reconstruct()
    dim = r.d - 1
    gdeg = g.polydegree
    candidates = [tuple(N * k - gdeg[j] for j, k in enumerate(r.n)),
                  p_N.polydegree[:dim],
                  tuple(max(a, b) for a, b in zip(p_N.polydegree[:dim], pt_N.polydegree[:dim]))]
    unit = None
    for nd in candidates:
        nfull = nd + (1,)
        if any(a > b for a, b in zip(p_N.polydegree, nfull)):
            continue
        unit = _unit_between(pt_N, reflect(p_N, nfull))
        if unit is not None:
            break
    if unit is None:
        raise NotInner(f"composite numerator is not a unimodular multiple of the reflected denominator (N={N})")
    try:
        rif_N = make_rif(p_N, unit, polydegree=nfull, config=config, validate=validate)
    except ValidationError as exc:
        raise NotInner(f"composite failed validation: {exc}") from exc
    return CompositionResult(rif_N, N, g, drop, MN, r)


def full_polydegree(cr: CompositionResult) -> bool:
    """True iff ``phi^N`` has polydegree ``(N n, 1)``."""
    want = tuple(cr.N * k for k in cr.base.n) + (1,)
    actual = tuple(max(a, b) for a, b in zip(cr.rif_N.p.polydegree, cr.rif_N.ptilde.polydegree))
    return not cr.polydegree_drop and actual == want


def _power_2x2(entries, N: int):
    a, b, c, d = entries
    ra, rb, rc, rd = a, b, c, d
    for _ in range(N - 1):
        ra, rb, rc, rd = ra * a + rb * c, ra * b + rb * d, rc * a + rd * c, rc * b + rd * d
    return ra, rb, rc, rd


def check_entries_nonzero_at(M: SliceMatrix, N: int, point, tol: float = 1e-12) -> bool:
    """Whether all entries of ``M(point)**N`` are nonzero (exact when ``point`` is exact)."""
    point = tuple(point.values() if hasattr(point, "values") and not isinstance(point, (tuple, list)) else point)
    vals = M.evaluate(point)
    if all(_is_exact_scalar(x) for x in point):
        return all(bool(v) for v in _power_2x2(vals, N))
    flat = [complex(v) for v in np.asarray(vals).ravel()]
    scale = max(1.0, max(abs(v) for v in flat)) ** N
    return all(abs(v) > tol * scale for v in _power_2x2(flat, N))


def iterate(r: Rif, N: int, z):
    """N-fold functional iterate ``w -> phi(zhat, w)`` started at ``w = z_d``."""
    z = tuple(z)
    zhat, w = z[:-1], z[-1]
    for _ in range(N):
        w = r(zhat + (w,))
    return w
