"""Rational inner functions of polydegree (n,1) and their slice structure.

For fixed ``zhat`` on the torus, ``phi(zhat, w)`` is a Moebius map in ``w``
whose coefficients form the slice matrix ``[[pt1, pt2], [p2, p1]]`` where

    p  = p1 + z_d * p2        ptilde = pt2 + z_d * pt1.

Its determinant detects singularities and controls derivative integrability.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import DEFAULT, Config
from .errors import (
    DegenerateSlice,
    InfiniteSingularSet,
    NotDegreeOneInLast,
    NotStable,
    PoleAtPoint,
    ToralFactor,
    VerticalLine,
)
from .poly import (
    GaussianRational,
    MultiPoly,
    UnimodularPoint,
    _is_exact_scalar,
    gcd_multivariate,
    reflect,
    roots_on_unit_circle,
)


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of :func:`check_stability`; ``witness`` is set iff unstable."""

    stable: bool
    torus_margin: float
    grid: int
    interior_samples: int
    slice_samples: int
    witness: tuple[complex, ...] | None = None
    reason: str = ""

    def as_dict(self) -> dict:
        out = {
            "stable": self.stable,
            "torus_margin": self.torus_margin,
            "grid": self.grid,
            "interior_samples": self.interior_samples,
            "slice_samples": self.slice_samples,
        }
        if self.witness is not None:
            out["witness"] = [[z.real, z.imag] for z in self.witness]
            out["reason"] = self.reason
        return out


def split_last(p: MultiPoly) -> tuple[MultiPoly, MultiPoly]:
    """``(p1, p2)`` with ``p = p1 + z_d p2``; requires degree at most one in ``z_d``."""
    parts = p.split_var(p.nvars - 1)
    if any(k > 1 for k in parts):
        raise NotDegreeOneInLast(f"degree {max(parts)} in the last variable, expected 1")
    zero = MultiPoly.zero(p.nvars - 1)
    return parts.get(0, zero), parts.get(1, zero)


def torus_grid(dim: int, size: int, offset: float = 0.0) -> np.ndarray:
    """Angles of a ``size**dim`` tensor grid on the torus, shape ``(size**dim, dim)``."""
    axis = 2 * np.pi * (np.arange(size) + offset) / size
    if dim == 0:
        return np.zeros((1, 0))
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _random_polydisk(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    # radii pushed toward the boundary, where instability shows first
    radius = 1.0 - rng.random((count, dim)) ** 3
    return radius * np.exp(2j * np.pi * rng.random((count, dim)))


def _zero_free_slices(p1: MultiPoly, rng, config: Config):
    """Look for a zero of ``p1`` inside the open polydisk via univariate slices in its last variable."""
    k = p1.nvars
    if p1.is_zero():
        return (0j,) * k, 1
    if p1.degree(k - 1) <= 0:
        if k == 1:
            return None, 1
        # no dependence on the last variable: recurse on the remaining ones
        reduced = p1.split_var(k - 1).get(0)
        witness, count = _zero_free_slices(reduced, rng, config)
        return (None if witness is None else witness + (0j,)), count
    parts = p1.split_var(k - 1)
    deg = max(parts)
    if k == 1:
        samples = np.zeros((1, 0), dtype=complex)
    else:
        g = max(4, int(round(config.stability_grid ** (1.0 / max(1, k - 1)))))
        torus = np.exp(1j * torus_grid(k - 1, g, 0.5))
        samples = np.vstack([np.zeros((1, k - 1)), torus, _random_polydisk(rng, 128, k - 1)])
    coeffs = np.zeros((samples.shape[0], deg + 1), dtype=complex)
    for e, part in parts.items():
        coeffs[:, e] = part.eval_many(samples) if k > 1 else complex(part.constant_term())
    for row, zrest in zip(coeffs, samples):
        nz = np.flatnonzero(np.abs(row) > 0)
        if not len(nz):
            return tuple(zrest) + (0j,), samples.shape[0]
        top = nz[-1]
        if top == 0:
            continue
        for r in np.roots(row[: top + 1][::-1]):
            if abs(r) < 1 - 1e-9:
                return tuple(zrest) + (complex(r),), samples.shape[0]
    return None, samples.shape[0]


def check_stability(p: MultiPoly, config: Config = DEFAULT) -> StabilityReport:
    """Sampling certificate that ``p = p1 + z_d p2`` has no zeros in the open polydisk.

    ``p`` is stable iff ``p1`` is zero-free in the open ``(d-1)``-disk and
    ``|p2| <= |p1|`` there; by the maximum principle the latter reduces to
    the torus.  Checks: slice roots of ``p1``, a torus grid of
    ``|p1|^2 - |p2|^2`` refined near its minima, and random interior points.
    """
    d = p.nvars
    p1, p2 = split_last(p)
    rng = np.random.default_rng(config.seed)
    scale = max(1.0, p.coefficient_scale())
    tol = config.stability_tol * scale**2
    dim = d - 1

    witness, nslices = _zero_free_slices(p1, rng, config) if dim else (None, 0)
    if witness is not None:
        return StabilityReport(False, float("nan"), config.stability_grid, 0, nslices,
                               tuple(complex(w) for w in witness) + (0j,), "zero of p1 inside the polydisk")
    if dim == 0:
        a, b = complex(p1.constant_term()), complex(p2.constant_term())
        if abs(a) < abs(b) or (a == 0 and b == 0):
            return StabilityReport(False, abs(a) ** 2 - abs(b) ** 2, 0, 0, 0, (-a / b if b else 0j,),
                                   "root inside the disk")
        return StabilityReport(True, abs(a) ** 2 - abs(b) ** 2, 0, 0, 0)

    size = config.stability_grid
    while size ** dim > config.singular_grid_max_points:
        size //= 2
    angles = torus_grid(dim, size)
    margin_vals = _margin(p1, p2, angles)
    h = 2 * np.pi / size
    worst = np.argsort(margin_vals)[:8]
    local = torus_grid(dim, 2 * config.stability_refine + 1) / (2 * np.pi)
    local = (local * (2 * config.stability_refine + 1) - config.stability_refine) * h / config.stability_refine
    refined = (angles[worst][:, None, :] + local[None, :, :]).reshape(-1, dim)
    refined_vals = _margin(p1, p2, refined)
    all_angles = np.vstack([angles, refined])
    all_vals = np.concatenate([margin_vals, refined_vals])
    k = int(np.argmin(all_vals))
    margin = float(all_vals[k])
    if margin < -tol:
        zeta = np.exp(1j * all_angles[k])
        for r in (1 - 1e-9, 1 - 1e-6, 1 - 1e-3, 0.99, 0.9, 0.5):
            z = r * zeta
            a = complex(p1.eval_many(z[None, :])[0])
            b = complex(p2.eval_many(z[None, :])[0])
            if abs(a) < abs(b):
                return StabilityReport(False, margin, size, 0, nslices, tuple(z) + (-a / b,),
                                       "|p2| > |p1| on the torus")
        return StabilityReport(False, margin, size, 0, nslices, tuple(zeta) + (0j,),
                               "|p2| > |p1| on the torus")

    interior = _random_polydisk(rng, config.stability_interior_samples, dim)
    a = p1.eval_many(interior)
    b = p2.eval_many(interior)
    bad = np.flatnonzero(np.abs(a) < np.abs(b) * (1 - 1e-12))
    if len(bad):
        j = bad[np.argmin(np.abs(a[bad]) / np.abs(b[bad]))]
        return StabilityReport(False, margin, size, len(interior), nslices,
                               tuple(interior[j]) + (-a[j] / b[j],), "interior zero")
    return StabilityReport(True, margin, size, len(interior), nslices)


def _margin(p1: MultiPoly, p2: MultiPoly, angles: np.ndarray) -> np.ndarray:
    z = np.exp(1j * angles)
    return np.abs(p1.eval_many(z)) ** 2 - np.abs(p2.eval_many(z)) ** 2


@dataclass(frozen=True, eq=False)
class Rif:
    """``phi = unit * reflect(p) / p`` with ``deg_{z_d} p = 1``."""

    p: MultiPoly
    ptilde: MultiPoly
    unit: GaussianRational
    polydegree: tuple[int, ...]
    stability: StabilityReport | None = None
    notes: tuple[str, ...] = field(default=())

    @property
    def d(self) -> int:
        return self.p.nvars

    @property
    def n(self) -> tuple[int, ...]:
        return self.polydegree[:-1]

    def __call__(self, *z):
        if len(z) == 1 and isinstance(z[0], (list, tuple, np.ndarray)):
            z = tuple(z[0])
        num = self.ptilde.eval(z)
        den = self.p.eval(z)
        return num / den

    def eval_many(self, points) -> np.ndarray:
        return self.ptilde.eval_many(points) / self.p.eval_many(points)

    def __eq__(self, other):
        if not isinstance(other, Rif):
            return NotImplemented
        return (self.p, self.ptilde, self.unit, self.polydegree) == (
            other.p, other.ptilde, other.unit, other.polydegree)

    def __hash__(self):
        return hash((self.p, self.ptilde, self.polydegree))


def _unit(value) -> GaussianRational:
    u = GaussianRational.coerce(value)
    if not u.is_unimodular():
        raise ValueError(f"unit {u} is not exactly unimodular")
    return u


def toral_factor(p: MultiPoly, ptilde: MultiPoly) -> MultiPoly | None:
    """Common non-constant factor of ``p`` and ``ptilde``, or ``None``.

    A common factor either involves ``z_d`` (then the slice determinant
    vanishes identically) or lies in ``C[zhat]`` and divides all four slice
    entries.
    """
    p1, p2 = split_last(p)
    pt2, pt1 = split_last(ptilde)
    det = pt1 * p1 - pt2 * p2
    if det.is_zero():
        return gcd_multivariate(p, ptilde)
    g = gcd_multivariate(p1, p2, pt1, pt2)
    return None if g.is_constant() else g.extend(p.nvars)


def _pt1_torus_zero(pt1: MultiPoly, config: Config) -> tuple[float, ...] | None:
    dim = pt1.nvars
    if pt1.is_constant():
        return None
    if dim == 1:
        roots = roots_on_unit_circle(pt1, tol=config.root_tol, tie_band=config.root_tie_band)
        return tuple(roots[0][0].angles()) if roots else None
    size = config.stability_grid
    while size ** dim > config.singular_grid_max_points:
        size //= 2
    angles = torus_grid(dim, size, 0.5)
    vals = np.abs(pt1.eval_many(np.exp(1j * angles)))
    scale = max(1.0, pt1.coefficient_scale())
    if vals.min() > 0.05 * scale:
        return None
    from scipy.optimize import minimize

    f = lambda t: float(np.abs(pt1.eval_many(np.exp(1j * t)[None, :])[0]) ** 2)  # noqa: E731
    for k in np.argsort(vals)[:8]:
        # coarse pass first: a minimum far from zero is settled cheaply
        res = minimize(f, angles[k], method="Nelder-Mead",
                       options={"xatol": 1e-7, "fatol": 1e-16 * scale**2, "maxiter": 200 * dim})
        if math.sqrt(max(res.fun, 0.0)) > 1e-4 * scale:
            continue
        res = minimize(f, res.x, method="Nelder-Mead",
                       options={"xatol": 1e-13, "fatol": 1e-30, "maxiter": 4000})
        if math.sqrt(max(res.fun, 0.0)) < 1e-9 * scale:
            return tuple(res.x)
    return None


def make_rif(
    p: MultiPoly,
    unit=1,
    polydegree: Sequence[int] | None = None,
    config: Config = DEFAULT,
    validate: bool = True,
) -> Rif:
    """Validate ``p`` and build ``phi = unit * reflect(p) / p``.

    Raises :class:`NotStable`, :class:`NotDegreeOneInLast`,
    :class:`ToralFactor` or :class:`InfiniteSingularSet`.
    """
    if p.nvars < 2:
        raise ValueError("a (n,1) RIF needs at least two variables")
    u = _unit(unit)
    stab = None
    if validate:
        stab = check_stability(p, config)
        if not stab.stable:
            raise NotStable(f"p is not stable: {stab.reason}", witness=stab.witness)
    if p.degree(p.nvars - 1) != 1:
        raise NotDegreeOneInLast(f"degree {p.degree(p.nvars - 1)} in z{p.nvars}, expected 1")
    actual = p.polydegree
    if polydegree is None:
        n = actual[:-1] + (1,)
    else:
        n = tuple(int(x) for x in polydegree)
        if len(n) != p.nvars or n[-1] != 1 or any(a > b for a, b in zip(actual, n)):
            raise ValueError(f"polydegree {n} incompatible with p of degree {actual}")
    ptilde = reflect(p, n).scale(u)
    rif = Rif(p, ptilde, u, n, stab)
    if validate:
        g = toral_factor(p, ptilde)
        if g is not None:
            raise ToralFactor(f"p and its reflection share the factor {g}", factor=g)
        _, pt1 = split_last(ptilde)
        hit = _pt1_torus_zero(pt1, config)
        if hit is not None:
            raise InfiniteSingularSet(
                f"pt1 vanishes on the torus near angles {hit}: the singular set contains a vertical line")
    return rif


def rotate_rif(r: Rif, factors: Sequence, config: Config = DEFAULT, validate: bool = True) -> Rif:
    """``phi(lambda_1 z_1, ..., lambda_d z_d)`` for exact unimodular ``lambda_j``.

    Rotating ``p`` multiplies the unit by ``prod lambda_j^{n_j}`` so the
    numerator is the rotated numerator.
    """
    lams = [_unit(f) for f in factors]
    unit = r.unit
    for lam, k in zip(lams, r.polydegree):
        unit = unit * lam ** k
    return make_rif(r.p.rotate(lams), unit, r.polydegree, config, validate)


def decompose(r: Rif) -> tuple[MultiPoly, MultiPoly, MultiPoly, MultiPoly]:
    """``(p1, p2, pt1, pt2)`` with ``p = p1 + z_d p2`` and ``ptilde = pt2 + z_d pt1``."""
    p1, p2 = split_last(r.p)
    pt2, pt1 = split_last(r.ptilde)
    return p1, p2, pt1, pt2


@dataclass(frozen=True)
class SliceMatrix:
    """``[[a, b], [c, d]]`` over ``C[zhat]``; the slice map is ``w -> (a w + b)/(c w + d)``."""

    a: MultiPoly
    b: MultiPoly
    c: MultiPoly
    d: MultiPoly

    @property
    def entries(self) -> tuple[MultiPoly, MultiPoly, MultiPoly, MultiPoly]:
        return self.a, self.b, self.c, self.d

    def det(self) -> MultiPoly:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: SliceMatrix) -> SliceMatrix:
        return SliceMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def map_entries(self, fn) -> SliceMatrix:
        return SliceMatrix(*(fn(e) for e in self.entries))

    def evaluate(self, point: Sequence):
        """Entries at ``point``: exact ``GaussianRational`` tuple or a complex 2x2 array."""
        point = tuple(point)
        if all(_is_exact_scalar(x) for x in point):
            return tuple(e.eval(point) for e in self.entries)
        z = np.asarray([point], dtype=complex)
        return np.array([[self.a.eval_many(z)[0], self.b.eval_many(z)[0]],
                         [self.c.eval_many(z)[0], self.d.eval_many(z)[0]]])

    def reconstruct(self) -> tuple[MultiPoly, MultiPoly]:
        """``(p, ptilde)`` in ``d`` variables from the slice entries."""
        nv = self.a.nvars + 1
        lift = lambda q: q.extend(nv)  # noqa: E731
        p = lift(self.d) + lift(self.c).times_var_power(nv - 1, 1)
        ptilde = lift(self.b) + lift(self.a).times_var_power(nv - 1, 1)
        return p, ptilde


def slice_matrix(r: Rif) -> SliceMatrix:
    p1, p2, pt1, pt2 = decompose(r)
    return SliceMatrix(pt1, pt2, p2, p1)


@dataclass(frozen=True)
class SliceDet:
    """Slice determinant ``poly = pt1 p1 - pt2 p2`` and the torus function ``V``.

    ``vpoly`` is the polynomial ``pt1 * reflect(pt1) - pt2 * reflect(pt2)``
    which equals ``zhat^n V(zhat)`` on the torus; ``poly == unit * vpoly``.
    """

    poly: MultiPoly
    vpoly: MultiPoly
    pt1: MultiPoly
    pt2: MultiPoly
    n: tuple[int, ...]
    unit: GaussianRational

    def V(self, points) -> np.ndarray:
        """``|pt1|^2 - |pt2|^2`` at torus points (complex array ``(M, d-1)``)."""
        z = np.asarray(points, dtype=complex)
        return np.abs(self.pt1.eval_many(z)) ** 2 - np.abs(self.pt2.eval_many(z)) ** 2

    def V_from_vpoly(self, points) -> np.ndarray:
        z = np.asarray(points, dtype=complex)
        mono = np.prod(z ** np.asarray(self.n, dtype=float), axis=1) if self.n else 1.0
        return (self.vpoly.eval_many(z) / mono).real

    def identity_residual(self, points) -> np.ndarray:
        """``|det - unit * zhat^n V|`` at torus points."""
        z = np.asarray(points, dtype=complex)
        mono = np.prod(z ** np.asarray(self.n, dtype=float), axis=1) if self.n else 1.0
        return np.abs(self.poly.eval_many(z) - complex(self.unit) * mono * self.V(z))


def slice_det(r: Rif) -> SliceDet:
    p1, p2, pt1, pt2 = decompose(r)
    n = r.n
    det = pt1 * p1 - pt2 * p2
    vpoly = pt1 * reflect(pt1, n) - pt2 * reflect(pt2, n)
    return SliceDet(det, vpoly, pt1, pt2, n, r.unit)


@dataclass(frozen=True)
class Mobius:
    a: object
    b: object
    c: object
    d: object

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    def __call__(self, w):
        return (self.a * w + self.b) / (self.c * w + self.d)

    def derivative(self, w):
        return self.det / (self.c * w + self.d) ** 2


@dataclass(frozen=True)
class ConstantSlice:
    value: object


def slice_map(r: Rif, zhat: Sequence, config: Config = DEFAULT) -> Mobius | ConstantSlice:
    """The one-variable map ``w -> phi(zhat, w)``, or its constant value when the slice degenerates."""
    zhat = tuple(zhat.values() if isinstance(zhat, UnimodularPoint) else zhat)
    if len(zhat) != r.d - 1:
        raise ValueError(f"zhat needs {r.d - 1} coordinates")
    exact = all(_is_exact_scalar(x) for x in zhat)
    if exact:
        if any(GaussianRational.coerce(x).abs2() > 1 for x in zhat):
            raise ValueError("zhat must lie in the closed polydisk")
    elif any(abs(complex(x)) > 1 + 1e-12 for x in zhat):
        raise ValueError("zhat must lie in the closed polydisk")
    M = slice_matrix(r)
    vals = M.evaluate(zhat)
    if exact:
        a, b, c, d = vals
        if not (a or b or c or d):
            raise DegenerateSlice(f"all slice entries vanish at {zhat}")
        singular = not (a * d - b * c)
        candidates = [GaussianRational(0), GaussianRational(1), GaussianRational(-1),
                      GaussianRational(0, 1), GaussianRational(1, 2)]
        size = lambda w: (c * w + d).abs2()  # noqa: E731
    else:
        (a, b), (c, d) = (complex(v) for v in vals[0]), (complex(v) for v in vals[1])
        big = max(abs(a), abs(b), abs(c), abs(d))
        if big == 0:
            raise DegenerateSlice(f"all slice entries vanish at {zhat}")
        singular = abs(a * d - b * c) <= config.constant_slice_tol * big**2
        candidates = [0j, 1 + 0j, -1 + 0j, 1j, 0.5 + 0j]
        size = lambda w: abs(c * w + d)  # noqa: E731
    if singular:
        w = max(candidates, key=size)
        return ConstantSlice((a * w + b) / (c * w + d))
    return Mobius(a, b, c, d)


@dataclass(frozen=True)
class SliceZero:
    psi0: object
    rho: object


def zd_zero(r: Rif, zhat: Sequence) -> SliceZero:
    """Zero ``psi0 = -pt2/pt1`` of the slice map and ``rho = 1 - |psi0|^2``."""
    zhat = tuple(zhat.values() if isinstance(zhat, UnimodularPoint) else zhat)
    _, _, pt1, pt2 = decompose(r)
    a = pt1.eval(zhat)
    b = pt2.eval(zhat)
    if isinstance(a, GaussianRational):
        if not a:
            raise VerticalLine(f"pt1 vanishes at {zhat}")
        psi0 = -b / a
        return SliceZero(psi0, 1 - psi0.abs2())
    if abs(a) <= 1e-14 * max(1.0, pt1.coefficient_scale()):
        raise VerticalLine(f"pt1 vanishes at {zhat}")
    psi0 = -b / a
    return SliceZero(psi0, 1.0 - abs(psi0) ** 2)


def zd_derivative(r: Rif, z: Sequence):
    """``d phi / d z_d = det(zhat) / p(z)^2``."""
    z = tuple(z)
    den = r.p.eval(z)
    if not den or (not isinstance(den, GaussianRational) and abs(den) == 0):
        raise PoleAtPoint(f"p vanishes at {z}")
    det = slice_det(r).poly.eval(z[:-1])
    return det / den**2


def zd_derivative_many(r: Rif, points, sd: SliceDet | None = None) -> np.ndarray:
    z = np.asarray(points, dtype=complex)
    sd = sd or slice_det(r)
    return sd.poly.eval_many(z[:, :-1]) / r.p.eval_many(z) ** 2


def phase(value) -> float:
    return cmath.phase(complex(value))
