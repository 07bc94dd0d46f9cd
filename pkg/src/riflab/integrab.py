"""L^p integrability of the last-variable derivative near torus singularities.

Closed form: an isotropic zero of ``V`` of order ``m`` in ``d - 1`` angles gives
the cutoff ``1 + (d-1)/m``.  Numerically, ``V^{1-p}`` is integrated over a
ball around the singularity in logarithmically spaced annuli; divergence is
read off the power law of the annulus densities rather than from the size of
the sum, and the cutoff is located by bisection in ``p``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple

import numpy as np

from .config import DEFAULT, Config
from .errors import BudgetExceeded, NonFiniteIntegrand, OverlapError, RifWarning
from .rif import Rif, decompose, slice_det
from .singular import LocalV, SingularPoint, find_singularities


def cutoff_from_order(order, d: int):
    """``1 + (d-1)/order``; an exact ``Fraction`` when ``order`` is an integer."""
    if order <= 0:
        raise ValueError("order must be positive")
    if isinstance(order, (int, Fraction)) or float(order).is_integer():
        return 1 + Fraction(d - 1) / Fraction(order)
    return 1 + (d - 1) / float(order)


# --- annular quadrature -------------------------------------------------------

def _sphere_directions(dim: int, count: int, rng: np.random.Generator) -> tuple[np.ndarray, float]:
    """Directions on S^{dim-1} and the common weight (sphere area / count)."""
    if dim == 1:
        return np.array([[1.0], [-1.0]]), 1.0
    area = 2 * math.pi ** (dim / 2) / math.gamma(dim / 2)
    if dim == 2:
        t = 2 * np.pi * (np.arange(count) + 0.5) / count
        return np.column_stack([np.cos(t), np.sin(t)]), area / count
    if dim == 3:
        k = np.arange(count) + 0.5
        z = 1 - 2 * k / count
        phi = np.pi * (1 + 5**0.5) * k
        s = np.sqrt(1 - z * z)
        return np.column_stack([s * np.cos(phi), s * np.sin(phi), z]), area / count
    v = rng.normal(size=(count, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True), area / count


class AnnularSampler:
    """Samples of ``V`` on a log-spaced annular grid around the origin of ``R^dim``.

    The samples do not depend on the exponent, so one sampler serves every
    ``p`` visited by a bisection.
    """

    def __init__(self, V: Callable[[np.ndarray], np.ndarray], dim: int, eps: float,
                 config: Config = DEFAULT, normalize: bool = True, fit_r_min: float = 0.0):
        if not eps > config.quad_r_inner:
            raise ValueError("eps must exceed the inner radius")
        self.dim, self.eps, self.config = dim, eps, config
        rng = np.random.default_rng(config.seed)
        edges = np.logspace(math.log10(config.quad_r_inner), math.log10(eps), config.quad_annuli + 1)
        n_radial = config.quad_radial_nodes
        if dim == 1:  # only two directions, so spend the sample budget radially
            n_radial = max(n_radial, -(-config.quad_samples // (2 * config.quad_annuli)))
        nodes, gw = np.polynomial.legendre.leggauss(n_radial)
        per_shell = max(1, -(-config.quad_samples // (config.quad_annuli * n_radial)))
        dirs, dw = _sphere_directions(dim, per_shell, rng)
        lo, hi = np.log(edges[:-1]), np.log(edges[1:])
        t = 0.5 * (hi - lo)[:, None] * nodes[None, :] + 0.5 * (hi + lo)[:, None]
        radii = np.exp(t)  # (annuli, nodes)
        # d(theta) = r^{dim-1} dr dS = r^dim dt dS
        self.weights = (0.5 * (hi - lo))[:, None] * gw[None, :] * radii**dim * dw
        pts = radii[:, :, None, None] * dirs[None, None, :, :]
        values = np.asarray(V(pts.reshape(-1, dim)), dtype=float).reshape(radii.shape + (len(dirs),))
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise NonFiniteIntegrand("V vanishes or is not finite away from the centre of the ball")
        self.vmax = float(values.max()) if normalize else 1.0
        self.values = values / self.vmax
        self.edges = edges
        self.mid = np.sqrt(edges[:-1] * edges[1:])
        self.width = np.diff(edges)
        upper = min(config.quad_fit_r_max, eps)
        self.fit = (self.mid <= upper) & (edges[:-1] >= max(fit_r_min, config.quad_r_inner))
        if self.fit.sum() < 3:
            raise ValueError("fewer than three annuli inside the fitting range")
        self.samples = values.size

    def annulus_integrals(self, p: float) -> np.ndarray:
        return np.einsum("ij,ijk->i", self.weights, self.values ** (1.0 - p))

    def evaluate(self, p: float) -> CriterionResult:
        if p < 1:
            raise ValueError("exponent must be at least 1")
        I = self.annulus_integrals(p)
        x = np.log(self.mid[self.fit])
        y = np.log(I[self.fit] / self.width[self.fit])
        A = np.column_stack([x, np.ones_like(x)])
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        resid = y - A @ coef
        dof = max(1, len(x) - 2)
        stderr = float(np.sqrt(resid @ resid / dof / np.sum((x - x.mean()) ** 2)))
        beta = float(coef[0])
        partial = float(I.sum())
        converges = beta > -1.0
        if converges:
            density0 = I[0] / self.width[0]
            r0 = self.edges[0]
            core = density0 * self.mid[0] ** (-beta) * r0 ** (beta + 1) / (beta + 1)
            value = partial + float(core)
        else:
            value = math.inf
        return CriterionResult(value, partial, beta, stderr, converges, p, self.eps, self.vmax,
                               int(self.samples))


@dataclass(frozen=True)
class CriterionResult:
    """``value`` is the integral of (normalised) ``V^{1-p}`` over the ball, ``inf`` when the
    annulus densities decay too slowly; ``tail_exponent`` is the fitted power of those densities."""

    value: float
    partial_sum: float
    tail_exponent: float
    stderr: float
    converges: bool
    p: float
    eps: float
    vmax: float
    samples: int

    def unnormalized(self) -> float:
        return self.value * self.vmax ** (1.0 - self.p)


class CutoffEstimate(NamedTuple):
    value: float
    halfwidth: float

    def contains(self, x, slack: float = 0.0) -> bool:
        return abs(float(x) - self.value) <= self.halfwidth + slack

    def __str__(self) -> str:
        return f"{self.value:.4f} ± {self.halfwidth:.4f}"


def estimate_boundary(sampler: AnnularSampler, config: Config = DEFAULT) -> CutoffEstimate:
    """Bisection for the exponent where the annulus tail stops converging."""
    lo, hi = config.bisect_p_lo, config.bisect_p_hi
    if not sampler.evaluate(lo).converges:
        raise BudgetExceeded(f"integral already diverges at p = {lo}")
    top = sampler.evaluate(hi)
    if top.converges:
        raise BudgetExceeded(f"integral still converges at p = {hi}; cutoff lies outside the bracket")
    slope = (top.tail_exponent - sampler.evaluate(lo).tail_exponent) / (hi - lo)
    stderr = top.stderr
    for _ in range(config.bisect_iters):
        mid = 0.5 * (lo + hi)
        res = sampler.evaluate(mid)
        stderr = max(stderr, res.stderr)
        if res.converges:
            lo = mid
        else:
            hi = mid
    halfwidth = 0.5 * (hi - lo) + 2 * stderr / max(abs(slope), 1e-12)
    return CutoffEstimate(0.5 * (lo + hi), halfwidth)


def model_sampler(dim: int, m: float, eps: float = 0.1, config: Config = DEFAULT,
                  normalize: bool = True) -> AnnularSampler:
    """Sampler for the model ``V(theta) = |theta|^{2m}`` on ``R^dim``."""
    return AnnularSampler(lambda x: np.sum(x * x, axis=1) ** m, dim, eps, config, normalize)


# --- RIF-level operations -----------------------------------------------------

def _check_overlap(s: SingularPoint, eps: float, others) -> None:
    for t in others or ():
        if t.zhat == s.zhat:
            continue
        if float(np.linalg.norm(np.angle(t.zhat.to_complex() * np.conj(s.zhat.to_complex())))) < eps:
            raise OverlapError(f"singularity at {t.zhat} lies within {eps} of {s.zhat}")


def _sampler_for(r: Rif, s: SingularPoint, eps: float, config: Config, normalize: bool = True) -> AnnularSampler:
    local = LocalV(slice_det(r).poly, s.zhat)
    return AnnularSampler(local, r.d - 1, eps, config, normalize, fit_r_min=1e3 * s.center_uncertainty)


def criterion_integral(r: Rif, s: SingularPoint, p: float, eps: float | None = None,
                       config: Config = DEFAULT, singularities=None, normalize: bool = True) -> CriterionResult:
    """Integral of ``V^{1-p}`` over the angular ball of radius ``eps`` around ``s.zhat``.

    Pass ``singularities`` to have overlapping balls rejected.
    """
    eps = config.quad_eps if eps is None else eps
    _check_overlap(s, eps, singularities)
    return _sampler_for(r, s, eps, config, normalize).evaluate(p)


def _safe_eps(s: SingularPoint, others, config: Config) -> float:
    eps = config.quad_eps
    for t in others or ():
        if t.zhat != s.zhat:
            gap = float(np.linalg.norm(np.angle(t.zhat.to_complex() * np.conj(s.zhat.to_complex()))))
            eps = min(eps, 0.5 * gap)
    return eps


def estimate_cutoff(r: Rif, s: SingularPoint, config: Config = DEFAULT, singularities=None) -> CutoffEstimate:
    """Numeric local cutoff at ``s`` by bisection on the annulus-tail exponent.

    The halfwidth is widened for anisotropic numeric orders to cover the
    cutoffs of the slowest and fastest rays.
    """
    eps = _safe_eps(s, singularities, config)
    est = estimate_boundary(_sampler_for(r, s, eps, config), config)
    if not s.isotropic and s.order_interval:
        lo, hi = s.order_interval
        spread = 0.5 * abs((r.d - 1) / max(lo, 1e-12) - (r.d - 1) / max(hi, 1e-12))
        est = CutoffEstimate(est.value, est.halfwidth + spread)
    if est.halfwidth > config.cutoff_halfwidth:
        warnings.warn(f"cutoff halfwidth {est.halfwidth:.3g} exceeds {config.cutoff_halfwidth}", RifWarning,
                      stacklevel=2)
    return est


def _lp_inner(r2: np.ndarray, p: float, config: Config) -> np.ndarray:
    """Mean of ``|1 + sqrt(r2) u|^{2p-2}`` over the unit circle, by periodic trapezoid with doubling."""
    rad = np.sqrt(r2)[:, None]
    n = config.lp_inner_nodes

    def rule(n):
        u = np.exp(2j * np.pi * np.arange(n) / n)
        return np.mean(np.abs(1 + rad * u[None, :]) ** (2 * p - 2), axis=1)

    if p == 1:
        return np.ones_like(r2)
    prev = rule(n)
    while n < config.lp_inner_max_nodes:
        n *= 2
        cur = rule(n)
        if np.all(np.abs(cur - prev) <= config.lp_inner_rtol * np.abs(cur)):
            return cur
        prev = cur
    return prev


def direct_lp_norm(r: Rif, p: float, grid: int | None = None, config: Config = DEFAULT) -> float:
    """``p``-th power of the L^p norm of ``d phi / d z_d`` over the torus (normalised measure).

    Outer midpoint rule on ``zhat``.  With ``a + b z_d`` the slice of the
    denominator, a Moebius change of variable in ``z_d`` turns the inner
    integral into ``(1 - |b/a|^2)^{1-p}`` times a bounded periodic integral.
    """
    if p < 1:
        raise ValueError("exponent must be at least 1")
    grid = grid or config.lp_outer_grid
    dim = r.d - 1
    t = 2 * np.pi * (np.arange(grid) + 0.5) / grid - np.pi
    mesh = np.meshgrid(*([t] * dim), indexing="ij")
    z = np.exp(1j * np.column_stack([m.ravel() for m in mesh]))
    p1, p2, _, _ = decompose(r)
    a = np.abs(p1.eval_many(z)) ** 2
    b = np.abs(p2.eval_many(z)) ** 2
    gap = (a - b) / a
    tiny = np.finfo(float).tiny
    gap = np.clip(gap, tiny, 1.0)
    inner = _lp_inner(1.0 - gap, p, config)
    return float(np.mean(gap ** (1.0 - p) * inner))


# --- reports ------------------------------------------------------------------

class Aggregate(NamedTuple):
    """Smallest and largest local cutoffs; never collapsed into one number."""

    min: object
    max: object

    def as_dict(self) -> dict:
        return {"aggregate_min": _num(self.min), "aggregate_max": _num(self.max)}


def _local_value(entry):
    if isinstance(entry, LocalCutoff):
        return entry.local
    if isinstance(entry, CutoffEstimate):
        return entry.value
    return entry


def aggregate(reports) -> Aggregate:
    """Labelled ``(min, max)`` of local cutoffs, given as numbers or :class:`LocalCutoff` entries."""
    values = [_local_value(e) for e in reports]
    if not values:
        raise ValueError("aggregate of an empty list of local cutoffs")
    return Aggregate(min(values), max(values))


@dataclass(frozen=True)
class LocalCutoff:
    point: SingularPoint
    theoretical: object | None
    numeric: CutoffEstimate | None

    @property
    def local(self):
        return self.theoretical if self.theoretical is not None else self.numeric.value

    def as_dict(self) -> dict:
        out = {"singularity": self.point.as_dict(),
               "theoretical_cutoff": _num(self.theoretical) if self.theoretical is not None else None}
        out["numeric_cutoff"] = ({"value": self.numeric.value, "halfwidth": self.numeric.halfwidth}
                                 if self.numeric is not None else None)
        return out


@dataclass(frozen=True)
class IntegrabilityReport:
    per_singularity: tuple[LocalCutoff, ...]
    aggregate_min: object
    aggregate_max: object
    method_metadata: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "per_singularity": [e.as_dict() for e in self.per_singularity],
            "aggregate_min": _num(self.aggregate_min),
            "aggregate_max": _num(self.aggregate_max),
            "method_metadata": self.method_metadata,
        }


def _num(x):
    if isinstance(x, Fraction):
        return {"exact": str(x), "value": float(x)}
    return None if x is None else float(x)


def integrability_report(r: Rif, config: Config = DEFAULT, numeric: bool = False,
                         singularities=None) -> IntegrabilityReport | None:
    """Local cutoffs at every singularity plus labelled aggregates.

    Returns ``None`` for a RIF with no torus singularities.  Closed-form cutoffs
    are emitted only for isotropic orders.
    """
    sings = find_singularities(r, config) if singularities is None else list(singularities)
    if not sings:
        return None
    entries = []
    for s in sings:
        theo = cutoff_from_order(s.order, r.d) if s.isotropic and s.order > 0 else None
        est = estimate_cutoff(r, s, config, sings) if (numeric or theo is None) else None
        entries.append(LocalCutoff(s, theo, est))
    agg = aggregate(entries)
    meta = {"numeric": numeric}
    if numeric or any(e.numeric is not None for e in entries):
        meta.update({k: getattr(config, k) for k in (
            "quad_samples", "quad_annuli", "quad_radial_nodes", "quad_r_inner", "quad_eps",
            "quad_fit_r_max", "bisect_iters", "bisect_p_lo", "bisect_p_hi", "seed")})
    return IntegrabilityReport(tuple(entries), agg.min, agg.max, meta)
