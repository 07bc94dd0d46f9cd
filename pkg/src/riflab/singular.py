"""Torus singularities of (n,1) RIFs and their vanishing orders.

In two variables the singular ``z1``-coordinates are the unimodular roots of
the slice determinant and the contact order is the root multiplicity, both
exact.  For ``d >= 3`` the zeros of ``V = |pt1|^2 - |pt2|^2`` are located by a
torus grid plus local refinement, and the order is estimated from log-log
slopes of ``V`` along rays.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .compose import compose, full_polydegree
from .config import DEFAULT, Config
from .errors import (
    InfiniteSingularSetSuspected,
    NonUnimodularEta,
    OrderAnomaly,
    PolydegreeDrop,
    RifError,
    VerticalLine,
)
from .poly import EXACT_UNIT_CANDIDATES, GaussianRational, MultiPoly, UnimodularPoint, roots_on_unit_circle
from .rif import Rif, decompose, slice_det, torus_grid


@dataclass(frozen=True)
class SingularPoint:
    """A singularity ``(zhat, eta)`` on the torus with the vanishing order of ``V`` at ``zhat``.

    ``order`` is exact for ``kind == "exact"``; for ``kind == "numeric"`` it is
    the rounded mean ray slope, with the raw estimate in ``order_estimate``.
    """

    zhat: UnimodularPoint
    eta: object
    order: int
    kind: str
    order_estimate: float | None = None
    order_interval: tuple[float, float] | None = None
    ray_slopes: tuple[float, ...] = ()
    residual: float = 0.0
    isotropic: bool = True
    center_uncertainty: float = 0.0
    anomalies: tuple[str, ...] = field(default=())

    @property
    def d(self) -> int:
        return len(self.zhat) + 1

    def eta_complex(self) -> complex:
        return complex(self.eta)

    def point(self) -> tuple:
        return self.zhat.values() + (self.eta,)

    def as_dict(self) -> dict:
        eta = self.eta
        out = {
            "zhat": self.zhat.describe(),
            "eta": str(eta) if isinstance(eta, GaussianRational) else
            {"angle": cmath.phase(eta), "re": eta.real, "im": eta.imag},
            "order": self.order,
            "kind": self.kind,
            "isotropic": self.isotropic,
        }
        if self.kind == "numeric":
            out["order_estimate"] = self.order_estimate
            out["order_interval"] = list(self.order_interval)
            out["ray_slopes"] = list(self.ray_slopes)
            out["residual"] = self.residual
            out["center_uncertainty"] = self.center_uncertainty
        if self.anomalies:
            out["anomalies"] = list(self.anomalies)
        return out


class LocalV:
    """Accurate ``V`` near a torus point, as ``|Q(e^{i delta} - 1)|`` with ``Q`` the exact
    re-expansion of the slice determinant about the point.

    ``|det| = V`` on the torus, and evaluating the re-expanded polynomial at
    small offsets keeps full relative precision where direct evaluation of
    ``|pt1|^2 - |pt2|^2`` cancels catastrophically.
    """

    def __init__(self, det: MultiPoly, center: UnimodularPoint | tuple):
        if not isinstance(center, UnimodularPoint):
            center = UnimodularPoint(center)
        self.center = center
        coords = [c if isinstance(c, GaussianRational) else GaussianRational.from_complex(cmath.exp(1j * c))
                  for c in center.coords]
        self.Q = det.local_expansion(coords)
        self.dim = det.nvars

    def __call__(self, offsets) -> np.ndarray:
        delta = np.asarray(offsets, dtype=float).reshape(-1, self.dim)
        w = 2j * np.sin(delta / 2) * np.exp(0.5j * delta)
        return np.abs(self.Q.eval_many(w))


def _eta(r: Rif, zhat_values: tuple, config: Config):
    p1, p2, pt1, pt2 = decompose(r)
    exact = all(isinstance(v, GaussianRational) for v in zhat_values)
    a, b = p1.eval(zhat_values), p2.eval(zhat_values)
    ta, tb = pt1.eval(zhat_values), pt2.eval(zhat_values)
    if exact:
        if not ta:
            raise VerticalLine(f"pt1 vanishes at {zhat_values}")
        via_pt = -tb / ta
        if not b:
            eta = via_pt
        else:
            eta = -a / b
            if eta != via_pt:
                raise NonUnimodularEta(f"denominator root {eta} and numerator root {via_pt} disagree")
        if not eta.is_unimodular():
            raise NonUnimodularEta(f"|eta| = {math.sqrt(float(eta.abs2()))} at {zhat_values}")
        return eta
    scale = max(1.0, pt1.coefficient_scale())
    if abs(ta) <= 1e-12 * scale:
        raise VerticalLine(f"pt1 vanishes at {zhat_values}")
    via_pt = -tb / ta
    if abs(b) <= 1e-12 * scale:
        eta = via_pt
    else:
        eta = -a / b
        if abs(eta - via_pt) > config.eta_tol:
            raise NonUnimodularEta(f"denominator root {eta} and numerator root {via_pt} disagree")
    if abs(abs(eta) - 1) > config.eta_tol:
        raise NonUnimodularEta(f"|eta| = {abs(eta)} at {zhat_values}")
    return eta / abs(eta)


def _two_variable(r: Rif, config: Config) -> list[SingularPoint]:
    det = slice_det(r).poly
    if det.is_zero():
        raise InfiniteSingularSetSuspected("slice determinant vanishes identically")
    out = []
    for pt, mult in roots_on_unit_circle(det, tol=config.root_tol, tie_band=config.root_tie_band):
        eta = _eta(r, pt.values(), config)
        anomalies = ()
        if mult % 2:
            msg = f"odd contact order {mult} at {pt}"
            warnings.warn(msg, OrderAnomaly, stacklevel=3)
            anomalies = (msg,)
        out.append(SingularPoint(pt, eta, mult, "exact", anomalies=anomalies))
    return out


def _local_minima(values: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    grid = values.reshape(shape)
    is_min = np.ones(shape, dtype=bool)
    for axis in range(len(shape)):
        for shift in (1, -1):
            is_min &= grid <= np.roll(grid, shift, axis=axis)
    return np.flatnonzero(is_min.ravel())


def _snap_exact(det: MultiPoly, angles: np.ndarray, radius: float) -> UnimodularPoint | None:
    """Exact +-1, +-i point within ``radius`` of ``angles`` where the determinant vanishes exactly."""
    coords = []
    for a in angles:
        best = None
        for cand in EXACT_UNIT_CANDIDATES:
            dist = abs(cmath.phase(cmath.exp(1j * a) / complex(cand)))
            if dist <= radius:
                best = cand
        if best is None:
            return None
        coords.append(best)
    if det.eval(tuple(coords)):
        return None
    return UnimodularPoint(coords)


def _refine(det: MultiPoly, start: np.ndarray, rounds: int = 6) -> tuple[np.ndarray, float, float]:
    """Minimise log V around ``start`` by repeated exact re-centring; returns
    (angles, V at the final centre, size of the last correction)."""
    center = np.array(start, dtype=float)
    step = float("inf")
    value = float("inf")
    for _ in range(rounds):
        local = LocalV(det, UnimodularPoint.from_angles(center))
        obj = lambda x: float(np.log(local(x[None, :])[0] + 1e-300))  # noqa: E731
        res = minimize(obj, np.zeros_like(center), method="Nelder-Mead",
                       options={"xatol": 1e-16, "fatol": 1e-3, "maxiter": 200 * len(center),
                                "initial_simplex": _simplex(len(center), 1e-2 if step == float("inf") else max(step, 1e-12))})
        step = float(np.max(np.abs(res.x)))
        center = center + res.x
        value = float(np.exp(res.fun))
        if step < 1e-14:
            break
    return np.angle(np.exp(1j * center)), value, step


def _simplex(dim: int, size: float) -> np.ndarray:
    out = np.zeros((dim + 1, dim))
    for j in range(dim):
        out[j + 1, j] = size
    return out - size / (dim + 1)


def ray_directions(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    v = rng.normal(size=(count, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def ray_profile(local: LocalV, directions: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """``V`` along each ray; shape ``(len(directions), len(radii))``."""
    pts = directions[:, None, :] * radii[None, :, None]
    return local(pts.reshape(-1, directions.shape[1])).reshape(len(directions), len(radii))


def estimate_order(local: LocalV, rng: np.random.Generator, config: Config, r_min: float | None = None):
    """Per-ray log-log slopes of V: (mean slope, slopes, worst RMS residual)."""
    dim = local.dim
    count = config.ray_count or max(4, 2 * dim)
    directions = ray_directions(rng, count, dim)
    r_lo = max(config.ray_r_min, r_min or 0.0)
    radii = np.logspace(math.log10(r_lo), math.log10(config.ray_r_max), config.ray_points)
    V = ray_profile(local, directions, radii)
    if np.any(V <= 0):
        raise InfiniteSingularSetSuspected("V vanishes along a ray next to the singularity")
    logs = np.log(radii)
    slopes, resid = [], 0.0
    for row in np.log(V):
        coef = np.polyfit(logs, row, 1)
        slopes.append(float(coef[0]))
        resid = max(resid, float(np.sqrt(np.mean((np.polyval(coef, logs) - row) ** 2))))
    return float(np.mean(slopes)), tuple(slopes), resid


def _isolated(local: LocalV, rng: np.random.Generator, radius: float = 1e-3) -> bool:
    dirs = ray_directions(rng, 256, local.dim)
    ring = local(dirs * radius)
    return bool(ring.min() > 1e-10 * ring.max())


def _higher_dimensional(r: Rif, config: Config) -> list[SingularPoint]:
    sd = slice_det(r)
    det = sd.poly
    dim = r.d - 1
    rng = np.random.default_rng(config.seed)
    size = config.singular_grid
    while size**dim > config.singular_grid_max_points:
        size //= 2
    h = 2 * np.pi / size
    angles = torus_grid(dim, size)
    V = sd.V(np.exp(1j * angles))
    vmax = float(V.max())
    mins = _local_minima(V, (size,) * dim)
    mins = mins[V[mins] <= 1e-2 * vmax]
    mins = mins[np.argsort(V[mins], kind="stable")][: config.max_candidates]

    found: list[tuple[np.ndarray, UnimodularPoint, float]] = []
    merge = max(config.cluster_tol, 0.5 * h)
    for k in mins:
        start = angles[k]
        if any(_angular_distance(start, c) <= merge for c, _, _ in found):
            continue
        exact = _snap_exact(det, start, 2 * h)
        if exact is not None:
            center, pt, unc = exact.angles(), exact, 0.0
        else:
            center, value, step = _refine(det, start)
            if value > 1e-12 * vmax:
                continue
            pt, unc = UnimodularPoint.from_angles(center), max(step, 1e-15)
        if any(_angular_distance(center, c) <= merge for c, _, _ in found):
            continue
        found.append((center, pt, unc))
        if len(found) > config.max_singularities:
            raise InfiniteSingularSetSuspected(
                f"more than {config.max_singularities} zeros of V on the torus")

    out = []
    for center, pt, unc in sorted(found, key=lambda t: tuple(t[0])):
        local = LocalV(det, pt)
        if not _isolated(local, rng):
            raise InfiniteSingularSetSuspected(f"zero of V at {pt} does not look isolated")
        mean, slopes, resid = estimate_order(local, rng, config, r_min=1e3 * unc)
        spread = max(slopes) - min(slopes)
        isotropic = spread < config.isotropy_spread
        eta = _eta(r, pt.values(), config)
        order = int(round(mean))
        anomalies = () if isotropic else (f"anisotropic vanishing: ray slopes span {spread:.3g}",)
        out.append(SingularPoint(pt, eta, order, "numeric", order_estimate=mean,
                                 order_interval=(min(slopes), max(slopes)), ray_slopes=slopes,
                                 residual=resid, isotropic=isotropic, center_uncertainty=unc,
                                 anomalies=anomalies))
    return out


def _angular_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(np.angle(np.exp(1j * (np.asarray(a) - np.asarray(b)))))))


def find_singularities(r: Rif, config: Config = DEFAULT) -> list[SingularPoint]:
    """All torus singularities, sorted by angle."""
    if r.d == 2:
        return _two_variable(r, config)
    return _higher_dimensional(r, config)


class ScalingMismatch(RifError):
    pass


def contact_order_scaling(r: Rif, N: int, config: Config = DEFAULT) -> list[int]:
    """Contact orders of ``phi^N`` predicted as ``N`` times those of ``phi``,
    checked against the singularities found for the composite."""
    if r.d != 2:
        raise ValueError("contact-order scaling is exact only for d = 2")
    cr = compose(r, N, config)
    if not full_polydegree(cr):
        raise PolydegreeDrop(f"phi^{N} drops polydegree (cancelled factor {cr.cancelled_factor})")
    base = find_singularities(r, config)
    predicted = [N * s.order for s in base]
    found = find_singularities(cr.rif_N, config)
    if len(found) != len(base):
        raise ScalingMismatch(f"{len(base)} singularities for phi but {len(found)} for phi^{N}")
    for s, o in zip(base, predicted):
        match = [t for t in found if t.zhat.distance(s.zhat) <= 1e-8]
        if len(match) != 1 or match[0].order != o:
            raise ScalingMismatch(f"order at {s.zhat} is not {o}")
    return predicted

