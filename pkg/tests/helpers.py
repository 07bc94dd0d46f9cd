"""Shared generators for the test suite."""

from __future__ import annotations

import time
from contextlib import contextmanager
from fractions import Fraction
from itertools import product

import numpy as np
import sympy

from riflab.poly import GaussianRational, MultiPoly
from riflab.rif import make_rif, rotate_rif
from riflab.cli.registry import registry

ACCEPTANCE_LINES: list[str] = []


@contextmanager
def criterion(number: int, title: str, budget: float):
    """Time a block, enforce its runtime budget and record one PASS/FAIL line."""
    notes: list[str] = []
    start = time.perf_counter()
    try:
        yield notes
        elapsed = time.perf_counter() - start
        assert elapsed < budget, f"runtime {elapsed:.2f} s exceeds {budget} s"
    except BaseException as exc:
        elapsed = time.perf_counter() - start
        line = f"criterion {number} FAIL  {title} ({elapsed:.2f} s): {exc}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        raise
    extra = f"; {'; '.join(notes)}" if notes else ""
    line = f"criterion {number} PASS  {title} ({elapsed:.2f} s < {budget} s{extra})"
    ACCEPTANCE_LINES.append(line)
    print(line)


EXAMPLES = ["bps_phi_plus", "bps_phi_minus", "bps_psi", "pascoe_74", "phi_d:2", "phi_d:3", "phi_d:4", "p_32"]

# exact points of modulus one from Pythagorean triples
PYTHAGOREAN = [GaussianRational(Fraction(a, c), Fraction(b, c))
               for a, b, c in [(3, 4, 5), (5, 12, 13), (8, 15, 17), (-7, 24, 25), (20, -21, 29), (-12, -35, 37)]]


def _small_gaussian(rng: np.random.Generator) -> GaussianRational:
    return GaussianRational(Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 4))),
                            Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 4))))


def random_strictly_stable(rng: np.random.Generator, d: int, n: tuple[int, ...]) -> MultiPoly:
    """``p = p1 + z_d p2`` with ``p1 = K + q`` and ``K`` above the coefficient mass of ``q`` and ``p2``.

    Then ``|p2| < |p1|`` on the closed polydisk, so ``p`` has no zeros there.
    """
    dim = d - 1
    q, p2 = {}, {}
    for idx in product(*(range(k + 1) for k in n)):
        if rng.random() < 0.6 and any(idx):
            q[idx] = _small_gaussian(rng)
        if rng.random() < 0.6:
            p2[idx] = _small_gaussian(rng)
    top = tuple(n)
    p2[top] = p2.get(top) or GaussianRational(1)  # pins the polydegree
    p2[(0,) * dim] = p2.get((0,) * dim) or GaussianRational(1)
    mass = sum(abs(complex(c)) for c in q.values()) + sum(abs(complex(c)) for c in p2.values())
    K = Fraction(int(mass) + 1 + int(rng.integers(0, 3)))
    q[(0,) * dim] = q.get((0,) * dim, GaussianRational(0)) + K
    terms = {idx + (0,): c for idx, c in q.items()}
    terms.update({idx + (1,): c for idx, c in p2.items()})
    return MultiPoly(d, terms)


def random_rifs(count: int, seed: int = 7):
    """Mix of strictly stable random RIFs and exactly rotated registry examples, d in {2, 3}, n <= (3, 3)."""
    rng = np.random.default_rng(seed)
    out = []
    rotatable = ["bps_phi_plus", "bps_phi_minus", "bps_psi", "pascoe_74", "phi_d:3", "p_32"]
    k = j = 0
    while len(out) < count:
        if k % 5 < 3:
            d = int(rng.integers(2, 4))
            n = tuple(int(x) for x in rng.integers(1, 4, size=d - 1))
            p = random_strictly_stable(rng, d, n)
            unit = PYTHAGOREAN[int(rng.integers(len(PYTHAGOREAN)))]
            out.append((f"random d={d} n={n}", make_rif(p, unit=unit)))
        else:
            name = rotatable[j % len(rotatable)]
            j += 1
            r = registry(name)
            lams = [PYTHAGOREAN[int(rng.integers(len(PYTHAGOREAN)))] for _ in range(r.d)]
            out.append((f"rotated {name}", rotate_rif(r, lams)))
        k += 1
    return out


def to_sympy(p: MultiPoly, gens):
    expr = 0
    for idx, c in p.items():
        term = sympy.Rational(c.re.numerator, c.re.denominator) + sympy.I * sympy.Rational(
            c.im.numerator, c.im.denominator)
        for g, e in zip(gens, idx):
            term *= g**e
        expr += term
    return sympy.expand(expr)


def interior_points(rng: np.random.Generator, count: int, d: int, radius: float = 0.95) -> np.ndarray:
    r = radius * np.sqrt(rng.random((count, d)))
    return r * np.exp(2j * np.pi * rng.random((count, d)))
