"""Builtin example RIFs and the values a full analysis is expected to reproduce.

Names: ``bps_phi_plus``, ``bps_phi_minus``, ``bps_psi``, ``pascoe_74``,
``phi_d:<d>`` and ``p_32``.  Appending ``^N`` to any name (``phi_d:3^2``)
selects the N-th composition power.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from ..compose import compose
from ..config import DEFAULT, Config
from ..errors import UnknownExample
from ..poly import GaussianRational, MultiPoly
from ..rif import Rif, make_rif
from .parser import parse_poly


@dataclass(frozen=True)
class ExpectedSingularity:
    zhat: tuple[str, ...]
    eta: str
    order: int


@dataclass(frozen=True)
class Expected:
    """Reference values; ``None`` fields are not checked."""

    denominator: str | None = None
    numerator: str | None = None
    slice_det: str | None = None
    singularities: tuple[ExpectedSingularity, ...] = ()
    cutoffs: tuple[Fraction, ...] = ()
    aggregate: tuple[Fraction, Fraction] | None = None
    # N -> (denominator or None, cancelled factor or None, polydegree or None)
    compositions: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Example:
    name: str
    description: str
    rif: Rif
    expected: Expected


PHI_D_MAX = 6


def _plus(config: Config) -> Rif:
    return make_rif(parse_poly("2 - z1 - z2", 2), config=config)


def _phi_d(d: int, config: Config) -> Rif:
    if not 2 <= d <= PHI_D_MAX:
        raise UnknownExample(f"phi_d:{d} is outside the supported range 2..{PHI_D_MAX}", available())
    text = f"{d} - " + " - ".join(f"z{k}" for k in range(1, d + 1))
    return make_rif(parse_poly(text, d), config=config)


def _phi_d_expected(d: int) -> Expected:
    comps = {}
    if d == 3:
        comps[2] = (P32_TEXT, None, (2, 2, 1))
    return Expected(
        denominator=f"{d} - " + " - ".join(f"z{k}" for k in range(1, d + 1)),
        singularities=(ExpectedSingularity(("1",) * (d - 1), "1", 2),),
        cutoffs=(Fraction(d + 1, 2),),
        aggregate=(Fraction(d + 1, 2), Fraction(d + 1, 2)),
        compositions=comps,
    )


P32_TEXT = "9 - 6z1 - 6z2 - 3z3 + z1^2 + z2^2 + 3z1z2 + 2z1z3 + 2z2z3 - 3z1z2z3"
PSI_DEN = "4 - 3z1 - z2 - z1z2 + z1^2"
PSI_NUM = "4z1^2z2 - z1^2 - 3z1z2 - z1 + z2"


def _build(name: str, config: Config) -> Example:
    if name == "bps_phi_plus":
        return Example(name, "(2 z1 z2 - z1 - z2) / (2 - z1 - z2)", _plus(config), Expected(
            denominator="2 - z1 - z2", numerator="2z1z2 - z1 - z2",
            singularities=(ExpectedSingularity(("1",), "1", 2),),
            cutoffs=(Fraction(3, 2),), aggregate=(Fraction(3, 2), Fraction(3, 2)),
            compositions={2: (PSI_DEN, None, (2, 1)), 3: (None, None, (3, 1))},
        ))
    if name == "bps_phi_minus":
        rif = make_rif(parse_poly("2 - z1 - z2", 2), unit=-1, config=config)
        return Example(name, "-(2 z1 z2 - z1 - z2) / (2 - z1 - z2)", rif, Expected(
            denominator="2 - z1 - z2", numerator="-(2z1z2 - z1 - z2)",
            singularities=(ExpectedSingularity(("1",), "1", 2),),
            cutoffs=(Fraction(3, 2),), aggregate=(Fraction(3, 2), Fraction(3, 2)),
            compositions={2: (None, "z1 - 1", (1, 1))},
        ))
    if name == "bps_psi":
        rif = compose(_plus(config), 2, config).rif_N
        return Example(name, "second composition power of bps_phi_plus", rif, Expected(
            denominator=PSI_DEN, numerator=PSI_NUM,
            singularities=(ExpectedSingularity(("1",), "1", 4),),
            cutoffs=(Fraction(5, 4),), aggregate=(Fraction(5, 4), Fraction(5, 4)),
        ))
    if name == "pascoe_74":
        p = parse_poly("4 + z2 - z1z2 + 3z1^2z2 + z1^3z2", 2)
        return Example(name, "contact order 4 at (-1,-1) plus an extra singularity", make_rif(p, config=config),
                       Expected(
                           denominator="4 + z2 - z1z2 + 3z1^2z2 + z1^3z2",
                           numerator="4z1^3z2 + z1^3 - z1^2 + 3z1 + 1",
                           slice_det="-(z1 - 1)^2 (z1 + 1)^4",
                           singularities=(ExpectedSingularity(("1",), "-1", 2),
                                          ExpectedSingularity(("-1",), "-1", 4)),
                           cutoffs=(Fraction(3, 2), Fraction(5, 4)),
                           aggregate=(Fraction(5, 4), Fraction(3, 2)),
                           compositions={2: (None, "z1 + 1", None)},
                       ))
    if name == "p_32":
        rif = make_rif(parse_poly(P32_TEXT, 3), config=config)
        return Example(name, "second composition power of phi_d:3", rif, Expected(
            denominator=P32_TEXT,
            singularities=(ExpectedSingularity(("1", "1"), "1", 4),),
            cutoffs=(Fraction(3, 2),), aggregate=(Fraction(3, 2), Fraction(3, 2)),
        ))
    m = re.fullmatch(r"phi_d:(\d+)", name)
    if m:
        d = int(m.group(1))
        return Example(name, f"phi_d family member with d = {d}", _phi_d(d, config), _phi_d_expected(d))
    raise UnknownExample(f"unknown example {name!r}; available: {', '.join(available())}", available())


def available() -> list[str]:
    return ["bps_phi_plus", "bps_phi_minus", "bps_psi", "pascoe_74", "p_32"] + [
        f"phi_d:{d}" for d in range(2, PHI_D_MAX + 1)]


_POWER = re.compile(r"(?P<base>.+?)\^(?P<n>[1-9]\d*)")


def _scaled_expected(base: Expected, N: int) -> Expected:
    """Orders scale by N and cutoffs follow, assuming no polydegree drop."""
    sings = tuple(ExpectedSingularity(s.zhat, s.eta, N * s.order) for s in base.singularities)
    cutoffs = tuple(1 + (c - 1) / N for c in base.cutoffs)
    agg = (min(cutoffs), max(cutoffs)) if cutoffs else None
    den = base.compositions.get(N, (None,))[0]
    return Expected(denominator=den, singularities=sings, cutoffs=cutoffs, aggregate=agg)


@lru_cache(maxsize=64)
def _cached(name: str, config: Config) -> Example:
    m = _POWER.fullmatch(name)
    if m:
        base = _cached(m.group("base"), config)
        N = int(m.group("n"))
        if N == 1:
            return base
        cr = compose(base.rif, N, config)
        exp = Expected() if cr.polydegree_drop else _scaled_expected(base.expected, N)
        return Example(name, f"composition power {N} of {base.name}", cr.rif_N, exp)
    return _build(name, config)


def registry(name: str, config: Config = DEFAULT) -> Rif:
    """The RIF registered as ``name``."""
    return example(name, config).rif


def example(name: str, config: Config = DEFAULT) -> Example:
    """Registered example with its expected values."""
    return _cached(name.strip(), config)


def is_example_name(text: str) -> bool:
    base = text.strip().split("^", 1)[0]
    return base in available() or bool(re.fullmatch(r"phi_d:\d+", base))


def exact_unit(text: str) -> GaussianRational:
    poly = parse_poly(text, 0) if text else MultiPoly.constant(0, 1)
    return poly.constant_term()
