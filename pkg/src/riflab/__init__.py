"""Rational inner functions of polydegree (n,1) on the polydisk: validation,
slice matrices, composition powers, torus singularities and derivative
integrability cutoffs."""

from __future__ import annotations

__version__ = "0.1.0"

from .compose import CompositionResult, compose, full_polydegree
from .config import Config
from .integrab import (
    CutoffEstimate,
    IntegrabilityReport,
    aggregate,
    criterion_integral,
    cutoff_from_order,
    direct_lp_norm,
    estimate_cutoff,
    integrability_report,
)
from .poly import GaussianRational, MultiPoly, UnimodularPoint, reflect
from .rif import Rif, decompose, make_rif, slice_det, slice_map, slice_matrix, zd_derivative, zd_zero
from .singular import SingularPoint, contact_order_scaling, find_singularities

__all__ = [
    "__version__", "Config", "GaussianRational", "MultiPoly", "UnimodularPoint", "reflect",
    "Rif", "make_rif", "decompose", "slice_matrix", "slice_det", "slice_map", "zd_zero", "zd_derivative",
    "compose", "CompositionResult", "full_polydegree",
    "SingularPoint", "find_singularities", "contact_order_scaling",
    "cutoff_from_order", "criterion_integral", "estimate_cutoff", "direct_lp_norm", "aggregate",
    "integrability_report", "IntegrabilityReport", "CutoffEstimate",
]
