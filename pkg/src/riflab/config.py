"""Tunable knobs shared by the analysis modules.

A :class:`Config` can be loaded from a ``key = value`` file (``#`` starts a
comment) and every field can be overridden from the command line.  The full
snapshot is embedded in each report.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, fields
from pathlib import Path

DEFAULT_SEED = 20240101


@dataclass(frozen=True)
class Config:
    seed: int = DEFAULT_SEED

    # stability / validation
    stability_grid: int = 64
    stability_refine: int = 4
    stability_interior_samples: int = 2000
    stability_tol: float = 1e-12

    # roots and slices
    root_tol: float = 1e-10
    root_tie_band: float = 1e-6
    constant_slice_tol: float = 1e-10
    eta_tol: float = 1e-8

    # torus zero search for d >= 3
    singular_grid: int = 128
    singular_grid_max_points: int = 2_500_000
    cluster_tol: float = 1e-6
    max_candidates: int = 64
    max_singularities: int = 64
    ray_count: int = 0  # 0 means 2*(d-1) rays, at least 4
    ray_r_min: float = 1e-5
    ray_r_max: float = 1e-2
    ray_points: int = 13
    isotropy_spread: float = 0.1

    # quadrature for the integrability criterion
    quad_samples: int = 10_000
    quad_annuli: int = 40
    quad_radial_nodes: int = 4
    quad_r_inner: float = 1e-6
    quad_eps: float = 0.1
    quad_fit_r_max: float = 1e-3
    bisect_iters: int = 12
    bisect_p_lo: float = 1.0
    bisect_p_hi: float = 4.0
    cutoff_halfwidth: float = 0.05

    # direct L^p norm
    lp_outer_grid: int = 64
    lp_inner_nodes: int = 32
    lp_inner_max_nodes: int = 4096
    lp_inner_rtol: float = 1e-9

    def replace(self, **changes) -> Config:
        return dataclasses.replace(self, **changes)

    def snapshot(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_mapping(cls, values: dict[str, str | int | float]) -> Config:
        kinds = {f.name: f.type for f in fields(cls)}
        parsed = {}
        for key, raw in values.items():
            key = key.strip().replace("-", "_")
            if key not in kinds:
                raise KeyError(f"unknown config key {key!r}")
            kind = kinds[key]
            if kind in ("int", int):
                parsed[key] = int(raw)
            elif kind in ("float", float):
                parsed[key] = float(raw)
            else:
                parsed[key] = raw
        return cls(**parsed)

    @classmethod
    def from_file(cls, path: str | Path) -> Config:
        values = {}
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
        return cls.from_mapping(values)


def seed_from_env(default: int = DEFAULT_SEED) -> int:
    raw = os.environ.get("RIF_LAB_SEED")
    return int(raw) if raw not in (None, "") else default


DEFAULT = Config()
