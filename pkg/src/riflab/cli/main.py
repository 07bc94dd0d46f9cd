"""``rif-lab``: command-line front end.

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 anomaly or
mismatch against reference values.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
import warnings
from fractions import Fraction
from pathlib import Path

import numpy as np

from .. import __version__
from ..compose import compose, full_polydegree
from ..config import Config, seed_from_env
from ..errors import (
    NonUnimodularEta,
    NotInner,
    OrderAnomaly,
    PolySyntaxError,
    RifError,
    RifWarning,
    UnknownExample,
    ValidationError,
    VerticalLine,
    InfiniteSingularSetSuspected,
)
from ..integrab import criterion_integral, integrability_report
from ..poly import MultiPoly, squarefree_decompose
from ..rif import Rif, make_rif, slice_det
from ..singular import LocalV, ScalingMismatch, ray_directions, find_singularities, ray_profile
from .parser import parse_poly
from .registry import example, exact_unit, is_example_name

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_ANOMALY = 0, 1, 2, 3


class UsageError(Exception):
    pass


# --- input ------------------------------------------------------------------------

def _load_config(args) -> Config:
    values = {}
    if args.config:
        cfg = Config.from_file(args.config)
        values = cfg.snapshot()
        explicit_seed = "seed" in _config_keys(args.config)
    else:
        explicit_seed = False
    for item in args.set or ():
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        values[k.strip()] = v.strip()
        explicit_seed |= k.strip() == "seed"
    if args.seed is not None:
        values["seed"] = args.seed
    elif not explicit_seed:
        values["seed"] = seed_from_env()
    try:
        return Config.from_mapping(values)
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"bad configuration: {exc}") from exc


def _config_keys(path) -> set[str]:
    keys = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0]
        if "=" in line:
            keys.add(line.split("=", 1)[0].strip().replace("-", "_"))
    return keys


def _resolve(args, config: Config):
    """(Rif or None, input echo, example or None); validation errors propagate."""
    target = args.target
    if is_example_name(target):
        ex = example(target, config)
        return ex.rif, _echo(target, "example", ex.rif), ex
    if re.fullmatch(r"[A-Za-z_][\w:^]*", target.strip()) and not re.fullmatch(r"z\d+|i", target.strip()):
        example(target, config)  # raises UnknownExample with the list of names
    p = parse_poly(target, args.nvars)
    unit = exact_unit(args.unit) if args.unit else 1
    polydegree = tuple(int(x) for x in args.polydegree.split(",")) if args.polydegree else None
    echo = {"target": target, "kind": "polynomial", "denominator": p.to_text(), "nvars": p.nvars,
            "unit": str(unit) if args.unit else "1"}
    return make_rif(p, unit=unit, polydegree=polydegree, config=config), echo, None


def _echo(target: str, kind: str, r: Rif) -> dict:
    return {"target": target, "kind": kind, "denominator": r.p.to_text(), "numerator": r.ptilde.to_text(),
            "nvars": r.d, "unit": str(r.unit), "polydegree": list(r.polydegree)}


# --- report sections ------------------------------------------------------------

def _validation(r: Rif) -> dict:
    return {"valid": True, "stability": r.stability.as_dict() if r.stability else None, "atoral": True,
            "polydegree": list(r.polydegree)}


def _slice_det_section(r: Rif) -> dict:
    sd = slice_det(r)
    out = {"determinant": sd.poly.to_text(), "V_polynomial": sd.vpoly.to_text(), "unit": str(sd.unit)}
    if r.d == 2 and not sd.poly.is_zero():
        out["squarefree_factors"] = [
            {"factor": f.to_text(), "multiplicity": k} for f, k in squarefree_decompose(sd.poly)]
    return out


def _singularities_section(sings) -> list:
    return [s.as_dict() for s in sings]


def _composition_section(cr) -> dict:
    return {
        "N": cr.N,
        "denominator": cr.rif_N.p.to_text(),
        "numerator": cr.rif_N.ptilde.to_text(),
        "unit": str(cr.rif_N.unit),
        "polydegree": list(cr.rif_N.polydegree),
        "cancelled_factor": cr.cancelled_factor.to_text(),
        "polydegree_drop": cr.polydegree_drop,
        "full_polydegree": full_polydegree(cr),
    }


def _base_report(command: str, config: Config, echo: dict | None) -> dict:
    return {"tool": {"name": "rif-lab", "version": __version__}, "command": command,
            "input": echo or {}, "seed": config.seed, "config": config.snapshot()}


def _error_info(exc: Exception) -> dict:
    info = {"type": type(exc).__name__, "message": str(exc)}
    witness = getattr(exc, "witness", None)
    if witness is not None:
        info["witness"] = [[complex(w).real, complex(w).imag] for w in witness]
    factor = getattr(exc, "factor", None)
    if isinstance(factor, MultiPoly):
        info["factor"] = factor.to_text()
    return info


# --- commands ---------------------------------------------------------------------

def cmd_validate(r, args, config, report):
    report["validation"] = _validation(r)
    return EXIT_OK


def cmd_slice_det(r, args, config, report):
    report["validation"] = _validation(r)
    sd = slice_det(r)
    report["slice_det"] = _slice_det_section(r)
    rng = np.random.default_rng(config.seed)
    pts = np.exp(2j * np.pi * rng.random((1000, r.d - 1)))
    resid = float(np.max(sd.identity_residual(pts)))
    report["slice_det"]["identity_max_residual"] = resid
    return EXIT_OK


def cmd_singularities(r, args, config, report):
    report["validation"] = _validation(r)
    if r.d == 2:
        report["slice_det"] = _slice_det_section(r)
    sings = find_singularities(r, config)
    report["singularities"] = _singularities_section(sings)
    return EXIT_ANOMALY if any(s.anomalies for s in sings if s.kind == "exact") else EXIT_OK


def cmd_compose(r, args, config, report):
    report["validation"] = _validation(r)
    cr = compose(r, args.n, config)
    report["composition"] = _composition_section(cr)
    return EXIT_OK


def cmd_cutoff(r, args, config, report):
    report["validation"] = _validation(r)
    sings = find_singularities(r, config)
    report["singularities"] = _singularities_section(sings)
    rep = integrability_report(r, config, numeric=args.numeric, singularities=sings)
    report["cutoffs"] = rep.as_dict() if rep else None
    if rep and args.numeric:
        for e in rep.per_singularity:
            if e.theoretical is not None and e.numeric is not None and not e.numeric.contains(e.theoretical):
                report.setdefault("anomalies", []).append(
                    f"numeric cutoff {e.numeric} disagrees with {e.theoretical} at {e.point.zhat}")
    return EXIT_ANOMALY if report.get("anomalies") else EXIT_OK


def _check(checks: list, name: str, expected, actual, ok: bool) -> None:
    checks.append({"check": name, "expected": expected, "actual": actual, "ok": bool(ok)})


def _equal_up_to_unit(a: MultiPoly, b: MultiPoly) -> bool:
    if a.nvars != b.nvars or len(a) != len(b) or b.is_zero():
        return a == b
    idx, c = next(iter(b.items()))
    u = a.coeff(idx) / c
    return u.is_unimodular() and a == b.scale(u)


def cmd_reproduce(r, args, config, report):
    ex = report.pop("_example", None)
    if ex is None:
        raise UsageError("reproduce needs a registry example name")
    exp = ex.expected
    checks: list = []
    report["validation"] = _validation(r)
    d = r.d
    if exp.denominator:
        want = parse_poly(exp.denominator, d)
        _check(checks, "denominator", want.to_text(), r.p.to_text(), _equal_up_to_unit(r.p, want))
    if exp.numerator:
        want = parse_poly(exp.numerator, d)
        _check(checks, "numerator", want.to_text(), r.ptilde.to_text(), _equal_up_to_unit(r.ptilde, want))
    if d == 2:
        report["slice_det"] = _slice_det_section(r)
    if exp.slice_det:
        want = parse_poly(exp.slice_det, d - 1)
        got = slice_det(r).poly
        _check(checks, "slice_det", want.to_text(), got.to_text(), got == want)
    sings = find_singularities(r, config)
    report["singularities"] = _singularities_section(sings)
    if exp.singularities:
        want = [(list(s.zhat), s.eta, s.order) for s in exp.singularities]
        got = [(s.zhat.describe(), s.as_dict()["eta"], s.order) for s in sings]
        ok = len(got) == len(want) and all(
            _close_point(s, w) and s.order == w[2] for s, w in zip(sings, want))
        _check(checks, "singularities", want, [[g[0], g[1], g[2]] for g in got], ok)
    rep = integrability_report(r, config, numeric=args.numeric, singularities=sings)
    report["cutoffs"] = rep.as_dict() if rep else None
    if exp.cutoffs and rep:
        got = [e.theoretical for e in rep.per_singularity]
        _check(checks, "theoretical_cutoffs", [str(c) for c in exp.cutoffs],
               [str(c) for c in got], tuple(got) == tuple(exp.cutoffs))
        if args.numeric:
            ok = all(e.numeric is not None and e.numeric.contains(c, 0.05)
                     for e, c in zip(rep.per_singularity, exp.cutoffs))
            _check(checks, "numeric_cutoffs", [str(c) for c in exp.cutoffs],
                   [str(e.numeric) for e in rep.per_singularity], ok)
    if exp.aggregate and rep:
        _check(checks, "aggregate", [str(x) for x in exp.aggregate],
               [str(rep.aggregate_min), str(rep.aggregate_max)],
               (rep.aggregate_min, rep.aggregate_max) == exp.aggregate)
    comps = []
    for N, (den, factor, deg) in sorted(exp.compositions.items()):
        cr = compose(r, N, config)
        comps.append(_composition_section(cr))
        if den:
            want = parse_poly(den, d)
            _check(checks, f"compose_{N}_denominator", want.to_text(), cr.rif_N.p.to_text(),
                   _equal_up_to_unit(cr.rif_N.p, want))
        if factor:
            want = parse_poly(factor, d - 1)
            got = cr.cancelled_factor
            _check(checks, f"compose_{N}_cancelled_factor", want.to_text(), got.to_text(),
                   _equal_up_to_unit(got, want))
        if deg:
            got_deg = tuple(max(a, b) for a, b in zip(cr.rif_N.p.polydegree, cr.rif_N.ptilde.polydegree))
            _check(checks, f"compose_{N}_polydegree", list(deg), list(got_deg), got_deg == tuple(deg))
    if comps:
        report["compositions"] = comps
    report["checks"] = checks
    report["reproduced"] = all(c["ok"] for c in checks)
    return EXIT_OK if report["reproduced"] else EXIT_ANOMALY


def _close_point(s, want) -> bool:
    zhat, eta, _ = want
    target = [complex(parse_poly(z, 0).constant_term()) for z in zhat] + [complex(parse_poly(eta, 0).constant_term())]
    got = list(s.zhat.to_complex()) + [complex(s.eta)]
    return len(got) == len(target) and max(abs(a - b) for a, b in zip(got, target)) <= 1e-8


def cmd_plot_data(r, args, config, report):
    sings = find_singularities(r, config)
    if not sings:
        raise UsageError("no torus singularities to sample around")
    if not 0 <= args.singularity < len(sings):
        raise UsageError(f"--singularity must be in 0..{len(sings) - 1}")
    s = sings[args.singularity]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if args.kind == "rays":
        local = LocalV(slice_det(r).poly, s.zhat)
        rng = np.random.default_rng(config.seed)
        count = config.ray_count or max(4, 2 * (r.d - 1))
        dirs = ray_directions(rng, count, r.d - 1)
        radii = np.logspace(np.log10(config.ray_r_min), np.log10(config.ray_r_max), config.ray_points)
        V = ray_profile(local, dirs, radii)
        w.writerow(["ray_id", "r", "V"])
        for k in range(len(dirs)):
            for rad, v in zip(radii, V[k]):
                w.writerow([k, repr(float(rad)), repr(float(v))])
    else:
        ps = [float(x) for x in args.p.split(",")]
        epss = [float(x) for x in args.eps.split(",")]
        w.writerow(["eps", "p", "integral", "tail_exponent"])
        for eps in epss:
            for p in ps:
                res = criterion_integral(r, s, p, eps, config, singularities=sings)
                w.writerow([repr(eps), repr(p), repr(res.value), repr(res.tail_exponent)])
    report["_csv"] = buf.getvalue()
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "slice-det": cmd_slice_det,
    "singularities": cmd_singularities,
    "compose": cmd_compose,
    "cutoff": cmd_cutoff,
    "reproduce": cmd_reproduce,
    "plot-data": cmd_plot_data,
}


# --- output -------------------------------------------------------------------------

def _json_default(o):
    if isinstance(o, Fraction):
        return str(o)
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"cannot serialise {type(o).__name__}")


def render_pretty(report: dict) -> str:
    lines = [f"rif-lab {report['tool']['version']}  {report['command']}  seed={report['seed']}"]
    inp = report.get("input") or {}
    if inp:
        lines.append(f"  input        {inp.get('target')}")
        if "denominator" in inp:
            lines.append(f"  denominator  {inp['denominator']}")
        if "numerator" in inp:
            lines.append(f"  numerator    {inp['numerator']}")
    if "error" in report:
        err = report["error"]
        lines.append(f"  ERROR        {err['type']}: {err['message']}")
        if "witness" in err:
            lines.append(f"  witness      {err['witness']}")
    if "validation" in report:
        v = report["validation"]
        lines.append(f"  valid        {v['valid']}  polydegree={v.get('polydegree')}")
    if "slice_det" in report:
        lines.append(f"  slice det    {report['slice_det']['determinant']}")
    for s in report.get("singularities", []):
        lines.append(f"  singularity  zhat={s['zhat']} eta={s['eta']} order={s['order']} ({s['kind']})")
    cut = report.get("cutoffs")
    if cut:
        for e in cut["per_singularity"]:
            theo = e["theoretical_cutoff"]
            num = e["numeric_cutoff"]
            t = theo["exact"] if theo else "-"
            n = f"{num['value']:.4f} ± {num['halfwidth']:.4f}" if num else "-"
            lines.append(f"  cutoff       at {e['singularity']['zhat']}: theoretical {t}, numeric {n}")
        lines.append(f"  aggregate    min {_fmt(cut['aggregate_min'])}, max {_fmt(cut['aggregate_max'])}")
    for c in ([report["composition"]] if "composition" in report else []) + report.get("compositions", []):
        lines.append(f"  compose N={c['N']}  denominator {c['denominator']}")
        lines.append(f"               cancelled {c['cancelled_factor']}  full polydegree {c['full_polydegree']}")
    for c in report.get("checks", []):
        lines.append(f"  {'PASS' if c['ok'] else 'FAIL'}  {c['check']}")
    for a in report.get("anomalies", []):
        lines.append(f"  ANOMALY      {a}")
    for wmsg in report.get("warnings", []):
        lines.append(f"  warning      {wmsg}")
    return "\n".join(lines) + "\n"


def _fmt(x):
    return x["exact"] if isinstance(x, dict) else f"{x:.4f}"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rif-lab", description="Analyse (n,1) rational inner functions on the polydisk.")
    ap.add_argument("--version", action="version", version=f"rif-lab {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("target", help="registry example name (optionally name^N) or denominator polynomial text")
    common.add_argument("--nvars", type=int, help="number of variables for polynomial input")
    common.add_argument("--unit", help="unimodular constant multiplying the reflected numerator (e.g. -1, i)")
    common.add_argument("--polydegree", help="declared polydegree, comma separated")
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one configuration value")
    common.add_argument("--seed", type=int, help="RNG seed (falls back to RIF_LAB_SEED)")
    common.add_argument("--pretty", action="store_true", help="human-readable table instead of JSON")
    common.add_argument("--output", "-o", help="write the report here instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="stability and atorality checks")
    sub.add_parser("slice-det", parents=[common], help="slice determinant and the torus identity")
    sub.add_parser("singularities", parents=[common], help="torus singularities with orders")
    c = sub.add_parser("compose", parents=[common], help="N-th composition power in the last variable")
    c.add_argument("--n", type=int, required=True)
    c = sub.add_parser("cutoff", parents=[common], help="local derivative integrability cutoffs")
    c.add_argument("--numeric", action="store_true", help="also estimate cutoffs by quadrature")
    c = sub.add_parser("reproduce", parents=[common], help="full pipeline for a registry example, diffed against references")
    c.add_argument("--no-numeric", dest="numeric", action="store_false", help="skip quadrature cutoffs")
    c = sub.add_parser("plot-data", parents=[common], help="CSV of V along rays or of the criterion integral")
    c.add_argument("--kind", choices=["rays", "criterion"], default="rays")
    c.add_argument("--singularity", type=int, default=0, help="index into the sorted singularity list")
    c.add_argument("--p", default="1.1,1.25,1.5,1.75,2.0", help="comma separated exponents")
    c.add_argument("--eps", default="0.1,0.05,0.02", help="comma separated ball radii")
    return ap


def run_command(argv=None) -> tuple[int, dict]:
    """Run one command; returns (exit code, report).  The report is empty on usage errors."""
    code, report, _ = _run(argv)
    return code, report


def _run(argv):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0), {}, None
    code, report = _dispatch(args)
    if report:
        report["exit_code"] = code
    return code, report, args


def _dispatch(args) -> tuple[int, dict]:
    if args.command == "compose" and args.n < 1:
        print("rif-lab: --n must be at least 1", file=sys.stderr)
        return EXIT_USAGE, {}
    try:
        config = _load_config(args)
    except (UsageError, OSError) as exc:
        print(f"rif-lab: {exc}", file=sys.stderr)
        return EXIT_USAGE, {}
    report = _base_report(args.command, config, None)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RifWarning)
        try:
            try:
                r, echo, ex = _resolve(args, config)
            except ValidationError as exc:
                report["input"] = {"target": args.target}
                report["validation"] = {"valid": False}
                report["error"] = _error_info(exc)
                return EXIT_INVALID, report
            except ValueError as exc:
                if isinstance(exc, (PolySyntaxError, UnknownExample)):
                    raise
                report["input"] = {"target": args.target}
                report["validation"] = {"valid": False}
                report["error"] = _error_info(exc)
                return EXIT_INVALID, report
            report["input"] = _echo(args.target, echo["kind"], r) | {"target": args.target}
            if args.command == "reproduce":
                report["_example"] = ex
            code = COMMANDS[args.command](r, args, config, report)
        except (PolySyntaxError, UnknownExample, UsageError) as exc:
            print(f"rif-lab: {exc}", file=sys.stderr)
            return EXIT_USAGE, {}
        except (NonUnimodularEta, VerticalLine, InfiniteSingularSetSuspected, ScalingMismatch, NotInner) as exc:
            report["error"] = _error_info(exc)
            code = EXIT_ANOMALY
        except ValidationError as exc:
            report["error"] = _error_info(exc)
            code = EXIT_INVALID
        except RifError as exc:
            report["error"] = _error_info(exc)
            code = EXIT_ANOMALY
        finally:
            report.pop("_example", None)
    msgs = [f"{w.category.__name__}: {w.message}" for w in caught if issubclass(w.category, RifWarning)]
    if msgs:
        report["warnings"] = msgs
    if any(issubclass(w.category, OrderAnomaly) for w in caught) and code == EXIT_OK:
        code = EXIT_ANOMALY
    return code, report


def main(argv=None) -> int:
    code, report, args = _run(argv)
    if not report:
        return code
    csv_text = report.pop("_csv", None)
    if csv_text is not None and code == EXIT_OK:
        text = csv_text
    elif args.pretty:
        text = render_pretty(report)
    else:
        text = json.dumps(report, indent=2, default=_json_default) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
