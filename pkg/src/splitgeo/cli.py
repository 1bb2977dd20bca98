"""Command-line driver: ``splitgeo CONFIG`` runs one command and writes its artifacts.

Exit codes: 0 success, 1 configuration error, 2 domain or verification failure.
Every run writes a JSON report; ``integrate`` also writes a trajectory CSV.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np

from . import __version__
from . import closed_form as cf
from . import first_integrals as fi
from . import geodesic, geometry, maxwell
from .config import RunConfig, parse_config
from .errors import ConfigError, SplitGeoError, StepUnderflow
from .fields import (
    Block,
    make_builtin_liouville,
    make_constant,
    make_linear,
    make_tanh_cubic,
)

ENV_OUTPUT_DIR = "SPLITGEO_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "splitgeo_out"
CSV_HEADER = ["s", "x0", "x1", "x2", "x3", "p0", "p1", "p2", "p3", "H"]

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY = 0, 1, 2


class VerificationFailed(Exception):
    """A check ran to completion but did not pass."""


# --------------------------------------------------------------------------- helpers


def jsonable(v):
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return jsonable(v.tolist())
    if isinstance(v, (complex, np.complexfloating)):
        return {"re": float(v.real), "im": float(v.imag)}
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if hasattr(v, "value") and isinstance(getattr(v, "value"), str):
        return v.value
    return v


def _potential(cfg: RunConfig, name: str):
    block = Block.HYPERBOLIC if name == "alpha" else Block.ELLIPTIC
    p = f"metric.{name}."
    kind = cfg[p + "kind"]
    if kind == "constant":
        return make_constant(cfg[p + "value"], block)
    if kind == "linear":
        return make_linear(cfg[p + "A"], cfg[p + "B"], cfg[p + "C"], block)
    if kind == "tanh-cubic":
        args = [cfg[p + c] for c in "ABCDEF"]
        projection = cfg.get(p + "projection", "re")
        return make_tanh_cubic(*args, block, projection=projection)
    return make_builtin_liouville(block, cfg["metric.lambda"])


def _metric(cfg: RunConfig) -> geometry.SplitMetric:
    lam = cfg["metric.lambda"] if "builtin" in (cfg["metric.alpha.kind"], cfg["metric.beta.kind"]) else 0.0
    return geometry.SplitMetric(_potential(cfg, "alpha"), _potential(cfg, "beta"), lam)


def _real(v) -> float:
    v = complex(v)
    return v.real if v.imag == 0 else v


def write_csv(path: Path, path_obj: geodesic.GeodesicPath) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for s, x, p, H in zip(path_obj.s, path_obj.x, path_obj.p, path_obj.H):
            w.writerow(["%.17g" % v for v in (s, *x, *p, H)])


def read_csv(path) -> Tuple[list, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


# --------------------------------------------------------------------------- commands


def cmd_metric_info(cfg: RunConfig, out: Path):
    m = _metric(cfg)
    pts = []
    for pt in cfg["points"]:
        m.alpha.check_domain(pt[0], pt[1])
        m.beta.check_domain(pt[2], pt[3])
        g, _ = geometry.metric_components(m, pt)
        RH, RE = geometry.block_scalar_curvatures(m, pt)
        pts.append(
            {
                "point": list(pt),
                "g_diagonal": [_real(v) for v in np.diag(g)],
                "kretschmann": _real(geometry.kretschmann(m, pt)),
                "R_hyperbolic": _real(RH),
                "R_elliptic": _real(RE),
            }
        )
    results = {"lambda": m.lam, "points": pts}
    if m.lam:
        results["kretschmann_expected"] = 8 * m.lam**2
        results["block_curvature_expected"] = 2 * m.lam
    return results, {}, []


def cmd_integrate(cfg: RunConfig, out: Path):
    m = _metric(cfg)
    s0, s1 = cfg["span"]
    init = geodesic.PhaseState.from_velocity(m, s0, cfg["initial.x"], cfg["initial.v"])
    n = cfg["samples"]
    s_eval = np.linspace(s0, s1, n)[1:] if n >= 2 else None
    csv_path = out / cfg["output.csv"]
    try:
        path = geodesic.integrate(m, init, (s0, s1), (cfg["tol.abs"], cfg["tol.rel"]), s_eval)
    except StepUnderflow as exc:
        write_csv(csv_path, exc.path)
        raise
    write_csv(csv_path, path)
    d = path.diagnostics
    H0, cls = geodesic.hamiltonian(m, init)
    results = {
        "termination": d.termination.value,
        "exit_s": d.exit_s,
        "exit_coordinate": d.exit_coordinate,
        "n_samples": len(path.s),
        "H0": H0,
        "causal_class": cls.value,
        "final_x": path.x[-1].tolist(),
    }
    diagnostics = {
        "drift": d.drift,
        "n_steps": d.n_steps,
        "n_rejected": d.n_rejected,
        "n_rhs": d.n_rhs,
        "h_min": d.h_min,
        "h_max": d.h_max,
    }
    return results, diagnostics, [cfg["output.csv"]]


def _closed_form_states(params: cf.ClosedFormParams, s_values):
    if params.family.block is Block.HYPERBOLIC:
        return np.array([cf.block_state(params, s) for s in s_values])
    return cf.elliptic_path(params, s_values)


def cmd_verify_closed_form(cfg: RunConfig, out: Path):
    family = cf.Family(cfg["family"])
    init = (*cfg["initial.x"], *cfg["initial.v"])
    fit = cf.fit_linear_closed_form if family.is_linear else cf.fit_tanh_closed_form
    params = fit(family, cfg["potential"], init)
    s0, s1 = cfg["span"]
    s_values = np.linspace(s0, s1, cfg["samples"])
    tol = (cfg["tol.abs"], cfg["tol.rel"])
    # the affine parameter of the fitted constants starts at 0
    shifted = s_values - s0
    closed = _closed_form_states(params, shifted)
    _, numeric = cf.integrate_block(params, init, (0.0, s1 - s0), tol, s_eval=shifted[1:])
    err = np.abs(numeric[:, :2] - closed[:, :2]).max(axis=1)
    i = int(np.argmax(err))
    residue = float(np.abs(np.imag(closed[:, :2])).max())
    results = {
        "family": family.value,
        "data": {k: _real(v) for k, v in params.data.items()},
        "max_position_error": float(err[i]),
        "argmax_s": float(s_values[i]),
        "threshold": cfg["threshold"],
        "imaginary_residue": residue,
        "passed": bool(err[i] < cfg["threshold"]),
    }
    if not results["passed"]:
        raise VerificationFailed(f"max position error {err[i]:.3e} >= threshold", results)
    return results, {"samples": len(s_values)}, []


def cmd_find_integrals(cfg: RunConfig, out: Path):
    m = _metric(cfg)
    pot = m.alpha if cfg["block"] == "hyperbolic" else m.beta
    tanh = cfg.get("basis.tanh")
    basis = fi.BasisSpec(cfg["basis.degree"], tuple(tanh) if tanh else None, cfg["basis.tanh_powers"])
    grid = fi.tensor_grid(cfg["grid.rect"], cfg["grid.n"], cfg["grid.jitter"], cfg["grid.seed"])
    for x, y in grid:
        pot.check_domain(x, y)
    res = fi.nullspace_analysis(
        pot, cfg["degree"], basis, grid, cfg["svd_tol"],
        exponent_sign=cfg["exponent_sign"], seed=cfg["grid.seed"],
    )
    cands = [
        {
            "coefficients": r.candidate.coefficients.tolist(),
            "max_residual": r.max_residual,
            "scale": r.scale,
        }
        for r in res.candidates
    ]
    results = {
        "degree": res.degree,
        "basis": {**basis.as_dict(), "labels": basis.labels()},
        "singular_values": [float(v) for v in res.singular_values],
        "threshold": float(res.threshold),
        "nullspace_dimension": res.nullspace_dimension,
        "candidates": cands,
        "rejected": len(res.rejected),
    }
    expect = cfg["expect"]
    if expect == "candidate" and not cands:
        raise VerificationFailed("no first integral found", results)
    if expect == "none" and cands:
        raise VerificationFailed(f"{len(cands)} unexpected first integral(s)", results)
    return results, {"grid_points": len(grid)}, []


def cmd_liouville_check(cfg: RunConfig, out: Path):
    m = _metric(cfg)
    c = cfg.get("coefficient")
    if c is None:
        c = 2 * m.lam
    sign = cfg["elliptic_sign"]
    rows, worst = [], 0.0
    for pt in cfg["points"]:
        m.alpha.check_domain(pt[0], pt[1])
        m.beta.check_domain(pt[2], pt[3])
        ra = geometry.liouville_residual(m.alpha, c, pt[:2])
        rb = geometry.liouville_residual(m.beta, c, pt[2:], elliptic_sign=sign)
        worst = max(worst, abs(ra), abs(rb))
        rows.append({"point": list(pt), "alpha": _real(ra), "beta": _real(rb)})
    results = {
        "coefficient": c,
        "elliptic_sign": sign,
        "points": rows,
        "max_abs_residual": worst,
        "threshold": cfg["threshold"],
        "passed": worst < cfg["threshold"],
    }
    if not results["passed"]:
        raise VerificationFailed(f"residual {worst:.3e} above threshold", results)
    return results, {}, []


def cmd_maxwell_gate(cfg: RunConfig, out: Path):
    J, lam = cfg["maxwell.J"], cfg["maxwell.lambda"]
    data = maxwell.MaxwellData(
        cfg["maxwell.k"], cfg["maxwell.c"], lam, J, cfg["maxwell.I1"], cfg["maxwell.k2_factor"]
    )
    verdict = maxwell.integrability_gate(J, lam)
    results = {
        "integrable": verdict.integrable,
        "reason": verdict.reason,
        "k1": data.k1,
        "k2": data.k2,
        "l": data.l,
        "m": data.m,
    }
    if cfg.get("points"):
        m = _metric(cfg)
        results["faraday"] = [
            {"point": list(pt), "F01_F23": list(maxwell.faraday_form(data, m, pt))}
            for pt in cfg["points"]
        ]
    return results, {}, []


COMMANDS = {
    "metric-info": cmd_metric_info,
    "integrate": cmd_integrate,
    "verify-closed-form": cmd_verify_closed_form,
    "find-integrals": cmd_find_integrals,
    "liouville-check": cmd_liouville_check,
    "maxwell-gate": cmd_maxwell_gate,
}


# --------------------------------------------------------------------------- driver


def resolve_output_dir(cfg: Optional[RunConfig], override: Optional[str] = None) -> Path:
    if override:
        return Path(override)
    if cfg is not None and cfg.get("output.dir"):
        return Path(cfg["output.dir"])
    return Path(os.environ.get(ENV_OUTPUT_DIR, DEFAULT_OUTPUT_DIR))


def build_report(command, inputs, status, exit_code, results=None, diagnostics=None,
                 artifacts=(), error=None) -> Dict[str, Any]:
    report = {
        "command": command,
        "version": __version__,
        "status": status,
        "exit_code": exit_code,
        "inputs": inputs,
        "results": results or {},
        "diagnostics": diagnostics or {},
        "artifacts": list(artifacts),
    }
    if error is not None:
        report["error"] = error
    return jsonable(report)


def run(cfg: RunConfig, output_dir: Optional[str] = None) -> Tuple[int, Dict[str, Any]]:
    """Execute a parsed configuration; returns (exit code, report) and writes the report."""
    out = resolve_output_dir(cfg, output_dir)
    out.mkdir(parents=True, exist_ok=True)
    inputs = cfg.echo()
    try:
        results, diagnostics, artifacts = COMMANDS[cfg.command](cfg, out)
        report = build_report(cfg.command, inputs, "ok", EXIT_OK, results, diagnostics, artifacts)
    except VerificationFailed as exc:
        msg, partial = exc.args
        report = build_report(cfg.command, inputs, "verification_failed", EXIT_VERIFY, partial,
                              error=msg)
    except (SplitGeoError, ValueError, ArithmeticError) as exc:
        report = build_report(cfg.command, inputs, "domain_error", EXIT_VERIFY,
                              error=f"{type(exc).__name__}: {exc}")
    name = cfg.get("output.report") or f"{cfg.command}.json"
    with open(out / name, "w") as fh:
        json.dump(report, fh, indent=2, ensure_ascii=False, allow_nan=True)
        fh.write("\n")
    return report["exit_code"], report


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="splitgeo", description="Geodesics, curvature and first integrals of split metrics."
    )
    parser.add_argument("config", help="run configuration (key = value lines)")
    parser.add_argument("-o", "--output-dir", help=f"artifact directory (env {ENV_OUTPUT_DIR})")
    parser.add_argument("-q", "--quiet", action="store_true", help="do not print the report")
    parser.add_argument("--version", action="version", version=f"splitgeo {__version__}")
    args = parser.parse_args(argv)

    try:
        text = Path(args.config).read_text(encoding="utf-8")
        cfg = parse_config(text)
    except (OSError, UnicodeDecodeError, ConfigError) as exc:
        out = resolve_output_dir(None, args.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        report = build_report("unknown", {"config": args.config}, "config_error", EXIT_CONFIG,
                              error=f"{type(exc).__name__}: {exc}")
        with open(out / "config_error.json", "w") as fh:
            json.dump(report, fh, indent=2, ensure_ascii=False)
            fh.write("\n")
        print(f"splitgeo: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    code, report = run(cfg, args.output_dir)
    if not args.quiet:
        print(json.dumps({k: report[k] for k in ("command", "status", "exit_code")}))
    if "error" in report:
        print(f"splitgeo: {report['error']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
