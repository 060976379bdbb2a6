"""Command-line front end: ``robust-pmp solve <preset|config.json>``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import config as cfgmod
from .config import RunConfig
from .errors import ConfigError, DomainViolation, NumericalBreakdown, SingularJacobian
from .lie_so2 import wrap_to_2pi
from .lq_game import lq_trajectory
from .spacecraft import ConvergenceFailure, TrajectorySolution, simulate

EXIT_OK = 0
EXIT_CODES = {"CertificateFailed": 1, "NotConverged": 2, "ConfigError": 3, "IOFailure": 4}
CSV_HEADER = ("k", "theta", "v", "u", "d", "zeta", "xi")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def trajectory_csv(sol: TrajectorySolution, covectors: bool = True) -> str:
    """CSV text; theta wrapped to [0, 2pi), inputs and covectors blank on the terminal row."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    theta = wrap_to_2pi(np.asarray(sol.theta))
    N = sol.N
    for k in range(N + 1):
        row = [str(k), fmt(theta[k]), fmt(sol.v[k])]
        if k < N:
            row += [fmt(sol.u[k]), fmt(sol.d[k])]
            row += [fmt(sol.zeta[k]), fmt(sol.xi[k])] if covectors else ["", ""]
        else:
            row += ["", "", "", ""]
        w.writerow(row)
    return buf.getvalue()


def _finite(x):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return None
    return x


def lq_oracle_delta(cfg: RunConfig, sol: TrajectorySolution) -> Optional[float]:
    p = cfg.params
    if p.psi != 0.0 or p.lam != 1.0 or p.constrained:
        return None
    ref = lq_trajectory(p)
    return float(max(np.max(np.abs(sol.v - ref.v)), np.max(np.abs(sol.u - ref.u)),
                     np.max(np.abs(sol.d - ref.d))))


def build_report(cfg: RunConfig, sol: Optional[TrajectorySolution], status: str,
                 category: Optional[str] = None, message: Optional[str] = None,
                 solve_info: Optional[dict] = None) -> dict:
    report = {"name": cfg.name, "config": cfgmod.to_dict(cfg), "status": status, "category": category}
    if message is not None:
        report["message"] = message
    if solve_info is not None:
        report.update(solve_info)
    if sol is None:
        return report
    report.update(residual_inf=sol.residual_inf, iterations=sol.iterations, converged=sol.converged,
                  nonsmooth=sol.nonsmooth, theta_final=float(sol.theta[-1]))
    failed = [r.k for r in sol.variational if not r.passed]
    report["variational"] = {"passed": sol.variational_ok, "failed_stages": failed}
    report["saddle_certified"] = bool(sol.saddle and sol.saddle.is_saddle_certified)
    report["consistency_passed"] = bool(sol.consistency and sol.consistency.passed)
    if "certificates" in cfg.emit:
        report["variational"]["stages"] = [
            {"k": r.k, "passed": r.passed, "grad_u": r.grad_u, "grad_d": r.grad_d} for r in sol.variational]
        report["hessian"] = sol.saddle.to_dict() if sol.saddle else None
        c = sol.consistency
        report["consistency"] = None if c is None else {
            "zeta_negation": c.zeta_negation, "xi_negation": c.xi_negation,
            "deviation_from_amalgamated": c.deviation_from_amalgamated,
            "abnormal_zero_exact": c.abnormal_zero_exact,
            "min_gradient_ok": c.min_gradient_ok, "max_gradient_ok": c.max_gradient_ok,
            "tol": c.tol, "passed": c.passed,
        }
    delta = lq_oracle_delta(cfg, sol)
    if delta is not None:
        report["lq_oracle_max_delta"] = delta
    return report


def _dump(obj) -> str:
    def clean(o):
        if isinstance(o, dict):
            return {k: clean(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [clean(v) for v in o]
        if isinstance(o, (float, np.floating)):
            return _finite(o)
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, np.integer):
            return int(o)
        return o
    return json.dumps(clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _prepare_dir(out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise PermissionError(f"{out} is not writable")


def run(cfg: RunConfig, out_dir: Optional[str] = None) -> tuple[int, dict]:
    """Solve one configuration and write its files; returns (exit status, summary)."""
    out = Path(out_dir if out_dir is not None else cfg.output_path)
    summary = {"name": cfg.name, "status": "ok", "category": None}
    try:
        _prepare_dir(out)
    except OSError as exc:
        summary.update(status="failure", category="IOFailure", message=str(exc))
        return EXIT_CODES["IOFailure"], summary

    sol, category, message, solve_info = None, None, None, None
    try:
        sol = simulate(cfg.params, cfg.guess if isinstance(cfg.guess, str) else np.array(cfg.guess),
                       cfg.solver)
    except ConvergenceFailure as exc:
        category, message = "NotConverged", str(exc)
        r = exc.report
        solve_info = {"residual_inf": r.residual_inf_norm, "iterations": r.iterations,
                      "termination": r.termination}
    except (SingularJacobian, NumericalBreakdown, DomainViolation) as exc:
        category, message = "NotConverged", f"{type(exc).__name__}: {exc}"
    if sol is not None and not sol.certified:
        category = "CertificateFailed"
        message = "converged, but at least one certificate failed"

    status = "ok" if category is None else "failure"
    report = build_report(cfg, sol, status, category, message, solve_info)
    try:
        if sol is not None and "trajectory" in cfg.emit:
            (out / f"{cfg.name}.csv").write_text(trajectory_csv(sol, "covectors" in cfg.emit))
        (out / f"{cfg.name}_report.json").write_text(_dump(report))
    except OSError as exc:
        summary.update(status="failure", category="IOFailure", message=str(exc))
        return EXIT_CODES["IOFailure"], summary
    summary.update(status=status, category=category)
    if message:
        summary["message"] = message
    return (EXIT_OK if category is None else EXIT_CODES[category]), summary


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="robust-pmp")
    sub = ap.add_subparsers(dest="command", required=True)
    solve = sub.add_parser("solve", help="solve a preset or a JSON configuration")
    solve.add_argument("target", nargs="?", help="preset name or path to config.json")
    solve.add_argument("--out", help="output directory (overrides output_path)")
    solve.add_argument("--all-presets", action="store_true", help="solve every built-in preset")
    solve.add_argument("--guess", choices=("zero", "drift"), help="override the initial guess generator")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.all_presets == (args.target is not None):
        print(json.dumps({"status": "failure", "category": "ConfigError",
                          "message": "give exactly one of a target or --all-presets"}, sort_keys=True),
              file=sys.stderr)
        return EXIT_CODES["ConfigError"]
    try:
        configs = ([cfgmod.preset(n) for n in cfgmod.PRESETS] if args.all_presets
                   else [cfgmod.load_config(args.target)])
        if args.guess:
            configs = [cfgmod.with_guess(c, args.guess) for c in configs]
    except ConfigError as exc:
        print(json.dumps({"status": "failure", "category": "ConfigError",
                          "error": type(exc).__name__, "message": str(exc)}, sort_keys=True), file=sys.stderr)
        return EXIT_CODES["ConfigError"]

    worst = EXIT_OK
    for c in configs:
        code, summary = run(c, args.out)
        print(json.dumps(summary, sort_keys=True))
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
