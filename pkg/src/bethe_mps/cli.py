"""Command-line front end.

    bethe-mps run <config.json> [--output PATH] [--seed INT] [--quiet]
    bethe-mps check-identities --model xxz --delta 2 --L 3 --samples 10
    bethe-mps version

Exit codes: 0 success, 2 config error, 3 solver non-convergence,
4 verification failure, 5 size cap.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from typing import Any, Callable

import numpy as np

from . import __version__
from . import lieb_liniger as ll
from .bethe import bae_residual, energy, reflection_fixed_points, solve_bae
from .config import SCHEMA_VERSION, JobConfig, parse_config
from .ed import diagonalize_sector, match_state
from .exceptions import BetheMPSError, ConfigError, ConvergenceError
from .mps import assemble_state, build_boundary, build_site_tensors
from .oracle import bethe_state_oracle, run_algebra_checks
from .states import max_relative_difference

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_VERIFY = 4
EXIT_SIZE = 5

VERIFY_TOL = 1e-10
OVERLAP_TOL = 1e-9
ENERGY_TOL = 1e-8
MAX_ALGEBRA_L = 6


def cpair(z: complex) -> list[float | None]:
    z = complex(z)
    return [fnum(z.real), fnum(z.imag)]


def fnum(x: float) -> float | None:
    x = float(x)
    return x if math.isfinite(x) else None


class _Run:
    """Mutable state threaded through the task pipeline."""

    def __init__(self, cfg: JobConfig):
        self.cfg = cfg
        self.rapidities: list[complex] | None = list(cfg.initial_guesses) if cfg.initial_guesses else None
        self.state = None
        self.tensors = None
        self.results: dict[str, Any] = {}
        self.checks: dict[str, bool] = {}
        self.timing: dict[str, float] = {}

    def roots(self) -> list[complex]:
        if self.rapidities is None:
            if self.cfg.is_lieb_liniger:
                self.rapidities = [complex(x) for x in ll.default_rapidities(self.cfg.ll_params(), self.cfg.excitations)]
            elif self.cfg.excitations == 0:
                self.rapidities = []
            else:
                raise ConfigError("no rapidities available", "initial_guesses")
        return self.rapidities


def _solve(run: _Run) -> dict:
    cfg = run.cfg
    if cfg.is_lieb_liniger:
        p = cfg.ll_params()
        guess = [g.real for g in cfg.initial_guesses] or ll.default_rapidities(p, cfg.excitations)
        res = ll.solve_ll_bae(p, guess, cfg.solver)
        lambdas = [complex(x) for x in res.lambdas]
        residuals = ll.ll_bae_residual(p, res.lambdas) if lambdas else []
        out = {"roots": [cpair(z) for z in lambdas], "residuals": [cpair(r) for r in residuals],
               "residual_norm": fnum(res.residual_norm), "iterations": res.iterations, "converged": res.converged}
    else:
        k = cfg.kernel()
        res = solve_bae(k, cfg.chain_length, cfg.initial_guesses, cfg.solver)
        lambdas = list(res.lambdas)
        residuals = bae_residual(k, cfg.chain_length, lambdas) if lambdas else []
        out = {"roots": [cpair(z) for z in lambdas], "residuals": [cpair(r) for r in residuals],
               "residual_norm": fnum(res.residual_norm), "iterations": res.iterations, "converged": res.converged}
        out["reflection_fixed_points"] = reflection_fixed_points(k, lambdas)
        if res.converged:
            out["energy"] = cpair(energy(k, lambdas))
    run.results["solve"] = out
    if not res.converged:
        raise ConvergenceError(
            f"Bethe equations did not converge to tolerance {cfg.solver.tolerance:g} "
            f"(residual {res.residual_norm:.3e} after {res.iterations} iterations)"
        )
    run.rapidities = lambdas
    return out


def _build(run: _Run) -> dict:
    cfg = run.cfg
    lam = run.roots()
    if cfg.is_lieb_liniger:
        p = cfg.ll_params()
        ll.check_ll_sizes(p, cfg.excitations)
        run.tensors = ll.ll_site_tensors(p, lam)
        table = ll.mps_table(p, run.tensors)
        out = {"bond_dim": run.tensors.bond_dim, "rapidities": [cpair(z) for z in lam],
               "amplitudes": {key: cpair(v) for key, v in table.items()}}
    else:
        k = cfg.kernel()
        run.tensors = build_site_tensors(k, lam)
        run.state = assemble_state(run.tensors, build_boundary(len(lam)), cfg.chain_length)
        basis = run.state.basis()
        out = {"bond_dim": run.tensors.bond_dim, "rapidities": [cpair(z) for z in lam],
               "amplitudes": {c.label(): cpair(a) for c, a in zip(basis, run.state.amplitudes)}}
    run.results["build-mps"] = out
    return out


def _ensure_state(run: _Run) -> None:
    if run.tensors is None:
        _build(run)


def _verify_ed(run: _Run) -> dict:
    cfg = run.cfg
    _ensure_state(run)
    k = cfg.kernel()
    pairs = diagonalize_sector(k, cfg.chain_length, cfg.excitations)
    rep = match_state(run.state, pairs)
    e_bethe = energy(k, run.roots())
    e_gap = abs(e_bethe - rep.energy)
    passed = rep.overlap >= 1 - OVERLAP_TOL and e_gap <= ENERGY_TOL
    out = {"overlap": fnum(rep.overlap), "ed_energy": fnum(rep.energy), "bethe_energy": cpair(e_bethe),
           "energy_difference": fnum(e_gap), "eigen_residual": fnum(rep.residual), "degenerate": rep.degenerate,
           "spectrum": [fnum(pp.energy) for pp in pairs], "passed": passed}
    run.checks["verify-ed"] = passed
    run.results["verify-ed"] = out
    return out


def _oracle_check(run: _Run) -> dict:
    cfg = run.cfg
    _ensure_state(run)
    lam = run.roots()
    if cfg.is_lieb_liniger:
        p = cfg.ll_params()
        vec = ll.ll_oracle_state(p, lam, cfg.local_dim)
        oracle = ll.restrict_to_sector(vec, p, cfg.excitations, cfg.local_dim)
        mps = ll.mps_table(p, run.tensors)
        keys = list(mps)
        a = np.array([mps[key] for key in keys])
        b = np.array([oracle[key] for key in keys])
    else:
        full = bethe_state_oracle(cfg.kernel(), cfg.chain_length, lam)
        sec = full.to_sector(cfg.excitations)
        keys = [c.label() for c in sec.basis()]
        a, b = run.state.amplitudes, sec.amplitudes
    diff = max_relative_difference(a, b)
    scale = max(np.max(np.abs(a), initial=0.0), np.max(np.abs(b), initial=0.0)) or 1.0
    table = {key: {"mps": cpair(x), "oracle": cpair(y), "relative_difference": fnum(abs(x - y) / scale)}
             for key, x, y in zip(keys, a, b)}
    passed = diff <= VERIFY_TOL
    out = {"max_relative_difference": fnum(diff), "table": table, "passed": passed}
    run.checks["oracle-check"] = passed
    run.results["oracle-check"] = out
    return out


def ll_identity_checks(p: ll.LLParams, samples: int, seed: int, local_dim: int = 6) -> dict[str, float]:
    rng = np.random.default_rng(seed)
    res = {"quantum_determinant": 0.0, "l_inverse": 0.0, "yang_baxter": 0.0, "b_commutation": 0.0}
    small = ll.LLParams(p.kappa, p.spacing, min(p.sites, 3))
    for _ in range(samples):
        mu = complex(rng.uniform(-1, 1), rng.uniform(-0.5, 0.5))
        lam = complex(rng.uniform(-1, 1), rng.uniform(-0.5, 0.5))
        res["quantum_determinant"] = max(res["quantum_determinant"], ll.ll_quantum_determinant_check(p, mu, local_dim))
        res["l_inverse"] = max(res["l_inverse"], ll.ll_inverse_check(p, mu, local_dim))
        res["yang_baxter"] = max(res["yang_baxter"], ll.ll_yang_baxter_check(p, lam, mu, local_dim))
        x, y = rng.uniform(-2, 2, 2)
        res["b_commutation"] = max(res["b_commutation"], ll.ll_b_commutation_residual(small, x, y))
    return res


def _algebra_check(run: _Run) -> dict:
    cfg = run.cfg
    if cfg.is_lieb_liniger:
        residuals = ll_identity_checks(cfg.ll_params(), cfg.samples, cfg.seed)
    else:
        L = min(cfg.chain_length, MAX_ALGEBRA_L)
        residuals = run_algebra_checks(cfg.kernel(), L, cfg.samples, cfg.seed).residuals
    passed = max(residuals.values()) <= VERIFY_TOL
    out = {"residuals": {key: fnum(v) for key, v in residuals.items()}, "samples": cfg.samples,
           "seed": cfg.seed, "passed": passed}
    run.checks["algebra-check"] = passed
    run.results["algebra-check"] = out
    return out


TASKS: dict[str, Callable[[_Run], dict]] = {
    "solve": _solve,
    "build-mps": _build,
    "verify-ed": _verify_ed,
    "oracle-check": _oracle_check,
    "algebra-check": _algebra_check,
}


def execute(cfg: JobConfig) -> tuple[dict, int]:
    """Run the configured tasks in pipeline order.

    Returns the JSON-ready report and the exit code. The first module error
    stops the pipeline; results gathered so far stay in the report.
    """
    run = _Run(cfg)
    errors: list[dict] = []
    code = EXIT_OK
    for name in cfg.tasks:
        t0 = time.perf_counter()
        try:
            TASKS[name](run)
        except BetheMPSError as exc:
            errors.append({"task": name, "type": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code})
            code = exc.exit_code
            break
        finally:
            run.timing[name] = time.perf_counter() - t0
    if code == EXIT_OK and not all(run.checks.values()):
        code = EXIT_VERIFY
    report = {
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "config": cfg.to_dict(),
        "results": run.results,
        "checks": run.checks,
        "errors": errors,
        "exit_code": code,
        "timing": {key: round(v, 6) for key, v in run.timing.items()},
    }
    return report, code


def dumps_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False)


def summary_table(report: dict) -> str:
    rows = [("task", "status", "metric", "value")]
    checks = report["checks"]
    failed = {e["task"]: e for e in report["errors"]}
    for name, res in report["results"].items():
        if name == "solve":
            rows.append((name, "ok" if res["converged"] else "FAIL", "residual", f"{res['residual_norm']:.3e}"))
            for i, r in enumerate(res["roots"]):
                rows.append(("", "", f"root[{i}]", f"{r[0]:+.10f} {r[1]:+.10f}i"))
            if "energy" in res:
                rows.append(("", "", "energy", f"{res['energy'][0]:+.10f}"))
        elif name == "build-mps":
            rows.append((name, "ok", "configs", str(len(res["amplitudes"]))))
        elif name == "verify-ed":
            rows.append((name, "ok" if checks[name] else "FAIL", "overlap", f"{res['overlap']:.12f}"))
            rows.append(("", "", "ed_energy", f"{res['ed_energy']:+.10f}"))
        elif name == "oracle-check":
            rows.append((name, "ok" if checks[name] else "FAIL", "max_rel_diff", f"{res['max_relative_difference']:.3e}"))
        elif name == "algebra-check":
            rows.append((name, "ok" if checks[name] else "FAIL", "", ""))
            for key, v in sorted(res["residuals"].items()):
                rows.append(("", "", key, f"{v:.3e}"))
    for name, err in failed.items():
        rows.append((name, "ERROR", err["type"], err["message"][:60]))
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    lines.append(f"exit code: {report['exit_code']}")
    return "\n".join(lines)


def _cmd_run(args) -> int:
    try:
        with open(args.config, "rb") as fh:
            cfg = parse_config(fh.read())
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    report, code = execute(cfg)
    text = dumps_report(report)
    out = args.output or cfg.output_path
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        if not args.quiet:
            print(summary_table(report))
    elif not args.quiet:
        print(summary_table(report), file=sys.stderr)
        print(text)
    return code


def _cmd_check(args) -> int:
    try:
        if args.model == "lieb_liniger":
            p = ll.LLParams(args.kappa, args.a, args.N)
            residuals = ll_identity_checks(p, args.samples, args.seed)
            label = f"lieb_liniger kappa={args.kappa:g} a={args.a:g}"
        else:
            raw = {"model": args.model, "L": args.L, "n": 0, "tasks": ["algebra-check"]}
            if args.model == "xxz":
                if args.delta is not None:
                    raw["delta"] = args.delta
                if args.eta is not None:
                    raw["eta"] = args.eta
            cfg = parse_config(json.dumps(raw))
            if args.L > MAX_ALGEBRA_L:
                print(f"error: identity checks capped at L<={MAX_ALGEBRA_L}", file=sys.stderr)
                return EXIT_SIZE
            rep = run_algebra_checks(cfg.kernel(), args.L, args.samples, args.seed)
            residuals = rep.residuals
            label = rep.kernel + f", L={args.L}"
    except BetheMPSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    print(f"{label}, samples={args.samples}, seed={args.seed}")
    width = max(len(k) for k in residuals)
    ok = True
    for key, v in sorted(residuals.items()):
        good = v <= VERIFY_TOL
        ok &= good
        print(f"{key.ljust(width)}  {v:.3e}  {'pass' if good else 'FAIL'}")
    return EXIT_OK if ok else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bethe-mps", description="Exact MPS for open-boundary Bethe states.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a JSON job configuration")
    run.add_argument("config")
    run.add_argument("--output", "-o")
    run.add_argument("--seed", type=int)
    run.add_argument("--quiet", "-q", action="store_true")
    run.set_defaults(func=_cmd_run)

    chk = sub.add_parser("check-identities", help="check the integrability identities at random points")
    chk.add_argument("--model", choices=("xxz", "xxx", "lieb_liniger"), default="xxz")
    chk.add_argument("--delta", type=float)
    chk.add_argument("--eta", type=float)
    chk.add_argument("--L", type=int, default=3)
    chk.add_argument("--kappa", type=float, default=1.0)
    chk.add_argument("--a", type=float, default=0.1)
    chk.add_argument("--N", type=int, default=3)
    chk.add_argument("--samples", type=int, default=10)
    chk.add_argument("--seed", type=int, default=42)
    chk.set_defaults(func=_cmd_check)

    ver = sub.add_parser("version", help="print the package version")
    ver.set_defaults(func=lambda args: print(__version__) or EXIT_OK)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
