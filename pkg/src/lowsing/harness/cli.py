"""Command-line entry point: ``lowsing <verify|solve|simulate|krylov|counterexample>``.

Every run writes a JSON report (sorted keys, no wall times) and a separate
``*.timing.json`` next to it. Exit status: 0 when all checks pass, 1 when a
check fails, 2 for usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .. import fields as F
from ..montecarlo import PathConfig, krylov_report, resolvent_mc, simulate_thinned_sde
from ..operator import _EXPR_NAMES, CoefficientField, DivergenceError, SolverConfig, \
    schauder_report, solve_inhomogeneous
from . import criteria as C
from .config import ConfigError, ExperimentConfig, parse_file

SUITES = ("orlicz", "symbols", "decomp", "operator", "montecarlo", "all")


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="flat key = value file; command-line flags override it")
    common.add_argument("--spec", help='subordinator, e.g. "gamma" or "stable alpha=1.0"')
    common.add_argument("--grid", help="grid as n,L (e.g. 1024,16)")
    common.add_argument("--lambda", dest="lam", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory (default: $LOWSING_OUT or ./lowsing-out)")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override any configuration key")

    p = argparse.ArgumentParser(prog="lowsing", parents=[common],
                                description="Orlicz-Besov estimates for subordinate jump processes")
    sub = p.add_subparsers(dest="command")

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("suite", nargs="?", choices=SUITES)
    v.add_argument("--full", action="store_true", default=None, help="acceptance-size families")

    s = sub.add_parser("solve", parents=[common], help="solve the resolvent equation on a grid")
    s.add_argument("--beta", type=float, dest="order", help="regularity order of the reported norm")
    s.add_argument("--coeff", help="coefficient expression in x, y, r, z1, z2, L")
    s.add_argument("--rhs", help="right-hand side expression in x, y, L")

    m = sub.add_parser("simulate", parents=[common], help="simulate one thinned path and a resolvent estimate")
    m.add_argument("--coeff")
    m.add_argument("--rhs")
    m.add_argument("--n-paths", type=int, dest="n_paths")
    m.add_argument("--horizon", type=float)
    m.add_argument("--events-csv", dest="events_csv", help="write the accepted jumps of path 0")

    k = sub.add_parser("krylov", parents=[common], help="occupation of small balls")
    k.add_argument("--coeff")
    k.add_argument("--radii", help="comma-separated radii")
    k.add_argument("--n-paths", type=int, dest="n_paths")
    k.add_argument("--horizon", type=float)

    c = sub.add_parser("counterexample", parents=[common], help="unbounded field with finite X^1 norm")
    c.add_argument("--jtrunc", type=int, dest="j_trunc")
    return p


def _overrides(ns: argparse.Namespace) -> dict:
    out = {}
    if getattr(ns, "spec", None):
        parts = ns.spec.split()
        out["subordinator"] = parts[0]
        for kv in parts[1:]:
            key, _, val = kv.partition("=")
            if key != "alpha":
                raise ConfigError(f"unknown subordinator parameter {key!r}")
            out["alpha"] = val
    if getattr(ns, "grid", None):
        try:
            n, L = ns.grid.split(",")
        except ValueError as exc:
            raise ConfigError("--grid expects n,L") from exc
        out["grid_n"], out["grid_L"] = n, L
    for key in ("lam", "seed", "out", "suite", "full", "order", "coeff", "rhs", "n_paths",
                "horizon", "events_csv", "radii", "j_trunc"):
        val = getattr(ns, key, None)
        if val is not None:
            out["lambda" if key == "lam" else key] = val
    if ns.command:
        out["command"] = ns.command
    for item in getattr(ns, "set", []):
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        out[key.strip()] = val.strip()
    return out


def _rhs_field(cfg: ExperimentConfig) -> F.GridField:
    expr, L, d = cfg["rhs"], cfg["grid_L"], cfg["dimension"]
    code = compile(expr, "<rhs>", "eval")
    if not set(code.co_names) <= set(_EXPR_NAMES) | {"x", "y", "L"}:
        raise ConfigError(f"unknown names in rhs expression {expr!r}")

    def fn(x, y=0.0):
        env = dict(_EXPR_NAMES, x=x, y=y, L=L)
        return np.broadcast_to(eval(code, {"__builtins__": {}}, env), np.shape(x)).astype(float)

    return F.GridField.from_function(fn, cfg["grid_n"], L, d)


def _coefficient(cfg: ExperimentConfig) -> CoefficientField:
    try:
        return CoefficientField.from_expression(cfg["coeff"], cfg["c0"], cfg["grid_L"])
    except (SyntaxError, ValueError) as exc:
        raise ConfigError(f"bad coefficient expression: {exc}") from exc


def _path_config(cfg: ExperimentConfig, lam=None) -> PathConfig:
    x0 = cfg.x0()
    if len(x0) != cfg["dimension"]:
        raise ConfigError(f"x0 has {len(x0)} coordinates, dimension is {cfg['dimension']}")
    return PathConfig(T=cfg["horizon"], eps=cfg["eps"], lam=lam or cfg["lambda"],
                      n_paths=cfg["n_paths"], seed=cfg["seed"], x0=x0)


# -- commands ------------------------------------------------------------------------

def run_verify(cfg: ExperimentConfig, out: Path) -> tuple:
    name = cfg["suite"]
    if name not in SUITES:
        raise ConfigError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    results = C.suite(name, cfg["seed"], quick=not cfg["full"])
    for r in results:
        print(r.line(), flush=True)
    report = {"checks": [r.as_record() for r in results]}
    timing = {r.id: r.seconds for r in results}
    failed = [r.id for r in results if not r.passed]
    return report, timing, failed


def run_solve(cfg: ExperimentConfig, out: Path) -> tuple:
    f = _rhs_field(cfg)
    a = _coefficient(cfg)
    spec = cfg.spec()
    scfg = SolverConfig(cfg["lambda"], eps=cfg["eps"], tol=cfg["tol"], max_iter=cfg["max_iter"])
    try:
        sol = solve_inhomogeneous(f, cfg["lambda"], a, spec, scfg)
    except DivergenceError as exc:
        return {"error": str(exc)}, {}, ["solve"]
    rec = schauder_report(f, cfg["lambda"], a, spec, cfg["order"], scfg, solution=sol)
    sol.u.save(out / "solution.bin")
    sol.u.to_csv(out / "solution.csv")
    report = {"residual": sol.residual, "iterations": sol.iterations, "contraction": sol.contraction,
              "x_star": sol.x_star, "oscillation": sol.oscillation, "eps_bias": sol.eps_bias,
              "tail_bias": sol.tail_bias, "schauder": vars(rec), "sup_u": sol.u.max_abs(),
              "files": ["solution.bin", "solution.csv"]}
    print(f"residual {sol.residual:.3e} after {sol.iterations} iterations; "
          f"Schauder ratio {rec.ratio:.4f}")
    ok = sol.residual <= max(1e3 * cfg["tol"], 1e-8) * max(1.0, f.max_abs())
    return report, {}, [] if ok else ["solve.residual"]


def run_simulate(cfg: ExperimentConfig, out: Path) -> tuple:
    a = _coefficient(cfg)
    spec = cfg.spec()
    pc = _path_config(cfg)
    path = simulate_thinned_sde(a, spec, pc)
    events = cfg["events_csv"] or "events.csv"
    events_path = Path(events) if Path(events).is_absolute() else out / events
    path.to_csv(events_path)
    f = _rhs_field(cfg)
    est = resolvent_mc(f, cfg["lambda"], pc, a, spec)
    print(f"path 0: {path.times.size} accepted jumps; resolvent estimate "
          f"{est.mean:.6f} +- {est.stderr:.2e}")
    report = {"accepted_jumps": int(path.times.size), "candidates": path.n_candidates,
              "final_state": path.states[-1], "resolvent": vars(est),
              "events_csv": events_path.name}
    return report, {}, []


def run_krylov(cfg: ExperimentConfig, out: Path) -> tuple:
    a = _coefficient(cfg)
    spec = cfg.spec()
    rep = krylov_report(cfg.radii(), cfg["lambda"], cfg.nfunction(), a, spec, _path_config(cfg))
    for r, ratio in zip(rep.radii, rep.ratios):
        print(f"r={r:g}: lambda*estimate/norm = {ratio:.4f}")
    report = {"radii": rep.radii, "estimates": [vars(e) for e in rep.estimates], "norms": rep.norms,
              "ratios": rep.ratios, "common_constant": rep.max_ratio, "exponent": rep.exponent,
              "growth_exponent": rep.growth_e}
    ok = all(np.isfinite(rep.ratios))
    return report, {}, [] if ok else ["krylov.ratios"]


def run_counterexample(cfg: ExperimentConfig, out: Path) -> tuple:
    n = cfg["grid_n"]
    f, info = F.counterexample_field(cfg["grid_L"], n, min(cfg["j_trunc"], int(np.log2(np.pi * n / cfg["grid_L"]))))
    norms = F.classical_block_norms(f)
    ms = [m for m in range(4, 64) if 2.0 ** -m > 2 * f.spacing]
    growth = F.counterexample_growth(f, ms) if len(ms) >= 2 else None
    f.to_csv(out / "counterexample.csv")
    report = {"n": n, "J_trunc": info.J_trunc, "profile_max_abs": info.profile_max_abs,
              "xspace_clipped": F.xspace_norm(f, 1.0, "clipped", norms=norms),
              "xspace_shifted": F.xspace_norm(f, 1.0, "shifted", norms=norms),
              "growth": vars(growth) if growth else None}
    print(f"X^1 norm {report['xspace_clipped']:.4f} (clipped weights), profile sup "
          f"{info.profile_max_abs:.4f}")
    return report, {}, []


COMMANDS = {"verify": run_verify, "solve": run_solve, "simulate": run_simulate,
            "krylov": run_krylov, "counterexample": run_counterexample}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = _parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    try:
        conf = getattr(ns, "config", None)
        file_vals = parse_file(conf) if conf else {}
        if conf and not file_vals and not ns.command:
            raise UsageError(f"configuration file {conf} is empty")
        cfg = ExperimentConfig.build(file_vals, _overrides(ns))
        command = cfg["command"]
        if command is None:
            raise UsageError("no command given")
        if command not in COMMANDS:
            raise ConfigError(f"unknown command {command!r}")
        out = cfg.out_dir()
        out.mkdir(parents=True, exist_ok=True)
        t0 = time.perf_counter()
        report, timing, failed = COMMANDS[command](cfg, out)
    except (ConfigError, UsageError, OSError, ValueError) as exc:
        print(f"lowsing: error: {exc}", file=sys.stderr)
        return 2
    timing["total"] = time.perf_counter() - t0
    payload = {"command": command, "config": cfg.echo(), "report": C.clean(report),
               "failed": failed, "passed": not failed}
    (out / f"{command}.json").write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    (out / f"{command}.timing.json").write_text(json.dumps(C.clean(timing), sort_keys=True, indent=2) + "\n")
    if failed:
        print("FAILED: " + ", ".join(failed), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
