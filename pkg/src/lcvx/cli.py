"""Command-line surface: condition checks, solves, relaxation-vs-MICP comparison,
and preset emission. All outputs are deterministic: JSON with sorted keys,
CSV floats at 17 significant digits."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from .conditions import check_all
from .config import ConfigError, docking_preset, load_config, save_config
from .micp import solve_micp_bnb
from .solver import (
    FLOAT_FMT,
    extract_primer,
    min_time,
    solve_fixed_tf,
    summary_dict,
    verify_lossless,
    write_summary_json,
    write_trajectory_csv,
)

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INCONCLUSIVE = 2
EXIT_CONDITION_FAILS = 3
EXIT_SOLVER = 4


def _write_json(path: str, data: dict) -> None:
    with open(path, "w") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")


def _write_plot_csv(path: str, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(FLOAT_FMT % v for v in row))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def _diagnostics(out_dir: str, message: str, sol=None) -> str:
    data = {"error": message}
    if sol is not None:
        data["status"] = sol.status
        data["residuals"] = sol.residuals
        data["solver"] = sol.solver_info
        if sol.search is not None:
            data["search"] = sol.search
    path = os.path.join(out_dir, "diagnostics.json")
    _write_json(path, data)
    return path


def _cmd_check(args) -> int:
    cfg = load_config(args.config)
    summary = check_all(cfg.spec)
    _write_json(args.out, summary.to_dict())
    print(f"conditions report written to {args.out}")
    for rep in summary.reports.values():
        print(f"  {rep.name}: {rep.status}")
    if summary.any_fails:
        return EXIT_CONDITION_FAILS
    if not summary.all_hold:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def _cmd_solve(args) -> int:
    cfg = load_config(args.config)
    os.makedirs(args.out, exist_ok=True)
    spec = cfg.spec
    opts = cfg.options()

    if args.tf is not None and args.min_time:
        print("give --tf or --min-time, not both", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.tf is not None:
            sol = solve_fixed_tf(spec, args.tf, cfg.N, opts)
        elif args.min_time or (cfg.t_f is None and cfg.bracket is not None):
            if cfg.bracket is None:
                print("config has no bracket for a minimum-time search", file=sys.stderr)
                return EXIT_CONFIG
            sol = min_time(spec, cfg.N, cfg.bracket, cfg.tol_t, opts)
        elif cfg.t_f is not None:
            sol = solve_fixed_tf(spec, cfg.t_f, cfg.N, opts)
        else:
            print("no t_f given: set t_f or bracket in the config, or pass --tf",
                  file=sys.stderr)
            return EXIT_CONFIG
    except ValueError as exc:
        path = _diagnostics(args.out, str(exc))
        print(f"solve failed: {exc} (diagnostics in {path})", file=sys.stderr)
        return EXIT_SOLVER

    if sol.status != "optimal":
        path = _diagnostics(args.out, f"solve returned status {sol.status}", sol)
        print(f"solve returned {sol.status} (diagnostics in {path})", file=sys.stderr)
        return EXIT_SOLVER

    trace = extract_primer(spec, sol.transcription, sol.conic_solution)
    report = verify_lossless(sol, spec, trace=trace)
    write_trajectory_csv(sol, os.path.join(args.out, "trajectory.csv"), trace)
    write_summary_json(
        os.path.join(args.out, "summary.json"), summary_dict(sol, spec, report, trace)
    )

    n = spec.sys.n
    M = spec.M
    times = sol.times
    _write_plot_csv(
        os.path.join(args.out, "plot_trajectory.csv"),
        ["t"] + [f"x{j}" for j in range(n)],
        [[times[k], *sol.X[k]] for k in range(sol.N + 1)],
    )
    norms = sol.input_norms()
    _write_plot_csv(
        os.path.join(args.out, "plot_input_norms.csv"),
        ["t"] + [f"unorm{i}" for i in range(M)],
        [[times[k], *norms[k]] for k in range(sol.N)],
    )
    gain_cols = [f"gain{i}" for i in range(M)] if trace is not None else []
    _write_plot_csv(
        os.path.join(args.out, "plot_gains.csv"),
        ["t"] + gain_cols + [f"gamma{i}" for i in range(M)],
        [
            ([times[k]] + (list(trace.gains[k]) if trace is not None else []) + list(sol.gamma[k]))
            for k in range(sol.N)
        ],
    )
    print(
        f"solved: t_f = {sol.t_f:.6g} s, cost = {sol.cost:.6g}, "
        f"conformance = {report.conformance:.4f}; outputs in {args.out}"
    )
    return EXIT_OK


def _cmd_compare(args) -> int:
    cfg = load_config(args.config)
    os.makedirs(args.out, exist_ok=True)
    spec = cfg.spec
    opts = cfg.options()
    t_f = args.tf if args.tf is not None else cfg.t_f
    if t_f is None:
        print("compare needs --tf or a config t_f", file=sys.stderr)
        return EXIT_CONFIG

    t0 = time.perf_counter()
    relaxed = solve_fixed_tf(spec, t_f, cfg.N, opts)
    relaxed_wall = time.perf_counter() - t0
    if relaxed.status != "optimal":
        path = _diagnostics(args.out, f"relaxed solve returned {relaxed.status}", relaxed)
        print(f"relaxed solve returned {relaxed.status} (diagnostics in {path})",
              file=sys.stderr)
        return EXIT_SOLVER

    t0 = time.perf_counter()
    micp = solve_micp_bnb(
        spec, t_f, cfg.N, gap_tol=args.gap_tol, node_limit=args.node_limit, options=opts
    )
    micp_wall = time.perf_counter() - t0
    if micp.status != "optimal":
        path = _diagnostics(args.out, f"branch-and-bound returned {micp.status}", micp)
        print(f"branch-and-bound returned {micp.status} (diagnostics in {path})",
              file=sys.stderr)
        return EXIT_SOLVER

    write_summary_json(
        os.path.join(args.out, "relaxed_summary.json"), summary_dict(relaxed, spec)
    )
    write_summary_json(os.path.join(args.out, "micp_summary.json"), summary_dict(micp, spec))
    abs_gap = abs(relaxed.cost - micp.cost)
    comparison = {
        "t_f": float(t_f),
        "relaxed_cost": relaxed.cost,
        "micp_cost": micp.cost,
        "abs_gap": abs_gap,
        "rel_gap": abs_gap / max(1.0, abs(micp.cost)),
        "relaxed_wall_time": relaxed_wall,
        "micp_wall_time": micp_wall,
        "speedup": micp_wall / max(relaxed_wall, 1e-12),
        "micp_nodes": micp.search["nodes"],
        "micp_certified": micp.search["certified"],
        "micp_gap": micp.search["gap"],
    }
    _write_json(os.path.join(args.out, "comparison.json"), comparison)
    print(
        f"relaxed cost {relaxed.cost:.10g} in {relaxed_wall:.3f} s; "
        f"branch-and-bound cost {micp.cost:.10g} in {micp_wall:.3f} s "
        f"({micp.search['nodes']} nodes); comparison in {args.out}"
    )
    return EXIT_OK


def _cmd_preset(args) -> int:
    if args.name != "docking":
        print(f"unknown preset {args.name!r}; available: docking", file=sys.stderr)
        return EXIT_CONFIG
    data = docking_preset()
    if args.out:
        save_config(data, args.out)
        print(f"preset written to {args.out}")
    else:
        print(json.dumps(data, indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lcvx",
        description="Trajectory optimization for linear systems with "
        "semi-continuous cone-constrained inputs via convex relaxation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="run the four optimality-structure conditions")
    p_check.add_argument("config", help="problem config JSON")
    p_check.add_argument("--out", default="conditions.json", help="report path")
    p_check.set_defaults(func=_cmd_check)

    p_solve = sub.add_parser("solve", help="solve the relaxation and verify the structure")
    p_solve.add_argument("config", help="problem config JSON")
    group = p_solve.add_mutually_exclusive_group()
    group.add_argument("--tf", type=float, default=None, help="fixed final time, s")
    group.add_argument("--min-time", action="store_true", help="bisection on the config bracket")
    p_solve.add_argument("--out", default=".", help="output directory")
    p_solve.set_defaults(func=_cmd_solve)

    p_cmp = sub.add_parser("compare", help="relaxed solve vs branch-and-bound at a fixed time")
    p_cmp.add_argument("config", help="problem config JSON")
    p_cmp.add_argument("--tf", type=float, default=None, help="fixed final time, s")
    p_cmp.add_argument("--gap-tol", type=float, default=1e-4, help="branch-and-bound gap")
    p_cmp.add_argument("--node-limit", type=int, default=100_000)
    p_cmp.add_argument("--out", default=".", help="output directory")
    p_cmp.set_defaults(func=_cmd_compare)

    p_preset = sub.add_parser("preset", help="emit a builtin problem config")
    p_preset.add_argument("name", help="preset name (docking)")
    p_preset.add_argument("--out", default=None, help="write to a file instead of stdout")
    p_preset.set_defaults(func=_cmd_preset)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
