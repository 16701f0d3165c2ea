"""Command-line front end.

Subcommands:

* ``run``      one simulation from a config file plus ``--set`` overrides;
               writes record.csv, summary.json and three SVG plots.
* ``suite``    circle/pentagon/square on both plants with the stock
               parameters, then checks the tracking and tension gates.
* ``validate`` config check only.

Exit codes: 0 success, 2 configuration error, 3 simulation abort,
4 suite gate failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from .config import ConfigError, apply_overrides, build_simulation_config, load_config
from .plots import error_profile_chart, tension_chart, tracking_chart
from .simulator import (RunRecord, RunSummary, SimulationAbortError, StepRow,
                        polygon_edge_means, polygon_vertex_stats, run_simulation)

CSV_HEADER = ("step,ref_x,ref_y,tip_x,tip_y,err,arclen,y_i,y_l,y_r,"
              "dy_i,dy_l,dy_r,tau_i,tau_l,tau_r,t_bb,dj_norm,qp_status,kkt")

SUITE_KINDS = ("circle", "pentagon", "square")
SUITE_PLANTS = ("affine", "arc")
SUITE_SIZE = 80.0

# acceptance gates checked by the suite
CIRCLE_STEADY_MEAN_MM = 3.0
CIRCLE_STEADY_MAX_MM = 4.0
SQUARE_EDGE_MEAN_MM = 0.5
PENTAGON_EDGE_MIN_MM = 3.0
TENSION_LO_N = 0.3
TENSION_HI_N = 3.0
_TENSION_EPS = 1e-9


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _num(v: float) -> str:
    return repr(float(v))


def record_to_csv(record: RunRecord) -> str:
    lines = [CSV_HEADER]
    for r in record.rows:
        lines.append(",".join([
            str(r.step), _num(r.ref_x), _num(r.ref_y), _num(r.tip_x), _num(r.tip_y),
            _num(r.err), _num(r.arclen), _num(r.y_i), _num(r.y_l), _num(r.y_r),
            _num(r.dy_i), _num(r.dy_l), _num(r.dy_r), _num(r.tau_i), _num(r.tau_l),
            _num(r.tau_r), _num(r.t_bb), _num(r.dj_norm), r.qp_status, _num(r.kkt),
        ]))
    return "\n".join(lines) + "\n"


def parse_record_csv(text: str) -> list[StepRow]:
    """Inverse of record_to_csv, used by analysis tooling and tests."""
    lines = text.strip().split("\n")
    if lines[0] != CSV_HEADER:
        raise ValueError("unexpected CSV header")
    rows = []
    for line in lines[1:]:
        f = line.split(",")
        rows.append(StepRow(
            step=int(f[0]), ref_x=float(f[1]), ref_y=float(f[2]),
            tip_x=float(f[3]), tip_y=float(f[4]), err=float(f[5]),
            arclen=float(f[6]), y_i=float(f[7]), y_l=float(f[8]), y_r=float(f[9]),
            dy_i=float(f[10]), dy_l=float(f[11]), dy_r=float(f[12]),
            tau_i=float(f[13]), tau_l=float(f[14]), tau_r=float(f[15]),
            t_bb=float(f[16]), dj_norm=float(f[17]), qp_status=f[18],
            kkt=float(f[19])))
    return rows


def write_run_outputs(out_dir: str, record: RunRecord, summary: RunSummary) -> None:
    os.makedirs(out_dir, exist_ok=True)
    _atomic_write(os.path.join(out_dir, "record.csv"), record_to_csv(record))
    _atomic_write(os.path.join(out_dir, "summary.json"),
                  json.dumps(dataclasses.asdict(summary), indent=2) + "\n")
    _atomic_write(os.path.join(out_dir, "tracking.svg"), tracking_chart(record))
    _atomic_write(os.path.join(out_dir, "tension.svg"), tension_chart(record))
    _atomic_write(os.path.join(out_dir, "error_profile.svg"), error_profile_chart(record))


def _summary_line(name: str, s: RunSummary) -> str:
    return (f"{name}: steady err mean {s.steady_mean_err:.3f} mm max "
            f"{s.steady_max_err:.3f} mm, peak {s.peak_err:.3f} mm, tension "
            f"[{min(s.tau_i_min, s.tau_l_min, s.tau_r_min):.3f}, "
            f"{max(s.tau_i_max, s.tau_l_max, s.tau_r_max):.3f}] N, "
            f"{s.total_steps} steps, {s.wall_time_s:.2f} s")


def cmd_run(args) -> int:
    try:
        cfg, out_dir = load_config(args.config, args.set)
    except (ConfigError, OSError) as exc:
        _print_config_errors(exc)
        return 2
    if args.out:
        out_dir = args.out
    try:
        record, summary = run_simulation(cfg, seed=args.seed)
    except SimulationAbortError as exc:
        print(f"simulation aborted: {exc}", file=sys.stderr)
        return 3
    write_run_outputs(out_dir, record, summary)
    print(_summary_line(f"{cfg.trajectory.kind}/{cfg.plant.plant_kind}", summary))
    return 0


def cmd_validate(args) -> int:
    try:
        load_config(args.config, args.set)
    except (ConfigError, OSError) as exc:
        _print_config_errors(exc)
        return 2
    print("configuration OK")
    return 0


def _print_config_errors(exc: Exception) -> None:
    if isinstance(exc, ConfigError):
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
    else:
        print(f"config error: {exc}", file=sys.stderr)


def _tensions_ok(s: RunSummary) -> bool:
    lo = min(s.tau_i_min, s.tau_l_min, s.tau_r_min, s.t_bb_min)
    hi = max(s.tau_i_max, s.tau_l_max, s.tau_r_max, s.t_bb_max)
    return lo >= TENSION_LO_N - _TENSION_EPS and hi <= TENSION_HI_N + _TENSION_EPS


def evaluate_suite(results: dict) -> list[dict]:
    """Gate checks over the six suite runs; one entry per criterion."""
    checks = []

    s = results["circle_affine"]["summary"]
    checks.append({
        "name": "circle_tracking",
        "passed": (s.steady_mean_err <= CIRCLE_STEADY_MEAN_MM
                   and s.steady_max_err <= CIRCLE_STEADY_MAX_MM),
        "detail": (f"circle/affine steady mean {s.steady_mean_err:.4f} mm "
                   f"(<= {CIRCLE_STEADY_MEAN_MM}), max {s.steady_max_err:.4f} mm "
                   f"(<= {CIRCLE_STEADY_MAX_MM})"),
    })

    sq = results["square_affine"]
    means = polygon_edge_means(sq["record"], sq["config"].trajectory)
    measured = [m for m in means if m is not None]
    checks.append({
        "name": "square_edges",
        "passed": bool(measured) and all(m <= SQUARE_EDGE_MEAN_MM for m in measured),
        "detail": ("square/affine mid-edge means "
                   + ", ".join("n/a" if m is None else f"{m:.4f}" for m in means)
                   + f" mm (<= {SQUARE_EDGE_MEAN_MM})"),
    })

    pe = results["pentagon_arc"]
    stats = polygon_vertex_stats(pe["record"], pe["config"].trajectory)
    edge_means = polygon_edge_means(pe["record"], pe["config"].trajectory)
    edge_ok = all(m is None or m <= PENTAGON_EDGE_MIN_MM for m in edge_means)
    peaks_ok = bool(stats) and all(
        st["peak"] > st["before_min"] and st["peak"] > st["after_min"] for st in stats)
    checks.append({
        "name": "pentagon_vertices",
        "passed": edge_ok and peaks_ok,
        "detail": ("pentagon/arc vertex peaks "
                   + ", ".join(f"{st['peak']:.4f}>" f"{max(st['before_min'], st['after_min']):.4f}"
                               for st in stats)
                   + " mm; edge means "
                   + ", ".join("n/a" if m is None else f"{m:.4f}" for m in edge_means)),
    })

    bad = [name for name, res in results.items() if not _tensions_ok(res["summary"])]
    checks.append({
        "name": "tension_feasibility",
        "passed": not bad,
        "detail": ("all tensions and T_bb within "
                   f"[{TENSION_LO_N}, {TENSION_HI_N}] N"
                   + (f"; violated by {bad}" if bad else " on all six runs")),
    })
    return checks


def cmd_suite(args) -> int:
    out_root = args.out or os.environ.get("CONTINUUMCTL_OUTPUT_DIR") or "out"
    results = {}
    for kind in SUITE_KINDS:
        for plant in SUITE_PLANTS:
            values = apply_overrides({}, args.set)
            values.setdefault("trajectory", {})["kind"] = kind
            values["trajectory"].setdefault("size", SUITE_SIZE)
            values.setdefault("plant", {})["kind"] = plant
            if args.seed is not None:
                values.setdefault("run", {})["seed"] = args.seed
            try:
                cfg, _ = build_simulation_config(values)
            except ConfigError as exc:
                _print_config_errors(exc)
                return 2
            name = f"{kind}_{plant}"
            try:
                record, summary = run_simulation(cfg)
            except SimulationAbortError as exc:
                print(f"{name}: simulation aborted: {exc}", file=sys.stderr)
                return 3
            write_run_outputs(os.path.join(out_root, name), record, summary)
            print(_summary_line(name, summary))
            results[name] = {"config": cfg, "record": record, "summary": summary}

    checks = evaluate_suite(results)
    payload = {
        "runs": {name: dataclasses.asdict(res["summary"]) for name, res in results.items()},
        "checks": [{k: v for k, v in c.items()} for c in checks],
        "passed": all(c["passed"] for c in checks),
    }
    os.makedirs(out_root, exist_ok=True)
    _atomic_write(os.path.join(out_root, "suite_summary.json"),
                  json.dumps(payload, indent=2) + "\n")

    ok = True
    for c in checks:
        flag = "PASS" if c["passed"] else "FAIL"
        print(f"[{flag}] {c['name']}: {c['detail']}")
        ok = ok and c["passed"]
    return 0 if ok else 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="continuumctl",
        description="Model-less continuum arm control simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required):
        p.add_argument("--config", required=config_required,
                       help="path to a run configuration file")
        p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                       help="override a configuration value (repeatable)")

    p_run = sub.add_parser("run", help="execute one simulation")
    common(p_run, False)
    p_run.add_argument("--out", help="output directory")
    p_run.add_argument("--seed", type=int, default=None, help="RNG seed override")
    p_run.set_defaults(func=cmd_run)

    p_suite = sub.add_parser("suite", help="run the six stock experiments and gate them")
    p_suite.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                         help="override applied to every suite run (repeatable)")
    p_suite.add_argument("--out", help="output root directory")
    p_suite.add_argument("--seed", type=int, default=None, help="RNG seed for all runs")
    p_suite.set_defaults(func=cmd_suite)

    p_val = sub.add_parser("validate", help="check a configuration file")
    common(p_val, True)
    p_val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
