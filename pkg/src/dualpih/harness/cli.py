"""Command-line entry point: ``dualpih <command> ...``.

Exit codes: 0 Aligned, 2 Jammed, 3 RotationFailure, 4 Timeout, 1 any error.
Commands that do not run a single episode exit 0 on success.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

from ..contact import ContactBlowUp
from ..lfd import DemoLog, EmptyIntersection, LearnedParams, LogError, learn
from ..sim.export import write_json, write_trajectory_csv
from ..sim.metrics import motion_metrics
from .demo import PolicyFailure, run_demo
from .plotdata import plot_data
from .runner import EXIT_ERROR, exit_code, metrics_table, parse_angles, run_scenario, sweep, sweep_table
from .scenario import CONFIG_LABELS, Scenario, ScenarioError, apply_params, default_scenario


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with 1: code 2 is reserved for a jammed episode."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _load_scenario(path) -> Scenario:
    return default_scenario() if path is None else Scenario.load(path)


def _configs(s: str) -> list[str]:
    out = [c.strip().upper() for c in s.split(",") if c.strip()]
    bad = [c for c in out if c not in CONFIG_LABELS]
    if bad or not out:
        raise ScenarioError(f"unknown configuration(s): {', '.join(bad) or '(none)'}")
    return out


def _write_csv(rows: list[dict], path) -> Path:
    path = Path(path)
    keys = []
    for r in rows:
        keys += [k for k in r if k not in keys]
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        for r in rows:
            w.writerow(r)
    return path


def cmd_demo(a) -> int:
    scn = _load_scenario(a.scenario)
    if not scn.slave.is_stiff():
        raise ScenarioError("the demonstration needs a fully stiff slave")
    demo = scn.demo
    if a.seed is not None:
        demo = replace(demo, seed=a.seed)
    res = run_demo(scn.sim_config(), demo)
    res.log.save(a.out)
    print(f"demonstration: {res.outcome.kind}, {res.log.t[-1]:.2f} s, {len(res.log)} samples, "
          f"contact in {100 * res.contact_fraction:.0f}% of steps -> {a.out}")
    return 0


def cmd_learn(a) -> int:
    log = DemoLog.load(a.log)
    try:
        params = learn(log)
    except EmptyIntersection as e:
        print(f"error: {e}; the demonstration has to be segmented", file=sys.stderr)
        print("per-sample sectors (deg):", file=sys.stderr)
        for row in getattr(e, "dump", []):
            print("  " + json.dumps(row), file=sys.stderr)
        return EXIT_ERROR
    params.save(a.out)
    print(params.summary())
    return 0


def cmd_run(a) -> int:
    scn = _load_scenario(a.scenario)
    if a.angle is not None:
        scn = scn.with_(initial_error_deg=a.angle)
    if a.params:
        scn = apply_params(scn, LearnedParams.load(a.params))
    traj, out = run_scenario(scn)
    if a.out:
        write_trajectory_csv(traj, a.out)
    m = motion_metrics(traj)
    print(f"outcome: {out.kind}")
    print(f"insertion depth: {1e3 * out.insertion_depth:.2f} mm, final relative angle: "
          f"{math.degrees(out.final_rel_angle):.3f} deg, duration: {out.duration:.2f} s")
    print(f"joint distance: master {m.master.joint_dist:.4f} rad, slave {m.slave.joint_dist:.4f} rad")
    return exit_code(out.kind)


def cmd_sweep(a) -> int:
    scn = _load_scenario(a.scenario)
    rep = sweep(scn, _configs(a.configs), parse_angles(a.angles), a.reps, a.perturb, a.workers,
                a.check_invariants)
    write_json(rep, a.out)
    csv_path = Path(a.csv) if a.csv else Path(a.out).with_suffix(".csv")
    _write_csv(sweep_table(rep), csv_path)
    for c in rep["configs"]:
        s = rep["summary"][c]
        best = s["max_angle_deg"]
        split = [k for k, v in s["per_angle"].items() if not v["unanimous"]]
        note = f"  (repetitions disagree at {', '.join(split)} deg)" if split else ""
        print(f"{c}: max aligned angle {'<' + format(min(rep['angles_deg']), 'g') if best is None else format(best, 'g')} deg{note}")
    for k, v in rep["ordering"].items():
        print(f"ordering {k}: {'yes' if v else 'no'}")
    return 0


def cmd_metrics(a) -> int:
    scn = _load_scenario(a.scenario)
    rows = metrics_table(scn, _configs(a.configs), a.angle, a.reps, a.perturb, a.workers)
    _write_csv(rows, a.out)
    for r in rows:
        print(f"{r['config']}: aligned {r['aligned']}/{r['reps']}, joint distance {r['joint_dist_sum']:.4f} rad, "
              f"duration {r['duration']:.2f} s")
    return 0


def cmd_plot_data(a) -> int:
    paths = plot_data(a.traj, a.out, a.stride)
    for p in paths:
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dualpih", description="Dual-arm compliant peg-in-hole simulation and learning.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("demo", help="record a scripted demonstration")
    d.add_argument("--scenario", help="scenario JSON (default: shipped scenario)")
    d.add_argument("--out", required=True, help="demonstration log JSON")
    d.add_argument("--seed", type=int, help="override the demonstrator seed")
    d.set_defaults(fn=cmd_demo)

    le = sub.add_parser("learn", help="learn skill parameters from a demonstration log")
    le.add_argument("--log", required=True)
    le.add_argument("--out", required=True, help="learned parameters JSON")
    le.set_defaults(fn=cmd_learn)

    r = sub.add_parser("run", help="run one episode; the exit code encodes the outcome")
    r.add_argument("--scenario")
    r.add_argument("--params", help="learned parameters JSON applied to both arms")
    r.add_argument("--angle", type=float, help="override the initial error (deg)")
    r.add_argument("--out", help="trajectory CSV")
    r.set_defaults(fn=cmd_run)

    s = sub.add_parser("sweep", help="convergence-region sweep over configurations and angles")
    s.add_argument("--scenario")
    s.add_argument("--configs", default="A,B,C,D,E")
    s.add_argument("--angles", default="4:16:1", help="start:stop:step (deg, inclusive) or a list")
    s.add_argument("--reps", type=int, default=5)
    s.add_argument("--perturb", type=float, default=0.0, help="per-repetition initial angle jitter (deg)")
    s.add_argument("--workers", type=int, help="worker processes (default: all cores)")
    s.add_argument("--check-invariants", action="store_true", help="record physical invariant margins per cell")
    s.add_argument("--out", required=True, help="report JSON")
    s.add_argument("--csv", help="table CSV (default: report path with .csv)")
    s.set_defaults(fn=cmd_sweep)

    m = sub.add_parser("metrics", help="mean joint-space motion metrics per configuration")
    m.add_argument("--scenario")
    m.add_argument("--configs", default="B,D,E")
    m.add_argument("--angle", type=float, default=8.0)
    m.add_argument("--reps", type=int, default=5)
    m.add_argument("--perturb", type=float, default=0.0)
    m.add_argument("--workers", type=int)
    m.add_argument("--out", required=True)
    m.set_defaults(fn=cmd_metrics)

    pd = sub.add_parser("plot-data", help="per-signal CSV series from a trajectory CSV")
    pd.add_argument("--traj", required=True)
    pd.add_argument("--out", required=True, help="output directory")
    pd.add_argument("--stride", type=int, default=10, help="keep every n-th sample")
    pd.set_defaults(fn=cmd_plot_data)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return int(args.fn(args))
    except (ScenarioError, LogError, PolicyFailure, ContactBlowUp, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
