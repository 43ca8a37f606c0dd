"""Single episodes, A-E sweeps and motion-metric tables."""

from __future__ import annotations

import hashlib
import math
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..sim.episode import ALIGNED, JAMMED, ROTATION_FAILURE, TIMEOUT, run_episode
from ..sim.invariants import check_trajectory
from ..sim.metrics import motion_metrics
from .scenario import Scenario, configure

EXIT_CODES = {ALIGNED: 0, JAMMED: 2, ROTATION_FAILURE: 3, TIMEOUT: 4}
EXIT_ERROR = 1
SWEEP_SCHEMA_VERSION = 1


def exit_code(kind: str) -> int:
    return EXIT_CODES.get(kind, EXIT_ERROR)


def run_scenario(scn: Scenario):
    """Run one episode; returns ``(trajectory, outcome)``."""
    return run_episode(scn.sim_config())


def cell_seed(base: int, config: str, angle: float, rep: int) -> int:
    """Deterministic seed of one sweep cell, independent of run order."""
    return (int(base) * 1_000_003 + zlib.crc32(f"{config}:{angle:g}:{rep}".encode())) % (2**31 - 1)


def trajectory_digest(traj) -> str:
    return hashlib.sha256(np.ascontiguousarray(traj.data).tobytes()).hexdigest()


@dataclass(frozen=True)
class CellJob:
    scenario: Scenario
    config: str
    angle: float
    rep: int
    check_invariants: bool = False
    with_metrics: bool = False


def run_cell(job: CellJob) -> dict:
    scn = configure(job.scenario, job.config).with_(
        initial_error_deg=float(job.angle),
        seed=cell_seed(job.scenario.seed, job.config, job.angle, job.rep),
    )
    traj, out = run_scenario(scn)
    row = {
        "config": job.config,
        "angle_deg": float(job.angle),
        "rep": job.rep,
        "seed": scn.seed,
        "outcome": out.kind,
        "insertion_depth": out.insertion_depth,
        "final_rel_angle_deg": math.degrees(out.final_rel_angle),
        "duration": out.duration,
        "digest": trajectory_digest(traj),
    }
    if job.check_invariants:
        rep = check_trajectory(traj)
        row["invariants"] = {
            "cone": float(rep.cone),
            "adhesion": float(rep.adhesion),
            "planarity": float(rep.planarity),
            "tunneling": int(rep.tunneling),
            "stiction": float(rep.stiction),
            "quasi_static": float(rep.quasi_static),
            "ok": rep.ok(),
        }
    if job.with_metrics:
        row["metrics"] = motion_metrics(traj).as_row()
    return row


def _map(jobs, workers: int | None):
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(jobs) <= 1:
        return [run_cell(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(run_cell, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def parse_angles(spec: str) -> list[float]:
    """``"4:16:1"`` (start:stop:step, inclusive) or a comma list."""
    spec = spec.strip()
    if ":" in spec:
        parts = [float(p) for p in spec.split(":")]
        if len(parts) == 2:
            parts.append(1.0)
        if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
            raise ValueError(f"bad angle range {spec!r}")
        start, stop, step = parts
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 9) for i in range(n)]
    return [float(p) for p in spec.split(",") if p.strip()]


def summarize(cells: list[dict], configs, angles) -> dict:
    """Per configuration: outcomes per angle and the largest angle reached.

    Angles are walked upwards and the scan stops at the first angle where
    not every repetition aligned. ``max_angle_deg`` is ``None`` when the
    first tested angle already fails.
    """
    out = {}
    for c in configs:
        per = {}
        for a in angles:
            rows = [r for r in cells if r["config"] == c and r["angle_deg"] == a]
            kinds = {}
            for r in rows:
                kinds[r["outcome"]] = kinds.get(r["outcome"], 0) + 1
            aligned = kinds.get(ALIGNED, 0)
            per[f"{a:g}"] = {
                "aligned": aligned,
                "reps": len(rows),
                "unanimous": len(kinds) <= 1,
                "outcomes": kinds,
            }
        best = None
        first_fail = None
        for a in angles:
            cell = per[f"{a:g}"]
            if cell["reps"] and cell["aligned"] == cell["reps"]:
                best = a
            else:
                first_fail = a
                break
        out[c] = {"max_angle_deg": best, "first_failure_deg": first_fail, "per_angle": per}
    return out


def ordering_checks(summary: dict, smallest: float) -> dict:
    """The expected convergence-region ordering between configurations."""

    def m(c):
        v = summary.get(c, {}).get("max_angle_deg")
        return -math.inf if v is None else v

    have = all(c in summary for c in "ABCDE")
    if not have:
        return {}
    return {
        "C_fails_at_smallest": summary["C"]["max_angle_deg"] is None and summary["C"]["first_failure_deg"] == smallest,
        "C_lt_A": m("C") < m("A"),
        "A_lt_D": m("A") < m("D"),
        "D_le_B": m("D") <= m("B"),
        "D_le_E": m("D") <= m("E"),
    }


def sweep(scn: Scenario, configs, angles, reps: int = 5, perturb_deg: float = 0.0,
          workers: int | None = None, check_invariants: bool = False) -> dict:
    """Run every (configuration, angle, repetition) cell and summarise."""
    if reps < 1:
        raise ValueError("reps must be at least 1")
    base = scn.with_(perturb_deg=perturb_deg)
    jobs = [CellJob(base, c, a, r, check_invariants) for c in configs for a in angles for r in range(reps)]
    cells = _map(jobs, workers)
    summary = summarize(cells, configs, angles)
    return {
        "schema_version": SWEEP_SCHEMA_VERSION,
        "kind": "sweep_report",
        "configs": list(configs),
        "angles_deg": list(angles),
        "reps": reps,
        "perturb_deg": perturb_deg,
        "base_seed": scn.seed,
        "summary": summary,
        "ordering": ordering_checks(summary, min(angles)),
        "cells": cells,
    }


def sweep_table(report: dict) -> list[dict]:
    """One row per configuration in the layout of a convergence-region table."""
    rows = []
    for c in report["configs"]:
        s = report["summary"][c]
        row = {"config": c, "max_angle_deg": "" if s["max_angle_deg"] is None else s["max_angle_deg"],
               "first_failure_deg": "" if s["first_failure_deg"] is None else s["first_failure_deg"]}
        for a, cell in s["per_angle"].items():
            row[f"aligned_at_{a}"] = f"{cell['aligned']}/{cell['reps']}"
        rows.append(row)
    return rows


METRIC_KEYS = (
    "master_joint_dist", "master_weighted_joint_dist", "master_max_joint_dist",
    "slave_joint_dist", "slave_weighted_joint_dist", "slave_max_joint_dist",
    "joint_dist_sum", "duration",
)


def metrics_table(scn: Scenario, configs, angle: float, reps: int = 5, perturb_deg: float = 0.0,
                  workers: int | None = None) -> list[dict]:
    """Mean motion metrics per configuration over ``reps`` runs at one angle."""
    base = scn.with_(perturb_deg=perturb_deg)
    jobs = [CellJob(base, c, angle, r, False, True) for c in configs for r in range(reps)]
    cells = _map(jobs, workers)
    rows = []
    for c in configs:
        mine = [r for r in cells if r["config"] == c]
        row = {"config": c, "angle_deg": angle, "reps": len(mine),
               "aligned": sum(r["outcome"] == ALIGNED for r in mine)}
        for k in METRIC_KEYS:
            vals = np.array([r["metrics"][k] for r in mine])
            row[k] = float(vals.mean())
            row[k + "_spread"] = float(np.ptp(vals) / abs(vals.mean())) if vals.mean() != 0 else 0.0
        rows.append(row)
    return rows
