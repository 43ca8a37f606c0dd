"""Per-signal CSV series from a trajectory CSV, for any plotting tool."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from ..sim.export import read_trajectory_csv

SERIES = {
    "rel_angle.csv": (("t", "s"), ("rel_angle_deg", "deg")),
    "insertion_depth.csv": (("t", "s"), ("insertion_depth_mm", "mm")),
    "contact_forces.csv": (("t", "s"), ("contact_fx", "N"), ("contact_fz", "N"), ("contact_norm", "N"),
                           ("contact_count", "-")),
    "commanded_wrench.csv": (("t", "s"), ("master_fx", "N"), ("master_fz", "N"), ("master_ty", "N m"),
                             ("slave_fx", "N"), ("slave_fz", "N"), ("slave_ty", "N m")),
}


def _write(path: Path, header, cols) -> Path:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"{name} [{unit}]" for name, unit in header])
        for row in np.column_stack(cols):
            w.writerow([repr(float(v)) for v in row])
    return path


def plot_data(traj_csv, out_dir, stride: int = 10) -> list[Path]:
    """Write the series listed in :data:`SERIES` into ``out_dir``.

    Every file starts with a header row naming each column and its unit.
    Rows are every ``stride``-th sample; the last sample is always kept.
    """
    d = read_trajectory_csv(traj_csv)
    n = len(d["t"])
    if n == 0:
        raise ValueError(f"{traj_csv}: trajectory is empty")
    idx = np.unique(np.r_[np.arange(0, n, stride), n - 1])
    d = {k: v[idx] for k, v in d.items()}
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t = d["t"]
    fx = d.get("contact_fx", np.zeros(len(t)))
    fz = d.get("contact_fz", np.zeros(len(t)))
    cols = {
        "rel_angle.csv": [t, np.degrees(d["rel_angle"])],
        "insertion_depth.csv": [t, 1e3 * d["insertion_depth"]],
        "contact_forces.csv": [t, fx, fz, np.hypot(fx, fz), d["contact_count"]],
        "commanded_wrench.csv": [t, d["master_cmd_fx"], d["master_cmd_fz"], d["master_cmd_ty"],
                                 d["slave_cmd_fx"], d["slave_cmd_fz"], d["slave_cmd_ty"]],
    }
    return [_write(out / name, SERIES[name], cols[name]) for name in SERIES]
