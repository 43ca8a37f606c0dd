"""Trajectory export: flat CSV for plotting and a versioned JSON log.

The JSON log is what the learning pipeline consumes. It stores the master
tool path with the commanded wrench and measured twist, both taken at the
tool origin and expressed in world coordinates.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

LOG_SCHEMA_VERSION = 1

CSV_COLUMNS = (
    ["t"]
    + [f"master_{c}" for c in ("x", "y", "z", "qw", "qx", "qy", "qz")]
    + [f"slave_{c}" for c in ("x", "y", "z", "qw", "qx", "qy", "qz")]
    + [f"master_cmd_{c}" for c in ("fx", "fy", "fz", "tx", "ty", "tz")]
    + [f"slave_cmd_{c}" for c in ("fx", "fy", "fz", "tx", "ty", "tz")]
    + ["contact_count", "insertion_depth", "rel_angle", "contact_fx", "contact_fz"]
)


def _pose7(rows: np.ndarray) -> np.ndarray:
    """Planar ``(x, z, theta)`` rows to ``(x, y, z, qw, qx, qy, qz)``."""
    h = 0.5 * rows[:, 2]
    z0 = np.zeros(len(rows))
    return np.column_stack([rows[:, 0], z0, rows[:, 1], np.cos(h), z0, np.sin(h), z0])


def _wrench6(rows: np.ndarray) -> np.ndarray:
    z0 = np.zeros(len(rows))
    return np.column_stack([rows[:, 0], z0, rows[:, 1], z0, rows[:, 2], z0])


def tool_wrench(traj, arm: int = 0) -> np.ndarray:
    """Commanded planar wrench ``(fx, fz, ty)`` moved from the CoC to the tool origin."""
    ac = traj.cfg.master if arm == 0 else traj.cfg.slave
    cmd = traj.master_wrench if arm == 0 else traj.slave_wrench
    pose = traj.master_pose if arm == 0 else traj.slave_pose
    u, _, w = ac.coc_in_tool().position
    c, s = np.cos(pose[:, 2]), np.sin(pose[:, 2])
    # CoC point relative to the tool origin, world frame
    rx = u * c + w * s
    rz = -u * s + w * c
    ty = cmd[:, 2] + rz * cmd[:, 0] - rx * cmd[:, 1]
    return np.column_stack([cmd[:, 0], cmd[:, 1], ty])


def write_trajectory_csv(traj, path) -> Path:
    """One row per step; columns listed in :data:`CSV_COLUMNS`."""
    path = Path(path)
    data = np.column_stack(
        [
            traj.t,
            _pose7(traj.master_pose),
            _pose7(traj.slave_pose),
            _wrench6(traj.master_wrench),
            _wrench6(traj.slave_wrench),
            traj.contact_count,
            traj.depth,
            traj.rel_angle,
            traj.contact_force,
        ]
    )
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for row in data:
            w.writerow([repr(float(v)) for v in row])
    return path


def read_trajectory_csv(path) -> dict[str, np.ndarray]:
    """Columns of a trajectory CSV keyed by header name."""
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [[float(v) for v in line] for line in r]
    arr = np.asarray(rows, dtype=float).reshape(-1, len(header))
    return {name: arr[:, i] for i, name in enumerate(header)}


def trajectory_log(traj, stride: int = 1, noise_floor: float | None = None, mu_prior: float | None = None) -> dict:
    """JSON-ready log of the master arm, every ``stride``-th step."""
    idx = np.arange(0, len(traj), stride)
    pose = traj.master_pose[idx]
    wr = tool_wrench(traj, 0)[idx]
    tw = traj.master_twist_tool()[idx]
    z0 = np.zeros(len(idx))
    return {
        "schema_version": LOG_SCHEMA_VERSION,
        "kind": "trajectory_log",
        "dt": float(traj.cfg.dt * stride),
        "tool_offset": traj.cfg.master.tool_offset.position.tolist(),
        "noise_floor": noise_floor,
        "mu_prior": mu_prior,
        "t": traj.t[idx].tolist(),
        "position": _pose7(pose)[:, :3].tolist(),
        "quat": _pose7(pose)[:, 3:].tolist(),
        "force": np.column_stack([wr[:, 0], z0, wr[:, 1]]).tolist(),
        "torque": np.column_stack([z0, wr[:, 2], z0]).tolist(),
        "linear_velocity": np.column_stack([tw[:, 0], z0, tw[:, 1]]).tolist(),
        "angular_velocity": np.column_stack([z0, tw[:, 2], z0]).tolist(),
        "contact_count": traj.contact_count[idx].tolist(),
    }


def write_json(obj: dict, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=1, allow_nan=False))
    return path


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())

