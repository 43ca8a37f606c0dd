"""Joint-space motion metrics of an episode."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .kinematics import MASTER_MOUNT, SLAVE_MOUNT, ArmMount, _wrap, joint_path


@dataclass(frozen=True)
class ArmMetrics:
    joint_dist: float
    weighted_joint_dist: float
    max_joint_dist: float

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class MotionMetrics:
    master: ArmMetrics
    slave: ArmMetrics
    duration: float

    @property
    def joint_dist_sum(self) -> float:
        return self.master.joint_dist + self.slave.joint_dist

    def as_row(self) -> dict:
        row = {f"master_{k}": v for k, v in self.master.as_dict().items()}
        row.update({f"slave_{k}": v for k, v in self.slave.as_dict().items()})
        row["joint_dist_sum"] = self.joint_dist_sum
        row["duration"] = self.duration
        return row


def link_weights(links) -> np.ndarray:
    """Share of the total chain length distal to each joint."""
    L = np.asarray(links, dtype=float)
    return np.cumsum(L[::-1])[::-1] / L.sum()


def joint_metrics(q: np.ndarray, links) -> ArmMetrics:
    """Covered joint distance of a ``(n, 3)`` joint path."""
    if len(q) < 2:
        return ArmMetrics(0.0, 0.0, 0.0)
    per_joint = np.abs(_wrap(np.diff(q, axis=0))).sum(axis=0)
    return ArmMetrics(
        float(per_joint.sum()),
        float(per_joint @ link_weights(links)),
        float(per_joint.max()),
    )


def motion_metrics(traj, master_mount: ArmMount = MASTER_MOUNT, slave_mount: ArmMount = SLAVE_MOUNT,
                   stride: int = 10) -> MotionMetrics:
    """Joint distances of both arms and the episode duration.

    The tool paths are sampled every ``stride`` steps (10 ms by default);
    that is far below the time scale of the motion, and the end row is
    always included. Duration is the trajectory length, i.e. the time until
    the classifier fired.
    """
    n = len(traj)
    idx = np.unique(np.r_[np.arange(0, n, stride), n - 1])
    cfg = traj.cfg
    out = []
    for poses, ac, mount in ((traj.master_pose, cfg.master, master_mount), (traj.slave_pose, cfg.slave, slave_mount)):
        q = joint_path(poses[idx], float(ac.tool_offset.position[2]), mount)
        out.append(joint_metrics(q, mount.links))
    return MotionMetrics(out[0], out[1], float(traj.t[-1]))
