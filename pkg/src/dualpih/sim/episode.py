"""Episode runner, trajectory container and the outcome classifier."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import _kernels as K
from ..contact import ContactBlowUp
from ..frames import Pose6
from .world import SimConfig, World, _Packed, initial_record, initial_world

ALIGNED = "Aligned"
JAMMED = "Jammed"
ROTATION_FAILURE = "RotationFailure"
TIMEOUT = "Timeout"
OUTCOME_KINDS = (ALIGNED, JAMMED, ROTATION_FAILURE, TIMEOUT)


@dataclass(frozen=True)
class Outcome:
    kind: str
    insertion_depth: float
    final_rel_angle: float
    duration: float

    def __post_init__(self):
        if self.kind not in OUTCOME_KINDS:
            raise ValueError(f"unknown outcome {self.kind!r}")

    @property
    def aligned(self) -> bool:
        return self.kind == ALIGNED


class Trajectory:
    """Columnar step log; row ``i`` is the state after step ``i``.

    Row 0 is the initial state at ``t = 0``. Columns follow the ``R_*``
    layout of the compiled kernel.
    """

    def __init__(self, data: np.ndarray, cfg: SimConfig):
        self.data = data
        self.cfg = cfg

    def __len__(self):
        return len(self.data)

    @property
    def t(self):
        return self.data[:, K.R_T]

    @property
    def master_pose(self):
        return self.data[:, K.R_POSE_M : K.R_POSE_M + 3]

    @property
    def slave_pose(self):
        return self.data[:, K.R_POSE_S : K.R_POSE_S + 3]

    @property
    def master_wrench(self):
        return self.data[:, K.R_CMD_M : K.R_CMD_M + 3]

    @property
    def slave_wrench(self):
        return self.data[:, K.R_CMD_S : K.R_CMD_S + 3]

    @property
    def contact_count(self):
        return self.data[:, K.R_NCONT].astype(int)

    @property
    def contact_force(self):
        """Summed environment force on the peg, world ``(fx, fz)``."""
        return self.data[:, K.R_FPEG : K.R_FPEG + 2]

    @property
    def rel_angle(self):
        return self.data[:, K.R_POSE_M + 2] - self.data[:, K.R_POSE_S + 2]

    @property
    def depth(self):
        return insertion_depth(self.master_pose, self.slave_pose)

    def master_twist_tool(self) -> np.ndarray:
        """Planar twist (vx, vz, omega) of the master tool origin per row."""
        return _tool_twist(self.data[:, K.R_VEL_M : K.R_VEL_M + 3], self.master_pose, self.cfg.master)

    def truncated(self, n: int) -> "Trajectory":
        return Trajectory(self.data[:n], self.cfg)

    def pose6(self, i: int, arm: int = 0) -> Pose6:
        row = self.master_pose[i] if arm == 0 else self.slave_pose[i]
        return Pose6.from_planar(*row)


def _tool_twist(vel_coc, pose, ac):
    u, _, w = ac.coc_in_tool().position
    th = pose[:, 2]
    c, s = np.cos(th), np.sin(th)
    # tool origin relative to the CoC point in world
    rx = -(u * c + w * s)
    rz = -(-u * s + w * c)
    om = vel_coc[:, 2]
    # planar rotation about y: v_p = v_c + omega * (rz, -rx)
    return np.column_stack([vel_coc[:, 0] + om * rz, vel_coc[:, 1] - om * rx, om])


def insertion_depth(master_pose, slave_pose):
    """Depth of the peg tip past the hole mouth along the hole axis."""
    mp = np.atleast_2d(master_pose)
    sp = np.atleast_2d(slave_pose)
    dx = mp[:, 0] - sp[:, 0]
    dz = mp[:, 1] - sp[:, 1]
    th = sp[:, 2]
    d = dx * np.sin(th) + dz * np.cos(th)
    return d if np.ndim(master_pose) > 1 else float(d[0])


def _check(traj_rows: np.ndarray, cfg: SimConfig, theta0: float, stride: int) -> str | None:
    """Classify at the last row of ``traj_rows`` (None means keep going)."""
    last = traj_rows[-1]
    depth = insertion_depth(last[K.R_POSE_M : K.R_POSE_M + 3], last[K.R_POSE_S : K.R_POSE_S + 3])
    rel = last[K.R_POSE_M + 2] - last[K.R_POSE_S + 2]
    if depth >= cfg.success_depth and abs(rel) <= cfg.success_angle:
        return ALIGNED
    if abs(rel) > abs(theta0) + cfg.rotation_margin:
        return ROTATION_FAILURE
    win = int(round(cfg.jam_window / cfg.dt))
    if len(traj_rows) > win:
        seg = traj_rows[-win - 1 :: stride]
        if np.all(seg[:, K.R_NCONT] > 0):
            d0 = insertion_depth(traj_rows[-win - 1, K.R_POSE_M : K.R_POSE_M + 3],
                                 traj_rows[-win - 1, K.R_POSE_S : K.R_POSE_S + 3])
            if depth - d0 < cfg.jam_progress:
                return JAMMED
    return None


def classify(traj: Trajectory, cfg: SimConfig | None = None) -> Outcome:
    """Label a finished (or synthetic) trajectory.

    The checks run at every ``check_interval`` boundary in time order and the
    first one that fires wins, so a trajectory that jams and is later pushed
    through is still reported as jammed, exactly like the online classifier.
    """
    cfg = cfg or traj.cfg
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    rows = traj.data
    theta0 = rows[0, K.R_POSE_M + 2] - rows[0, K.R_POSE_S + 2]
    stride = max(1, int(round(cfg.check_interval / cfg.dt)))
    for end in range(stride, len(rows), stride):
        kind = _check(rows[: end + 1], cfg, theta0, stride)
        if kind is not None:
            return _outcome(kind, rows[: end + 1])
    kind = _check(rows, cfg, theta0, stride) or TIMEOUT
    return _outcome(kind, rows)


def _outcome(kind, rows):
    last = rows[-1]
    return Outcome(
        kind,
        insertion_depth(last[K.R_POSE_M : K.R_POSE_M + 3], last[K.R_POSE_S : K.R_POSE_S + 3]),
        float(last[K.R_POSE_M + 2] - last[K.R_POSE_S + 2]),
        float(last[K.R_T]),
    )


def run_episode(cfg: SimConfig, world: World | None = None) -> tuple[Trajectory, Outcome]:
    """Step until the classifier fires or ``max_duration`` elapses."""
    world = (world or initial_world(cfg)).copy()
    packed = _Packed(cfg)
    n_total = int(round(cfg.max_duration / cfg.dt))
    stride = max(1, int(round(cfg.check_interval / cfg.dt)))
    data = np.zeros((n_total + 1, K.N_RECORD))
    data[0] = initial_record(world, cfg)
    theta0 = world.pose[0, 2] - world.pose[1, 2]
    n = 0
    kind = None
    while n < n_total:
        m = min(stride, n_total - n)
        got = packed.run(world, m, data[n + 1 : n + 1 + m])
        if got < 0:
            bad = -got
            raise ContactBlowUp(
                f"penetration {data[n + bad, K.R_MAXPEN]:.4g} m at t={data[n + bad, K.R_T]:.3f} s"
            )
        world.k += m
        n += m
        kind = _check(data[: n + 1], cfg, theta0, stride)
        if kind is not None:
            break
    rows = data[: n + 1]
    return Trajectory(rows, cfg), _outcome(kind or TIMEOUT, rows)
