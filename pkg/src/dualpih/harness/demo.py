"""Scripted stand-in for a teleoperated demonstration.

The "human" pushes the master along its current tool z at constant speed
and yields along the compliant axes of the ground-truth stiffness. Its hand
is not perfectly steady: the target pose wobbles with a smooth random
process. The approach starts a few millimetres above the mouth so the log
opens with free-space motion, then the peg touches down, slides along the
mouth and the hole wall while it rotates into line, and is inserted.

The recorded log gets small out-of-plane sensor noise so that the 3-D
learning problem is not degenerate even though the dynamics are planar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .. import _kernels as K
from ..contact import ContactBlowUp
from ..control import TOOLTIP, StiffnessSpec
from ..frames import matrix_to_quat, quat_to_matrix, rotation_exp
from ..lfd.demolog import DemoLog, NoiseFloor
from ..sim.episode import ALIGNED, Outcome, Trajectory, _outcome, insertion_depth
from ..sim.export import _pose7, tool_wrench
from ..sim.world import SimConfig, _Packed, initial_record, initial_world, master_arm


class PolicyFailure(RuntimeError):
    """The scripted demonstrator never touched the environment."""


def ground_truth_stiffness() -> StiffnessSpec:
    """Compliant translation along tool x and rotation about tool y."""
    return StiffnessSpec.from_masks((True, False, False), (False, True, False))


@dataclass(frozen=True)
class DemoConfig:
    """Knobs of the scripted demonstrator (SI units, radians)."""

    tilt: float = math.radians(8.0)
    tip_offset: float = -0.002
    approach_gap: float = 0.005
    speed: float = 0.005
    wobble_pos: float = 0.001
    wobble_rot: float = math.radians(0.5)
    wobble_bandwidth: float = 0.1
    sensor_pos: float = 1e-6
    sensor_rot: float = 2e-5
    log_rate: float = 100.0
    max_duration: float = 30.0
    settle: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.speed <= 0:
            raise ValueError("demonstration speed must be positive")
        if self.wobble_bandwidth <= 0:
            raise ValueError("wobble bandwidth must be positive")
        if self.log_rate <= 0:
            raise ValueError("log rate must be positive")


@dataclass
class DemoResult:
    log: DemoLog
    trajectory: Trajectory
    outcome: Outcome
    contact_fraction: float


def demo_sim_config(base: SimConfig, demo: DemoConfig) -> SimConfig:
    """Simulator settings of the demonstration: ground-truth master at the tooltip."""
    if not base.slave.stiffness.is_fully_stiff():
        raise ValueError("the demonstration needs a fully stiff slave")
    master = master_arm(
        stiffness=ground_truth_stiffness(),
        coc=TOOLTIP,
        tool_offset=base.master.tool_offset,
        breakaway_force=base.master.breakaway_force,
        breakaway_torque=base.master.breakaway_torque,
        force_limit=base.master.force_limit,
        torque_limit=base.master.torque_limit,
    )
    return replace(
        base,
        master=master,
        initial_error=demo.tilt,
        tip_offset=demo.tip_offset,
        start_gap=demo.approach_gap,
        speed=demo.speed,
        perturb=0.0,
        max_duration=demo.max_duration,
    )


def smooth_wobble(rng, n: int, sigma: float, bandwidth: float, dt: float) -> np.ndarray:
    """Stationary Gaussian wobble of standard deviation ``sigma``.

    White noise through a critically damped second-order low-pass with
    corner ``bandwidth`` (Hz). Unlike a first-order process the result has
    a finite velocity, of standard deviation ``sigma * 2 pi bandwidth``, so
    a slow hand never jerks back and forth between log samples.
    """
    w = 2.0 * math.pi * bandwidth
    q = 2.0 * sigma * w**1.5
    x = rng.normal(0.0, sigma)
    v = rng.normal(0.0, sigma * w)
    out = np.empty(n)
    sub = max(1, int(math.ceil(dt * w * 20.0)))
    h = dt / sub
    for i in range(n):
        for _ in range(sub):
            v += (-2.0 * w * v - w * w * x) * h + q * math.sqrt(h) * rng.normal()
            x += v * h
        out[i] = x
    return out


def run_demo(base: SimConfig, demo: DemoConfig = DemoConfig()) -> DemoResult:
    """Simulate the demonstration and record its log.

    Every log period the feed is re-aimed along the current tool z and the
    target receives the next wobble increment. The run ends a short settle
    time after the peg is aligned and deep in the hole.
    """
    cfg = demo_sim_config(base, demo)
    rng = np.random.default_rng(demo.seed)
    world = initial_world(cfg)
    packed = _Packed(cfg)
    chunk = max(1, int(round(1.0 / (demo.log_rate * cfg.dt))))
    n_chunks = int(math.ceil(cfg.max_duration / (chunk * cfg.dt)))
    dtc = chunk * cfg.dt
    wob = np.column_stack([
        smooth_wobble(rng, n_chunks + 1, demo.wobble_pos, demo.wobble_bandwidth, dtc),
        smooth_wobble(rng, n_chunks + 1, demo.wobble_pos, demo.wobble_bandwidth, dtc),
        smooth_wobble(rng, n_chunks + 1, demo.wobble_rot, demo.wobble_bandwidth, dtc),
    ])
    data = np.zeros((n_chunks * chunk + 1, K.N_RECORD))
    data[0] = initial_record(world, cfg)
    n = 0
    done_at = None
    for c in range(n_chunks):
        th = world.pose[0, 2]
        packed.arm[0, K.P_FF_X] = demo.speed * math.sin(th)
        packed.arm[0, K.P_FF_Z] = demo.speed * math.cos(th)
        got = packed.run(world, chunk, data[n + 1 : n + 1 + chunk])
        if got < 0:
            raise ContactBlowUp(f"penetration at t={data[n - got, K.R_T]:.3f} s during the demonstration")
        world.k += chunk
        n += chunk
        world.target[0] += wob[c + 1] - wob[c]
        last = data[n]
        depth = insertion_depth(last[K.R_POSE_M : K.R_POSE_M + 3], last[K.R_POSE_S : K.R_POSE_S + 3])
        rel = last[K.R_POSE_M + 2] - last[K.R_POSE_S + 2]
        if done_at is None and depth >= cfg.success_depth and abs(rel) <= cfg.success_angle:
            done_at = n
        if done_at is not None and (n - done_at) * cfg.dt >= demo.settle:
            break
    rows = data[: n + 1]
    traj = Trajectory(rows, cfg)
    outcome = _outcome(ALIGNED if done_at is not None else "Timeout", rows)
    contact = float(np.mean(traj.contact_count > 0))
    if not np.any(traj.contact_count > 0):
        raise PolicyFailure("the demonstrator never made contact")
    log = record_log(traj, chunk, demo, rng)
    return DemoResult(log, traj, outcome, contact)


def record_log(traj: Trajectory, stride: int, demo: DemoConfig, rng) -> DemoLog:
    """Sample the master every ``stride`` steps and add out-of-plane sensor noise."""
    idx = np.arange(0, len(traj), stride)
    pose = _pose7(traj.master_pose[idx])
    pos = pose[:, :3].copy()
    quat = pose[:, 3:].copy()
    m = len(idx)
    # the out-of-plane error wanders like a random walk, so the sample to
    # sample increments carry white noise of the stated floor
    pos[:, 1] += np.cumsum(rng.normal(0.0, demo.sensor_pos, m))
    ex = np.cumsum(rng.normal(0.0, demo.sensor_rot, m))
    ez = np.cumsum(rng.normal(0.0, demo.sensor_rot, m))
    for i in range(m):
        quat[i] = matrix_to_quat(quat_to_matrix(quat[i]) @ rotation_exp([ex[i], 0.0, ez[i]]))
    wr = tool_wrench(traj, 0)[idx]
    tw = traj.master_twist_tool()[idx]
    z0 = np.zeros(m)
    ac = traj.cfg.master
    return DemoLog(
        traj.t[idx],
        pos,
        quat,
        np.column_stack([wr[:, 0], z0, wr[:, 1]]),
        np.column_stack([z0, wr[:, 2], z0]),
        np.column_stack([tw[:, 0], z0, tw[:, 1]]),
        np.column_stack([z0, tw[:, 2], z0]),
        ac.tool_offset.position,
        traj.cfg.contact.friction_mu,
        NoiseFloor(demo.sensor_pos, demo.sensor_rot) if demo.sensor_pos > 0 and demo.sensor_rot > 0 else None,
        traj.contact_count[idx],
    )
