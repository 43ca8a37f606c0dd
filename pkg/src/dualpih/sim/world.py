"""Quasi-static dual-arm stepper.

Each arm is an impedance-controlled rigid workpiece whose centre of
compliance (CoC) moves with velocity ``D^-1 (W_spring + W_contact)``: the
controller damping doubles as the admittance. Blocks (force or torque) that
are at rest stay at rest until their wrench reaches a breakaway threshold,
which stands in for joint stiction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .. import _kernels as K
from ..contact import ContactBlowUp, ContactParams, HoleGeometry, PegGeometry, PlanarContactModel, clearance
from ..control import (
    MASTER,
    SLAVE,
    TOOLTIP,
    WRIST,
    ControllerState,
    StiffnessSpec,
    coc_offset,
)
from ..frames import Pose6, Twist, UnitDir, compose, inverse


@dataclass(frozen=True)
class ArmConfig:
    stiffness: StiffnessSpec
    coc: str = TOOLTIP
    tool_offset: Pose6 = field(default_factory=lambda: Pose6.translation(z=0.080))
    breakaway_force: float = 2.0
    breakaway_torque: float = 0.02
    force_limit: float = 30.0
    torque_limit: float = 3.0

    def __post_init__(self):
        if self.coc not in (WRIST, TOOLTIP):
            raise ValueError(f"unknown CoC choice {self.coc!r}")
        R = self.tool_offset.rotation
        if not np.allclose(R, np.eye(3)) or abs(self.tool_offset.position[1]) > 0:
            raise ValueError("tool offset must be an in-plane translation")

    @property
    def admittance_gains(self) -> tuple[np.ndarray, np.ndarray]:
        """Velocity per unit wrench at the CoC (inverse damping)."""
        return np.linalg.inv(self.stiffness.D_f), np.linalg.inv(self.stiffness.D_theta)

    def coc_in_tool(self) -> Pose6:
        return compose(inverse(self.tool_offset), coc_offset(self.coc, self.tool_offset))


def master_arm(**kw) -> ArmConfig:
    kw.setdefault("stiffness", StiffnessSpec.stiff())
    kw.setdefault("tool_offset", Pose6.translation(z=0.080))
    kw.setdefault("breakaway_force", 2.0)
    kw.setdefault("breakaway_torque", 0.02)
    return ArmConfig(**kw)


def slave_arm(**kw) -> ArmConfig:
    kw.setdefault("stiffness", StiffnessSpec.stiff())
    kw.setdefault("tool_offset", Pose6.translation(z=-0.080))
    kw.setdefault("breakaway_force", 4.0)
    kw.setdefault("breakaway_torque", 0.2)
    return ArmConfig(**kw)


NOMINAL = "nominal"
TOOL = "tool"


@dataclass(frozen=True)
class SimConfig:
    """Everything one episode needs.

    ``initial_error`` tilts the master about its tooltip. ``feed_frame``
    says where ``desired_dir`` lives: ``nominal`` is the master tool frame
    without the orientation error (the tooltip is driven along the hole
    axis), ``tool`` is the tilted initial tool frame. ``tip_offset`` shifts
    the starting tooltip sideways off the hole axis, modelling tooltip
    calibration error.
    """

    master: ArmConfig = field(default_factory=master_arm)
    slave: ArmConfig = field(default_factory=slave_arm)
    initial_error: float = 0.0
    speed: float = 0.005
    desired_dir: tuple = (0.0, 0.0, 1.0)
    feed_frame: str = NOMINAL
    tip_offset: float = 0.0
    dt: float = 1e-3
    max_duration: float = 40.0
    peg: PegGeometry = field(default_factory=PegGeometry)
    hole: HoleGeometry = field(default_factory=HoleGeometry)
    contact: ContactParams = field(default_factory=ContactParams)
    start_gap: float = 0.0005
    seed: int = 0
    perturb: float = 0.0
    rest_speed: float = 1e-4
    rest_rate: float = 1e-3
    success_depth_frac: float = 0.75
    success_angle: float = math.radians(1.0)
    jam_progress: float = 0.5e-3
    jam_window: float = 2.0
    rotation_margin: float = math.radians(10.0)
    check_interval: float = 0.1

    def __post_init__(self):
        if not (0 < self.dt <= 1e-3):
            raise ValueError("dt must be in (0, 1 ms]")
        if self.max_duration <= 0:
            raise ValueError("max_duration must be positive")
        if self.speed < 0:
            raise ValueError("speed must be non-negative")
        if self.feed_frame not in (NOMINAL, TOOL):
            raise ValueError(f"unknown feed frame {self.feed_frame!r}")

    @property
    def success_depth(self) -> float:
        return self.success_depth_frac * self.peg.length

    def with_(self, **kw) -> "SimConfig":
        return replace(self, **kw)


@dataclass(frozen=True)
class ArmState:
    wrist_pose: Pose6
    tool_pose: Pose6
    twist: Twist
    controller: ControllerState
    stiffness: StiffnessSpec
    static_breakaway: tuple[float, float]
    held: tuple[bool, bool] = (False, False)


@dataclass
class World:
    """Mutable-free snapshot of both arms; ``step`` returns a new one."""

    k: int
    pose: np.ndarray  # (2, 3) tool (x, z, theta)
    target: np.ndarray  # (2, 3) CoC target
    vel: np.ndarray  # (2, 3) CoC twist
    held: np.ndarray  # (2, 2) force / torque block at rest

    def copy(self) -> "World":
        return World(self.k, self.pose.copy(), self.target.copy(), self.vel.copy(), self.held.copy())

    def time(self, cfg: SimConfig) -> float:
        return self.k * cfg.dt

    def arm(self, i: int, cfg: SimConfig) -> ArmState:
        ac = cfg.master if i == 0 else cfg.slave
        tool = Pose6.from_planar(*self.pose[i])
        wrist = compose(tool, inverse(ac.tool_offset))
        tgt = Pose6.from_planar(*self.target[i])
        cx, cz = _coc_point(self.pose[i], ac)
        tw_coc = self.vel[i]
        # twist of the tool origin
        rx, rz = self.pose[i, 0] - cx, self.pose[i, 1] - cz
        lin = np.array([tw_coc[0] + tw_coc[2] * rz, 0.0, tw_coc[1] - tw_coc[2] * rx])
        ctrl = ControllerState(
            tgt,
            UnitDir(_ff_dir(cfg) if i == 0 else np.array([0.0, 0.0, 1.0])),
            cfg.speed if i == 0 else 0.0,
            cfg.dt,
            MASTER if i == 0 else SLAVE,
        )
        return ArmState(
            wrist,
            tool,
            Twist(lin, [0.0, tw_coc[2], 0.0]),
            ctrl,
            ac.stiffness,
            (ac.breakaway_force, ac.breakaway_torque),
            (bool(self.held[i, 0]), bool(self.held[i, 1])),
        )

    @property
    def master_tool(self) -> Pose6:
        return Pose6.from_planar(*self.pose[0])

    @property
    def slave_tool(self) -> Pose6:
        return Pose6.from_planar(*self.pose[1])


def _coc_point(pose_row, ac: ArmConfig) -> tuple[float, float]:
    u, _, w = ac.coc_in_tool().position
    x, z, th = pose_row
    c, s = math.cos(th), math.sin(th)
    return x + u * c + w * s, z - u * s + w * c


def _ff_dir(cfg: SimConfig) -> np.ndarray:
    """Feed-forward direction in world, restricted to the working plane."""
    d = np.asarray(cfg.desired_dir, dtype=float)
    du, dw = d[0], d[2]
    n = math.hypot(du, dw)
    if n < 1e-12:
        raise ValueError("desired direction has no in-plane component")
    du, dw = du / n, dw / n
    th = cfg.initial_error if cfg.feed_frame == TOOL else 0.0
    c, s = math.cos(th), math.sin(th)
    return np.array([du * c + dw * s, 0.0, -du * s + dw * c])


def initial_master_pose(cfg: SimConfig, theta: float | None = None) -> tuple[float, float, float]:
    """Peg tip ``tip_offset`` off the hole axis, tilted by ``theta``, with its
    lowest vertex ``start_gap`` above the mouth plane."""
    th = cfg.initial_error if theta is None else theta
    c, s = math.cos(th), math.sin(th)
    deepest = max(-u * s + w * c for u, w in cfg.peg.vertices())
    return (cfg.tip_offset, -cfg.start_gap - deepest, th)


def initial_world(cfg: SimConfig) -> World:
    th0 = cfg.initial_error
    x0, z0, _ = initial_master_pose(cfg)
    if cfg.perturb > 0:
        rng = np.random.default_rng(cfg.seed)
        th0 = th0 + rng.normal(0.0, cfg.perturb)
        x0, z0, _ = initial_master_pose(cfg, th0)
    pose = np.array([[x0, z0, th0], [0.0, 0.0, 0.0]])
    target = np.zeros((2, 3))
    for i, ac in enumerate((cfg.master, cfg.slave)):
        cx, cz = _coc_point(pose[i], ac)
        target[i] = (cx, cz, pose[i, 2])
    return World(0, pose, target, np.zeros((2, 3)), np.ones((2, 2), dtype=np.bool_))


class _Packed:
    """Arrays handed to the compiled kernel, built once per config."""

    def __init__(self, cfg: SimConfig):
        self.model = PlanarContactModel(cfg.peg, cfg.hole)
        arm = np.zeros((2, K.N_ARM_PARAMS))
        ff = _ff_dir(cfg) * cfg.speed
        for i, ac in enumerate((cfg.master, cfg.slave)):
            u, _, w = ac.coc_in_tool().position
            sp = ac.stiffness
            arm[i, K.P_COC_U] = u
            arm[i, K.P_COC_W] = w
            arm[i, K.P_K : K.P_K + 4] = sp.K_f[np.ix_([0, 2], [0, 2])].ravel()
            arm[i, K.P_KTH] = sp.K_theta[1, 1]
            arm[i, K.P_D : K.P_D + 4] = sp.D_f[np.ix_([0, 2], [0, 2])].ravel()
            arm[i, K.P_DTH] = sp.D_theta[1, 1]
            arm[i, K.P_FLIM] = ac.force_limit
            arm[i, K.P_TLIM] = ac.torque_limit
            arm[i, K.P_BRK_F] = ac.breakaway_force
            arm[i, K.P_BRK_T] = ac.breakaway_torque
            if i == 0:
                arm[i, K.P_FF_X] = ff[0]
                arm[i, K.P_FF_Z] = ff[2]
        self.arm = arm
        sim = np.zeros(K.N_SIM_PARAMS)
        sim[K.S_DT] = cfg.dt
        sim[K.S_KC] = cfg.contact.stiffness
        sim[K.S_CC] = cfg.contact.damping
        sim[K.S_MU] = cfg.contact.friction_mu
        sim[K.S_EPS] = cfg.contact.friction_vel_eps
        sim[K.S_VREST_F] = cfg.rest_speed
        sim[K.S_VREST_T] = cfg.rest_rate
        sim[K.S_BLOWUP] = self.model.blowup
        self.sim = sim

    def run(self, world: World, n: int, out: np.ndarray) -> int:
        return K.run_steps(n, world.k, world.pose, world.target, world.vel, world.held, self.arm, self.sim,
                           *self.model.arrays(), out)


def step(world: World, cfg: SimConfig, packed: _Packed | None = None) -> World:
    """One closed-loop step: feed-forward, impedance + contact wrench, admittance, integrate."""
    packed = packed or _Packed(cfg)
    w = world.copy()
    rec = np.zeros((1, K.N_RECORD))
    if packed.run(w, 1, rec) < 0:
        raise ContactBlowUp(f"penetration {rec[0, K.R_MAXPEN]:.4g} m exceeds {packed.model.blowup:.4g} m")
    w.k += 1
    return w


def initial_record(world: World, cfg: SimConfig) -> np.ndarray:
    row = np.zeros(K.N_RECORD)
    row[K.R_POSE_M : K.R_POSE_M + 3] = world.pose[0]
    row[K.R_POSE_S : K.R_POSE_S + 3] = world.pose[1]
    row[K.R_TARGET : K.R_TARGET + 2] = world.target[0, :2]
    return row
