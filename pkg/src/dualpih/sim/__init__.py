"""Quasi-static dual-arm simulation."""

from .episode import (
    ALIGNED,
    JAMMED,
    OUTCOME_KINDS,
    ROTATION_FAILURE,
    TIMEOUT,
    Outcome,
    Trajectory,
    classify,
    insertion_depth,
    run_episode,
)
from .world import ArmConfig, ArmState, SimConfig, World, initial_world, master_arm, slave_arm, step
from .export import read_trajectory_csv, trajectory_log, write_trajectory_csv
from .invariants import InvariantReport, check_trajectory
from .kinematics import ArmMount, Unreachable, fk_3r, ik_3r
from .metrics import MotionMetrics, motion_metrics
from .world import NOMINAL, TOOL
