"""Cartesian impedance law, feed-forward target generator and CoC handling."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .frames import Pose6, Twist, UnitDir, Wrench, compose, orientation_error

MASTER = "master"
SLAVE = "slave"

WRIST = "wrist"
TOOLTIP = "tooltip"
COC_CHOICES = (WRIST, TOOLTIP)

K_F_STIFF = 1000.0
K_THETA_STIFF = 30.0
VIRTUAL_MASS = 2.0
VIRTUAL_INERTIA = 0.02
# damping on zero-stiffness axes, where critical damping is undefined
COMPLIANT_D_F = 50.0
COMPLIANT_D_THETA = 0.03


def critical_damping(k: float, m: float) -> float:
    return 2.0 * np.sqrt(k * m)


@dataclass(frozen=True)
class StiffnessSpec:
    """Stiffness and damping expressed in the CoC frame.

    A zero stiffness entry marks a compliant axis. Damping stays positive on
    every axis so that compliant directions remain overdamped.
    """

    K_f: np.ndarray
    K_theta: np.ndarray
    D_f: np.ndarray
    D_theta: np.ndarray
    coc_offset: Pose6 = field(default_factory=Pose6)

    def __post_init__(self):
        for name in ("K_f", "K_theta", "D_f", "D_theta"):
            M = np.array(getattr(self, name), dtype=float).reshape(3, 3)
            if not np.allclose(M, M.T, atol=1e-9):
                raise ValueError(f"{name} must be symmetric")
            object.__setattr__(self, name, M)
        for name in ("K_f", "K_theta"):
            if np.linalg.eigvalsh(getattr(self, name)).min() < -1e-9:
                raise ValueError(f"{name} must be positive semidefinite")
        for name in ("D_f", "D_theta"):
            if np.linalg.eigvalsh(getattr(self, name)).min() <= 0.0:
                raise ValueError(f"{name} must be positive definite")

    @classmethod
    def from_masks(
        cls,
        trans_compliant=(False, False, False),
        rot_compliant=(False, False, False),
        k_f: float = K_F_STIFF,
        k_theta: float = K_THETA_STIFF,
        mass: float = VIRTUAL_MASS,
        inertia: float = VIRTUAL_INERTIA,
        coc_offset: Pose6 | None = None,
        compliant_d_f: float = COMPLIANT_D_F,
        compliant_d_theta: float = COMPLIANT_D_THETA,
    ) -> "StiffnessSpec":
        """Diagonal spec from compliance masks.

        Stiff axes are critically damped against the virtual mass/inertia;
        compliant axes get the separate ``compliant_d_*`` damping.
        """
        tm = np.asarray(trans_compliant, dtype=bool)
        rm = np.asarray(rot_compliant, dtype=bool)
        return cls(
            np.diag(np.where(tm, 0.0, k_f)),
            np.diag(np.where(rm, 0.0, k_theta)),
            np.diag(np.where(tm, compliant_d_f, critical_damping(k_f, mass))),
            np.diag(np.where(rm, compliant_d_theta, critical_damping(k_theta, inertia))),
            coc_offset if coc_offset is not None else Pose6(),
        )

    @classmethod
    def from_axes(
        cls,
        trans_axes=(),
        rot_axes=(),
        k_f: float = K_F_STIFF,
        k_theta: float = K_THETA_STIFF,
        mass: float = VIRTUAL_MASS,
        inertia: float = VIRTUAL_INERTIA,
        coc_offset: Pose6 | None = None,
        compliant_d_f: float = COMPLIANT_D_F,
        compliant_d_theta: float = COMPLIANT_D_THETA,
    ) -> "StiffnessSpec":
        """Spec with zero stiffness along arbitrary orthonormal compliant axes.

        With ``A`` the matrix whose columns are the compliant axes, the
        stiffness is ``k (I - A A^T)``: exactly zero along every compliant
        axis and ``k`` on the orthogonal complement. Damping uses the same
        split with the compliant damping on ``span(A)``.
        """

        def blocks(axes, k, d_stiff, d_comp):
            A = np.asarray(axes, dtype=float).reshape(-1, 3).T
            if A.shape[1] and not np.allclose(A.T @ A, np.eye(A.shape[1]), atol=1e-9):
                raise ValueError("compliant axes must be orthonormal")
            P = A @ A.T
            Q = np.eye(3) - P
            return k * Q, d_stiff * Q + d_comp * P

        Kf, Df = blocks(trans_axes, k_f, critical_damping(k_f, mass), compliant_d_f)
        Kt, Dt = blocks(rot_axes, k_theta, critical_damping(k_theta, inertia), compliant_d_theta)
        return cls(Kf, Kt, Df, Dt, coc_offset if coc_offset is not None else Pose6())

    @classmethod
    def stiff(cls, **kw) -> "StiffnessSpec":
        return cls.from_masks(**kw)

    def compliant_mask(self, tol: float = 1e-12) -> tuple[tuple[bool, ...], tuple[bool, ...]]:
        return (
            tuple(bool(v) for v in np.abs(np.diag(self.K_f)) <= tol),
            tuple(bool(v) for v in np.abs(np.diag(self.K_theta)) <= tol),
        )

    def is_fully_stiff(self) -> bool:
        return bool(np.linalg.eigvalsh(self.K_f).min() > 0 and np.linalg.eigvalsh(self.K_theta).min() > 0)


@dataclass(frozen=True)
class ControllerState:
    target: Pose6
    desired_dir: UnitDir
    speed: float
    dt: float
    role: str = MASTER

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.speed < 0:
            raise ValueError("speed must be non-negative")
        if self.role not in (MASTER, SLAVE):
            raise ValueError(f"unknown role {self.role!r}")
        if self.role == SLAVE and self.speed != 0.0:
            raise ValueError("the slave is commanded to hold its pose (speed 0)")


def feedforward_step(s: ControllerState) -> ControllerState:
    """Advance the target position by ``dir * speed * dt``; orientation is kept."""
    if s.role != MASTER:
        raise ValueError("only the master follows a feed-forward trajectory")
    p = s.target.position + s.desired_dir.dir * (s.speed * s.dt)
    return replace(s, target=Pose6(p, s.target.quat))


def impedance_wrench(s: ControllerState, spec: StiffnessSpec, current: Pose6, twist: Twist) -> Wrench:
    """Commanded wrench at the CoC, world frame.

    ``current`` is the CoC pose and ``twist`` its velocity. Stiffness and
    damping act in the current CoC frame; damping opposes the measured motion.
    """
    R = current.rotation
    e = s.target.position - current.position
    F = R @ (spec.K_f @ (R.T @ e)) - R @ (spec.D_f @ (R.T @ twist.linear))
    r = orientation_error(s.target, current)
    T = R @ (spec.K_theta @ (R.T @ r)) - R @ (spec.D_theta @ (R.T @ twist.angular))
    return Wrench(F, T, current.position)


def clamp_commanded_wrench(w: Wrench, force_limit: float, torque_limit: float) -> Wrench:
    """Scale the force and torque blocks independently onto their norm limits."""
    f, t = w.force, w.torque
    nf, nt = np.linalg.norm(f), np.linalg.norm(t)
    if nf > force_limit:
        f = f * (force_limit / nf)
    if nt > torque_limit:
        t = t * (torque_limit / nt)
    return Wrench(f, t, w.application_point)


def coc_offset(coc: str, tool_offset: Pose6) -> Pose6:
    """Pose of the CoC frame relative to the wrist."""
    if coc == WRIST:
        return Pose6()
    if coc == TOOLTIP:
        return tool_offset
    raise ValueError(f"unknown CoC choice {coc!r}")


def coc_pose(wrist: Pose6, coc: str, tool_offset: Pose6) -> Pose6:
    return compose(wrist, coc_offset(coc, tool_offset))
