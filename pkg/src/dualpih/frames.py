"""Rigid-body poses, rotations and wrench/stiffness frame transport.

Conventions
-----------
* Quaternions are stored scalar-first ``(w, x, y, z)``.
* Twists and wrenches are ordered linear part first: ``(v, w)`` and ``(f, tau)``.
* The working plane is world x-z; planar rotations are about +y, so a planar
  pose ``(x, z, theta)`` maps tool z onto ``(sin theta, 0, cos theta)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_EPS = 1e-12


def _vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=float).reshape(3)
    return a.copy()


def hat(w) -> np.ndarray:
    """Skew-symmetric matrix such that ``hat(w) @ v == cross(w, v)``."""
    x, y, z = w
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee(W: np.ndarray) -> np.ndarray:
    return 0.5 * np.array([W[2, 1] - W[1, 2], W[0, 2] - W[2, 0], W[1, 0] - W[0, 1]])


# ---------------------------------------------------------------------------
# rotations
# ---------------------------------------------------------------------------

def rotation_exp(rotvec) -> np.ndarray:
    """Rodrigues formula: axis-angle vector to rotation matrix."""
    w = np.asarray(rotvec, dtype=float)
    th = float(np.linalg.norm(w))
    W = hat(w)
    if th < 1e-8:
        return np.eye(3) + W + 0.5 * (W @ W)
    return np.eye(3) + (np.sin(th) / th) * W + ((1.0 - np.cos(th)) / th**2) * (W @ W)


def rotation_log(R: np.ndarray) -> np.ndarray:
    """Axis-angle vector of a rotation matrix, angle in ``[0, pi]``.

    At exactly ``pi`` the axis sign is fixed so that its largest-magnitude
    component is positive.
    """
    R = np.asarray(R, dtype=float)
    s = vee(R - R.T)  # 2 sin(th) * axis
    c = float(np.clip(0.5 * (np.trace(R) - 1.0), -1.0, 1.0))
    th = float(np.arctan2(0.5 * np.linalg.norm(s), c))
    if th < 1e-6:
        # series of th / (2 sin th) avoids the 0/0
        return s * (0.5 + th * th / 12.0)
    if th < 0.5 * np.pi:
        return s * (0.5 * th / np.sin(th))
    # symmetric part is c I + (1 - c) a a^T; well conditioned near pi
    M = (0.5 * (R + R.T) - c * np.eye(3)) / (1.0 - c)
    i = int(np.argmax(np.diag(M)))
    axis = M[:, i] / np.sqrt(max(M[i, i], _EPS))
    axis /= np.linalg.norm(axis)
    if np.linalg.norm(s) > 1e-12:
        if np.dot(s, axis) < 0.0:
            axis = -axis
    else:
        j = int(np.argmax(np.abs(axis)))
        if axis[j] < 0.0:
            axis = -axis
    return axis * th


def quat_to_matrix(q) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def matrix_to_quat(R: np.ndarray) -> np.ndarray:
    """Shepperd's method; returns a unit quaternion with ``w >= 0``."""
    R = np.asarray(R, dtype=float)
    tr = np.trace(R)
    if tr > 0.0:
        s = 2.0 * np.sqrt(tr + 1.0)
        q = np.array([0.25 * s, (R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s])
    elif R[0, 0] > R[1, 1] and R[0, 0] > R[2, 2]:
        s = 2.0 * np.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2])
        q = np.array([(R[2, 1] - R[1, 2]) / s, 0.25 * s, (R[0, 1] + R[1, 0]) / s, (R[0, 2] + R[2, 0]) / s])
    elif R[1, 1] > R[2, 2]:
        s = 2.0 * np.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2])
        q = np.array([(R[0, 2] - R[2, 0]) / s, (R[0, 1] + R[1, 0]) / s, 0.25 * s, (R[1, 2] + R[2, 1]) / s])
    else:
        s = 2.0 * np.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1])
        q = np.array([(R[1, 0] - R[0, 1]) / s, (R[0, 2] + R[2, 0]) / s, (R[1, 2] + R[2, 1]) / s, 0.25 * s])
    if q[0] < 0.0:
        q = -q
    return q / np.linalg.norm(q)


def rot_y(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


# ---------------------------------------------------------------------------
# value types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Pose6:
    """Rigid transform: ``position`` in metres and unit quaternion ``quat``."""

    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    quat: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))

    def __post_init__(self):
        q = np.asarray(self.quat, dtype=float).reshape(4)
        n = np.linalg.norm(q)
        if not np.isfinite(n) or n < _EPS:
            raise ValueError("quaternion must be finite and non-zero")
        object.__setattr__(self, "position", _vec3(self.position))
        object.__setattr__(self, "quat", q / n)

    @classmethod
    def identity(cls) -> "Pose6":
        return cls()

    @classmethod
    def from_matrix(cls, R, p=(0.0, 0.0, 0.0)) -> "Pose6":
        return cls(np.asarray(p, dtype=float), matrix_to_quat(R))

    @classmethod
    def from_planar(cls, x: float, z: float, theta: float) -> "Pose6":
        """Pose in the x-z working plane rotated by ``theta`` about +y."""
        h = 0.5 * theta
        return cls(np.array([x, 0.0, z]), np.array([np.cos(h), 0.0, np.sin(h), 0.0]))

    @classmethod
    def translation(cls, x=0.0, y=0.0, z=0.0) -> "Pose6":
        return cls(np.array([x, y, z]))

    @property
    def rotation(self) -> np.ndarray:
        return quat_to_matrix(self.quat)

    def planar(self) -> tuple[float, float, float]:
        """``(x, z, theta)``; only meaningful for poses in the working plane."""
        R = self.rotation
        return float(self.position[0]), float(self.position[2]), float(np.arctan2(R[0, 2], R[2, 2]))

    def transform_point(self, p) -> np.ndarray:
        return self.rotation @ np.asarray(p, dtype=float) + self.position

    def matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = self.rotation
        T[:3, 3] = self.position
        return T

    def __matmul__(self, other: "Pose6") -> "Pose6":
        return compose(self, other)

    def allclose(self, other: "Pose6", atol: float = 1e-9) -> bool:
        return bool(
            np.allclose(self.position, other.position, atol=atol)
            and np.allclose(self.rotation, other.rotation, atol=atol)
        )


@dataclass(frozen=True)
class Twist:
    """Linear velocity of a reference point and angular velocity, world frame."""

    linear: np.ndarray = field(default_factory=lambda: np.zeros(3))
    angular: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "linear", _vec3(self.linear))
        object.__setattr__(self, "angular", _vec3(self.angular))
        if not (np.all(np.isfinite(self.linear)) and np.all(np.isfinite(self.angular))):
            raise ValueError("twist components must be finite")

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.linear, self.angular])


@dataclass(frozen=True)
class Wrench:
    """Force and torque, both world frame, with torque taken about ``application_point``."""

    force: np.ndarray = field(default_factory=lambda: np.zeros(3))
    torque: np.ndarray = field(default_factory=lambda: np.zeros(3))
    application_point: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        for name in ("force", "torque", "application_point"):
            v = _vec3(getattr(self, name))
            if not np.all(np.isfinite(v)):
                raise ValueError(f"wrench {name} must be finite")
            object.__setattr__(self, name, v)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.force, self.torque])

    def __add__(self, other: "Wrench") -> "Wrench":
        other = transport_wrench(other, self.application_point)
        return Wrench(self.force + other.force, self.torque + other.torque, self.application_point)

    def __neg__(self) -> "Wrench":
        return Wrench(-self.force, -self.torque, self.application_point)


@dataclass(frozen=True)
class UnitDir:
    dir: np.ndarray

    def __post_init__(self):
        v = _vec3(self.dir)
        n = np.linalg.norm(v)
        if not np.isfinite(n) or n < _EPS:
            raise ValueError("direction must be non-zero")
        object.__setattr__(self, "dir", v / n)

    def angle_to(self, other) -> float:
        o = other.dir if isinstance(other, UnitDir) else np.asarray(other, dtype=float)
        o = o / np.linalg.norm(o)
        return float(np.arccos(np.clip(np.dot(self.dir, o), -1.0, 1.0)))


# ---------------------------------------------------------------------------
# group operations
# ---------------------------------------------------------------------------

def compose(a: Pose6, b: Pose6) -> Pose6:
    """``a ∘ b``: express ``b`` (given in frame ``a``) in the parent frame of ``a``."""
    Ra = a.rotation
    return Pose6(Ra @ b.position + a.position, _quat_mul(a.quat, b.quat))


def inverse(p: Pose6) -> Pose6:
    R = p.rotation
    q = p.quat * np.array([1.0, -1.0, -1.0, -1.0])
    return Pose6(-R.T @ p.position, q)


def _quat_mul(q1, q2) -> np.ndarray:
    w1, x1, y1, z1 = q1
    w2, x2, y2, z2 = q2
    return np.array(
        [
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ]
    )


def orientation_error(target: Pose6, current: Pose6) -> np.ndarray:
    """World-frame rotation vector taking ``current`` onto ``target``: log(R* R^T)."""
    return rotation_log(target.rotation @ current.rotation.T)


# ---------------------------------------------------------------------------
# wrench and stiffness transport
# ---------------------------------------------------------------------------

def transport_wrench(w: Wrench, new_point) -> Wrench:
    """Re-express ``w`` about ``new_point``; the force is untouched."""
    new_point = _vec3(new_point)
    r = w.application_point - new_point
    return Wrench(w.force, w.torque + np.cross(r, w.force), new_point)


def adjoint(T: Pose6) -> np.ndarray:
    """6x6 adjoint mapping ``(v, w)`` twists from the child frame of ``T`` to its parent."""
    R = T.rotation
    Ad = np.zeros((6, 6))
    Ad[:3, :3] = R
    Ad[:3, 3:] = hat(T.position) @ R
    Ad[3:, 3:] = R
    return Ad


def adjoint_transform_stiffness(K: np.ndarray, offset: Pose6) -> np.ndarray:
    """Express a 6x6 stiffness given at the CoC frame in a new frame.

    ``offset`` is the pose of the new frame relative to the CoC frame. A small
    displacement ``d`` of the body measured at the new frame is ``Ad @ d``
    at the CoC, so by virtual work ``K' = Ad^T K Ad``.
    """
    K = np.asarray(K, dtype=float)
    Ad = adjoint(offset)
    Kn = Ad.T @ K @ Ad
    return 0.5 * (Kn + Kn.T)


def stiffness6(K_f: np.ndarray, K_theta: np.ndarray) -> np.ndarray:
    K = np.zeros((6, 6))
    K[:3, :3] = K_f
    K[3:, 3:] = K_theta
    return K
