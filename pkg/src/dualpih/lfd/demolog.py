"""Demonstration log: the versioned JSON trajectory written by the simulator.

Samples are stored column-wise. Poses, wrenches and twists are expressed in
the world frame; the wrench and twist refer to the tool origin.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..frames import Pose6, Twist, Wrench, quat_to_matrix

LOG_SCHEMA_VERSION = 1
MIN_SAMPLES = 100


class LogError(ValueError):
    """The log is malformed or violates the sampling requirements."""


@dataclass(frozen=True)
class NoiseFloor:
    """Noise of the sample-to-sample pose increments (m, rad).

    This is the level below which residual motion cannot be told from
    measurement noise; the learning step compares residual variances with
    its square.
    """

    translation: float
    rotation: float

    def __post_init__(self):
        if not (self.translation > 0 and self.rotation > 0):
            raise ValueError("noise floor must be positive")


@dataclass(frozen=True, eq=False)
class DemoLog:
    t: np.ndarray
    position: np.ndarray
    quat: np.ndarray
    force: np.ndarray
    torque: np.ndarray
    linear_velocity: np.ndarray
    angular_velocity: np.ndarray
    tool_offset: np.ndarray = field(default_factory=lambda: np.zeros(3))
    mu_prior: float | None = None
    noise_floor: NoiseFloor | None = None
    contact_count: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float).reshape(-1)
        n = len(t)
        if n < MIN_SAMPLES:
            raise LogError(f"a demonstration needs at least {MIN_SAMPLES} samples, got {n}")
        for name, width in (("position", 3), ("quat", 4), ("force", 3), ("torque", 3),
                            ("linear_velocity", 3), ("angular_velocity", 3)):
            a = np.asarray(getattr(self, name), dtype=float)
            if a.shape != (n, width):
                raise LogError(f"{name} must have shape ({n}, {width}), got {a.shape}")
            if not np.all(np.isfinite(a)):
                raise LogError(f"{name} contains non-finite values")
            a = a.copy()
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        dt = np.diff(t)
        if np.any(dt <= 0) or np.ptp(dt) > 1e-6 * max(float(dt.mean()), 1e-12):
            raise LogError("samples must be uniformly spaced in time")
        t = t.copy()
        t.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "tool_offset", np.asarray(self.tool_offset, dtype=float).reshape(3))
        if self.contact_count is not None:
            c = np.asarray(self.contact_count, dtype=int).reshape(n)
            object.__setattr__(self, "contact_count", c)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    def rotations(self) -> np.ndarray:
        """``(n, 3, 3)`` tool orientations."""
        return np.stack([quat_to_matrix(q / np.linalg.norm(q)) for q in self.quat])

    def sample(self, i: int) -> tuple[float, Pose6, Wrench, Twist]:
        """``(t, tool pose, commanded wrench, measured twist)`` of sample ``i``."""
        pose = Pose6(self.position[i], self.quat[i])
        return (
            float(self.t[i]),
            pose,
            Wrench(self.force[i], self.torque[i], self.position[i]),
            Twist(self.linear_velocity[i], self.angular_velocity[i]),
        )

    # -- serialisation --------------------------------------------------

    def to_dict(self) -> dict:
        nf = self.noise_floor
        d = {
            "schema_version": LOG_SCHEMA_VERSION,
            "kind": "trajectory_log",
            "dt": self.dt,
            "tool_offset": self.tool_offset.tolist(),
            "noise_floor": None if nf is None else {"translation": nf.translation, "rotation": nf.rotation},
            "mu_prior": self.mu_prior,
            "t": self.t.tolist(),
            "position": self.position.tolist(),
            "quat": self.quat.tolist(),
            "force": self.force.tolist(),
            "torque": self.torque.tolist(),
            "linear_velocity": self.linear_velocity.tolist(),
            "angular_velocity": self.angular_velocity.tolist(),
        }
        if self.contact_count is not None:
            d["contact_count"] = self.contact_count.tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DemoLog":
        ver = d.get("schema_version")
        if ver != LOG_SCHEMA_VERSION:
            raise LogError(f"unsupported log schema_version {ver!r} (expected {LOG_SCHEMA_VERSION})")
        missing = [k for k in ("t", "position", "quat", "force", "torque", "linear_velocity", "angular_velocity")
                   if k not in d]
        if missing:
            raise LogError(f"log is missing fields: {', '.join(missing)}")
        nf = d.get("noise_floor")
        if isinstance(nf, dict):
            nf = NoiseFloor(float(nf["translation"]), float(nf["rotation"]))
        elif nf is not None:
            nf = NoiseFloor(float(nf), float(nf))

        def arr(key, width):
            a = np.asarray(d[key], dtype=float)
            return a.reshape(-1, width) if a.size else np.zeros((0, width))

        return cls(
            np.asarray(d["t"], dtype=float),
            arr("position", 3),
            arr("quat", 4),
            arr("force", 3),
            arr("torque", 3),
            arr("linear_velocity", 3),
            arr("angular_velocity", 3),
            np.asarray(d.get("tool_offset", (0.0, 0.0, 0.0)), dtype=float),
            None if d.get("mu_prior") is None else float(d["mu_prior"]),
            nf,
            d.get("contact_count"),
        )

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=1, allow_nan=False))
        return path

    @classmethod
    def load(cls, path) -> "DemoLog":
        try:
            d = json.loads(Path(path).read_text())
        except json.JSONDecodeError as e:
            raise LogError(f"{path}: not valid JSON ({e})") from e
        return cls.from_dict(d)
