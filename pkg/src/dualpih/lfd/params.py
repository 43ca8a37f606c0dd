"""Learned skill parameters and their JSON form."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..control import K_F_STIFF, K_THETA_STIFF, StiffnessSpec
from ..frames import UnitDir

PARAMS_SCHEMA_VERSION = 1


def _orthonormal(axes, name: str) -> list[UnitDir]:
    out = [a if isinstance(a, UnitDir) else UnitDir(a) for a in axes]
    if len(out) > 3:
        raise ValueError(f"at most three {name} axes")
    A = np.array([a.dir for a in out]).reshape(-1, 3)
    if len(out) and not np.allclose(A @ A.T, np.eye(len(out)), atol=1e-6):
        raise ValueError(f"{name} axes must be orthonormal")
    return out


@dataclass(frozen=True)
class LearnedParams:
    """Desired direction, compliant axes and the stiffness built from them.

    Directions and matrices are expressed in the tool frame; the same spec
    serves master and slave, each in its own tool frame.
    """

    v_d: UnitDir
    trans_axes: list
    rot_axes: list
    stiffness: StiffnessSpec
    mu_hat: float
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "trans_axes", _orthonormal(self.trans_axes, "translation"))
        object.__setattr__(self, "rot_axes", _orthonormal(self.rot_axes, "rotation"))
        for a in self.trans_axes:
            if np.linalg.norm(self.stiffness.K_f @ a.dir) > 1e-9:
                raise ValueError("translation stiffness must vanish on compliant axes")
        for a in self.rot_axes:
            if np.linalg.norm(self.stiffness.K_theta @ a.dir) > 1e-9:
                raise ValueError("rotation stiffness must vanish on compliant axes")

    @property
    def master(self) -> StiffnessSpec:
        return self.stiffness

    @property
    def slave(self) -> StiffnessSpec:
        return self.stiffness

    def summary(self) -> str:
        def fmt(v):
            return "(" + ", ".join(f"{c:+.3f}" for c in v.dir) + ")"

        z = UnitDir(np.array([0.0, 0.0, 1.0]))
        lines = [f"v_d = {fmt(self.v_d)}  ({math.degrees(self.v_d.angle_to(z)):.2f} deg from tool z)"]
        lines.append("compliant translation axes: " + (", ".join(fmt(a) for a in self.trans_axes) or "none"))
        lines.append("compliant rotation axes: " + (", ".join(fmt(a) for a in self.rot_axes) or "none"))
        lines.append(f"mu_hat = {self.mu_hat:.3f}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        sp = self.stiffness
        return {
            "schema_version": PARAMS_SCHEMA_VERSION,
            "kind": "learned_params",
            "v_d": self.v_d.dir.tolist(),
            "trans_axes": [a.dir.tolist() for a in self.trans_axes],
            "rot_axes": [a.dir.tolist() for a in self.rot_axes],
            "K_f": sp.K_f.tolist(),
            "K_theta": sp.K_theta.tolist(),
            "D_f": sp.D_f.tolist(),
            "D_theta": sp.D_theta.tolist(),
            "mu_hat": self.mu_hat,
            "diagnostics": self.diagnostics,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LearnedParams":
        ver = d.get("schema_version")
        if ver != PARAMS_SCHEMA_VERSION:
            raise ValueError(f"unsupported params schema_version {ver!r} (expected {PARAMS_SCHEMA_VERSION})")
        sp = StiffnessSpec(np.array(d["K_f"]), np.array(d["K_theta"]), np.array(d["D_f"]), np.array(d["D_theta"]))
        return cls(
            UnitDir(np.array(d["v_d"])),
            [np.array(a) for a in d["trans_axes"]],
            [np.array(a) for a in d["rot_axes"]],
            sp,
            float(d["mu_hat"]),
            dict(d.get("diagnostics", {})),
        )

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=1, allow_nan=False))
        return path

    @classmethod
    def load(cls, path) -> "LearnedParams":
        return cls.from_dict(json.loads(Path(path).read_text()))


def build_params(v_d, trans_axes, rot_axes, defaults: dict | None = None, mu_hat: float = 0.0,
                 diagnostics: dict | None = None) -> LearnedParams:
    """Zero stiffness on the learned axes, default stiffness elsewhere.

    ``defaults`` may override ``k_f``, ``k_theta`` and the damping keywords
    of :meth:`StiffnessSpec.from_axes`.
    """
    kw = {"k_f": K_F_STIFF, "k_theta": K_THETA_STIFF}
    kw.update(defaults or {})
    ta = _orthonormal(trans_axes, "translation")
    ra = _orthonormal(rot_axes, "rotation")
    spec = StiffnessSpec.from_axes([a.dir for a in ta], [a.dir for a in ra], **kw)
    return LearnedParams(v_d if isinstance(v_d, UnitDir) else UnitDir(v_d), ta, ra, spec, float(mu_hat),
                         diagnostics or {})
