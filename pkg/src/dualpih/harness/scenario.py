"""Scenario files and the A-E compliance configurations.

A scenario is a human-readable JSON document with a ``schema_version``.
Lengths are in metres, speeds in metres per second and every angle in
degrees; conversion to radians happens when the simulator config is built.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from ..contact import ContactParams, HoleGeometry, PegGeometry
from ..control import K_F_STIFF, K_THETA_STIFF, TOOLTIP, WRIST, StiffnessSpec
from ..frames import Pose6
from ..sim.world import NOMINAL, ArmConfig, SimConfig
from .demo import DemoConfig

SCENARIO_SCHEMA_VERSION = 1
CONFIG_LABELS = ("A", "B", "C", "D", "E")
CUSTOM = "custom"

NO_AXES = (False, False, False)
X_AXIS = (True, False, False)
Y_AXIS = (False, True, False)


class ScenarioError(ValueError):
    """The scenario document is invalid."""


@dataclass(frozen=True)
class ArmSpec:
    """One arm: CoC choice, compliance mask and controller limits.

    ``matrices`` (``K_f``, ``K_theta``, ``D_f``, ``D_theta`` as nested lists)
    overrides the masks; it is how learned parameters enter a scenario.
    """

    coc: str = TOOLTIP
    trans_compliant: tuple = NO_AXES
    rot_compliant: tuple = NO_AXES
    k_f: float = K_F_STIFF
    k_theta: float = K_THETA_STIFF
    tool_offset: float = 0.080
    breakaway_force: float = 2.0
    breakaway_torque: float = 0.02
    force_limit: float = 30.0
    torque_limit: float = 3.0
    matrices: dict | None = None

    def __post_init__(self):
        if self.coc not in (WRIST, TOOLTIP):
            raise ScenarioError(f"coc must be {WRIST!r} or {TOOLTIP!r}, got {self.coc!r}")
        for name in ("trans_compliant", "rot_compliant"):
            v = tuple(bool(b) for b in getattr(self, name))
            if len(v) != 3:
                raise ScenarioError(f"{name} needs three flags")
            object.__setattr__(self, name, v)

    def stiffness(self) -> StiffnessSpec:
        if self.matrices is not None:
            m = self.matrices
            return StiffnessSpec(np.array(m["K_f"]), np.array(m["K_theta"]), np.array(m["D_f"]),
                                 np.array(m["D_theta"]))
        return StiffnessSpec.from_masks(self.trans_compliant, self.rot_compliant, self.k_f, self.k_theta)

    def arm_config(self) -> ArmConfig:
        return ArmConfig(
            stiffness=self.stiffness(),
            coc=self.coc,
            tool_offset=Pose6.translation(z=self.tool_offset),
            breakaway_force=self.breakaway_force,
            breakaway_torque=self.breakaway_torque,
            force_limit=self.force_limit,
            torque_limit=self.torque_limit,
        )

    def is_stiff(self) -> bool:
        return self.stiffness().is_fully_stiff()


def default_master() -> ArmSpec:
    return ArmSpec(tool_offset=0.080, breakaway_force=2.0, breakaway_torque=0.02)


def default_slave() -> ArmSpec:
    return ArmSpec(tool_offset=-0.080, breakaway_force=4.0, breakaway_torque=0.2)


@dataclass(frozen=True)
class Scenario:
    label: str = "B"
    initial_error_deg: float = 8.0
    speed: float = 0.005
    seed: int = 0
    perturb_deg: float = 0.0
    tip_offset: float = 0.0005
    feed_frame: str = NOMINAL
    desired_dir: tuple = (0.0, 0.0, 1.0)
    max_duration: float = 40.0
    dt: float = 1e-3
    master: ArmSpec = field(default_factory=default_master)
    slave: ArmSpec = field(default_factory=default_slave)
    peg: PegGeometry = field(default_factory=PegGeometry)
    hole: HoleGeometry = field(default_factory=HoleGeometry)
    contact: ContactParams = field(default_factory=ContactParams)
    demo: DemoConfig = field(default_factory=DemoConfig)

    def __post_init__(self):
        if self.label not in CONFIG_LABELS + (CUSTOM,):
            raise ScenarioError(f"label must be one of {', '.join(CONFIG_LABELS)} or {CUSTOM!r}")
        if not (0.0 <= abs(self.initial_error_deg) < 45.0):
            raise ScenarioError("initial_error_deg must lie in (-45, 45)")
        if self.perturb_deg < 0:
            raise ScenarioError("perturb_deg must be non-negative")
        d = tuple(float(v) for v in self.desired_dir)
        if len(d) != 3 or math.hypot(d[0], d[2]) < 1e-9:
            raise ScenarioError("desired_dir needs a non-zero in-plane (x, z) component")
        object.__setattr__(self, "desired_dir", d)

    # -- simulator -------------------------------------------------------

    def sim_config(self) -> SimConfig:
        try:
            return SimConfig(
                master=self.master.arm_config(),
                slave=self.slave.arm_config(),
                initial_error=math.radians(self.initial_error_deg),
                speed=self.speed,
                desired_dir=self.desired_dir,
                feed_frame=self.feed_frame,
                tip_offset=self.tip_offset,
                dt=self.dt,
                max_duration=self.max_duration,
                peg=self.peg,
                hole=self.hole,
                contact=self.contact,
                seed=self.seed,
                perturb=math.radians(self.perturb_deg),
            )
        except ValueError as e:
            raise ScenarioError(str(e)) from e

    def with_(self, **kw) -> "Scenario":
        return replace(self, **kw)

    # -- serialisation ---------------------------------------------------

    def to_dict(self) -> dict:
        d = {"schema_version": SCENARIO_SCHEMA_VERSION}
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "demo":
                v = demo_to_dict(v)
            elif f.name in ("master", "slave"):
                v = {k: (list(x) if isinstance(x, tuple) else x) for k, x in asdict(v).items()}
            elif f.name in ("peg", "hole", "contact"):
                v = asdict(v)
                v.pop("kind", None)
            elif isinstance(v, tuple):
                v = list(v)
            d[f.name] = v
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        if not isinstance(d, dict):
            raise ScenarioError("scenario must be a JSON object")
        ver = d.get("schema_version")
        if ver != SCENARIO_SCHEMA_VERSION:
            raise ScenarioError(f"unsupported scenario schema_version {ver!r} (expected {SCENARIO_SCHEMA_VERSION})")
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known - {"schema_version"}
        if unknown:
            raise ScenarioError(f"unknown scenario keys: {', '.join(sorted(unknown))}")
        kw = {}
        try:
            for k, v in d.items():
                if k == "schema_version":
                    continue
                if k in ("master", "slave"):
                    base = default_master() if k == "master" else default_slave()
                    kw[k] = replace(base, **_tuples(v))
                elif k == "peg":
                    kw[k] = PegGeometry(**v)
                elif k == "hole":
                    kw[k] = HoleGeometry(**v)
                elif k == "contact":
                    kw[k] = ContactParams(**v)
                elif k == "demo":
                    kw[k] = demo_from_dict(v)
                elif k == "desired_dir":
                    kw[k] = tuple(v)
                else:
                    kw[k] = v
            scn = cls(**kw)
        except (TypeError, ValueError) as e:
            if isinstance(e, ScenarioError):
                raise
            raise ScenarioError(str(e)) from e
        # surface simulator-level problems (time step, geometry) at load time
        scn.sim_config()
        return scn

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n")
        return path

    @classmethod
    def load(cls, path) -> "Scenario":
        try:
            d = json.loads(Path(path).read_text())
        except json.JSONDecodeError as e:
            raise ScenarioError(f"{path}: not valid JSON ({e})") from e
        return cls.from_dict(d)


def _tuples(d: dict) -> dict:
    return {k: (tuple(v) if k in ("trans_compliant", "rot_compliant") else v) for k, v in d.items()}


_DEMO_DEG = ("tilt", "wobble_rot")


def demo_to_dict(c: DemoConfig) -> dict:
    d = asdict(c)
    for k in _DEMO_DEG:
        d[k + "_deg"] = math.degrees(d.pop(k))
    return d


def demo_from_dict(d: dict) -> DemoConfig:
    d = dict(d)
    for k in _DEMO_DEG:
        if k + "_deg" in d:
            d[k] = math.radians(d.pop(k + "_deg"))
    return DemoConfig(**d)


# -- the five configurations -------------------------------------------

def configure(scn: Scenario, label: str) -> Scenario:
    """Apply one of the A-E compliance layouts to ``scn``.

    * A: master compliant at the wrist, translation x and rotation y.
    * B: master compliant at the tooltip, translation x and rotation y.
    * C: slave compliant at the tooltip, translation x and rotation y.
    * D: both arms compliant at the tooltip, rotation y only.
    * E: both arms compliant at the tooltip, translation x and rotation y.

    Arms not listed are fully stiff.
    """
    stiff_m = replace(scn.master, trans_compliant=NO_AXES, rot_compliant=NO_AXES, matrices=None, coc=TOOLTIP)
    stiff_s = replace(scn.slave, trans_compliant=NO_AXES, rot_compliant=NO_AXES, matrices=None, coc=TOOLTIP)

    def comp(arm, coc, trans):
        return replace(arm, coc=coc, trans_compliant=X_AXIS if trans else NO_AXES, rot_compliant=Y_AXIS)

    layouts = {
        "A": (comp(stiff_m, WRIST, True), stiff_s),
        "B": (comp(stiff_m, TOOLTIP, True), stiff_s),
        "C": (stiff_m, comp(stiff_s, TOOLTIP, True)),
        "D": (comp(stiff_m, TOOLTIP, False), comp(stiff_s, TOOLTIP, False)),
        "E": (comp(stiff_m, TOOLTIP, True), comp(stiff_s, TOOLTIP, True)),
    }
    if label not in layouts:
        raise ScenarioError(f"unknown configuration {label!r}")
    m, s = layouts[label]
    return replace(scn, label=label, master=m, slave=s)


def apply_params(scn: Scenario, params) -> Scenario:
    """Use learned parameters on both arms at the tooltip, fed along the learned direction."""
    sp = params.stiffness
    mats = {"K_f": sp.K_f.tolist(), "K_theta": sp.K_theta.tolist(), "D_f": sp.D_f.tolist(),
            "D_theta": sp.D_theta.tolist()}
    m = replace(scn.master, coc=TOOLTIP, matrices=mats)
    s = replace(scn.slave, coc=TOOLTIP, matrices=mats)
    return replace(scn, label=CUSTOM, master=m, slave=s, desired_dir=tuple(float(v) for v in params.v_d.dir))


def default_scenario() -> Scenario:
    """The shipped scenario: configuration B at 8 degrees.

    B keeps the slave stiff, so the same file serves the demonstrator; the
    sweep and metrics commands re-apply each configuration anyway.
    """
    return configure(Scenario(), "B")
