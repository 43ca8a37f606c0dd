"""Planar 3R arm model used only to turn Cartesian tool paths into joint paths.

The simulator itself works in Cartesian space; joint-space quantities are
needed for the motion metrics (covered joint distance). Each arm is a planar
revolute chain in the working plane, mounted at a fixed base point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_LINKS = (0.35, 0.30, 0.10)


class Unreachable(ValueError):
    """The requested tool pose lies outside the arm workspace."""


def fk_3r(joints, links=DEFAULT_LINKS) -> tuple[float, float, float]:
    """Forward kinematics: joint angles to ``(x, y, phi)`` of the chain end."""
    q1, q2, q3 = (float(v) for v in joints)
    l1, l2, l3 = links
    a1 = q1
    a2 = q1 + q2
    a3 = q1 + q2 + q3
    x = l1 * math.cos(a1) + l2 * math.cos(a2) + l3 * math.cos(a3)
    y = l1 * math.sin(a1) + l2 * math.sin(a2) + l3 * math.sin(a3)
    return x, y, a3


def _wrap(a):
    return (a + np.pi) % (2.0 * np.pi) - np.pi


def ik_3r_branches(x: float, y: float, phi: float, links=DEFAULT_LINKS) -> np.ndarray:
    """Both elbow solutions as a ``(2, 3)`` array (elbow-down first).

    Raises :class:`Unreachable` when the wrist point is out of reach.
    """
    l1, l2, l3 = links
    wx = x - l3 * math.cos(phi)
    wy = y - l3 * math.sin(phi)
    r2 = wx * wx + wy * wy
    c2 = (r2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)
    if c2 > 1.0 + 1e-12 or c2 < -1.0 - 1e-12:
        raise Unreachable(
            f"wrist point at distance {math.sqrt(r2):.4f} m outside [{abs(l1 - l2):.4f}, {l1 + l2:.4f}] m"
        )
    c2 = min(1.0, max(-1.0, c2))
    out = np.empty((2, 3))
    for i, sgn in enumerate((1.0, -1.0)):
        q2 = sgn * math.acos(c2)
        q1 = math.atan2(wy, wx) - math.atan2(l2 * math.sin(q2), l1 + l2 * math.cos(q2))
        q3 = phi - q1 - q2
        out[i] = _wrap(np.array([q1, q2, q3]))
    return out


def ik_3r(x: float, y: float, phi: float, links=DEFAULT_LINKS, previous=None) -> np.ndarray:
    """Analytic planar 3R inverse kinematics.

    The elbow branch closest to ``previous`` (wrapped joint distance) is
    returned; without ``previous`` the elbow-down branch is used.
    """
    sols = ik_3r_branches(x, y, phi, links)
    if previous is None:
        return sols[0]
    prev = np.asarray(previous, dtype=float)
    d = np.abs(_wrap(sols - prev)).sum(axis=1)
    return sols[int(np.argmin(d))]


@dataclass(frozen=True)
class ArmMount:
    """Base of a planar arm in world ``(x, z)``.

    The arm plane coordinates are ``(x - base_x, z - base_z)``.
    """

    base_x: float
    base_z: float
    links: tuple = DEFAULT_LINKS

    def arm_coords(self, tool_xzt, tool_offset_w: float) -> tuple[float, float, float]:
        """Chain end ``(x, y, phi)`` in arm coordinates for a tool pose.

        ``tool_offset_w`` is the signed distance from flange to tool origin
        along tool z (+0.08 for the master, -0.08 for the slave). The chain
        end sits at the tool origin and points along the flange-to-tool
        direction.
        """
        x, z, th = tool_xzt
        sg = 1.0 if tool_offset_w >= 0 else -1.0
        dx, dz = sg * math.sin(th), sg * math.cos(th)
        return x - self.base_x, z - self.base_z, math.atan2(dz, dx)


# Bases chosen so both tools meet at the hole mouth with the elbow well
# inside the workspace: the master reaches down from -z, the slave up from +z.
MASTER_MOUNT = ArmMount(-0.45, -0.25)
SLAVE_MOUNT = ArmMount(0.45, 0.25)


def joint_path(tool_path: np.ndarray, tool_offset_w: float, mount: ArmMount) -> np.ndarray:
    """Joint angles along a ``(n, 3)`` tool path with branch continuity."""
    out = np.empty((len(tool_path), 3))
    prev = None
    for i, row in enumerate(tool_path):
        ax, ay, phi = mount.arm_coords(row, tool_offset_w)
        prev = ik_3r(ax, ay, phi, mount.links, prev)
        out[i] = prev
    return out
