"""Penalty contact between the peg and the hole block in the x-z working plane.

Both workpieces are polygons in their own tool frames:

* the peg occupies ``|u| <= half_width``, ``-length <= w <= 0`` with its tip at
  the tool origin and a 45 degree chamfer of size ``tip_chamfer`` on both tip
  corners;
* the hole block has its mouth centre at the tool origin, the hole running
  along +w to ``hole_depth``; walls of thickness ``block_extent - hole_half_width``
  and a bottom plate close it.

Only vertex contacts are generated: peg vertices inside the block and the two
hole-mouth corners inside the peg.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import MAX_CONTACTS, contacts_kernel
from .frames import Pose6, Twist, Wrench, _vec3

PEG = "peg"
HOLE = "hole_block"


class ContactBlowUp(RuntimeError):
    """Penetration far beyond any physical overlap: the integration diverged."""


@dataclass(frozen=True)
class PegGeometry:
    half_width: float = 0.0165
    length: float = 0.080
    tip_chamfer: float = 0.002
    kind: str = PEG

    def __post_init__(self):
        if not (0.0 <= self.tip_chamfer < self.half_width):
            raise ValueError("tip_chamfer must be smaller than half_width")
        if self.length <= self.tip_chamfer:
            raise ValueError("peg too short for its chamfer")

    def vertices(self) -> list[tuple[float, float]]:
        """Counter-clockwise polygon in the peg frame ``(u, w)``."""
        r, L, c = self.half_width, self.length, self.tip_chamfer
        return [(-r, -L), (r, -L), (r, -c), (r - c, 0.0), (-r + c, 0.0), (-r, -c)]


@dataclass(frozen=True)
class HoleGeometry:
    hole_half_width: float = 0.01675
    hole_depth: float = 0.070
    block_extent: float = 0.040
    bottom_thickness: float = 0.010
    kind: str = HOLE

    def __post_init__(self):
        if self.block_extent <= self.hole_half_width:
            raise ValueError("block must be wider than the hole")
        if self.hole_depth <= 0 or self.bottom_thickness <= 0:
            raise ValueError("hole depth and bottom thickness must be positive")

    @property
    def back(self) -> float:
        return self.hole_depth + self.bottom_thickness

    def rects(self):
        """Convex pieces ``(u0, u1, w0, w1, exposed_faces)``.

        Each exposed face is ``(nu, nw, offset)`` with outward normal ``n`` and
        the face line ``n . q = offset``. Faces shared between pieces are
        omitted so that deep vertices are never pushed into a neighbour.
        """
        R, B, H, D = self.hole_half_width, self.block_extent, self.hole_depth, self.back
        left = (-B, -R, 0.0, D, ((0.0, -1.0, 0.0), (1.0, 0.0, -R), (-1.0, 0.0, B), (0.0, 1.0, D)))
        right = (R, B, 0.0, D, ((0.0, -1.0, 0.0), (-1.0, 0.0, -R), (1.0, 0.0, B), (0.0, 1.0, D)))
        bottom = (-R, R, H, D, ((0.0, -1.0, -H), (0.0, 1.0, D)))
        return (left, right, bottom)

    def mouth_corners(self) -> list[tuple[float, float]]:
        R = self.hole_half_width
        return [(-R, 0.0), (R, 0.0)]


def clearance(peg: PegGeometry, hole: HoleGeometry) -> float:
    return hole.hole_half_width - peg.half_width


@dataclass(frozen=True)
class ContactParams:
    stiffness: float = 5.0e5
    damping: float = 100.0
    friction_mu: float = 0.3
    friction_vel_eps: float = 1.0e-4

    def __post_init__(self):
        if self.stiffness <= 0 or self.damping < 0 or self.friction_mu < 0 or self.friction_vel_eps <= 0:
            raise ValueError("invalid contact parameters")


@dataclass(frozen=True)
class ContactPoint:
    """One penetrating vertex.

    ``normal`` is the outward normal of the penetrated body, i.e. the direction
    in which the contact pushes the penetrating body. ``relative_velocity`` is
    the velocity of the penetrating point relative to the penetrated body.
    """

    location: np.ndarray
    normal: np.ndarray
    penetration: float
    relative_velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    penetrating: str = PEG

    def __post_init__(self):
        if self.penetration < 0:
            raise ValueError("penetration must be non-negative")
        n = _vec3(self.normal)
        object.__setattr__(self, "normal", n / np.linalg.norm(n))
        object.__setattr__(self, "location", _vec3(self.location))
        object.__setattr__(self, "relative_velocity", _vec3(self.relative_velocity))


# ---------------------------------------------------------------------------
# polygon data
# ---------------------------------------------------------------------------

def _peg_faces(peg: PegGeometry):
    verts = peg.vertices()
    faces = []
    for i, (u0, w0) in enumerate(verts):
        u1, w1 = verts[(i + 1) % len(verts)]
        # outward normal of a CCW polygon edge in (u, w)
        nu, nw = (w1 - w0), -(u1 - u0)
        n = math.hypot(nu, nw)
        nu, nw = nu / n, nw / n
        faces.append((nu, nw, nu * u0 + nw * w0))
    return faces


def _peg_is_ccw(peg: PegGeometry) -> bool:
    v = peg.vertices()
    a = 0.0
    for i, (u0, w0) in enumerate(v):
        u1, w1 = v[(i + 1) % len(v)]
        a += u0 * w1 - u1 * w0
    return a > 0


class PlanarContactModel:
    """Polygon data packed into arrays for the compiled contact kernel."""

    def __init__(self, peg: PegGeometry, hole: HoleGeometry):
        self.peg = peg
        self.hole = hole
        self.peg_verts = np.array(peg.vertices(), dtype=float)
        faces = _peg_faces(peg)
        if not _peg_is_ccw(peg):
            faces = [(-nu, -nw, -d) for nu, nw, d in faces]
        self.peg_faces = np.array(faces, dtype=float)
        rects = hole.rects()
        self.rects = np.array([r[:4] for r in rects], dtype=float)
        nmax = max(len(r[4]) for r in rects)
        self.rect_faces = np.zeros((len(rects), nmax, 3))
        self.rect_nfaces = np.zeros(len(rects), dtype=np.int64)
        for i, r in enumerate(rects):
            self.rect_faces[i, : len(r[4])] = r[4]
            self.rect_nfaces[i] = len(r[4])
        self.corners = np.array(hole.mouth_corners(), dtype=float)
        self.blowup = 10.0 * (clearance(peg, hole) + peg.tip_chamfer)

    def arrays(self):
        return self.peg_verts, self.peg_faces, self.rects, self.rect_faces, self.rect_nfaces, self.corners

    def contacts(self, peg_xzt, hole_xzt):
        """Return ``[(x, z, nx, nz, pen, kind)]`` in world coordinates.

        ``(nx, nz)`` is always the direction of the contact force on the peg;
        ``kind`` is ``PEG`` when a peg vertex penetrates the block and ``HOLE``
        when a mouth corner penetrates the peg.
        """
        buf = np.zeros((MAX_CONTACTS, 6))
        n = contacts_kernel(*peg_xzt, *hole_xzt, *self.arrays(), buf)
        out = []
        for x, z, nx, nz, pen, kind in buf[:n]:
            if pen > self.blowup:
                raise ContactBlowUp(f"penetration {pen:.4g} m exceeds {self.blowup:.4g} m")
            out.append((float(x), float(z), float(nx), float(nz), float(pen), PEG if kind == 0 else HOLE))
        return out


def _check_planar(pose: Pose6, name: str):
    R = pose.rotation
    if abs(pose.position[1]) > 1e-6 or abs(R[1, 1] - 1.0) > 1e-6:
        raise ValueError(f"{name} pose must lie in the x-z working plane")


def _point_velocity(twist: Twist | None, origin: np.ndarray, p: np.ndarray) -> np.ndarray:
    if twist is None:
        return np.zeros(3)
    return twist.linear + np.cross(twist.angular, p - origin)


def detect_contacts(
    peg_pose: Pose6,
    hole_pose: Pose6,
    geom_peg: PegGeometry,
    geom_hole: HoleGeometry,
    peg_twist: Twist | None = None,
    hole_twist: Twist | None = None,
) -> list[ContactPoint]:
    """All penetrating vertices between the peg and the hole block.

    Twists, when given, are the velocities of the respective pose origins and
    are used to fill in ``relative_velocity``.
    """
    _check_planar(peg_pose, "peg")
    _check_planar(hole_pose, "hole")
    model = PlanarContactModel(geom_peg, geom_hole)
    raw = model.contacts(peg_pose.planar(), hole_pose.planar())
    out = []
    for x, z, nx, nz, pen, kind in raw:
        p = np.array([x, 0.0, z])
        v_peg = _point_velocity(peg_twist, peg_pose.position, p)
        v_hole = _point_velocity(hole_twist, hole_pose.position, p)
        if kind == PEG:
            out.append(ContactPoint(p, np.array([nx, 0.0, nz]), pen, v_peg - v_hole, PEG))
        else:
            out.append(ContactPoint(p, np.array([-nx, 0.0, -nz]), pen, v_hole - v_peg, HOLE))
    return out


def contact_wrench(c: ContactPoint, p: ContactParams) -> Wrench:
    """Penalty normal force plus regularised Coulomb friction on the penetrating body."""
    n = c.normal
    vn = float(np.dot(c.relative_velocity, n))
    pen_rate = -vn
    fn = max(0.0, p.stiffness * c.penetration + p.damping * pen_rate)
    vt = c.relative_velocity - vn * n
    speed = float(np.linalg.norm(vt))
    force = fn * n
    if speed > 0.0 and fn > 0.0:
        force = force - p.friction_mu * fn * math.tanh(speed / p.friction_vel_eps) * (vt / speed)
    return Wrench(force, np.zeros(3), c.location)
