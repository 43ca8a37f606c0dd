"""Sectors of desired directions and their intersection.

A sector is an arc of unit directions inside the working plane. While the
tool slides along a surface with friction ``mu``, any drive direction ``d``
with ``d.t > mu (-d.n)`` and ``-d.n >= 0`` keeps it sliding (``t`` is the
motion direction, ``n`` the surface normal pointing at the tool). That set is
the arc from ``t`` rotated toward ``-n`` by ``pi/2 - atan(mu)``.

Angles inside the plane are measured with :func:`plane_basis`; for the
default plane normal ``y`` the angle of ``d`` is ``atan2(d_x, d_z)``, so tool
z sits at zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..frames import UnitDir

TWO_PI = 2.0 * math.pi
FREE_SPACE_HALF_ANGLE = math.radians(30.0)
Y_AXIS = UnitDir(np.array([0.0, 1.0, 0.0]))


class EmptyIntersection(ValueError):
    """No direction lies in every sector; the demonstration needs segmenting."""

    def __init__(self, msg: str, index: int | None = None):
        super().__init__(msg)
        self.index = index


def plane_basis(normal) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal ``(u, w)`` spanning the plane; angle 0 is ``u``, +90 deg is ``w``.

    ``u`` is the projection of z (or of x when the normal is along z) and
    ``w = normal x u``. For normal ``y`` this gives ``u = z`` and ``w = x``.
    """
    n = UnitDir(normal).dir if not isinstance(normal, UnitDir) else normal.dir
    ref = np.array([0.0, 0.0, 1.0]) if abs(n[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    u = ref - (ref @ n) * n
    u /= np.linalg.norm(u)
    return u, np.cross(n, u)


def direction_angle(d, normal=Y_AXIS) -> float:
    """In-plane angle of ``d`` (its out-of-plane part is ignored)."""
    u, w = plane_basis(normal)
    d = np.asarray(d.dir if isinstance(d, UnitDir) else d, dtype=float)
    return math.atan2(float(d @ w), float(d @ u))


def angle_direction(a: float, normal=Y_AXIS) -> UnitDir:
    u, w = plane_basis(normal)
    return UnitDir(math.cos(a) * u + math.sin(a) * w)


def _wrap(a: float) -> float:
    return (a + math.pi) % TWO_PI - math.pi


@dataclass(frozen=True)
class DirectionSector:
    plane_normal: UnitDir
    center: UnitDir
    half_angle: float

    def __post_init__(self):
        if not (0.0 < self.half_angle <= math.pi):
            raise ValueError(f"half angle {self.half_angle} outside (0, pi]")
        if abs(float(self.center.dir @ self.plane_normal.dir)) > 1e-9:
            raise ValueError("sector center must lie in the plane")

    @classmethod
    def from_angles(cls, lo: float, hi: float, normal=Y_AXIS) -> "DirectionSector":
        """Arc from angle ``lo`` counter-clockwise to ``hi`` (radians)."""
        n = normal if isinstance(normal, UnitDir) else UnitDir(normal)
        width = hi - lo
        if not (0.0 < width <= TWO_PI):
            raise ValueError("arc width must lie in (0, 2 pi]")
        return cls(n, angle_direction(lo + 0.5 * width, n), 0.5 * width)

    @property
    def center_angle(self) -> float:
        return direction_angle(self.center, self.plane_normal)

    @property
    def bounds(self) -> tuple[float, float]:
        c = self.center_angle
        return c - self.half_angle, c + self.half_angle

    @property
    def is_full(self) -> bool:
        return self.half_angle >= math.pi

    def contains(self, d, tol: float = 0.0) -> bool:
        if self.is_full:
            return True
        a = direction_angle(d, self.plane_normal)
        return abs(_wrap(a - self.center_angle)) <= self.half_angle + tol

    def as_dict(self) -> dict:
        lo, hi = self.bounds
        return {"center_deg": math.degrees(self.center_angle), "half_angle_deg": math.degrees(self.half_angle),
                "lo_deg": math.degrees(lo), "hi_deg": math.degrees(hi)}


def _in_plane(v, n: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    p = v - (v @ n) * n
    norm = np.linalg.norm(p)
    if norm < 1e-12:
        raise ValueError("vector has no component in the working plane")
    return p / norm


def sector_from_sample(F_N, mu_hat: float, v_a, plane_normal=Y_AXIS) -> DirectionSector:
    """Sliding sector: from ``t = v_a`` toward ``-n`` by ``pi/2 - atan(mu_hat)``."""
    pn = plane_normal if isinstance(plane_normal, UnitDir) else UnitDir(plane_normal)
    t = _in_plane(v_a, pn.dir)
    m = -_in_plane(F_N, pn.dir)
    at = direction_angle(t, pn)
    side = 1.0 if _wrap(direction_angle(m, pn) - at) >= 0.0 else -1.0
    width = 0.5 * math.pi - math.atan(max(0.0, float(mu_hat)))
    return DirectionSector(pn, angle_direction(at + side * 0.5 * width, pn), 0.5 * width)


def free_space_sector(v_a, half_angle: float = FREE_SPACE_HALF_ANGLE, plane_normal=Y_AXIS) -> DirectionSector:
    """Cone of ``half_angle`` about the motion direction, for samples without contact."""
    pn = plane_normal if isinstance(plane_normal, UnitDir) else UnitDir(plane_normal)
    return DirectionSector(pn, UnitDir(_in_plane(v_a, pn.dir)), half_angle)


# -- intersection -------------------------------------------------------

def _intervals(s: DirectionSector) -> list[tuple[float, float]]:
    """The sector as closed intervals of ``[0, 2 pi]``."""
    if s.is_full:
        return [(0.0, TWO_PI)]
    lo = (s.center_angle - s.half_angle) % TWO_PI
    hi = lo + 2.0 * s.half_angle
    if hi <= TWO_PI:
        return [(lo, hi)]
    return [(lo, TWO_PI), (0.0, hi - TWO_PI)]


def _intersect(a, b):
    out = []
    for a0, a1 in a:
        for b0, b1 in b:
            lo, hi = max(a0, b0), min(a1, b1)
            if hi >= lo:
                out.append((lo, hi))
    return sorted(out)


def _arcs(intervals) -> list[tuple[float, float]]:
    """Join pieces that meet across the 0 / 2 pi seam into ``(lo, width)`` arcs."""
    if not intervals:
        return []
    if len(intervals) == 1 and intervals[0] == (0.0, TWO_PI):
        return [(0.0, TWO_PI)]
    arcs = [(lo, hi - lo) for lo, hi in intervals]
    first, last = intervals[0], intervals[-1]
    if len(intervals) > 1 and first[0] == 0.0 and last[1] == TWO_PI:
        arcs = arcs[1:-1] + [(last[0], (last[1] - last[0]) + (first[1] - first[0]))]
    return arcs


def intersection_arcs(sectors) -> list[tuple[float, float]]:
    """All pieces of the intersection as ``(start angle, width)`` in radians."""
    sectors = list(sectors)
    if not sectors:
        raise ValueError("need at least one sector")
    normal = sectors[0].plane_normal
    cur = [(0.0, TWO_PI)]
    for s in sectors:
        if abs(float(s.plane_normal.dir @ normal.dir)) < 1.0 - 1e-9:
            raise ValueError("all sectors must share the working plane")
        cur = _intersect(cur, _intervals(s))
        if not cur:
            break
    return _arcs(cur)


def intersect_sectors(sectors, min_width: float = 1e-12) -> tuple[UnitDir, DirectionSector]:
    """Direction through the whole demonstration and the common sector.

    The direction is the angular midpoint of the intersection. Should the
    intersection fall apart into several arcs (only possible with sectors
    wider than a half circle) the widest one is used. An intersection
    narrower than ``min_width`` counts as empty.
    """
    sectors = list(sectors)
    if not sectors:
        raise ValueError("need at least one sector")
    normal = sectors[0].plane_normal
    cur = [(0.0, TWO_PI)]
    for i, s in enumerate(sectors):
        if abs(float(s.plane_normal.dir @ normal.dir)) < 1.0 - 1e-9:
            raise ValueError("all sectors must share the working plane")
        nxt = _intersect(cur, _intervals(s))
        if _widest(nxt) <= min_width:
            raise EmptyIntersection(f"sector {i} leaves no common direction", index=i)
        cur = nxt
    arcs = _arcs(cur)
    lo, width = max(arcs, key=lambda a: a[1])
    if width <= min_width:
        raise EmptyIntersection("sectors have no common direction")
    res = DirectionSector.from_angles(lo, lo + width, normal)
    return res.center, res


def _widest(intervals) -> float:
    arcs = _arcs(intervals)
    return max((w for _, w in arcs), default=0.0)
