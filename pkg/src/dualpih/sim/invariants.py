"""Post-hoc checks of physical invariants on a recorded trajectory.

Each check returns the worst violation it found (``0.0`` or negative means
the invariant holds) so tests can assert and reports can print margins.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _kernels as K
from ..contact import PlanarContactModel
from ..frames import Pose6


@dataclass(frozen=True)
class InvariantReport:
    cone: float
    adhesion: float
    planarity: float
    tunneling: int
    stiction: float
    quasi_static: float

    def ok(self, tol: float = 1e-9) -> bool:
        return bool(
            self.cone <= tol
            and self.adhesion <= tol
            and self.planarity <= 1e-9
            and self.tunneling == 0
            and self.stiction <= 1.0 + 1e-9
            and self.quasi_static <= 1.0 + 1e-9
        )


def cone_violation(traj) -> float:
    """Largest ``|f_t| - mu f_n`` over all contacts and steps (Coulomb cone)."""
    return float(np.max(traj.data[:, K.R_CONE], initial=0.0))


def adhesion_violation(traj) -> float:
    """Largest pulling normal force (negative normal force) seen."""
    return float(np.max(-traj.data[:, K.R_FN_MIN], initial=0.0))


def planarity_violation(traj, stride: int = 100) -> float:
    """Out-of-plane position and non-y rotation of the full 3-D poses."""
    worst = 0.0
    for poses in (traj.master_pose, traj.slave_pose):
        for row in poses[::stride]:
            p = Pose6.from_planar(*row)
            R = p.rotation
            worst = max(worst, abs(p.position[1]), abs(R[1, 0]), abs(R[1, 2]), abs(R[0, 1]), abs(R[2, 1]))
    return worst


def _segment_hits_box(p0, p1, box):
    """Vectorised Liang-Barsky test: does segment ``p0 -> p1`` cross the open box?"""
    u0, u1, w0, w1 = box
    d = p1 - p0
    t0 = np.zeros(len(p0))
    t1 = np.ones(len(p0))
    hit = np.ones(len(p0), dtype=bool)
    for axis, lo, hi in ((0, u0, u1), (1, w0, w1)):
        dd = d[:, axis]
        pp = p0[:, axis]
        par = np.abs(dd) < 1e-15
        hit &= ~(par & ((pp <= lo) | (pp >= hi)))
        with np.errstate(divide="ignore", invalid="ignore"):
            ta = (lo - pp) / dd
            tb = (hi - pp) / dd
        tmin = np.where(par, -np.inf, np.minimum(ta, tb))
        tmax = np.where(par, np.inf, np.maximum(ta, tb))
        t0 = np.maximum(t0, tmin)
        t1 = np.minimum(t1, tmax)
    return hit & (t0 < t1)


def tunneling_count(traj) -> int:
    """Steps in which a peg vertex jumps clean across a block piece.

    A vertex whose step segment enters a block piece through one face and
    leaves through the opposite one, with both endpoints outside, went
    through the wall without ever being detected as penetrating.
    """
    model = PlanarContactModel(traj.cfg.peg, traj.cfg.hole)
    verts = model.peg_verts
    mp, sp = traj.master_pose, traj.slave_pose
    # peg vertices in the hole frame, shape (n, nv, 2)
    pc, ps = np.cos(mp[:, 2])[:, None], np.sin(mp[:, 2])[:, None]
    X = mp[:, 0:1] + verts[:, 0] * pc + verts[:, 1] * ps
    Z = mp[:, 1:2] - verts[:, 0] * ps + verts[:, 1] * pc
    hc, hs = np.cos(sp[:, 2])[:, None], np.sin(sp[:, 2])[:, None]
    du, dw = X - sp[:, 0:1], Z - sp[:, 1:2]
    lu = du * hc - dw * hs
    lw = du * hs + dw * hc
    P = np.stack([lu, lw], axis=-1)
    count = 0
    for box in model.rects:
        u0, u1, w0, w1 = box
        inside = (P[..., 0] > u0) & (P[..., 0] < u1) & (P[..., 1] > w0) & (P[..., 1] < w1)
        for v in range(P.shape[1]):
            a, b = P[:-1, v], P[1:, v]
            both_out = ~inside[:-1, v] & ~inside[1:, v]
            if not both_out.any():
                continue
            a, b = a[both_out], b[both_out]
            hits = _segment_hits_box(a, b, box)
            # a full crossing leaves through the face opposite to the entry;
            # clipping a corner by a few micrometres is not tunnelling
            across = np.zeros(len(a), dtype=bool)
            for axis, lo, hi in ((0, u0, u1), (1, w0, w1)):
                across |= ((a[:, axis] <= lo) & (b[:, axis] >= hi)) | ((a[:, axis] >= hi) & (b[:, axis] <= lo))
            count += int((hits & across).sum())
    return count


def stiction_ratio(traj) -> float:
    """Largest held-block wrench over its breakaway threshold (must stay below 1)."""
    return float(np.max(traj.data[:, K.R_HOLD_RATIO], initial=0.0))


def quasi_static_ratio(traj) -> float:
    """Largest CoC speed relative to ``admittance gain x wrench limit``.

    In the quasi-static model the contact wrench only reacts to the
    controller, so no block can move faster than its admittance times the
    clamped controller wrench of the two arms together.
    """
    worst = 0.0
    for i, ac in enumerate((traj.cfg.master, traj.cfg.slave)):
        Af, At = ac.admittance_gains
        gf = max(Af[0, 0], Af[2, 2])
        gt = At[1, 1]
        flim = traj.cfg.master.force_limit + traj.cfg.slave.force_limit
        tlim = traj.cfg.master.torque_limit + traj.cfg.slave.torque_limit
        col = K.R_VEL_M if i == 0 else K.R_VEL_S
        v = traj.data[:, col : col + 3]
        worst = max(
            worst,
            float(np.max(np.hypot(v[:, 0], v[:, 1]), initial=0.0)) / (gf * flim),
            float(np.max(np.abs(v[:, 2]), initial=0.0)) / (gt * tlim),
        )
    return worst


def check_trajectory(traj) -> InvariantReport:
    return InvariantReport(
        cone_violation(traj),
        adhesion_violation(traj),
        planarity_violation(traj),
        tunneling_count(traj),
        stiction_ratio(traj),
        quasi_static_ratio(traj),
    )
