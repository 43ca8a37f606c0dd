"""End-to-end learning: demonstration log in, skill parameters out."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..frames import UnitDir
from .axes import bic_scores, bic_select, noise_floor_estimate, pca_axes, residual_increments
from .demolog import DemoLog
from .params import LearnedParams, build_params
from .sectors import (
    FREE_SPACE_HALF_ANGLE,
    Y_AXIS,
    EmptyIntersection,
    free_space_sector,
    intersect_sectors,
    sector_from_sample,
)
from .wrench import FORCE_FLOOR, NORMAL_FLOOR, SPEED_FLOOR, NoSurface, decompose_friction

FREE = "free"
CONTACT = "contact"


@dataclass(frozen=True)
class LearnConfig:
    speed_floor: float = SPEED_FLOOR
    force_floor: float = FORCE_FLOOR
    normal_floor: float = NORMAL_FLOOR
    free_half_angle: float = FREE_SPACE_HALF_ANGLE
    defaults: dict | None = None


@dataclass(frozen=True)
class SampleSector:
    index: int
    t: float
    kind: str
    sector: object
    mu_hat: float | None = None

    def as_dict(self) -> dict:
        d = {"index": self.index, "t": self.t, "kind": self.kind}
        d.update(self.sector.as_dict())
        if self.mu_hat is not None:
            d["mu_hat"] = self.mu_hat
        return d


def tool_frame_signals(demo: DemoLog) -> tuple[np.ndarray, np.ndarray]:
    """Environment force and tool velocity, both in the tool frame of each sample."""
    R = demo.rotations()
    F_env = -np.einsum("nji,nj->ni", R, demo.force)
    v = np.einsum("nji,nj->ni", R, demo.linear_velocity)
    return F_env, v


def sample_sectors(demo: DemoLog, cfg: LearnConfig = LearnConfig()) -> tuple[list[SampleSector], dict]:
    """One sector per usable sample plus counts of what was skipped.

    Samples slower than the speed floor are discarded. Moving samples with
    a force below the force floor are free space and contribute a cone about
    the motion, unless the log flags them as touching: such a contact is
    real but too weak to decompose, so it is discarded. The rest are sliding
    contacts.
    """
    F, v = tool_frame_signals(demo)
    out = []
    counts = {"discarded": 0, "rejected": 0, FREE: 0, CONTACT: 0}
    for i in range(len(demo)):
        speed = float(np.linalg.norm(v[i]))
        if speed <= cfg.speed_floor:
            counts["discarded"] += 1
            continue
        vhat = v[i] / speed
        if float(np.linalg.norm(F[i])) <= cfg.force_floor:
            if demo.contact_count is not None and demo.contact_count[i] > 0:
                counts["discarded"] += 1
                continue
            out.append(SampleSector(i, float(demo.t[i]), FREE, free_space_sector(vhat, cfg.free_half_angle)))
            counts[FREE] += 1
            continue
        try:
            F_N, mu = decompose_friction(F[i], vhat, cfg.normal_floor)
            s = sector_from_sample(F_N, mu, vhat, Y_AXIS)
        except (NoSurface, ValueError):
            counts["rejected"] += 1
            continue
        out.append(SampleSector(i, float(demo.t[i]), CONTACT, s, mu))
        counts[CONTACT] += 1
    return out, counts


def friction_estimate(demo: DemoLog, sectors) -> float:
    """Median friction coefficient over single-surface sliding samples.

    With several simultaneous contacts the normal forces partly cancel and
    the apparent ratio says nothing about the surface, so when the log tells
    the contact count only single contacts are used. Without usable samples
    the prior (or zero) is returned.
    """
    cc = demo.contact_count
    mus = [s.mu_hat for s in sectors if s.kind == CONTACT and (cc is None or cc[s.index] == 1)]
    if mus:
        return float(np.median(mus))
    return float(demo.mu_prior) if demo.mu_prior is not None else 0.0


def learn(demo: DemoLog, cfg: LearnConfig = LearnConfig()) -> LearnedParams:
    """Desired direction from the sector intersection, compliant axes from PCA and BIC."""
    sectors, counts = sample_sectors(demo, cfg)
    if not sectors:
        raise ValueError("the demonstration has no moving samples to learn from")
    try:
        v_d, common = intersect_sectors([s.sector for s in sectors])
    except EmptyIntersection as e:
        e.dump = [s.as_dict() for s in sectors]
        if e.index is not None:
            e.dump_index = e.index
            e.sample = sectors[e.index].as_dict()
        raise
    mu_hat = friction_estimate(demo, sectors)

    trans, rot = residual_increments(demo, v_d)
    ta, tl = pca_axes(trans)
    # the axis along v_d carries no residual by construction; drop it
    keep = np.argsort(np.abs(ta @ v_d.dir))[:2]
    keep.sort()
    ta, tl = ta[keep], tl[keep]
    ra, rl = pca_axes(rot)
    nf = demo.noise_floor
    s_t = nf.translation if nf else noise_floor_estimate(tl)
    s_r = nf.rotation if nf else noise_floor_estimate(rl)
    kt = bic_select(trans, ta, tl, s_t if s_t > 0 else None)
    kr = bic_select(rot, ra, rl, s_r if s_r > 0 else None)
    diag = {
        "samples": len(demo),
        "sector_counts": counts,
        "intersection_deg": [math.degrees(b) for b in common.bounds],
        "trans_variances": tl.tolist(),
        "rot_variances": rl.tolist(),
        "trans_sigma0": s_t,
        "rot_sigma0": s_r,
    }
    if s_t > 0:
        diag["trans_bic"] = bic_scores(trans, ta, tl, s_t).tolist()
    if s_r > 0:
        diag["rot_bic"] = bic_scores(rot, ra, rl, s_r).tolist()
    return build_params(v_d, list(ta[:kt]), list(ra[:kr]), cfg.defaults, mu_hat, diag)
