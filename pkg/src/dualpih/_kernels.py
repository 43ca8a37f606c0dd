"""Compiled inner loops of the planar stepper.

Everything here works on plain float arrays in the x-z plane. Arm index 0 is
the master (peg), 1 the slave (hole block). Generalised velocities are the
world-frame ``(vx, vz, wy)`` of each arm's centre of compliance.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

MAX_CONTACTS = 16

# arm parameter layout
P_COC_U, P_COC_W = 0, 1
P_K = 2  # kuu, kuw, kwu, kww (local)
P_KTH = 6
P_D = 7  # duu, duw, dwu, dww (local)
P_DTH = 11
P_FLIM, P_TLIM = 12, 13
P_BRK_F, P_BRK_T = 14, 15
P_FF_X, P_FF_Z = 16, 17  # feed-forward velocity, world
N_ARM_PARAMS = 18

# sim parameter layout
S_DT, S_KC, S_CC, S_MU, S_EPS, S_VREST_F, S_VREST_T, S_BLOWUP = range(8)
N_SIM_PARAMS = 8

# per-step record layout
R_T = 0
R_POSE_M = 1  # x, z, th of the master tool
R_POSE_S = 4
R_CMD_M = 7  # fx, fz, ty commanded at the master CoC (clamped spring minus damping)
R_CMD_S = 10
R_VEL_M = 13  # CoC twist
R_VEL_S = 16
R_NCONT = 19
R_FPEG = 20  # fx, fz contact force sum on the peg
R_FN_SUM = 22
R_FN_MIN = 23
R_CONE = 24  # max |f_t| - mu f_n over contacts
R_HELD = 25  # bitmask of held blocks
R_TARGET = 26  # master CoC target x, z
R_MAXPEN = 28
R_NEWTON = 29
R_HOLD_RATIO = 30  # max |held block wrench| / breakaway
N_RECORD = 31


@njit(cache=True)
def contacts_kernel(px, pz, pt, hx, hz, ht, peg_verts, peg_faces, rects, rect_faces, rect_nfaces, corners, out):
    """Fill ``out[k] = (x, z, nx, nz, pen, kind)``; return the contact count.

    ``(nx, nz)`` is the force direction on the peg. ``kind`` 0: peg vertex in
    the block, 1: mouth corner in the peg.
    """
    pc, ps = math.cos(pt), math.sin(pt)
    hc, hs = math.cos(ht), math.sin(ht)
    n = 0
    for i in range(peg_verts.shape[0]):
        u, w = peg_verts[i, 0], peg_verts[i, 1]
        X = px + u * pc + w * ps
        Z = pz - u * ps + w * pc
        du, dw = X - hx, Z - hz
        lu = du * hc - dw * hs
        lw = du * hs + dw * hc
        for r in range(rects.shape[0]):
            if not (rects[r, 0] < lu < rects[r, 1] and rects[r, 2] < lw < rects[r, 3]):
                continue
            best = 1e300
            bu = 0.0
            bw = 0.0
            for f in range(rect_nfaces[r]):
                nu, nw, off = rect_faces[r, f, 0], rect_faces[r, f, 1], rect_faces[r, f, 2]
                d = off - (nu * lu + nw * lw)
                if d < best:
                    best = d
                    bu = nu
                    bw = nw
            if best > 0.0 and n < MAX_CONTACTS:
                out[n, 0] = X
                out[n, 1] = Z
                out[n, 2] = bu * hc + bw * hs
                out[n, 3] = -bu * hs + bw * hc
                out[n, 4] = best
                out[n, 5] = 0.0
                n += 1
            break
    for i in range(corners.shape[0]):
        u, w = corners[i, 0], corners[i, 1]
        X = hx + u * hc + w * hs
        Z = hz - u * hs + w * hc
        du, dw = X - px, Z - pz
        lu = du * pc - dw * ps
        lw = du * ps + dw * pc
        best = 1e300
        bu = 0.0
        bw = 0.0
        inside = True
        for f in range(peg_faces.shape[0]):
            nu, nw, off = peg_faces[f, 0], peg_faces[f, 1], peg_faces[f, 2]
            d = off - (nu * lu + nw * lw)
            if d <= 0.0:
                inside = False
                break
            if d < best:
                best = d
                bu = nu
                bw = nw
        if inside and n < MAX_CONTACTS:
            out[n, 0] = X
            out[n, 1] = Z
            out[n, 2] = -(bu * pc + bw * ps)
            out[n, 3] = -(-bu * ps + bw * pc)
            out[n, 4] = best
            out[n, 5] = 1.0
            n += 1
    return n


@njit(cache=True)
def _contact_forces(V, Gn, Gt, pen, m, kc, cc, mu, eps, dt, fn, ft, dfn_da, dft_da, dft_db):
    for j in range(m):
        a = 0.0
        b = 0.0
        for k in range(6):
            a += Gn[j, k] * V[k]
            b += Gt[j, k] * V[k]
        kd = kc * dt + cc
        f = kc * pen[j] - kd * a
        if f > 0.0:
            fn[j] = f
            dfn_da[j] = -kd
        else:
            fn[j] = 0.0
            dfn_da[j] = 0.0
        th = math.tanh(b / eps)
        ft[j] = -mu * fn[j] * th
        dft_da[j] = -mu * th * dfn_da[j]
        dft_db[j] = -mu * fn[j] * (1.0 - th * th) / eps


@njit(cache=True)
def _residual(V, Dm, W, Gn, Gt, fn, ft, m, r):
    for i in range(6):
        s = -W[i]
        for k in range(6):
            s += Dm[i, k] * V[k]
        for j in range(m):
            s -= Gn[j, i] * fn[j] + Gt[j, i] * ft[j]
        r[i] = s


@njit(cache=True)
def solve_velocities(V, Dm, W, Gn, Gt, pen, m, free, kc, cc, mu, eps, dt):
    """Damped Newton on ``Dm V = W + G^T f(G V)`` over the free dofs.

    ``V`` is updated in place (held dofs are forced to zero). Returns the
    iteration count; contact forces at the solution are returned as well.
    """
    fn = np.zeros(m)
    ft = np.zeros(m)
    dfn_da = np.zeros(m)
    dft_da = np.zeros(m)
    dft_db = np.zeros(m)
    r = np.zeros(6)
    nfree = 0
    idx = np.zeros(6, dtype=np.int64)
    for i in range(6):
        if free[i]:
            idx[nfree] = i
            nfree += 1
        else:
            V[i] = 0.0
    it = 0
    if nfree == 0:
        _contact_forces(V, Gn, Gt, pen, m, kc, cc, mu, eps, dt, fn, ft, dfn_da, dft_da, dft_db)
        return it, fn, ft
    scale = 1.0
    for i in range(6):
        scale = max(scale, abs(W[i]))
    tol = 1e-10 * scale
    _contact_forces(V, Gn, Gt, pen, m, kc, cc, mu, eps, dt, fn, ft, dfn_da, dft_da, dft_db)
    _residual(V, Dm, W, Gn, Gt, fn, ft, m, r)
    rn = 0.0
    for q in range(nfree):
        rn = max(rn, abs(r[idx[q]]))
    Vt = np.zeros(6)
    rt = np.zeros(6)
    while rn > tol and it < 60:
        it += 1
        J = np.zeros((nfree, nfree))
        rhs = np.zeros(nfree)
        for qa in range(nfree):
            ia = idx[qa]
            rhs[qa] = -r[ia]
            for qb in range(nfree):
                ib = idx[qb]
                s = Dm[ia, ib]
                for j in range(m):
                    s -= Gn[j, ia] * dfn_da[j] * Gn[j, ib]
                    s -= Gt[j, ia] * (dft_da[j] * Gn[j, ib] + dft_db[j] * Gt[j, ib])
                J[qa, qb] = s
        dx = np.linalg.solve(J, rhs)
        step = 1.0
        accepted = False
        for _ in range(30):
            for i in range(6):
                Vt[i] = V[i]
            for q in range(nfree):
                Vt[idx[q]] = V[idx[q]] + step * dx[q]
            _contact_forces(Vt, Gn, Gt, pen, m, kc, cc, mu, eps, dt, fn, ft, dfn_da, dft_da, dft_db)
            _residual(Vt, Dm, W, Gn, Gt, fn, ft, m, rt)
            rnt = 0.0
            for q in range(nfree):
                rnt = max(rnt, abs(rt[idx[q]]))
            if rnt < rn or rnt <= tol:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        for i in range(6):
            V[i] = Vt[i]
            r[i] = rt[i]
        rn = rnt
    _contact_forces(V, Gn, Gt, pen, m, kc, cc, mu, eps, dt, fn, ft, dfn_da, dft_da, dft_db)
    return it, fn, ft


@njit(cache=True)
def _wrap(a):
    return (a + math.pi) % (2.0 * math.pi) - math.pi


@njit(cache=True)
def step_kernel(pose, target, vel, held, arm, sim, geo_peg_verts, geo_peg_faces, geo_rects,
                geo_rect_faces, geo_rect_nfaces, geo_corners, rec):
    """Advance the world by one ``dt``; fill ``rec`` with the step record.

    Returns ``-1`` on contact blow-up, otherwise the contact count.
    """
    dt = sim[S_DT]
    kc, cc, mu, eps = sim[S_KC], sim[S_CC], sim[S_MU], sim[S_EPS]

    # feed-forward targets
    for a in range(2):
        target[a, 0] += arm[a, P_FF_X] * dt
        target[a, 1] += arm[a, P_FF_Z] * dt

    # centre-of-compliance points and controller spring wrenches
    cp = np.zeros((2, 2))
    W = np.zeros(6)
    Dm = np.zeros((6, 6))
    for a in range(2):
        c, s = math.cos(pose[a, 2]), math.sin(pose[a, 2])
        u, w = arm[a, P_COC_U], arm[a, P_COC_W]
        cp[a, 0] = pose[a, 0] + u * c + w * s
        cp[a, 1] = pose[a, 1] - u * s + w * c
        ex = target[a, 0] - cp[a, 0]
        ez = target[a, 1] - cp[a, 1]
        eu = ex * c - ez * s
        ew = ex * s + ez * c
        fu = arm[a, P_K] * eu + arm[a, P_K + 1] * ew
        fw = arm[a, P_K + 2] * eu + arm[a, P_K + 3] * ew
        fx = fu * c + fw * s
        fz = -fu * s + fw * c
        tq = arm[a, P_KTH] * _wrap(target[a, 2] - pose[a, 2])
        nf = math.hypot(fx, fz)
        if nf > arm[a, P_FLIM]:
            fx *= arm[a, P_FLIM] / nf
            fz *= arm[a, P_FLIM] / nf
        if abs(tq) > arm[a, P_TLIM]:
            tq = math.copysign(arm[a, P_TLIM], tq)
        W[3 * a] = fx
        W[3 * a + 1] = fz
        W[3 * a + 2] = tq
        # world damping R D R^T, local axes (u, w) map to world columns
        duu, duw, dwu, dww = arm[a, P_D], arm[a, P_D + 1], arm[a, P_D + 2], arm[a, P_D + 3]
        # R = [[c, s], [-s, c]] maps local (u, w) to world (x, z)
        r00, r01, r10, r11 = c, s, -s, c
        a00 = r00 * duu + r01 * dwu
        a01 = r00 * duw + r01 * dww
        a10 = r10 * duu + r11 * dwu
        a11 = r10 * duw + r11 * dww
        Dm[3 * a, 3 * a] = a00 * r00 + a01 * r01
        Dm[3 * a, 3 * a + 1] = a00 * r10 + a01 * r11
        Dm[3 * a + 1, 3 * a] = a10 * r00 + a11 * r01
        Dm[3 * a + 1, 3 * a + 1] = a10 * r10 + a11 * r11
        Dm[3 * a + 2, 3 * a + 2] = arm[a, P_DTH]

    # contacts
    craw = np.zeros((MAX_CONTACTS, 6))
    m = contacts_kernel(pose[0, 0], pose[0, 1], pose[0, 2], pose[1, 0], pose[1, 1], pose[1, 2],
                        geo_peg_verts, geo_peg_faces, geo_rects, geo_rect_faces, geo_rect_nfaces,
                        geo_corners, craw)
    maxpen = 0.0
    for j in range(m):
        maxpen = max(maxpen, craw[j, 4])
    if maxpen > sim[S_BLOWUP]:
        rec[R_MAXPEN] = maxpen
        return -1
    Gn = np.zeros((m, 6))
    Gt = np.zeros((m, 6))
    pen = np.zeros(m)
    for j in range(m):
        X, Z, nx, nz = craw[j, 0], craw[j, 1], craw[j, 2], craw[j, 3]
        tx, tz = -nz, nx
        pen[j] = craw[j, 4]
        for a in range(2):
            sg = 1.0 if a == 0 else -1.0
            rx = X - cp[a, 0]
            rz = Z - cp[a, 1]
            Gn[j, 3 * a] = sg * nx
            Gn[j, 3 * a + 1] = sg * nz
            Gn[j, 3 * a + 2] = sg * (rz * nx - rx * nz)
            Gt[j, 3 * a] = sg * tx
            Gt[j, 3 * a + 1] = sg * tz
            Gt[j, 3 * a + 2] = sg * (rz * tx - rx * tz)

    # stiction: held blocks stay put unless their wrench reaches breakaway
    free = np.ones(6, dtype=np.bool_)
    for a in range(2):
        if held[a, 0]:
            free[3 * a] = False
            free[3 * a + 1] = False
        if held[a, 1]:
            free[3 * a + 2] = False
    V = np.zeros(6)
    for i in range(6):
        V[i] = vel[i // 3, i % 3]
    iters = 0
    fn = np.zeros(m)
    ft = np.zeros(m)
    for _ in range(5):
        it, fn, ft = solve_velocities(V, Dm, W, Gn, Gt, pen, m, free, kc, cc, mu, eps, dt)
        iters += it
        # wrench on every held block at the solution
        changed = False
        for a in range(2):
            for blk in range(2):
                if free[3 * a + (0 if blk == 0 else 2)]:
                    continue
                if blk == 0:
                    gx = W[3 * a]
                    gz = W[3 * a + 1]
                    for j in range(m):
                        gx += Gn[j, 3 * a] * fn[j] + Gt[j, 3 * a] * ft[j]
                        gz += Gn[j, 3 * a + 1] * fn[j] + Gt[j, 3 * a + 1] * ft[j]
                    if math.hypot(gx, gz) >= arm[a, P_BRK_F]:
                        free[3 * a] = True
                        free[3 * a + 1] = True
                        changed = True
                else:
                    g = W[3 * a + 2]
                    for j in range(m):
                        g += Gn[j, 3 * a + 2] * fn[j] + Gt[j, 3 * a + 2] * ft[j]
                    if abs(g) >= arm[a, P_BRK_T]:
                        free[3 * a + 2] = True
                        changed = True
        if not changed:
            break

    hold_ratio = 0.0
    for a in range(2):
        if not free[3 * a]:
            gx = W[3 * a]
            gz = W[3 * a + 1]
            for j in range(m):
                gx += Gn[j, 3 * a] * fn[j] + Gt[j, 3 * a] * ft[j]
                gz += Gn[j, 3 * a + 1] * fn[j] + Gt[j, 3 * a + 1] * ft[j]
            hold_ratio = max(hold_ratio, math.hypot(gx, gz) / arm[a, P_BRK_F])
        if not free[3 * a + 2]:
            g = W[3 * a + 2]
            for j in range(m):
                g += Gn[j, 3 * a + 2] * fn[j] + Gt[j, 3 * a + 2] * ft[j]
            hold_ratio = max(hold_ratio, abs(g) / arm[a, P_BRK_T])

    # rest flags for the next step
    hmask = 0
    for a in range(2):
        if free[3 * a]:
            held[a, 0] = math.hypot(V[3 * a], V[3 * a + 1]) < sim[S_VREST_F]
        else:
            held[a, 0] = True
        if free[3 * a + 2]:
            held[a, 1] = abs(V[3 * a + 2]) < sim[S_VREST_T]
        else:
            held[a, 1] = True
        if not free[3 * a]:
            hmask |= 1 << (2 * a)
        if not free[3 * a + 2]:
            hmask |= 1 << (2 * a + 1)

    # diagnostics
    fpx = 0.0
    fpz = 0.0
    fnsum = 0.0
    fnmin = 0.0
    cone = -1e300
    for j in range(m):
        nx, nz = craw[j, 2], craw[j, 3]
        fpx += fn[j] * nx - ft[j] * nz
        fpz += fn[j] * nz + ft[j] * nx
        fnsum += fn[j]
        fnmin = min(fnmin, fn[j])
        cone = max(cone, abs(ft[j]) - mu * fn[j])

    # integrate about the CoC, then recover the tool origin
    for a in range(2):
        vx, vz, om = V[3 * a], V[3 * a + 1], V[3 * a + 2]
        vel[a, 0] = vx
        vel[a, 1] = vz
        vel[a, 2] = om
        rec[R_CMD_M + 3 * a] = W[3 * a] - (Dm[3 * a, 3 * a] * vx + Dm[3 * a, 3 * a + 1] * vz)
        rec[R_CMD_M + 3 * a + 1] = W[3 * a + 1] - (Dm[3 * a + 1, 3 * a] * vx + Dm[3 * a + 1, 3 * a + 1] * vz)
        rec[R_CMD_M + 3 * a + 2] = W[3 * a + 2] - Dm[3 * a + 2, 3 * a + 2] * om
        ncx = cp[a, 0] + vx * dt
        ncz = cp[a, 1] + vz * dt
        th = pose[a, 2] + om * dt
        c, s = math.cos(th), math.sin(th)
        u, w = arm[a, P_COC_U], arm[a, P_COC_W]
        pose[a, 0] = ncx - (u * c + w * s)
        pose[a, 1] = ncz - (-u * s + w * c)
        pose[a, 2] = th

    rec[R_POSE_M] = pose[0, 0]
    rec[R_POSE_M + 1] = pose[0, 1]
    rec[R_POSE_M + 2] = pose[0, 2]
    rec[R_POSE_S] = pose[1, 0]
    rec[R_POSE_S + 1] = pose[1, 1]
    rec[R_POSE_S + 2] = pose[1, 2]
    for a in range(2):
        rec[R_VEL_M + 3 * a] = vel[a, 0]
        rec[R_VEL_M + 3 * a + 1] = vel[a, 1]
        rec[R_VEL_M + 3 * a + 2] = vel[a, 2]
    rec[R_NCONT] = m
    rec[R_FPEG] = fpx
    rec[R_FPEG + 1] = fpz
    rec[R_FN_SUM] = fnsum
    rec[R_FN_MIN] = fnmin
    rec[R_CONE] = cone if m > 0 else 0.0
    rec[R_HELD] = hmask
    rec[R_TARGET] = target[0, 0]
    rec[R_TARGET + 1] = target[0, 1]
    rec[R_MAXPEN] = maxpen
    rec[R_NEWTON] = iters
    rec[R_HOLD_RATIO] = hold_ratio
    return m


@njit(cache=True)
def run_steps(n, k0, pose, target, vel, held, arm, sim, pv, pf, rects, rfaces, rnf, corners, out):
    """Run ``n`` steps writing one record row per step; return rows written (negative on blow-up)."""
    dt = sim[S_DT]
    for i in range(n):
        res = step_kernel(pose, target, vel, held, arm, sim, pv, pf, rects, rfaces, rnf, corners, out[i])
        out[i, R_T] = (k0 + i + 1) * dt
        if res < 0:
            return -(i + 1)
    return n
