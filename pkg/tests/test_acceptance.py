"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as they
are produced; they are also repeated in the terminal summary.
"""

import math
from dataclasses import replace

import numpy as np
import pytest

from conftest import record_acceptance
from dualpih.harness import DemoConfig, Scenario, apply_params, default_scenario, run_demo, sweep
from dualpih.harness.runner import metrics_table
from dualpih.harness.scenario import default_master, default_slave
from dualpih.lfd import compose_friction, decompose_friction, learn, pca_axes, bic_select
from dualpih.sim import ALIGNED, JAMMED, run_episode
from dualpih.sim.kinematics import fk_3r, ik_3r
from oracles import check_against_grid, exhaustive_bic_argmin, random_sector_set

ANGLES = [float(a) for a in range(4, 17)]
CONFIGS = ["A", "B", "C", "D", "E"]


@pytest.fixture(scope="module")
def sweep_report():
    return sweep(default_scenario(), CONFIGS, ANGLES, reps=5, workers=None, check_invariants=True)


def _max_angles(rep):
    return {c: rep["summary"][c]["max_angle_deg"] for c in CONFIGS}


def test_criterion_1_convergence_ordering(sweep_report):
    m = _max_angles(sweep_report)
    checks = sweep_report["ordering"]
    passed = all(checks.values())
    shown = ", ".join(f"{c}={'<4' if v is None else format(v, 'g')}" for c, v in m.items())
    failed = [k for k, v in checks.items() if not v]
    record_acceptance(1, passed, f"max aligned angle {shown}" + (f"; violated: {', '.join(failed)}" if failed else ""))
    assert passed, checks


def test_criterion_2_motion_metric_ordering(sweep_report):
    m = _max_angles(sweep_report)
    if any(m[c] is None for c in "BDE"):
        record_acceptance(2, False, "B, D and E never all succeed")
        pytest.fail("no common angle")
    angle = min(m["B"], m["D"], m["E"])
    rows = {r["config"]: r for r in metrics_table(default_scenario(), ["B", "D", "E"], angle, reps=5)}
    parts, ok = [], True
    for key in ("joint_dist_sum", "duration"):
        e, d, b = (rows[c][key] for c in "EDB")
        gap_ed = (d - e) / d
        gap_db = (b - d) / b
        good = gap_ed >= 0.10 and gap_db >= 0.10
        ok &= good
        parts.append(f"{key} E={e:.4g} D={d:.4g} B={b:.4g} (gaps {100 * gap_ed:.1f}%, {100 * gap_db:.1f}%)")
    record_acceptance(2, ok, f"at {angle:g} deg: " + "; ".join(parts))
    assert ok


def test_criterion_3_centre_of_compliance():
    found = []
    for a in ANGLES:
        kinds = {}
        for coc in ("tooltip", "wrist"):
            master = replace(default_master(), coc=coc, rot_compliant=(False, True, False))
            scn = Scenario(label="custom", initial_error_deg=a, master=master, slave=default_slave())
            kinds[coc] = run_episode(scn.sim_config())[1].kind
        if kinds["tooltip"] == ALIGNED and kinds["wrist"] == JAMMED:
            found.append(a)
    ok = bool(found)
    record_acceptance(3, ok, "tooltip Aligned and wrist Jammed at "
                      + (", ".join(f"{a:g}" for a in found) + " deg" if found else "no angle"))
    assert ok


def _angle(a, b):
    return math.degrees(math.acos(min(1.0, abs(float(np.dot(a, b))))))


def test_criterion_4_learning_from_demonstration():
    base = default_scenario()
    cfg = base.sim_config()
    X, Y, Z = np.eye(3)
    correct, repro_fail, misses = 0, [], []
    for seed in range(100):
        res = run_demo(cfg, DemoConfig(seed=seed))
        try:
            p = learn(res.log)
        except ValueError as e:
            misses.append(f"{seed}: {e}")
            continue
        good = (
            _angle(p.v_d.dir, Z) < 10
            and len(p.trans_axes) == 1 and _angle(p.trans_axes[0].dir, X) < 10
            and len(p.rot_axes) == 1 and _angle(p.rot_axes[0].dir, Y) < 10
        )
        if not good:
            misses.append(f"{seed}: {len(p.trans_axes)} trans / {len(p.rot_axes)} rot axes")
            continue
        correct += 1
        if seed < 10:
            out = run_episode(apply_params(base, p).with_(initial_error_deg=8.0).sim_config())[1]
            if out.kind != ALIGNED:
                repro_fail.append(seed)
    ok = correct >= 95 and not repro_fail
    record_acceptance(4, ok, f"{correct}/100 demonstrations learned correctly; reproduction at 8 deg "
                      f"{'Aligned for every learned seed below 10' if not repro_fail else 'failed for ' + str(repro_fail)}"
                      + (f"; misses {misses}" if misses else ""))
    assert ok


def test_criterion_5_oracles():
    rng = np.random.default_rng(2024)
    # friction decomposition round trip
    worst = 0.0
    for _ in range(10_000):
        n = rng.normal(size=3) * rng.uniform(0.5, 50)
        v = rng.normal(size=3)
        v -= (v @ n) / (n @ n) * n
        v /= np.linalg.norm(v)
        mu = rng.uniform(0, 1.5)
        F_N, mu_hat = decompose_friction(compose_friction(n, mu, v), v)
        worst = max(worst, float(np.max(np.abs(F_N - n)) / max(1.0, np.linalg.norm(n))), abs(mu_hat - mu))
    dec_ok = worst <= 1e-9
    # sector intersection against a 0.1 degree grid
    grid_bad = sum(not check_against_grid(random_sector_set(rng)) for _ in range(1000))
    # BIC against an exhaustive full-covariance likelihood
    bic_bad = 0
    for _ in range(300):
        Xr = rng.normal(0, 1e-3, (int(rng.integers(50, 500)), 3)) * rng.uniform(0.5, 5.0, 3)
        V, lam = pca_axes(Xr)
        bic_bad += bic_select(Xr, V, lam, 1e-3) != exhaustive_bic_argmin(Xr, V, lam, 1e-3)
    # IK/FK round trip on reachable poses
    ik_worst = 0.0
    for _ in range(10_000):
        q = rng.uniform(-math.pi, math.pi, 3)
        q[1] = math.copysign(rng.uniform(0.05, 3.0), q[1])
        x, y, phi = fk_3r(q)
        x2, y2, phi2 = fk_3r(ik_3r(x, y, phi))
        ik_worst = max(ik_worst, abs(x2 - x), abs(y2 - y), abs((phi2 - phi + math.pi) % (2 * math.pi) - math.pi))
    ok = dec_ok and grid_bad == 0 and bic_bad == 0 and ik_worst <= 1e-9
    record_acceptance(5, ok, f"decomposition max error {worst:.2e} over 1e4; sector grid mismatches {grid_bad}/1000; "
                      f"BIC mismatches {bic_bad}/300; IK/FK max error {ik_worst:.2e} over 1e4")
    assert ok


def test_criterion_6_physical_invariants(sweep_report):
    cells = sweep_report["cells"]
    inv = [c["invariants"] for c in cells]
    worst = {
        "cone": max(i["cone"] for i in inv),
        "adhesion": max(i["adhesion"] for i in inv),
        "planarity": max(i["planarity"] for i in inv),
        "tunneling": sum(i["tunneling"] for i in inv),
    }
    inv_ok = worst["cone"] <= 1e-9 and worst["adhesion"] <= 1e-9 and worst["planarity"] < 1e-9 and worst["tunneling"] == 0
    again = sweep(default_scenario(), CONFIGS, ANGLES, reps=5, workers=None)
    same = sum(a["digest"] == b["digest"] for a, b in zip(cells, again["cells"]))
    ok = inv_ok and same == len(cells)
    record_acceptance(6, ok, f"{len(cells)} episodes: cone {worst['cone']:.1e} N, adhesion {worst['adhesion']:.1e} N, "
                      f"planarity {worst['planarity']:.1e}, tunneling steps {worst['tunneling']}; "
                      f"bit-exact reruns {same}/{len(cells)}")
    assert ok
