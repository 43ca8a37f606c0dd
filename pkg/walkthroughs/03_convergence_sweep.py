"""Convergence region of every configuration and the motion metrics.

Sweeps initial errors from 4 to 16 degrees for configurations A-E, prints
the largest aligned angle per configuration and the expected orderings,
then compares joint-space motion of B, D and E at the largest angle all
three handle.

    python walkthroughs/03_convergence_sweep.py
"""

from dualpih.harness import default_scenario, parse_angles, sweep
from dualpih.harness.runner import metrics_table

scn = default_scenario()
rep = sweep(scn, list("ABCDE"), parse_angles("4:16:1"), reps=1)
for c, s in rep["summary"].items():
    best = s["max_angle_deg"]
    print(f"{c}: max aligned angle {'< 4' if best is None else best} deg")
for k, v in rep["ordering"].items():
    print(f"  {k}: {v}")

common = min(rep["summary"][c]["max_angle_deg"] or 0 for c in "BDE")
if common:
    for row in metrics_table(scn, ["B", "D", "E"], common, reps=3):
        print(f"{row['config']} at {common:g} deg: joint distance {row['joint_dist_sum']:.3f} rad "
              f"(master {row['master_joint_dist']:.3f}, slave {row['slave_joint_dist']:.3f}), "
              f"duration {row['duration']:.1f} s")
