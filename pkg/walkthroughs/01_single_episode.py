"""One insertion episode per compliance configuration.

Runs configurations A-E from the shipped scenario at one initial error and
prints how each one ends, then writes the trajectory of configuration E to
CSV for plotting.

    python walkthroughs/01_single_episode.py [angle_deg]
"""

import math
import sys

from dualpih.harness import configure, default_scenario
from dualpih.sim import check_trajectory, motion_metrics, run_episode
from dualpih.sim.export import write_trajectory_csv

angle = float(sys.argv[1]) if len(sys.argv) > 1 else 8.0
base = default_scenario().with_(initial_error_deg=angle)

for label in "ABCDE":
    traj, out = run_episode(configure(base, label).sim_config())
    m = motion_metrics(traj)
    inv = "ok" if check_trajectory(traj).ok() else "VIOLATED"
    print(f"{label}: {out.kind:16s} depth {1e3 * out.insertion_depth:5.1f} mm  "
          f"angle {math.degrees(out.final_rel_angle):6.2f} deg  t {out.duration:5.1f} s  "
          f"joint distance {m.joint_dist_sum:.3f} rad  invariants {inv}")

traj, _ = run_episode(configure(base, "E").sim_config())
print("trajectory of E written to", write_trajectory_csv(traj, "episode_E.csv"))
