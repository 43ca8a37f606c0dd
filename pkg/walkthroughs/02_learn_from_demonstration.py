"""Record a scripted demonstration, learn the skill and replay it.

The demonstrator drives a master that is compliant along tool x and about
tool y. Learning has to recover that layout from the log alone: the desired
direction from the sectors of admissible drive directions, the compliant
axes from the residual motion.

    python walkthroughs/02_learn_from_demonstration.py [seed]
"""

import math
import sys
from dataclasses import replace

import numpy as np

from dualpih.harness import apply_params, default_scenario, run_demo
from dualpih.lfd import learn
from dualpih.sim import run_episode

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
scn = default_scenario()

res = run_demo(scn.sim_config(), replace(scn.demo, seed=seed))
print(f"demonstration: {res.outcome.kind}, {res.log.t[-1]:.1f} s, {len(res.log)} samples, "
      f"contact in {100 * res.contact_fraction:.0f}% of steps")

params = learn(res.log)
print(params.summary())
d = params.diagnostics
print("sample sectors:", d["sector_counts"])
print("common sector (deg):", np.round(d["intersection_deg"], 3))
print("translation BIC:", np.round(d["trans_bic"], 1))
print("rotation BIC:", np.round(d["rot_bic"], 1))

for angle in (4.0, 8.0, 12.0):
    _, out = run_episode(apply_params(scn, params).with_(initial_error_deg=angle).sim_config())
    print(f"replay at {angle:g} deg: {out.kind} after {out.duration:.1f} s "
          f"(final angle {math.degrees(out.final_rel_angle):.2f} deg)")
