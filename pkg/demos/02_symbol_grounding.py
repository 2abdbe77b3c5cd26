"""Adjustable symbol grounding: the same symbol satisfied from different
places depending on the episode's mapping specifications.

Run:  python demos/02_symbol_grounding.py
"""

import numpy as np

from specrl.envs import NavState
from specrl.mapping import Nav2DSpec, detectable_center, evaluate
from specrl.scenarios import make_scenario

scenario = make_scenario("nav_scenario1")
occ = scenario.symbols.id_of("check_letter_left")
letter = scenario.evaluators[occ]
print(f"letter anchor at {letter.position}, wall normal {letter.wall_normal}")

# Two different mapping specifications for the same symbol.
near = Nav2DSpec(d=1.5, theta_deg=0.0)
far = Nav2DSpec(d=3.5, theta_deg=45.0)
for name, spec in (("near, head-on", near), ("far, from above", far)):
    center = detectable_center(letter, spec)
    print(f"  {name}: d={spec.d} theta={spec.theta_deg} "
          f"-> detectable center ({center[0]:.2f}, {center[1]:.2f})")

# A pose inside the near region (facing the letter) satisfies only that spec.
pose = NavState(1.5, 5.0, 180.0)
print(f"\nagent at ({pose.x}, {pose.y}) heading {pose.heading_deg} deg:")
print("  satisfies near spec:", evaluate(letter, near, pose))
print("  satisfies far spec: ", evaluate(letter, far, pose))

# Same position, looking away: the 20-degree view condition fails.
away = NavState(1.5, 5.0, 30.0)
print("  near spec but looking away:", evaluate(letter, near, away))

# Sampling an episode's full spec set draws one spec per occurrence.
from specrl.curriculum import enumerate_tasks

rng = np.random.default_rng(7)
level2 = enumerate_tasks(scenario, 2)[2]
spec_set = scenario.sample_spec_set(level2, rng)
print("\nsampled spec set for one level-2 episode:")
for record in spec_set.to_records(scenario.symbols):
    print("  ", record)
