"""Product-MDP episodes: environment + symbol mapping + progression.

A scripted waypoint controller walks through a two-symbol task; the episode
log shows the formula being rewritten and the completion reward arriving on
the final step.

Run:  python demos/03_product_episodes.py
"""

import numpy as np

from specrl.curriculum import enumerate_tasks
from specrl.ltl import to_string
from specrl.product import TaskableMdp, rollout
from specrl.scenarios import make_scenario
from specrl.scripted import NavWaypointPolicy

scenario = make_scenario("nav_scenario1")
mdp = TaskableMdp(scenario, scenario.make_env(np.random.default_rng(3)))
controller = NavWaypointPolicy(scenario)

task = enumerate_tasks(scenario, 2)[6]
print("task:", to_string(task, scenario.symbols))

spec_set = scenario.sample_spec_set(task, np.random.default_rng(11))
traj = rollout(mdp, controller, task, spec_set, np.random.default_rng(0))

print(f"success={traj.success} length={traj.length} "
      f"return={traj.undiscounted_return:+.2f}\n")
phi_before = task
for t, out in enumerate(traj.outcomes, start=1):
    if out.satisfied or out.terminal:
        names = sorted(scenario.symbols.name_of(s) for s in out.satisfied)
        print(f"  t={t:3d} satisfied={names or '[]'} "
              f"reward={out.reward:+.2f} "
              f"phi: {to_string(out.next.phi, scenario.symbols)}")

# The same task under a different spec set completes from different poses.
other_specs = scenario.sample_spec_set(task, np.random.default_rng(50))
traj2 = rollout(mdp, controller, task, other_specs, np.random.default_rng(0))
print(f"\nsame task, resampled specs: success={traj2.success} "
      f"length={traj2.length} (was {traj.length})")
