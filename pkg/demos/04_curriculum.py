"""The symbol-count curriculum: level-indexed task sets and advancement.

Run:  python demos/04_curriculum.py
"""

import numpy as np

from specrl.curriculum import (enumerate_tasks, make_curriculum,
                               record_eval_and_maybe_advance, sample_task)
from specrl.ltl import to_string
from specrl.scenarios import make_scenario

scenario = make_scenario("nav_scenario2")
print("Scenario 2 symbol multiset:", scenario.multiset)
for level in range(1, scenario.max_level + 1):
    tasks = enumerate_tasks(scenario, level)
    print(f"  level {level}: {len(tasks)} tasks, e.g. "
          f"{to_string(tasks[0], scenario.symbols)}")

# Advancement: the level rises only when the mean evaluated success over all
# available tasks strictly exceeds 0.9.
cs = make_curriculum(scenario, "normal")
print("\nsimulated training:")
for round_idx, quality in enumerate((0.5, 0.85, 0.95, 0.97, 0.9, 0.99)):
    rates = {t: quality for t in cs.available_tasks()}
    cs = record_eval_and_maybe_advance(cs, rates)
    print(f"  eval {round_idx}: mean={quality:.2f} -> level {cs.level} "
          f"({len(cs.available_tasks())} tasks available)")

# Sampling is uniform over everything at or below the current level.
rng = np.random.default_rng(0)
counts = {}
for _ in range(3000):
    task = sample_task(cs, rng)
    counts[len(task.atoms())] = counts.get(len(task.atoms()), 0) + 1
print("\nsampled task sizes at level", cs.level, ":", dict(sorted(counts.items())))

# Ablation modes reverse or flatten the schedule.
anti = make_curriculum(scenario, "anti")
none = make_curriculum(scenario, "none")
print("\nanti mode starts with", len(anti.available_tasks()),
      "tasks of size", len(anti.available_tasks()[0].atoms()))
print("none mode starts with all", len(none.available_tasks()), "tasks")
