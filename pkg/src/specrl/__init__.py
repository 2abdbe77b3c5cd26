"""specrl: reinforcement learning for co-safe LTL instructions whose
per-symbol satisfaction criteria are adjustable at runtime.

The package combines an LTL front end (parsing, progression, closures), a
specification-aware symbol mapping with sampleable geometry, two kinematic
simulators, a product-MDP runtime with completion rewards, a symbol-count
curriculum, and an actor-critic policy whose state features are modulated
by the next symbol's mapping specification.
"""

import os as _os

# Every matrix here is tiny; threaded BLAS only adds dispatch overhead and
# scheduling noise.  Best effort: respected only if the user has not chosen
# and numpy is not yet loaded.
_os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
_os.environ.setdefault("OMP_NUM_THREADS", "1")

from .config import RunConfig, load_config
from .curriculum import (CurriculumState, enumerate_tasks, make_curriculum,
                         record_eval_and_maybe_advance, sample_task)
from .envs import Inspect3DEnv, InspectLayout, NavGridEnv, NavLayout
from .fuzz import fuzz_progression
from .harness import (evaluate_checkpoint, evaluate_policy, export_embeddings,
                      load_checkpoint, save_checkpoint, train)
from .ltl import (Closure, Formula, SymbolTable, closure, parse, progress,
                  to_string)
from .mapping import (Cone3DSpec, Nav2DSpec, SpecSet, detectable_center,
                      evaluate, map_symbols, sample_spec_set)
from .policy import ConditioningConfig, Policy
from .product import TaskableMdp, rollout
from .scenarios import (Scenario, inspect_scenario, make_scenario,
                        nav_scenario1, nav_scenario2)
from .trace_check import trace_verdict
from .trainer import TrainerConfig

__version__ = "0.1.0"

__all__ = [
    "Closure", "Cone3DSpec", "ConditioningConfig", "CurriculumState",
    "Formula", "Inspect3DEnv", "InspectLayout", "Nav2DSpec", "NavGridEnv",
    "NavLayout", "Policy", "RunConfig", "Scenario", "SpecSet", "SymbolTable",
    "TaskableMdp", "TrainerConfig", "closure", "detectable_center",
    "enumerate_tasks", "evaluate", "evaluate_checkpoint", "evaluate_policy",
    "export_embeddings", "fuzz_progression", "inspect_scenario",
    "load_checkpoint", "load_config", "make_curriculum", "make_scenario",
    "map_symbols", "nav_scenario1", "nav_scenario2", "parse", "progress",
    "record_eval_and_maybe_advance", "rollout", "sample_spec_set",
    "sample_task", "save_checkpoint", "to_string", "trace_verdict", "train",
]
