"""Product MDP runtime: environment x progressed task with completion reward.

Each step: the environment advances, the specification-aware mapping is
evaluated on the post-action state, the task formula is progressed against
the satisfied occurrences, and the reward is +1 on completion, -1 on
violation, 0 otherwise, plus a constant -0.01 per-step penalty (applied to
terminal steps too, so a completing step is worth 0.99).  An episode ends
when the formula reaches true/false or the horizon is hit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import ltl
from .envs import NAV_ACTION_NAMES, InspectState, NavState
from .ltl import Formula
from .mapping import SpecSet
from .scenarios import Scenario

STEP_PENALTY = -0.01
COMPLETION_REWARD = 1.0
VIOLATION_REWARD = -1.0


class ProductError(ValueError):
    pass


@dataclass(frozen=True)
class ProductState:
    env_state: object
    phi: Formula
    spec_set: SpecSet
    steps: int
    done: bool


@dataclass(frozen=True)
class StepOutcome:
    next: ProductState
    reward: float
    terminal: bool
    satisfied: frozenset[int]


class TaskableMdp:
    """Episode runtime over one environment instance.

    Progression results are cached per (formula, relevant assignment); the
    cache is shared across episodes of this instance.
    """

    def __init__(self, scenario: Scenario, env):
        self.scenario = scenario
        self.env = env
        self.horizon = env.horizon
        self._progress_cache: dict[tuple[Formula, frozenset[int]], Formula] = {}

    def episode_reset(self, task: Formula, spec_set: SpecSet) -> ProductState:
        if task.is_constant:
            raise ProductError("episode task must not be a constant")
        if not spec_set.covers(task.atoms()):
            missing = sorted(task.atoms() - set(spec_set.occurrences()))
            names = [self.scenario.symbols.name_of(m) for m in missing]
            raise ProductError(f"spec set is missing occurrences: {names}")
        return ProductState(env_state=self.env.reset(), phi=task,
                            spec_set=spec_set, steps=0, done=False)

    def _progress(self, phi: Formula, sigma: frozenset[int]) -> Formula:
        key = (phi, sigma & phi.atoms())
        cached = self._progress_cache.get(key)
        if cached is None:
            cached = ltl.progress(phi, key[1])
            self._progress_cache[key] = cached
        return cached

    def step(self, ps: ProductState, action) -> StepOutcome:
        if ps.done:
            raise ProductError("cannot step a terminal product state")
        env_state = self.env.step(ps.env_state, action)
        sigma = self.scenario.map_symbols(ps.spec_set, env_state)
        phi = self._progress(ps.phi, sigma)
        reward = STEP_PENALTY
        if phi.kind == ltl.TRUE:
            reward += COMPLETION_REWARD
        elif phi.kind == ltl.FALSE:
            reward += VIOLATION_REWARD
        steps = ps.steps + 1
        terminal = phi.is_constant or steps >= self.horizon
        nxt = ProductState(env_state=env_state, phi=phi, spec_set=ps.spec_set,
                           steps=steps, done=terminal)
        return StepOutcome(next=nxt, reward=reward, terminal=terminal,
                           satisfied=sigma)


@dataclass
class Trajectory:
    outcomes: list[StepOutcome]
    success: bool
    violated: bool

    @property
    def length(self) -> int:
        return len(self.outcomes)

    @property
    def undiscounted_return(self) -> float:
        return sum(o.reward for o in self.outcomes)


def _state_record(env_state) -> list[float]:
    if isinstance(env_state, NavState):
        return [env_state.x, env_state.y, env_state.heading_deg]
    if isinstance(env_state, InspectState):
        return [float(v) for v in env_state.position]
    raise ProductError(f"unknown env state {env_state!r}")


def _action_record(action):
    if isinstance(action, (int, np.integer)):
        return NAV_ACTION_NAMES[int(action)]
    return [float(v) for v in np.asarray(action).ravel()]


def step_log_record(mdp: TaskableMdp, t: int, outcome: StepOutcome, action) -> dict:
    """One JSON-lines trajectory record (t, state, action, satisfied, phi,
    reward, terminal)."""
    symbols = mdp.scenario.symbols
    return {
        "t": t,
        "state": _state_record(outcome.next.env_state),
        "action": _action_record(action),
        "satisfied": sorted(symbols.name_of(s) for s in outcome.satisfied),
        "phi": ltl.to_string(outcome.next.phi, symbols),
        "reward": outcome.reward,
        "terminal": outcome.terminal,
    }


def rollout(mdp: TaskableMdp, policy, task: Formula, spec_set: SpecSet,
            rng: np.random.Generator, log_fp=None) -> Trajectory:
    """Run one episode with ``policy`` (a callable (product_state, rng) ->
    action); returns the trajectory and its success flag."""
    ps = mdp.episode_reset(task, spec_set)
    outcomes: list[StepOutcome] = []
    while not ps.done:
        action = policy(ps, rng)
        outcome = mdp.step(ps, action)
        outcomes.append(outcome)
        if log_fp is not None:
            log_fp.write(json.dumps(
                step_log_record(mdp, len(outcomes), outcome, action),
                sort_keys=True) + "\n")
        ps = outcome.next
    return Trajectory(outcomes=outcomes,
                      success=ps.phi.kind == ltl.TRUE,
                      violated=ps.phi.kind == ltl.FALSE)
