"""Scripted reference controllers.

These walk straight at the detectable region of the next pending occurrence
using privileged access to the grounding geometry.  They are used as
independent oracles in tests and as a sanity baseline for evaluation: a
correct environment + mapping + progression stack must let them complete
any sequential-eventually task well inside the horizon.
"""

from __future__ import annotations

import math

import numpy as np

from . import ltl
from .envs import MOVE_FORWARD, TURN_LEFT, TURN_RIGHT
from .mapping import BoxEvaluator, LetterEvaluator, detectable_center
from .scenarios import Scenario


def _wrap_deg(angle: float) -> float:
    return (angle + 180.0) % 360.0 - 180.0


class NavWaypointPolicy:
    """Turn-then-walk controller for NavGrid product states."""

    def __init__(self, scenario: Scenario, align_tol_deg: float = 16.0):
        self.scenario = scenario
        self.align_tol_deg = align_tol_deg

    def __call__(self, ps, rng=None) -> int:
        occ = ltl.next_pending_atom(ps.phi)
        evaluator = self.scenario.evaluators[occ]
        spec = ps.spec_set[occ]
        center = detectable_center(evaluator, spec)
        state = ps.env_state
        dx, dy = center[0] - state.x, center[1] - state.y
        dist = math.hypot(dx, dy)
        if isinstance(evaluator, BoxEvaluator):
            inside = dist <= evaluator.reach_radius - 0.1
        else:
            inside = dist <= spec.r_d - 0.35
        if not inside:
            desired = math.degrees(math.atan2(dy, dx))
            err = _wrap_deg(desired - state.heading_deg)
            if abs(err) > self.align_tol_deg:
                return TURN_LEFT if err > 0 else TURN_RIGHT
            return MOVE_FORWARD
        if isinstance(evaluator, LetterEvaluator):
            # Inside the region: rotate until the letter sits in view.
            lx, ly = evaluator.position
            desired = math.degrees(math.atan2(ly - state.y, lx - state.x))
            err = _wrap_deg(desired - state.heading_deg)
            if abs(err) > self.align_tol_deg:
                return TURN_LEFT if err > 0 else TURN_RIGHT
        # Aligned but uncredited (can only happen before the first
        # evaluation); nudge with a turn pair-neutral action.
        return MOVE_FORWARD


class InspectWaypointPolicy:
    """Straight-line displacement controller for Inspect3D product states."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.max_step = scenario.layout.max_step

    def __call__(self, ps, rng=None) -> np.ndarray:
        occ = ltl.next_pending_atom(ps.phi)
        center = detectable_center(self.scenario.evaluators[occ],
                                   ps.spec_set[occ])
        delta = center - ps.env_state.position
        return np.clip(delta, -self.max_step, self.max_step)


def make_waypoint_policy(scenario: Scenario):
    if scenario.env_kind == "navgrid":
        return NavWaypointPolicy(scenario)
    return InspectWaypointPolicy(scenario)


class RandomPolicy:
    """Uniform random actions for either environment."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario

    def __call__(self, ps, rng: np.random.Generator):
        if self.scenario.env_kind == "navgrid":
            return int(rng.integers(3))
        step = self.scenario.layout.max_step
        return rng.uniform(-step, step, size=3)


class NoOpPolicy:
    """Turns in place (NavGrid) / zero displacement (Inspect3D)."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario

    def __call__(self, ps, rng=None):
        if self.scenario.env_kind == "navgrid":
            return TURN_LEFT
        return np.zeros(3)
