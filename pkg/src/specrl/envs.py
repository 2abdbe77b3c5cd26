"""Deterministic kinematic simulators with low-dimensional observations.

NavGrid: a 10 m x 10 m arena, discrete actions {turn-left, turn-right,
move-forward}; turns rotate by 30 degrees, forward advances 0.5 m, positions
are clamped inside the walls with a 0.1 m margin.  Heading convention:
0 degrees = +x, counterclockwise positive.

Inspect3D: a point agent in a unit-cube workspace; actions are per-axis
displacements clipped to +/- max_step and the position is clamped into the
workspace.

Observations are fixed-length float64 vectors: normalized agent pose
(position scaled into [0, 1]; heading as cos/sin for NavGrid) followed by
the scaled relative vector from the agent to each anchor, in layout order
(boxes first, then letters; objects in layout order for Inspect3D).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class LayoutError(ValueError):
    pass


# ---------------------------------------------------------------------------
# NavGrid

TURN_LEFT = 0
TURN_RIGHT = 1
MOVE_FORWARD = 2
NAV_ACTIONS = (TURN_LEFT, TURN_RIGHT, MOVE_FORWARD)
NAV_ACTION_NAMES = {TURN_LEFT: "turn_left", TURN_RIGHT: "turn_right",
                    MOVE_FORWARD: "move_forward"}


@dataclass(frozen=True)
class NavState:
    x: float
    y: float
    heading_deg: float


@dataclass(frozen=True)
class NavLayout:
    arena: tuple[float, float] = (10.0, 10.0)
    wall_margin: float = 0.1
    turn_deg: float = 30.0
    step_m: float = 0.5
    horizon: int = 150
    start_x: tuple[float, float] = (4.5, 5.5)
    start_y: tuple[float, float] = (0.5, 1.5)
    boxes: tuple[tuple[str, tuple[float, float]], ...] = (
        ("reach_bluebox", (2.5, 7.5)),
        ("reach_redbox", (7.5, 7.5)),
    )
    letters: tuple[tuple[str, tuple[float, float], tuple[float, float]], ...] = (
        ("check_letter_left", (0.0, 5.0), (1.0, 0.0)),
        ("check_letter_right", (10.0, 5.0), (-1.0, 0.0)),
    )

    def anchors(self) -> list[tuple[str, tuple[float, float]]]:
        """Observation anchor order: boxes first, then letter positions."""
        out = [(name, pos) for name, pos in self.boxes]
        out.extend((name, pos) for name, pos, _normal in self.letters)
        return out


class NavGridEnv:
    """Discrete-action planar navigation; owns its reset RNG stream."""

    def __init__(self, layout: NavLayout, rng: np.random.Generator):
        self.layout = layout
        self._rng = rng
        anchors = layout.anchors()
        self._anchor_pos = np.array([pos for _n, pos in anchors])
        self.obs_dim = 4 + 2 * len(anchors)
        self.horizon = layout.horizon

    def reset(self) -> NavState:
        lay = self.layout
        x = float(self._rng.uniform(*lay.start_x))
        y = float(self._rng.uniform(*lay.start_y))
        heading = float(self._rng.uniform(0.0, 360.0))
        return NavState(x, y, heading)

    def step(self, state: NavState, action: int) -> NavState:
        lay = self.layout
        if action == TURN_LEFT:
            return NavState(state.x, state.y, (state.heading_deg + lay.turn_deg) % 360.0)
        if action == TURN_RIGHT:
            return NavState(state.x, state.y, (state.heading_deg - lay.turn_deg) % 360.0)
        if action != MOVE_FORWARD:
            raise ValueError(f"invalid NavGrid action {action!r}")
        h = math.radians(state.heading_deg)
        x = state.x + lay.step_m * math.cos(h)
        y = state.y + lay.step_m * math.sin(h)
        m = lay.wall_margin
        x = min(max(x, m), lay.arena[0] - m)
        y = min(max(y, m), lay.arena[1] - m)
        return NavState(x, y, state.heading_deg)

    def observe(self, state: NavState) -> np.ndarray:
        lay = self.layout
        sx, sy = lay.arena
        h = math.radians(state.heading_deg)
        pose = [state.x / sx, state.y / sy, math.cos(h), math.sin(h)]
        rel = (self._anchor_pos - np.array([state.x, state.y])) / np.array([sx, sy])
        return np.concatenate([np.array(pose), rel.ravel()]).astype(np.float64)


# ---------------------------------------------------------------------------
# Inspect3D

@dataclass(frozen=True)
class InspectState:
    position: np.ndarray  # shape (3,)

    def __eq__(self, other):
        return isinstance(other, InspectState) and np.array_equal(
            self.position, other.position)


@dataclass(frozen=True)
class InspectLayout:
    workspace: tuple[float, float, float] = (1.0, 1.0, 1.0)
    max_step: float = 0.05
    horizon: int = 500
    home: tuple[float, float, float] = (0.5, 0.1, 0.5)
    home_jitter: float = 0.05
    # each cone axis points into open workspace so every sampled detectable
    # sphere (d up to 0.6 plus radius 0.15) stays fully inside the cube
    objects: tuple[tuple[str, tuple[float, float, float],
                         tuple[float, float, float]], ...] = (
        ("read_meter", (0.2, 0.5, 0.6), (1.0, 0.0, 0.0)),
        ("check_rust_valve", (0.5, 0.8, 0.4), (0.0, -1.0, 0.0)),
        ("check_leak_pipe", (0.8, 0.4, 0.6), (-1.0, 0.0, 0.0)),
    )


class Inspect3DEnv:
    """Continuous-action point agent in a box workspace."""

    def __init__(self, layout: InspectLayout, rng: np.random.Generator):
        self.layout = layout
        self._rng = rng
        self._object_pos = np.array([pos for _n, pos, _axis in layout.objects])
        self._size = np.array(layout.workspace, dtype=np.float64)
        self.obs_dim = 3 + 3 * len(layout.objects)
        self.horizon = layout.horizon
        self.action_dim = 3

    def reset(self) -> InspectState:
        lay = self.layout
        jitter = self._rng.uniform(-lay.home_jitter, lay.home_jitter, size=3)
        pos = np.clip(np.array(lay.home) + jitter, 0.0, self._size)
        return InspectState(pos.astype(np.float64))

    def step(self, state: InspectState, action: Sequence[float]) -> InspectState:
        delta = np.clip(np.asarray(action, dtype=np.float64),
                        -self.layout.max_step, self.layout.max_step)
        pos = np.clip(state.position + delta, 0.0, self._size)
        return InspectState(pos)

    def observe(self, state: InspectState) -> np.ndarray:
        pos = state.position / self._size
        rel = (self._object_pos - state.position) / self._size
        return np.concatenate([pos, rel.ravel()]).astype(np.float64)


# ---------------------------------------------------------------------------
# Layout files (structured JSON, strict keys)

def _check_keys(d: dict, allowed: set[str], context: str):
    unknown = set(d) - allowed
    if unknown:
        raise LayoutError(f"unknown {context} keys: {sorted(unknown)}")


def load_nav_layout(data: dict) -> NavLayout:
    _check_keys(data, {"kind", "arena", "wall_margin", "turn_deg", "step_m",
                       "horizon", "start_x", "start_y", "boxes", "letters"},
                "nav layout")
    kwargs = {}
    for key in ("wall_margin", "turn_deg", "step_m", "horizon"):
        if key in data:
            kwargs[key] = data[key]
    for key in ("arena", "start_x", "start_y"):
        if key in data:
            kwargs[key] = tuple(data[key])
    if "boxes" in data:
        kwargs["boxes"] = tuple((b["name"], tuple(b["position"])) for b in data["boxes"])
    if "letters" in data:
        kwargs["letters"] = tuple(
            (l["name"], tuple(l["position"]), tuple(l["wall_normal"]))
            for l in data["letters"])
    return NavLayout(**kwargs)


def load_inspect_layout(data: dict) -> InspectLayout:
    _check_keys(data, {"kind", "workspace", "max_step", "horizon", "home",
                       "home_jitter", "objects"}, "inspect layout")
    kwargs = {}
    for key in ("max_step", "horizon", "home_jitter"):
        if key in data:
            kwargs[key] = data[key]
    for key in ("workspace", "home"):
        if key in data:
            kwargs[key] = tuple(data[key])
    if "objects" in data:
        kwargs["objects"] = tuple(
            (o["name"], tuple(o["position"]),
             tuple(o.get("axis", (0.0, 0.0, 1.0))))
            for o in data["objects"])
    return InspectLayout(**kwargs)


def load_layout(path: str):
    with open(path) as fh:
        data = json.load(fh)
    kind = data.get("kind")
    if kind == "navgrid":
        return load_nav_layout(data)
    if kind == "inspect3d":
        return load_inspect_layout(data)
    raise LayoutError(f"layout kind must be navgrid or inspect3d, got {kind!r}")
