"""Specification-aware symbol mapping: adjustable satisfaction geometry.

Each base symbol has an evaluator (its anchor geometry and rule) and a spec
space (the sampling law for its runtime mapping specification).  An episode
carries a SpecSet: one mapping specification per symbol occurrence.  The
mapping function returns the set of occurrence ids whose evaluator accepts
the current environment state under the occurrence's specification.

Geometry conventions:
* Nav letters: the detectable region is the closed disk of radius r_d around
  ``letter + d * rotate(wall_normal, theta)``; the agent must additionally be
  heading within 20 degrees of the direction from itself toward the letter.
* Nav boxes: closed disk of radius reach_radius around the box, no spec.
* Inspection objects: closed ball of radius r_d around
  ``center + d * axis + r_c * (cos θ · u + sin θ · v)`` where (u, v, axis) is
  the object's right-handed frame.  The camera is oriented analytically, so
  only containment is checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np


class MappingError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Mapping specifications (the runtime-adjustable parameters c_p)

@dataclass(frozen=True)
class Nav2DSpec:
    """Planar letter spec: distance d (m), angle theta (deg), radius r_d (m)."""
    d: float
    theta_deg: float
    r_d: float = 1.0

    def fields(self) -> tuple[float, ...]:
        return (self.d, self.theta_deg, self.r_d)


@dataclass(frozen=True)
class Cone3DSpec:
    """Inspection spec: height d along the axis, radial offset r_c at angle
    theta around it, detectable-ball radius r_d (all meters/degrees)."""
    d: float
    r_c: float
    theta_deg: float
    r_d: float = 0.15

    def fields(self) -> tuple[float, ...]:
        return (self.d, self.r_c, self.theta_deg, self.r_d)


MappingSpec = Nav2DSpec | Cone3DSpec | None


@dataclass(frozen=True)
class SpecSpace:
    """Per-symbol sampling law for mapping specifications."""
    kind: str  # "nav2d" | "cone3d" | "none"
    d_range: tuple[float, float] = (1.0, 4.0)
    theta_range: tuple[float, float] = (-60.0, 60.0)
    r_d: float = 1.0
    r_c_range: tuple[float, float] = (0.0, 0.3)

    def sample(self, rng: np.random.Generator) -> MappingSpec:
        if self.kind == "none":
            return None
        if self.kind == "nav2d":
            return Nav2DSpec(d=float(rng.uniform(*self.d_range)),
                             theta_deg=float(rng.uniform(*self.theta_range)),
                             r_d=self.r_d)
        if self.kind == "cone3d":
            return Cone3DSpec(d=float(rng.uniform(*self.d_range)),
                              r_c=float(rng.uniform(*self.r_c_range)),
                              theta_deg=float(rng.uniform(*self.theta_range)),
                              r_d=self.r_d)
        raise MappingError(f"unknown spec space kind {self.kind!r}")


NAV2D_DEFAULT_SPACE = SpecSpace(kind="nav2d", d_range=(1.0, 4.0),
                                theta_range=(-60.0, 60.0), r_d=1.0)
CONE3D_DEFAULT_SPACE = SpecSpace(kind="cone3d", d_range=(0.2, 0.6),
                                 theta_range=(-180.0, 180.0), r_d=0.15,
                                 r_c_range=(0.0, 0.3))
NO_SPEC_SPACE = SpecSpace(kind="none")


# ---------------------------------------------------------------------------
# Evaluators (per base symbol: anchor geometry + rule)

@dataclass(frozen=True)
class LetterEvaluator:
    """Wall letter checked from inside a spec-positioned disk while facing it."""
    position: tuple[float, float]
    wall_normal: tuple[float, float]
    view_half_angle_deg: float = 20.0


@dataclass(frozen=True)
class BoxEvaluator:
    """Reach region around a box; satisfaction needs no mapping spec."""
    position: tuple[float, float]
    reach_radius: float = 0.8


@dataclass(frozen=True)
class ObjectEvaluator:
    """3D inspection target with a cone axis anchored at its center."""
    center: tuple[float, float, float]
    axis: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def frame(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Right-handed (u, v, axis) frame; u aligns with +x when possible."""
        axis = np.asarray(self.axis, dtype=np.float64)
        axis = axis / np.linalg.norm(axis)
        ref = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        u = ref - np.dot(ref, axis) * axis
        u = u / np.linalg.norm(u)
        v = np.cross(axis, u)
        return u, v, axis


Evaluator = LetterEvaluator | BoxEvaluator | ObjectEvaluator


def detectable_center(evaluator: Evaluator, spec: MappingSpec) -> np.ndarray:
    """Center of the region in which the symbol can be satisfied."""
    if isinstance(evaluator, LetterEvaluator):
        if not isinstance(spec, Nav2DSpec):
            raise MappingError("letter evaluator requires a Nav2DSpec")
        theta = math.radians(spec.theta_deg)
        nx, ny = evaluator.wall_normal
        rx = nx * math.cos(theta) - ny * math.sin(theta)
        ry = nx * math.sin(theta) + ny * math.cos(theta)
        px, py = evaluator.position
        return np.array([px + spec.d * rx, py + spec.d * ry])
    if isinstance(evaluator, BoxEvaluator):
        if spec is not None:
            raise MappingError("box evaluator takes no mapping spec")
        return np.array(evaluator.position, dtype=np.float64)
    if isinstance(evaluator, ObjectEvaluator):
        if not isinstance(spec, Cone3DSpec):
            raise MappingError("object evaluator requires a Cone3DSpec")
        u, v, axis = evaluator.frame()
        theta = math.radians(spec.theta_deg)
        center = (np.asarray(evaluator.center, dtype=np.float64)
                  + spec.d * axis
                  + spec.r_c * (math.cos(theta) * u + math.sin(theta) * v))
        return center
    raise MappingError(f"unknown evaluator {evaluator!r}")


def _heading_within(heading_deg: float, target_vec: tuple[float, float],
                    half_angle_deg: float) -> bool:
    tx, ty = target_vec
    norm = math.hypot(tx, ty)
    if norm == 0.0:
        return True
    target = math.degrees(math.atan2(ty, tx))
    diff = (heading_deg - target + 180.0) % 360.0 - 180.0
    return abs(diff) <= half_angle_deg


def evaluate(evaluator: Evaluator, spec: MappingSpec, state) -> bool:
    """Pure satisfaction predicate for one symbol at one environment state.

    Containment is a closed ball (distance exactly r_d counts as inside).
    """
    if isinstance(evaluator, LetterEvaluator):
        center = detectable_center(evaluator, spec)
        dx = state.x - center[0]
        dy = state.y - center[1]
        if dx * dx + dy * dy > spec.r_d * spec.r_d:
            return False
        to_letter = (evaluator.position[0] - state.x,
                     evaluator.position[1] - state.y)
        return _heading_within(state.heading_deg, to_letter,
                               evaluator.view_half_angle_deg)
    if isinstance(evaluator, BoxEvaluator):
        if spec is not None:
            raise MappingError("box evaluator takes no mapping spec")
        dx = state.x - evaluator.position[0]
        dy = state.y - evaluator.position[1]
        return dx * dx + dy * dy <= evaluator.reach_radius ** 2
    if isinstance(evaluator, ObjectEvaluator):
        center = detectable_center(evaluator, spec)
        delta = state.position - center
        return float(np.dot(delta, delta)) <= spec.r_d * spec.r_d
    raise MappingError(f"unknown evaluator {evaluator!r}")


# ---------------------------------------------------------------------------
# Spec sets

@dataclass(frozen=True)
class SpecSet:
    """Mapping specifications for every occurrence in an episode's task."""
    specs: Mapping[int, MappingSpec]

    def __contains__(self, occ: int) -> bool:
        return occ in self.specs

    def __getitem__(self, occ: int) -> MappingSpec:
        return self.specs[occ]

    def occurrences(self) -> tuple[int, ...]:
        return tuple(sorted(self.specs))

    def covers(self, occurrence_ids) -> bool:
        return all(occ in self.specs for occ in occurrence_ids)

    def to_records(self, symbols) -> list[dict]:
        """Flat serialization, one record per occurrence.

        Numeric fields survive a JSON round trip bit-exactly (repr floats).
        """
        records = []
        for occ in self.occurrences():
            spec = self.specs[occ]
            rec: dict = {"occurrence": symbols.name_of(occ)}
            if spec is None:
                rec["variant"] = "none"
            elif isinstance(spec, Nav2DSpec):
                rec.update(variant="nav2d", d=spec.d, theta_deg=spec.theta_deg,
                           r_d=spec.r_d)
            else:
                rec.update(variant="cone3d", d=spec.d, r_c=spec.r_c,
                           theta_deg=spec.theta_deg, r_d=spec.r_d)
            records.append(rec)
        return records

    @staticmethod
    def from_records(records: list[dict], symbols) -> "SpecSet":
        specs: dict[int, MappingSpec] = {}
        for rec in records:
            occ = symbols.id_of(rec["occurrence"])
            variant = rec["variant"]
            if variant == "none":
                specs[occ] = None
            elif variant == "nav2d":
                specs[occ] = Nav2DSpec(d=rec["d"], theta_deg=rec["theta_deg"],
                                       r_d=rec["r_d"])
            elif variant == "cone3d":
                specs[occ] = Cone3DSpec(d=rec["d"], r_c=rec["r_c"],
                                        theta_deg=rec["theta_deg"], r_d=rec["r_d"])
            else:
                raise MappingError(f"unknown spec variant {variant!r}")
        return SpecSet(specs)


def sample_spec_set(occurrence_ids, spaces: Mapping[int, SpecSpace],
                    rng: np.random.Generator) -> SpecSet:
    """Independent uniform draw of one spec per occurrence.

    Occurrences of the same base symbol share a space but draw independently,
    so a task may require the same letter from two different regions.
    """
    specs = {}
    for occ in sorted(occurrence_ids):
        specs[occ] = spaces[occ].sample(rng)
    return SpecSet(specs)


def map_symbols(evaluators: Mapping[int, Evaluator], spec_set: SpecSet,
                state) -> frozenset[int]:
    """The specification-aware symbol mapping: satisfied occurrence ids."""
    return frozenset(
        occ for occ in spec_set.occurrences()
        if evaluate(evaluators[occ], spec_set[occ], state))
