"""Symbol-count task curriculum: level-indexed task sets and advancement.

Level-k tasks are all distinct ordered sequences of k symbols drawn without
replacement from the scenario's symbol multiset, compiled to nested
sequential-eventually formulas  F(q1 & F(q2 & ... F qk)).  Sequences that
coincide as base-symbol sequences are a single task; occurrence ids are
assigned by position afterwards, so the first appearance of a repeated base
symbol in a task becomes base#1, the second base#2.

The level starts at 1 and advances by one whenever the mean success rate of
a periodic evaluation over every available task strictly exceeds 0.9.
Modes: "normal" makes levels 1..current available, "anti" reverses the order
(hardest first), "none" pins the level to the maximum from the start.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from . import ltl
from .ltl import Formula
from .scenarios import Scenario

ADVANCE_THRESHOLD = 0.9
MODES = ("normal", "anti", "none")


class CurriculumError(ValueError):
    pass


def enumerate_sequences(multiset: Sequence[tuple[str, int]], k: int) -> list[tuple[str, ...]]:
    """All distinct ordered k-sequences from a symbol multiset, in the
    lexicographic order induced by the multiset's listing order."""
    names = [name for name, _count in multiset]
    counts = {name: count for name, count in multiset}
    out: list[tuple[str, ...]] = []

    def extend(prefix: list[str]):
        if len(prefix) == k:
            out.append(tuple(prefix))
            return
        for name in names:
            if counts[name] > 0:
                counts[name] -= 1
                prefix.append(name)
                extend(prefix)
                prefix.pop()
                counts[name] += 1

    extend([])
    return out


def sequence_to_task(seq: Sequence[str], scenario: Scenario) -> Formula:
    """Compile a base-symbol sequence to F(q1 & F(q2 & ... F qk)) with
    positional occurrence ids."""
    seen: dict[str, int] = {}
    occ_ids: list[int] = []
    for base in seq:
        nth = seen.get(base, 0)
        seen[base] = nth + 1
        occs = scenario.occurrences_of_base[base]
        if nth >= len(occs):
            raise CurriculumError(
                f"sequence uses {base!r} more than its multiplicity")
        occ_ids.append(occs[nth])
    task = ltl.eventually(ltl.atom(occ_ids[-1]))
    for occ in reversed(occ_ids[:-1]):
        task = ltl.eventually(ltl.and_([ltl.atom(occ), task]))
    return task


def enumerate_tasks(scenario: Scenario, level: int) -> list[Formula]:
    """All level-k tasks for a scenario, deterministically ordered."""
    if not 1 <= level <= scenario.max_level:
        raise CurriculumError(
            f"level {level} out of range [1, {scenario.max_level}]")
    return [sequence_to_task(seq, scenario)
            for seq in enumerate_sequences(scenario.multiset, level)]


def build_task_levels(scenario: Scenario) -> tuple[tuple[Formula, ...], ...]:
    return tuple(tuple(enumerate_tasks(scenario, k))
                 for k in range(1, scenario.max_level + 1))


@dataclass(frozen=True)
class CurriculumState:
    mode: str
    level: int
    levels: tuple[tuple[Formula, ...], ...]  # levels[k-1] = level-k tasks
    last_eval: tuple[tuple[Formula, float], ...] = ()

    @property
    def max_level(self) -> int:
        return len(self.levels)

    def available_tasks(self) -> tuple[Formula, ...]:
        """Tasks at or below the current level in the mode's ordering."""
        if self.mode == "none":
            picked = self.levels
        elif self.mode == "normal":
            picked = self.levels[:self.level]
        else:  # anti: hardest levels first
            picked = self.levels[self.max_level - self.level:]
        return tuple(task for group in picked for task in group)

    def all_tasks(self) -> tuple[Formula, ...]:
        return tuple(task for group in self.levels for task in group)


def make_curriculum(scenario: Scenario, mode: str = "normal") -> CurriculumState:
    if mode not in MODES:
        raise CurriculumError(f"mode must be one of {MODES}, got {mode!r}")
    levels = build_task_levels(scenario)
    level = len(levels) if mode == "none" else 1
    return CurriculumState(mode=mode, level=level, levels=levels)


def sample_task(cs: CurriculumState, rng: np.random.Generator) -> Formula:
    """Uniform draw over every currently available task."""
    available = cs.available_tasks()
    return available[int(rng.integers(len(available)))]


def record_eval_and_maybe_advance(
        cs: CurriculumState,
        per_task_success: Mapping[Formula, float]) -> CurriculumState:
    """Advance one level when the mean success strictly exceeds 0.9.

    The summary must cover every available task; the level never decreases
    and in mode "none" it stays pinned at the maximum.
    """
    available = cs.available_tasks()
    missing = [t for t in available if t not in per_task_success]
    if missing:
        raise CurriculumError(
            f"evaluation summary is missing {len(missing)} available task(s)")
    snapshot = tuple((t, float(per_task_success[t])) for t in available)
    mean = sum(rate for _t, rate in snapshot) / len(snapshot)
    level = cs.level
    if cs.mode != "none" and mean > ADVANCE_THRESHOLD and level < cs.max_level:
        level += 1
    return replace(cs, level=level, last_eval=snapshot)
