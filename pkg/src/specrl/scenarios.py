"""Built-in task scenarios: symbols, grounding geometry and environments.

A scenario bundles everything an experiment needs: the environment layout,
the base symbols with their evaluators and spec spaces, the occurrence
multiplicities, and the curriculum depth.  Occurrence-expanded symbol names
use ``base#k`` suffixes only when a base symbol appears more than once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .envs import (Inspect3DEnv, InspectLayout, NavGridEnv, NavLayout)
from .ltl import Formula, SymbolTable
from .mapping import (CONE3D_DEFAULT_SPACE, NAV2D_DEFAULT_SPACE,
                      NO_SPEC_SPACE, BoxEvaluator, Evaluator, LetterEvaluator,
                      ObjectEvaluator, SpecSet, SpecSpace, map_symbols,
                      sample_spec_set)


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class SymbolDef:
    name: str
    evaluator: Evaluator
    spec_space: SpecSpace
    multiplicity: int = 1


@dataclass(frozen=True)
class Scenario:
    name: str
    env_kind: str  # "navgrid" | "inspect3d"
    layout: NavLayout | InspectLayout
    symbol_defs: tuple[SymbolDef, ...]
    max_level: int

    def __post_init__(self):
        if self.max_level < 1:
            raise ScenarioError("max_level must be >= 1")
        names = []
        for sdef in self.symbol_defs:
            if sdef.multiplicity == 1:
                names.append(sdef.name)
            else:
                names.extend(f"{sdef.name}#{k + 1}"
                             for k in range(sdef.multiplicity))
        object.__setattr__(self, "symbols", SymbolTable(names))
        evaluators: dict[int, Evaluator] = {}
        spaces: dict[int, SpecSpace] = {}
        occ_of_base: dict[str, list[int]] = {}
        for sdef in self.symbol_defs:
            occs = ([self.symbols.id_of(sdef.name)] if sdef.multiplicity == 1
                    else [self.symbols.id_of(f"{sdef.name}#{k + 1}")
                          for k in range(sdef.multiplicity)])
            occ_of_base[sdef.name] = occs
            for occ in occs:
                evaluators[occ] = sdef.evaluator
                spaces[occ] = sdef.spec_space
        object.__setattr__(self, "evaluators", evaluators)
        object.__setattr__(self, "spec_spaces", spaces)
        object.__setattr__(self, "occurrences_of_base", occ_of_base)

    @property
    def multiset(self) -> list[tuple[str, int]]:
        return [(sdef.name, sdef.multiplicity) for sdef in self.symbol_defs]

    @property
    def horizon(self) -> int:
        return self.layout.horizon

    @property
    def spec_input_dim(self) -> int:
        # normalized numeric fields with the angle as cos/sin
        return 4 if self.env_kind == "navgrid" else 5

    def make_env(self, rng: np.random.Generator):
        if self.env_kind == "navgrid":
            return NavGridEnv(self.layout, rng)
        return Inspect3DEnv(self.layout, rng)

    def sample_spec_set(self, task: Formula, rng: np.random.Generator) -> SpecSet:
        return sample_spec_set(task.atoms(), self.spec_spaces, rng)

    def map_symbols(self, spec_set: SpecSet, state) -> frozenset[int]:
        return map_symbols(self.evaluators, spec_set, state)


def _nav_symbol_defs(layout: NavLayout, letter_multiplicity: int,
                     reach_radius: float) -> tuple[SymbolDef, ...]:
    defs = [SymbolDef(name, BoxEvaluator(pos, reach_radius), NO_SPEC_SPACE)
            for name, pos in layout.boxes]
    defs.extend(
        SymbolDef(name, LetterEvaluator(pos, normal), NAV2D_DEFAULT_SPACE,
                  multiplicity=letter_multiplicity)
        for name, pos, normal in layout.letters)
    return tuple(defs)


def nav_scenario1(layout: NavLayout | None = None,
                  reach_radius: float = 0.8) -> Scenario:
    """Four symbols, each letter checked once; levels 1..4."""
    layout = layout or NavLayout()
    return Scenario(name="nav_scenario1", env_kind="navgrid", layout=layout,
                    symbol_defs=_nav_symbol_defs(layout, 1, reach_radius),
                    max_level=4)


def nav_scenario2(layout: NavLayout | None = None,
                  reach_radius: float = 0.8) -> Scenario:
    """Six occurrences: each letter appears twice with its own spec; levels 1..6."""
    layout = layout or NavLayout()
    return Scenario(name="nav_scenario2", env_kind="navgrid", layout=layout,
                    symbol_defs=_nav_symbol_defs(layout, 2, reach_radius),
                    max_level=6)


def inspect_scenario(layout: InspectLayout | None = None) -> Scenario:
    """Three inspection objects; the curriculum stops at two-symbol tasks."""
    layout = layout or InspectLayout()
    defs = tuple(SymbolDef(name, ObjectEvaluator(pos, axis), CONE3D_DEFAULT_SPACE)
                 for name, pos, axis in layout.objects)
    return Scenario(name="inspect3d", env_kind="inspect3d", layout=layout,
                    symbol_defs=defs, max_level=2)


_BUILDERS = {
    "nav_scenario1": nav_scenario1,
    "nav_scenario2": nav_scenario2,
    "inspect3d": inspect_scenario,
}


def make_scenario(name: str, layout=None) -> Scenario:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise ScenarioError(
            f"unknown scenario {name!r}; available: {sorted(_BUILDERS)}") from None
    return builder(layout) if layout is not None else builder()


SCENARIO_NAMES = tuple(sorted(_BUILDERS))
