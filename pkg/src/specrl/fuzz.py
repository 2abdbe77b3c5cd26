"""Randomized cross-check of progression against the finite-trace oracle."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import ltl
from .ltl import Formula, SymbolTable
from .trace_check import trace_verdict


def random_formula(rng: random.Random, max_depth: int, n_symbols: int) -> Formula:
    """Random canonical sc-LTL formula over symbol ids 0..n_symbols-1."""
    if max_depth <= 0 or rng.random() < 0.22:
        r = rng.random()
        if r < 0.50:
            return ltl.atom(rng.randrange(n_symbols))
        if r < 0.82:
            return ltl.natom(rng.randrange(n_symbols))
        return ltl.true_() if r < 0.91 else ltl.false_()
    pick = rng.random()
    if pick < 0.24:
        width = rng.randint(2, 3)
        return ltl.and_(random_formula(rng, max_depth - 1, n_symbols)
                        for _ in range(width))
    if pick < 0.48:
        width = rng.randint(2, 3)
        return ltl.or_(random_formula(rng, max_depth - 1, n_symbols)
                       for _ in range(width))
    if pick < 0.64:
        return ltl.eventually(random_formula(rng, max_depth - 1, n_symbols))
    if pick < 0.80:
        return ltl.next_(random_formula(rng, max_depth - 1, n_symbols))
    return ltl.until(random_formula(rng, max_depth - 1, n_symbols),
                     random_formula(rng, max_depth - 1, n_symbols))


def random_trace(rng: random.Random, max_len: int, n_symbols: int) -> list[frozenset[int]]:
    length = rng.randint(0, max_len)
    density = rng.uniform(0.1, 0.6)
    return [frozenset(s for s in range(n_symbols) if rng.random() < density)
            for _ in range(length)]


@dataclass
class FuzzReport:
    count: int
    mismatches: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def summary(self) -> str:
        status = "OK" if self.ok else "MISMATCH"
        return f"{status}: {self.count} cases, {len(self.mismatches)} mismatches"


def fuzz_progression(count: int, max_depth: int = 4, max_symbols: int = 6,
                     seed: int = 0, max_trace_len: int = 20) -> FuzzReport:
    """Compare iterated progression with the trace oracle on random cases.

    Any disagreement (verdict kind or step) is recorded; the report must be
    empty for a correct engine.
    """
    rng = random.Random(seed)
    table = SymbolTable([f"s{i}" for i in range(max_symbols)])
    report = FuzzReport(count=count)
    for case in range(count):
        n_symbols = rng.randint(1, max_symbols)
        phi = random_formula(rng, max_depth, n_symbols)
        trace = random_trace(rng, max_trace_len, n_symbols)
        oracle = trace_verdict(phi, trace)
        prog_kind, prog_step = ltl.progress_trace(phi, trace)
        if (prog_kind, prog_step) != (oracle.kind, oracle.step):
            report.mismatches.append({
                "case": case,
                "formula": ltl.to_string(phi, table),
                "trace": [sorted(s) for s in trace],
                "oracle": (oracle.kind, oracle.step),
                "progression": (prog_kind, prog_step),
            })
    return report
