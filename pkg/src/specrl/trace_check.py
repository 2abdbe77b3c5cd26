"""Finite-trace verdicts computed directly from the syntax tree.

This is the independent check for the progression engine: it never calls
``progress``.  For a formula and a finite trace it reports

* ``satisfied(t)``  - the prefix of length t is the earliest good prefix
  (every temporal witness lies inside the prefix, strong-next semantics);
* ``violated(t)``   - the prefix of length t is the earliest prefix that no
  extension can satisfy, treating positions beyond the trace optimistically
  (so violation is only ever caused by atoms already evaluated);
* ``unsatisfied``   - neither happens within the trace.

Both scans are computed in one bottom-up pass per node: for every trace
position i we derive the smallest prefix length that settles the subformula
(satisfaction rows) or dooms it (failure rows).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .ltl import (AND, ATOM, EVENTUALLY, FALSE, NATOM, NEXT, OR, TRUE, UNTIL,
                  Formula)


@dataclass(frozen=True)
class Verdict:
    kind: str  # "satisfied" | "violated" | "unsatisfied"
    step: int | None = None

    @property
    def is_satisfied(self) -> bool:
        return self.kind == "satisfied"


def satisfied(step: int) -> Verdict:
    return Verdict("satisfied", step)


def violated(step: int) -> Verdict:
    return Verdict("violated", step)


UNSATISFIED = Verdict("unsatisfied")


def _earliest_rows(f: Formula, trace: Sequence[frozenset], inf: int) -> list[int]:
    """row[i] = smallest prefix length t such that the prefix satisfies f at
    position i (witnesses within the prefix); ``inf`` if no prefix does."""
    n = len(trace)
    size = n + 2  # positions 0..n+1 so X can look one past the end
    if f.kind == TRUE:
        return [0] * size
    if f.kind == FALSE:
        return [inf] * size
    if f.kind in (ATOM, NATOM):
        row = [inf] * size
        for i in range(n):
            present = f.symbol in trace[i]
            if present if f.kind == ATOM else not present:
                row[i] = i + 1
        return row
    kids = [_earliest_rows(c, trace, inf) for c in f.children]
    if f.kind == AND:
        return [min(inf, max(k[i] for k in kids)) for i in range(size)]
    if f.kind == OR:
        return [min(k[i] for k in kids) for i in range(size)]
    if f.kind == NEXT:
        child = kids[0]
        return [child[i + 1] if i + 1 < size else inf for i in range(size)]
    if f.kind == EVENTUALLY:
        child = kids[0]
        row = [inf] * size
        best = inf
        for i in range(size - 1, -1, -1):
            best = min(best, child[i])
            row[i] = best
        return row
    # UNTIL: earliest t = min over witness j of max(right settles at j,
    # left settled at every m < j).
    left, right = kids
    row = [inf] * size
    for i in range(size):
        best = inf
        run_left = 0
        for j in range(i, size):
            cand = max(right[j], run_left)
            if cand < best:
                best = cand
            run_left = max(run_left, left[j])
            if run_left >= inf:
                break
        row[i] = best
    return row


def _failure_rows(f: Formula, trace: Sequence[frozenset], inf: int) -> list[int]:
    """row[i] = smallest prefix length t at which no extension of the prefix
    can satisfy f at position i, with unread positions unconstrained."""
    n = len(trace)
    size = n + 2
    if f.kind == TRUE:
        return [inf] * size
    if f.kind == FALSE:
        return [0] * size
    if f.kind in (ATOM, NATOM):
        row = [inf] * size
        for i in range(n):
            present = f.symbol in trace[i]
            failed = not present if f.kind == ATOM else present
            if failed:
                row[i] = i + 1
        return row
    if f.kind == EVENTUALLY:
        # A pending eventuality can always be met in the unconstrained future.
        return [inf] * size
    kids = [_failure_rows(c, trace, inf) for c in f.children]
    if f.kind == AND:
        return [min(k[i] for k in kids) for i in range(size)]
    if f.kind == OR:
        return [min(inf, max(k[i] for k in kids)) for i in range(size)]
    if f.kind == NEXT:
        child = kids[0]
        return [child[i + 1] if i + 1 < size else inf for i in range(size)]
    # UNTIL(l, r): the prefix-t view survives if either some real witness
    # j < t still works (r alive at j, l alive before j), or the witness can
    # be postponed past the prefix (l alive at every read position >= i).
    left, right = kids
    row = [inf] * size
    for i in range(size):
        fail_at = inf
        min_left = inf   # min over m in [i, t) of left-failure time
        max_branch = 0   # max over j in [i, t) of min(right[j], left alive before j)
        for t in range(0, n + 1):
            if t > i:
                j = t - 1
                max_branch = max(max_branch, min(right[j], min_left))
                min_left = min(min_left, left[j])
            if t < i:
                continue
            postpone_ok = min_left > t
            witness_ok = t < max_branch
            if not postpone_ok and not witness_ok:
                fail_at = t
                break
        row[i] = fail_at
    return row


def trace_verdict(phi: Formula, trace: Sequence[frozenset]) -> Verdict:
    """Recursive finite-trace evaluation of a canonical formula."""
    n = len(trace)
    inf = n + 5
    earliest = _earliest_rows(phi, trace, inf)[0]
    if earliest <= n:
        return satisfied(earliest)
    fails = _failure_rows(phi, trace, inf)[0]
    if fails <= n:
        return violated(fails)
    return UNSATISFIED
