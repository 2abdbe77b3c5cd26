"""Co-safe LTL: canonical syntax trees, parsing, progression and closures.

Formulas are built through the constructor functions (``atom``, ``and_``,
``or_``, ``next_``, ``eventually``, ``until``) which always return canonical
trees:

* negation appears only directly on atoms;
* ``&`` / ``|`` are flattened, constant-folded, deduplicated, pruned of
  children subsumed by a sibling (sound syntactic entailment), and sorted by
  a total structural order;
* ``X`` / ``F`` / ``U`` fold constants (``F F x`` collapses, ``true U x``
  becomes ``F x``, ...).

Canonical formulas compare and hash structurally, so they can serve as
dictionary keys, e.g. for the task-embedding index over a closure.

Concrete syntax::

    phi ::= "true" | "false" | ident | "!" ident
          | phi "&" phi | phi "|" phi
          | "X" phi | "F" phi | phi "U" phi | "(" phi ")"

Precedence: unary > U > & > | ; ``U`` is right-associative.  Identifiers
match ``[A-Za-z_][A-Za-z0-9_#]*`` (the ``#`` admits occurrence ids such as
``check_letter_left#2``); ``true``, ``false``, ``X``, ``F`` and ``U`` are
reserved.
"""

from __future__ import annotations

import itertools
import re
from typing import Iterable, Iterator

# Node kinds.  The integer order is also the primary sort rank, chosen so
# that atoms sort before temporal/boolean nodes and task chains print as
# "F (p1 & F (...))" rather than the other way around.
TRUE = 0
FALSE = 1
ATOM = 2
NATOM = 3
NEXT = 4
EVENTUALLY = 5
UNTIL = 6
AND = 7
OR = 8

_KIND_LABEL = {
    TRUE: "true", FALSE: "false", ATOM: "atom", NATOM: "natom",
    NEXT: "X", EVENTUALLY: "F", UNTIL: "U", AND: "and", OR: "or",
}


class LtlError(ValueError):
    """Base error for the LTL front end."""


class ParseError(LtlError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ClosureCapError(LtlError):
    """Raised when a closure grows past the configured cap."""


class Formula:
    """Canonical sc-LTL syntax tree node.  Immutable; use the constructors."""

    __slots__ = ("kind", "symbol", "children", "_hash", "_key", "_atoms")

    def __init__(self, kind: int, symbol: int | None = None,
                 children: tuple["Formula", ...] = ()):
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "symbol", symbol)
        object.__setattr__(self, "children", children)
        object.__setattr__(self, "_hash", hash((kind, symbol, children)))
        object.__setattr__(self, "_key", None)
        object.__setattr__(self, "_atoms", None)

    def __setattr__(self, name, value):
        raise AttributeError("Formula is immutable")

    def __eq__(self, other):
        if self is other:
            return True
        return (isinstance(other, Formula)
                and self._hash == other._hash
                and self.kind == other.kind
                and self.symbol == other.symbol
                and self.children == other.children)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        if self.kind in (ATOM, NATOM):
            return f"Formula({_KIND_LABEL[self.kind]}:{self.symbol})"
        if self.kind in (TRUE, FALSE):
            return f"Formula({_KIND_LABEL[self.kind]})"
        inner = ", ".join(repr(c) for c in self.children)
        return f"Formula({_KIND_LABEL[self.kind]}, [{inner}])"

    @property
    def is_constant(self) -> bool:
        return self.kind in (TRUE, FALSE)

    def atoms(self) -> frozenset[int]:
        """Symbol ids occurring in the formula (positive and negated)."""
        cached = self._atoms
        if cached is None:
            if self.kind in (ATOM, NATOM):
                cached = frozenset((self.symbol,))
            elif self.kind in (TRUE, FALSE):
                cached = frozenset()
            else:
                cached = frozenset().union(*(c.atoms() for c in self.children))
            object.__setattr__(self, "_atoms", cached)
        return cached


def sort_key(f: Formula):
    """Total structural order used for canonical child ordering."""
    key = f._key
    if key is None:
        if f.kind in (ATOM, NATOM):
            key = (f.kind, f.symbol)
        elif f.kind in (TRUE, FALSE):
            key = (f.kind,)
        else:
            key = (f.kind,) + tuple(sort_key(c) for c in f.children)
        object.__setattr__(f, "_key", key)
    return key


_TRUE = Formula(TRUE)
_FALSE = Formula(FALSE)


def true_() -> Formula:
    return _TRUE


def false_() -> Formula:
    return _FALSE


def atom(symbol: int) -> Formula:
    return Formula(ATOM, symbol=symbol)


def natom(symbol: int) -> Formula:
    return Formula(NATOM, symbol=symbol)


def entails(x: Formula, y: Formula) -> bool:
    """Sound, incomplete syntactic implication check: True only if x ⊨ y.

    Used to prune subsumed siblings inside And/Or.  The workhorse case is
    F(a & F b) ⊨ F b, which keeps progressions of nested-eventually chains
    inside the chain family.
    """
    if x == y:
        return True
    if x.kind == FALSE or y.kind == TRUE:
        return True
    if x.kind == TRUE or y.kind == FALSE:
        return False
    if x.kind == OR:
        return all(entails(c, y) for c in x.children)
    if y.kind == AND:
        return all(entails(x, c) for c in y.children)
    if x.kind == AND and any(entails(c, y) for c in x.children):
        return True
    if y.kind == OR and any(entails(x, c) for c in y.children):
        return True
    if y.kind == EVENTUALLY:
        if entails(x, y.children[0]):
            return True
        if x.kind in (EVENTUALLY, NEXT) and entails(x.children[0], y):
            return True
        if x.kind == UNTIL and entails(x.children[1], y):
            return True
    if x.kind == NEXT and y.kind == NEXT:
        return entails(x.children[0], y.children[0])
    if x.kind == UNTIL and y.kind == UNTIL:
        return (entails(x.children[0], y.children[0])
                and entails(x.children[1], y.children[1]))
    return False


def _flatten(kind: int, items: Iterable[Formula]) -> list[Formula]:
    flat: list[Formula] = []
    for c in items:
        if c.kind == kind:
            flat.extend(c.children)
        else:
            flat.append(c)
    return flat


def _prune_subsumed(children: list[Formula], keep_weaker: bool) -> list[Formula]:
    # Or keeps the weaker disjunct (drop c if c ⊨ sibling); And keeps the
    # stronger conjunct (drop c if sibling ⊨ c).  Index tie-break keeps one
    # survivor if two distinct children ever entail each other.
    kept: list[Formula] = []
    for i, c in enumerate(children):
        redundant = False
        for j, d in enumerate(children):
            if i == j:
                continue
            fwd = entails(c, d) if keep_weaker else entails(d, c)
            if fwd:
                rev = entails(d, c) if keep_weaker else entails(c, d)
                if not rev or j < i:
                    redundant = True
                    break
        if not redundant:
            kept.append(c)
    return kept


def and_(items: Iterable[Formula]) -> Formula:
    flat = _flatten(AND, items)
    out: list[Formula] = []
    for c in flat:
        if c.kind == FALSE:
            return _FALSE
        if c.kind != TRUE:
            out.append(c)
    out = list(dict.fromkeys(out))
    if len(out) > 1:
        out = _prune_subsumed(out, keep_weaker=False)
    if not out:
        return _TRUE
    if len(out) == 1:
        return out[0]
    out.sort(key=sort_key)
    return Formula(AND, children=tuple(out))


def or_(items: Iterable[Formula]) -> Formula:
    flat = _flatten(OR, items)
    out: list[Formula] = []
    for c in flat:
        if c.kind == TRUE:
            return _TRUE
        if c.kind != FALSE:
            out.append(c)
    out = list(dict.fromkeys(out))
    if len(out) > 1:
        out = _prune_subsumed(out, keep_weaker=True)
    if not out:
        return _FALSE
    if len(out) == 1:
        return out[0]
    out.sort(key=sort_key)
    return Formula(OR, children=tuple(out))


def next_(child: Formula) -> Formula:
    if child.is_constant:
        return child
    return Formula(NEXT, children=(child,))


def eventually(child: Formula) -> Formula:
    if child.is_constant:
        return child
    if child.kind == EVENTUALLY:
        return child
    return Formula(EVENTUALLY, children=(child,))


def until(left: Formula, right: Formula) -> Formula:
    if right.is_constant:
        return right
    if left.kind == TRUE:
        return eventually(right)
    if left.kind == FALSE:
        return right
    return Formula(UNTIL, children=(left, right))


def canonicalize(f: Formula) -> Formula:
    """Rebuild a formula bottom-up through the canonical constructors."""
    if f.kind in (TRUE, FALSE, ATOM, NATOM):
        return f
    kids = [canonicalize(c) for c in f.children]
    if f.kind == AND:
        return and_(kids)
    if f.kind == OR:
        return or_(kids)
    if f.kind == NEXT:
        return next_(kids[0])
    if f.kind == EVENTUALLY:
        return eventually(kids[0])
    return until(kids[0], kids[1])


# ---------------------------------------------------------------------------
# Symbol table


class SymbolTable:
    """Ordered symbol names with dense ids.

    For scenarios with repeated symbols the table stores occurrence-expanded
    names (``p3#1``, ``p3#2``); each occurrence has its own id but shares the
    base symbol's evaluator.
    """

    def __init__(self, names: Iterable[str]):
        self.names: tuple[str, ...] = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise LtlError("duplicate symbol names")
        self._ids = {name: i for i, name in enumerate(self.names)}

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)

    def __contains__(self, name: str) -> bool:
        return name in self._ids

    def id_of(self, name: str) -> int:
        try:
            return self._ids[name]
        except KeyError:
            raise LtlError(f"unknown symbol name: {name!r}") from None

    def name_of(self, symbol: int) -> str:
        return self.names[symbol]

    def base_of(self, symbol: int) -> str:
        """Base symbol name with any occurrence suffix (#k) stripped."""
        return self.names[symbol].split("#", 1)[0]


# ---------------------------------------------------------------------------
# Parsing and printing

_TOKEN_RE = re.compile(r"\s*(?:(?P<word>[A-Za-z_][A-Za-z0-9_#]*)|(?P<sym>[!&|()]))")
_RESERVED = {"X", "F", "U"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            at = len(text) - len(stripped)
            raise ParseError(f"unexpected character {text[at]!r}", at)
        if m.group("word") is not None:
            word = m.group("word")
            start = m.start("word")
            if word in ("true", "false"):
                tokens.append(("const", word, start))
            elif word in _RESERVED:
                tokens.append((word, word, start))
            else:
                tokens.append(("ident", word, start))
        else:
            tokens.append((m.group("sym"), m.group("sym"), m.start("sym")))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, tokens, symbols: SymbolTable):
        self.tokens = tokens
        self.symbols = symbols
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, ttype: str):
        tok = self.advance()
        if tok[0] != ttype:
            raise ParseError(f"expected {ttype!r}, found {tok[1]!r}", tok[2])
        return tok

    def parse(self) -> Formula:
        f = self.parse_or()
        tok = self.peek()
        if tok[0] != "eof":
            raise ParseError(f"unexpected trailing input {tok[1]!r}", tok[2])
        return f

    def parse_or(self) -> Formula:
        parts = [self.parse_and()]
        while self.peek()[0] == "|":
            self.advance()
            parts.append(self.parse_and())
        return or_(parts) if len(parts) > 1 else parts[0]

    def parse_and(self) -> Formula:
        parts = [self.parse_until()]
        while self.peek()[0] == "&":
            self.advance()
            parts.append(self.parse_until())
        return and_(parts) if len(parts) > 1 else parts[0]

    def parse_until(self) -> Formula:
        left = self.parse_unary()
        if self.peek()[0] == "U":
            self.advance()
            right = self.parse_until()  # right-associative
            return until(left, right)
        return left

    def parse_unary(self) -> Formula:
        tok = self.advance()
        ttype, value, pos = tok
        if ttype == "const":
            return _TRUE if value == "true" else _FALSE
        if ttype == "ident":
            return atom(self.symbols.id_of(value))
        if ttype == "!":
            nxt = self.advance()
            if nxt[0] != "ident":
                raise ParseError("negation may only be applied to an atom", nxt[2])
            return natom(self.symbols.id_of(nxt[1]))
        if ttype == "X":
            return next_(self.parse_unary())
        if ttype == "F":
            return eventually(self.parse_unary())
        if ttype == "(":
            inner = self.parse_or()
            self.expect(")")
            return inner
        raise ParseError(f"unexpected token {value!r}", pos)


def parse(text: str, symbols: SymbolTable) -> Formula:
    """Parse concrete syntax into a canonical formula."""
    return _Parser(_tokenize(text), symbols).parse()


_PREC = {OR: 1, AND: 2, UNTIL: 3, NEXT: 4, EVENTUALLY: 4,
         TRUE: 5, FALSE: 5, ATOM: 5, NATOM: 5}


def to_string(f: Formula, symbols: SymbolTable) -> str:
    """Print with minimal parentheses; parse(to_string(f)) == f."""
    def wrap(child: Formula, min_prec: int) -> str:
        s = to_string(child, symbols)
        return f"({s})" if _PREC[child.kind] < min_prec else s

    if f.kind == TRUE:
        return "true"
    if f.kind == FALSE:
        return "false"
    if f.kind == ATOM:
        return symbols.name_of(f.symbol)
    if f.kind == NATOM:
        return "!" + symbols.name_of(f.symbol)
    if f.kind == NEXT:
        return "X " + wrap(f.children[0], 4)
    if f.kind == EVENTUALLY:
        return "F " + wrap(f.children[0], 4)
    if f.kind == UNTIL:
        left, right = f.children
        return f"{wrap(left, 4)} U {wrap(right, 3)}"
    if f.kind == AND:
        return " & ".join(wrap(c, 2) for c in f.children)
    return " | ".join(wrap(c, 1) for c in f.children)


# ---------------------------------------------------------------------------
# Progression

def progress(phi: Formula, sigma: frozenset[int] | set[int]) -> Formula:
    """One progression step against a truth assignment (set of symbol ids).

    Rules: atoms/negated atoms evaluate immediately; X drops; F and U unfold
    into the disjunction of "satisfied now" and "still pending".  The result
    is canonical; it is ``true_()`` exactly when the consumed prefix is a
    good prefix.
    """
    k = phi.kind
    if k in (TRUE, FALSE):
        return phi
    if k == ATOM:
        return _TRUE if phi.symbol in sigma else _FALSE
    if k == NATOM:
        return _TRUE if phi.symbol not in sigma else _FALSE
    if k == AND:
        return and_(progress(c, sigma) for c in phi.children)
    if k == OR:
        return or_(progress(c, sigma) for c in phi.children)
    if k == NEXT:
        return phi.children[0]
    if k == EVENTUALLY:
        return or_((progress(phi.children[0], sigma), phi))
    # UNTIL
    left, right = phi.children
    return or_((progress(right, sigma),
                and_((progress(left, sigma), phi))))


def progress_trace(phi: Formula,
                   trace: Iterable[frozenset[int] | set[int]]) -> tuple[str, int | None]:
    """Iterate progression over a finite trace.

    Returns ("satisfied", t) at the first step t where the formula reaches
    true, ("violated", t) where it reaches false, else ("unsatisfied", None).
    Step t counts consumed assignments; a formula that is already true is
    ("satisfied", 0).
    """
    if phi.kind == TRUE:
        return "satisfied", 0
    if phi.kind == FALSE:
        return "violated", 0
    cur = phi
    for t, sigma in enumerate(trace, start=1):
        cur = progress(cur, sigma)
        if cur.kind == TRUE:
            return "satisfied", t
        if cur.kind == FALSE:
            return "violated", t
    return "unsatisfied", None


# ---------------------------------------------------------------------------
# Closure

class Closure:
    """Deterministically ordered progression closure with a dense index."""

    def __init__(self, formulas: Iterable[Formula]):
        self.formulas: tuple[Formula, ...] = tuple(sorted(set(formulas), key=sort_key))
        self._index = {f: i for i, f in enumerate(self.formulas)}

    def __len__(self) -> int:
        return len(self.formulas)

    def __contains__(self, f: Formula) -> bool:
        return f in self._index

    def __iter__(self) -> Iterator[Formula]:
        return iter(self.formulas)

    def index_of(self, f: Formula) -> int:
        try:
            return self._index[f]
        except KeyError:
            raise LtlError("formula is not a member of the closure") from None

    def to_lines(self, symbols: SymbolTable) -> list[str]:
        """Export as an ordered list of formula strings, one per line."""
        return [to_string(f, symbols) for f in self.formulas]


def _assignments(symbols: frozenset[int]) -> Iterator[frozenset[int]]:
    ordered = sorted(symbols)
    for r in range(len(ordered) + 1):
        for combo in itertools.combinations(ordered, r):
            yield frozenset(combo)


def closure(tasks: Iterable[Formula], cap: int = 20000) -> Closure:
    """Smallest progression-closed set containing the tasks (plus true).

    Progression only depends on the truth of symbols occurring in a formula,
    so assignments are enumerated over each formula's own atoms; this is
    equivalent to closing under all assignments of the full symbol table.
    Raises ClosureCapError when the set grows past ``cap``.
    """
    tasks = list(tasks)
    if not tasks:
        raise LtlError("closure requires a non-empty task set")
    seen: set[Formula] = {_TRUE}
    seen.update(tasks)
    frontier = list(seen)
    while frontier:
        phi = frontier.pop()
        if phi.is_constant:
            continue
        for sigma in _assignments(phi.atoms()):
            nxt = progress(phi, sigma)
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
                if len(seen) > cap:
                    raise ClosureCapError(
                        f"closure exceeded cap of {cap} formulas")
    return Closure(seen)


def closure_escapes(cl: Closure) -> list[tuple[Formula, frozenset[int], Formula]]:
    """Progressions of closure members that land outside the closure.

    Empty for any closure produced by :func:`closure`; used as the soundness
    check in tests.
    """
    escapes = []
    for phi in cl:
        if phi.is_constant:
            continue
        for sigma in _assignments(phi.atoms()):
            nxt = progress(phi, sigma)
            if nxt not in cl:
                escapes.append((phi, sigma, nxt))
    return escapes


def next_pending_atom(phi: Formula) -> int | None:
    """Symbol id the policy should pursue next under ``phi``.

    For nested-eventually chain tasks this is the head atom of the chain
    (the leftmost pending occurrence).  Other shapes fall back to the
    smallest pending positive atom by symbol order; constants yield None.
    """
    if phi.is_constant:
        return None
    if phi.kind == EVENTUALLY:
        inner = phi.children[0]
        if inner.kind == ATOM:
            return inner.symbol
        if inner.kind == AND and len(inner.children) == 2:
            a, b = inner.children
            if a.kind == ATOM and b.kind == EVENTUALLY:
                return a.symbol
            if b.kind == ATOM and a.kind == EVENTUALLY:
                return b.symbol
    positives = _positive_atoms(phi)
    return min(positives) if positives else min(phi.atoms())


def _positive_atoms(phi: Formula) -> set[int]:
    if phi.kind == ATOM:
        return {phi.symbol}
    if phi.kind in (TRUE, FALSE, NATOM):
        return set()
    out: set[int] = set()
    for c in phi.children:
        out |= _positive_atoms(c)
    return out
