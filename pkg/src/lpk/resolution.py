"""Clausal form, binary resolution with factoring, and refutation search.

The search is a given-clause loop over a FIFO queue in which the clauses
of the negated conjecture come first, followed by the axioms. Every new
clause records its parents and unifier, so a refutation can be replayed
through `resolve_pair` and checked clause by clause.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import count
from typing import Iterable, Sequence, Union

from .errors import ExistentialUnsupported, MalformedError, ParseError
from .kb import Literal, instantiate
from .planner import SolverConfig
from .sexpr import Node, SList, SToken, TermReader
from .terms import Substitution, Var, map_vars, resolve, standardize_apart, unify, variables


# -- formulas ------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: bool

    def __str__(self):
        return "true" if self.value else "false"


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Not:
    body: Formula


@dataclass(frozen=True)
class And:
    parts: tuple[Formula, ...]

    def __init__(self, *parts):
        object.__setattr__(self, "parts", tuple(parts))


@dataclass(frozen=True)
class Or:
    parts: tuple[Formula, ...]

    def __init__(self, *parts):
        object.__setattr__(self, "parts", tuple(parts))


@dataclass(frozen=True)
class Implies:
    antecedent: Formula
    consequent: Formula


@dataclass(frozen=True)
class Iff:
    left: Formula
    right: Formula


@dataclass(frozen=True)
class ForAll:
    vars: tuple[Var, ...]
    body: Formula


@dataclass(frozen=True)
class Exists:
    vars: tuple[Var, ...]
    body: Formula


Formula = Union[Literal, Const, Not, And, Or, Implies, Iff, ForAll, Exists]


def _nnf(f: Formula, positive: bool, fresh) -> Formula:
    """Negation normal form over And/Or/Literal/Const; quantifiers dropped."""
    if isinstance(f, Literal):
        return f if positive else f.negate()
    if isinstance(f, Const):
        return f if positive else Const(not f.value)
    if isinstance(f, Not):
        return _nnf(f.body, not positive, fresh)
    if isinstance(f, (And, Or)):
        parts = tuple(_nnf(p, positive, fresh) for p in f.parts)
        conj = isinstance(f, And) == positive
        return And(*parts) if conj else Or(*parts)
    if isinstance(f, Implies):
        return _nnf(Or(Not(f.antecedent), f.consequent), positive, fresh)
    if isinstance(f, Iff):
        both = And(Implies(f.left, f.right), Implies(f.right, f.left))
        return _nnf(both, positive, fresh)
    if isinstance(f, (ForAll, Exists)):
        if isinstance(f, ForAll) != positive:
            raise ExistentialUnsupported("existential quantification is not supported")
        g = next(fresh)
        table = {v: Var(v.name, g) for v in f.vars}
        return _nnf(_rename_bound(f.body, table), positive, fresh)
    raise MalformedError(f"not a formula: {f!r}")


def _rename_bound(f: Formula, table: dict[Var, Var]) -> Formula:
    fn = lambda v: table.get(v, v)  # noqa: E731
    if isinstance(f, Literal):
        return f.map(lambda t: map_vars(t, fn))
    if isinstance(f, Const):
        return f
    if isinstance(f, Not):
        return Not(_rename_bound(f.body, table))
    if isinstance(f, And):
        return And(*(_rename_bound(p, table) for p in f.parts))
    if isinstance(f, Or):
        return Or(*(_rename_bound(p, table) for p in f.parts))
    if isinstance(f, Implies):
        return Implies(_rename_bound(f.antecedent, table), _rename_bound(f.consequent, table))
    if isinstance(f, Iff):
        return Iff(_rename_bound(f.left, table), _rename_bound(f.right, table))
    inner = {k: v for k, v in table.items() if k not in f.vars}
    return type(f)(f.vars, _rename_bound(f.body, inner))


def _cnf(f: Formula) -> list[frozenset[Literal]]:
    if isinstance(f, Literal):
        return [frozenset([f])]
    if isinstance(f, Const):
        return [] if f.value else [frozenset()]
    if isinstance(f, And):
        out: list[frozenset[Literal]] = []
        for p in f.parts:
            out.extend(_cnf(p))
        return out
    acc = [frozenset()]
    for p in f.parts:
        acc = [a | b for a in acc for b in _cnf(p)]
    return acc


def is_tautology(lits: Iterable[Literal]) -> bool:
    lits = set(lits)
    return any(lit.negate() in lits for lit in lits if lit.positive)


# -- clauses -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CNFClause:
    """A disjunction of literals. Equality looks at the literals only."""

    literals: frozenset[Literal]
    id: int | None = None
    parents: tuple[int, int] | None = None
    mgu: Substitution | None = None
    origin: str = "input"

    def __post_init__(self):
        object.__setattr__(self, "literals", frozenset(self.literals))

    def __eq__(self, other):
        if not isinstance(other, CNFClause):
            return NotImplemented
        return self.literals == other.literals

    def __hash__(self):
        return hash(self.literals)

    @property
    def is_empty(self) -> bool:
        return not self.literals

    def sorted_literals(self) -> list[Literal]:
        return sorted(self.literals, key=_lit_key)

    def __str__(self):
        return "{" + ", ".join(str(lit) for lit in self.sorted_literals()) + "}"

    def with_id(self, id: int, **kw) -> CNFClause:
        return CNFClause(self.literals, id, kw.get("parents", self.parents),
                         kw.get("mgu", self.mgu), kw.get("origin", self.origin))

    def describe(self) -> str:
        if self.parents is None:
            return f"{self.id}: {self} [{self.origin}]"
        a, b = self.parents
        mgu = self.mgu.format() if self.mgu is not None else "{}"
        return f"{self.id}: {self} [resolve {a},{b} mgu {mgu}]"


def _lit_key(lit: Literal) -> tuple[str, str]:
    skeleton = lit.map(lambda t: map_vars(t, lambda v: Var("_")))
    return (str(skeleton), str(lit))


def normalize_clause(lits: Iterable[Literal]) -> frozenset[Literal]:
    """Move all variables to generation 0, keeping names where they are unique."""
    ordered = sorted(lits, key=_lit_key)
    table: dict[Var, Var] = {}
    used: set[str] = set()
    for lit in ordered:
        for v in variables(lit.atom):
            if v in table:
                continue
            name, k = v.name, 1
            while name in used:
                k += 1
                name = f"{v.name}{k}"
            used.add(name)
            table[v] = Var(name)
    if all(k == v for k, v in table.items()):
        return frozenset(ordered)
    return frozenset(lit.map(lambda t: map_vars(t, table.__getitem__)) for lit in ordered)


def clausify(f: Formula) -> list[CNFClause]:
    """Equivalent clause set; free variables are read as universal."""
    clauses: list[CNFClause] = []
    seen: set[frozenset] = set()
    for lits in _cnf(_nnf(f, True, count(1))):
        if is_tautology(lits):
            continue
        lits = normalize_clause(lits)
        if lits in seen:
            continue
        seen.add(lits)
        clauses.append(CNFClause(lits))
    return clauses


def _compose(first: Substitution, then: Substitution) -> Substitution:
    out = {v: resolve(t, then) for v, t in first.items()}
    for v, t in then.items():
        out.setdefault(v, t)
    return Substitution({v: t for v, t in out.items() if t != v})


def resolve_pair(c1: CNFClause, c2: CNFClause) -> list[CNFClause]:
    """All binary resolvents of c1 and c2, each followed by its binary factors.

    Both clauses are renamed apart first (generations 1 and 2), and the
    unifiers use the occurs check. The result has no duplicates and a
    fixed order.
    """
    a = [lit.map(lambda t: standardize_apart(t, 1)) for lit in c1.sorted_literals()]
    b = [lit.map(lambda t: standardize_apart(t, 2)) for lit in c2.sorted_literals()]
    out: dict[frozenset, CNFClause] = {}
    parents = (c1.id, c2.id) if c1.id is not None and c2.id is not None else None

    def add(lits, theta):
        key = normalize_clause(lits)
        if key not in out:
            out[key] = CNFClause(key, None, parents, theta, "resolve")

    for l1 in a:
        for l2 in b:
            if l1.positive == l2.positive or l1.key[:2] != l2.key[:2]:
                continue
            theta = unify(l1.atom, l2.atom, occurs_check=True)
            if theta is None:
                continue
            rest = [x for x in a if x != l1] + [y for y in b if y != l2]
            lits = sorted({instantiate(x, theta) for x in rest}, key=_lit_key)
            add(lits, theta)
            for i, x in enumerate(lits):
                for y in lits[i + 1:]:
                    if x.positive != y.positive or x.key != y.key:
                        continue
                    sigma = unify(x.atom, y.atom, occurs_check=True)
                    if sigma is None:
                        continue
                    add({instantiate(z, sigma) for z in lits}, _compose(theta, sigma))
    return list(out.values())


# -- refutation ----------------------------------------------------------------


@dataclass
class Refutation:
    steps: list[CNFClause]
    inputs: dict[int, CNFClause] = field(default_factory=dict)

    @property
    def clause(self) -> CNFClause:
        return self.steps[-1]

    def replay(self) -> bool:
        """Re-derive every step from its parents and compare exactly."""
        known = dict(self.inputs)
        for step in self.steps:
            if step.parents is None:
                if known.get(step.id) != step:
                    return False
                continue
            p1, p2 = (known.get(i) for i in step.parents)
            if p1 is None or p2 is None:
                return False
            match = [r for r in resolve_pair(p1, p2) if r == step]
            if not match or match[0].mgu != step.mgu:
                return False
            known[step.id] = step
        return bool(self.steps) and self.steps[-1].is_empty

    def lines(self) -> list[str]:
        used: list[int] = []
        ids = {s.id for s in self.steps}
        for s in self.steps:
            for p in s.parents or ():
                if p not in ids and p not in used:
                    used.append(p)
        return [self.inputs[i].describe() for i in sorted(used)] + [s.describe() for s in self.steps]


@dataclass
class Saturated:
    clauses: int


@dataclass
class LimitHit:
    clauses: int


def _subsumed(lits: frozenset, kept: Sequence[CNFClause]) -> bool:
    return any(k.literals <= lits for k in kept)


def refute(
    axioms: Iterable[CNFClause],
    conjecture: Formula,
    limits: SolverConfig | None = None,
) -> Refutation | Saturated | LimitHit:
    limits = limits if limits is not None else SolverConfig()
    ids = count(1)
    inputs: dict[int, CNFClause] = {}
    axiom_clauses = [c.with_id(next(ids), parents=None, mgu=None, origin="input") for c in axioms]
    goal_clauses = [
        c.with_id(next(ids), origin="negated conjecture") for c in clausify(Not(conjecture))
    ]
    queue: deque[CNFClause] = deque()
    kept: list[CNFClause] = []
    for c in goal_clauses + axiom_clauses:
        inputs[c.id] = c
        if c.is_empty:
            return Refutation([c], inputs)
        if is_tautology(c.literals):
            continue
        queue.append(c)
        kept.append(c)
    usable: list[CNFClause] = []
    total = len(inputs)
    while queue:
        given = queue.popleft()
        usable.append(given)
        for other in list(usable):
            for r in resolve_pair(given, other):
                if is_tautology(r.literals) or _subsumed(r.literals, kept):
                    continue
                r = r.with_id(next(ids))
                kept.append(r)
                total += 1
                if r.is_empty:
                    return _extract(r, inputs, kept)
                if total > limits.max_clauses:
                    return LimitHit(total)
                queue.append(r)
    return Saturated(total)


def _extract(empty: CNFClause, inputs: dict[int, CNFClause], kept: list[CNFClause]) -> Refutation:
    by_id = {c.id: c for c in kept}
    needed: set[int] = set()
    stack = [empty.id]
    while stack:
        i = stack.pop()
        c = by_id.get(i, inputs.get(i))
        if i in needed or c is None or c.parents is None:
            continue
        needed.add(i)
        stack.extend(c.parents)
    steps = [by_id[i] for i in sorted(needed)]
    return Refutation(steps, inputs)


def prove(axioms: Iterable[Formula], conjecture: Formula,
          limits: SolverConfig | None = None) -> Refutation | Saturated | LimitHit:
    clauses: list[CNFClause] = []
    for f in axioms:
        clauses.extend(clausify(f))
    return refute(clauses, conjecture, limits)


# -- s-expression formulas -----------------------------------------------------

_CONNECTIVES = {"and", "or", "not", "implies", "iff", "forall", "exists"}


def read_formula(node: Node, reader: TermReader) -> Formula:
    if isinstance(node, SToken) and node.text in ("true", "false"):
        return TRUE if node.text == "true" else FALSE
    if not (isinstance(node, SList) and node.items and isinstance(node.items[0], SToken)):
        return reader.literal(node)
    head, args = node.items[0].text, node.items[1:]
    if head in ("true", "false") and not args:
        return TRUE if head == "true" else FALSE
    if head not in _CONNECTIVES:
        return reader.literal(node)
    if head in ("and", "or"):
        parts = [read_formula(a, reader) for a in args]
        if not parts:
            return TRUE if head == "and" else FALSE
        return And(*parts) if head == "and" else Or(*parts)
    if head == "not" and len(args) == 1:
        return Not(read_formula(args[0], reader))
    if head in ("implies", "iff") and len(args) == 2:
        a, b = (read_formula(x, reader) for x in args)
        return Implies(a, b) if head == "implies" else Iff(a, b)
    if head in ("forall", "exists") and len(args) == 2 and isinstance(args[0], SList):
        vs = []
        for v in args[0].items:
            t = reader.term(v)
            if type(t) is not Var:
                raise ParseError("quantifier binds variables only", v.line, v.column)
            vs.append(t)
        body = read_formula(args[1], reader)
        return ForAll(tuple(vs), body) if head == "forall" else Exists(tuple(vs), body)
    raise ParseError(f"malformed {head} formula", node.line, node.column)
