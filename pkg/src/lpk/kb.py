"""Literals, procedures and the indexed knowledge base."""

from __future__ import annotations

import copy
import enum
from dataclasses import dataclass, field
from typing import Iterator, Union

from .errors import MalformedError, NonGroundError
from .terms import (
    Compound, Int, Sym, Term, Var, format_term, is_ground, map_vars, resolve,
    variables,
)


@dataclass(frozen=True)
class Literal:
    """An atom with a polarity. Negative literals are true negation."""

    positive: bool
    atom: Term

    def __post_init__(self):
        if type(self.atom) not in (Sym, Compound):
            raise MalformedError(f"literal root must be a symbol or compound: {self.atom!r}")

    @classmethod
    def pos(cls, atom: Term) -> Literal:
        return cls(True, atom)

    @classmethod
    def neg(cls, atom: Term) -> Literal:
        return cls(False, atom)

    def negate(self) -> Literal:
        return Literal(not self.positive, self.atom)

    @property
    def key(self) -> tuple[str, int, bool]:
        a = self.atom
        if type(a) is Sym:
            return (a.name, 0, self.positive)
        return (a.functor, len(a.args), self.positive)

    @property
    def ground(self) -> bool:
        return is_ground(self.atom)

    def map(self, fn) -> Literal:
        return Literal(self.positive, fn(self.atom))

    def __str__(self):
        text = format_term(self.atom)
        return text if self.positive else f"not({text})"


class Trigger(enum.Enum):
    ON_GOAL = "on-goal"
    ON_ASSERT = "on-assert"


@dataclass(frozen=True)
class Subgoal:
    literal: Literal

    def __str__(self):
        return f"goal {self.literal}"


@dataclass(frozen=True)
class Assert:
    literal: Literal

    def __str__(self):
        return f"assert {self.literal}"


@dataclass(frozen=True)
class FailTest:
    """Succeeds when proving `literal` exhaustively fails.

    With `then_assert`, the negation of the literal is asserted afterwards.
    """

    literal: Literal
    then_assert: bool = False

    def __str__(self):
        return f"fail-test {self.literal}" + (" :assert" if self.then_assert else "")


Action = Union[Subgoal, Assert, FailTest]


@dataclass(frozen=True)
class Procedure:
    id: str
    trigger: Trigger
    pattern: Literal
    body: tuple[Action, ...] = ()

    def __post_init__(self):
        if not isinstance(self.pattern, Literal):
            raise MalformedError("procedure pattern must be a literal")
        object.__setattr__(self, "body", tuple(self.body))
        if self.trigger is Trigger.ON_GOAL and not self.body:
            raise MalformedError(f"on-goal procedure {self.id} has an empty body")

    @property
    def key(self) -> tuple[Trigger, str, int, bool]:
        return (self.trigger, *self.pattern.key)

    def map(self, fn) -> Procedure:
        body = tuple(type(a)(a.literal.map(fn), *_extra(a)) for a in self.body)
        return Procedure(self.id, self.trigger, self.pattern.map(fn), body)

    def __str__(self):
        actions = ", ".join(str(a) for a in self.body)
        return f"{self.trigger.value} {self.pattern} => {actions}"


def _extra(action: Action) -> tuple:
    return (action.then_assert,) if isinstance(action, FailTest) else ()


class AssertOutcome(enum.Enum):
    ADDED = "added"
    DUPLICATE = "duplicate"


def canonical(lit: Literal) -> Literal:
    """Rename variables to `_V0, _V1, ...` in order of first occurrence."""
    if lit.ground:
        return lit
    table = {v: Var(f"_V{i}") for i, v in enumerate(variables(lit.atom))}
    return lit.map(lambda t: map_vars(t, table.__getitem__))


Candidate = Union[Literal, Procedure]


@dataclass
class KnowledgeBase:
    """Assertions and procedures indexed by functor, arity and polarity.

    Indexing never looks at arguments, so a bucket is a conservative
    superset of what can actually match. Buckets keep insertion order.
    """

    assertions: dict[tuple, dict[Literal, None]] = field(default_factory=dict)
    procedures: dict[tuple, list[Procedure]] = field(default_factory=dict)
    procedure_ids: dict[str, Procedure] = field(default_factory=dict)

    def assert_literal(self, lit: Literal) -> AssertOutcome:
        _check_literal(lit)
        stored = canonical(lit)
        bucket = self.assertions.setdefault(stored.key, {})
        if stored in bucket:
            return AssertOutcome.DUPLICATE
        bucket[stored] = None
        return AssertOutcome.ADDED

    def retract_literal(self, lit: Literal) -> bool:
        _check_literal(lit)
        stored = canonical(lit)
        bucket = self.assertions.get(stored.key)
        if not bucket or stored not in bucket:
            return False
        del bucket[stored]
        if not bucket:
            del self.assertions[stored.key]
        return True

    def contains(self, lit: Literal) -> bool:
        stored = canonical(lit)
        return stored in self.assertions.get(stored.key, ())

    def facts(self, pattern: Literal) -> list[Literal]:
        return list(self.assertions.get(pattern.key, ()))

    def store_procedure(self, p: Procedure) -> str:
        if not isinstance(p, Procedure):
            raise MalformedError(f"not a procedure: {p!r}")
        _check_literal(p.pattern)
        old = self.procedure_ids.get(p.id)
        if old is not None:
            if old == p:
                return p.id
            raise MalformedError(f"procedure id {p.id!r} already in use")
        self.procedure_ids[p.id] = p
        self.procedures.setdefault(p.key, []).append(p)
        return p.id

    def goal_procedures(self, pattern: Literal) -> list[Procedure]:
        return list(self.procedures.get((Trigger.ON_GOAL, *pattern.key), ()))

    def assert_procedures(self, lit: Literal) -> list[Procedure]:
        return list(self.procedures.get((Trigger.ON_ASSERT, *lit.key), ()))

    def query_index(self, pattern: Literal) -> list[Candidate]:
        """Facts then on-goal procedures for the pattern's key, each in insertion order."""
        _check_literal(pattern)
        return [*self.facts(pattern), *self.goal_procedures(pattern)]

    def __iter__(self) -> Iterator[Literal]:
        for bucket in self.assertions.values():
            yield from bucket

    def __len__(self):
        return sum(len(b) for b in self.assertions.values())

    def snapshot(self) -> KnowledgeBase:
        return copy.deepcopy(self)

    def dump(self) -> str:
        """S-expression listing, key-sorted, insertion order within a key."""
        from .sexpr import format_command_assert, format_procedure

        lines = []
        for key in sorted(self.assertions, key=_sort_key):
            lines.extend(format_command_assert(lit) for lit in self.assertions[key])
        for key in sorted(self.procedures, key=lambda k: (k[0].value, *_sort_key(k[1:]))):
            lines.extend(format_procedure(p) for p in self.procedures[key])
        return "".join(line + "\n" for line in lines)


def _sort_key(key):
    name, arity, positive = key
    return (name, arity, not positive)


def _check_literal(lit: Literal) -> None:
    if not isinstance(lit, Literal):
        raise MalformedError(f"not a literal: {lit!r}")
    if type(lit.atom) in (Var, Int):
        raise MalformedError(f"literal root must be a symbol or compound: {lit.atom!r}")


def same_entity(a: Term, b: Term) -> bool:
    """Unique names: ground terms denote the same entity iff identical."""
    if not (is_ground(a) and is_ground(b)):
        raise NonGroundError("same_entity needs ground terms")
    return a == b


def instantiate(lit: Literal, bindings) -> Literal:
    return Literal(lit.positive, resolve(lit.atom, bindings))
