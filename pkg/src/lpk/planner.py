"""Planner-style evaluation: procedural readings of implications,
backward chaining with chronological backtracking, forward chaining, and
the exhaustive-failure test.

The solver is an explicit machine. A continuation is a linked list of
pending actions, a choicepoint keeps the remaining candidates for one goal,
and the trail logs every binding and assertion so that backtracking
restores the bindings and the knowledge base exactly. Failure is the
machine running out of choicepoints; no data value ever means failure.
"""

from __future__ import annotations

import sys
from collections import deque
from dataclasses import dataclass
from itertools import count
from typing import Callable, Iterable, Iterator, Sequence

from .errors import CyclicTermError, DepthLimitExceeded, MalformedError, NonGroundError
from .kb import (
    Action, Assert, AssertOutcome, KnowledgeBase, Literal, Procedure,
    Subgoal, Trigger, canonical, instantiate, same_entity,
)
from .terms import (
    Sym, Term, Var, format_term, format_var, is_ground, map_vars, resolve,
    standardize_apart, unify_into, variables,
)

READINGS = ("fwd", "fwd-contra", "bwd", "bwd-contra")

TraceSink = Callable[[str], None]


@dataclass(frozen=True)
class SolverConfig:
    depth_limit: int = 10000
    solution_limit: int | None = None
    occurs_check: bool = True
    trace: bool = False
    max_clauses: int = 10000

    def __post_init__(self):
        if self.depth_limit < 1:
            raise ValueError("depth_limit must be >= 1")
        if self.solution_limit is not None and self.solution_limit < 1:
            raise ValueError("solution_limit must be positive or None")
        if self.max_clauses < 1:
            raise ValueError("max_clauses must be >= 1")


@dataclass(frozen=True)
class Implication:
    """`antecedents` (a conjunction) implies `consequent`."""

    antecedents: tuple[Literal, ...]
    consequent: Literal

    def __init__(self, antecedents: Literal | Sequence[Literal], consequent: Literal):
        if isinstance(antecedents, Literal):
            antecedents = (antecedents,)
        antecedents = tuple(antecedents)
        if not antecedents:
            raise MalformedError("an implication needs at least one antecedent")
        object.__setattr__(self, "antecedents", antecedents)
        object.__setattr__(self, "consequent", consequent)

    @property
    def name(self) -> str:
        return "&".join(map(str, self.antecedents)) + "=>" + str(self.consequent)


def compile_implication(imp: Implication, readings: Iterable[str]) -> list[Procedure]:
    """One procedure per selected reading, in the order fwd, fwd-contra, bwd, bwd-contra.

    A conjunctive antecedent yields one forward procedure per conjunct (the
    others become subgoals) and has no contrapositive readings.
    """
    readings = set(readings)
    if not readings:
        raise ValueError("at least one reading is required")
    unknown = readings - set(READINGS)
    if unknown:
        raise ValueError(f"unknown readings: {sorted(unknown)}")
    ps, q = imp.antecedents, imp.consequent
    single = len(ps) == 1
    if not single and readings & {"fwd-contra", "bwd-contra"}:
        raise MalformedError("contrapositive readings need a single antecedent")
    out = []
    if "fwd" in readings:
        for i, p in enumerate(ps):
            others = tuple(Subgoal(x) for j, x in enumerate(ps) if j != i)
            tag = "fwd" if single else f"fwd{i + 1}"
            out.append(Procedure(f"{tag}:{imp.name}", Trigger.ON_ASSERT, p, (*others, Assert(q))))
    if "fwd-contra" in readings:
        out.append(Procedure(
            f"fwd-contra:{imp.name}", Trigger.ON_ASSERT, q.negate(), (Assert(ps[0].negate()),)
        ))
    if "bwd" in readings:
        out.append(Procedure(
            f"bwd:{imp.name}", Trigger.ON_GOAL, q, tuple(Subgoal(p) for p in ps)
        ))
    if "bwd-contra" in readings:
        out.append(Procedure(
            f"bwd-contra:{imp.name}", Trigger.ON_GOAL, ps[0].negate(), (Subgoal(q.negate()),)
        ))
    return out


class Solution:
    """Answer bindings for the query variables, plus search statistics.

    Unbound variables in the answer are renamed `_G1, _G2, ...` in order of
    appearance, so answers from separate runs compare equal. A cyclic
    answer is kept, and raises CyclicTermError when its bindings are read.
    """

    __slots__ = ("query_vars", "_values", "_error", "steps", "max_depth")

    def __init__(self, query_vars: Sequence[Var], bindings, steps: int = 0, max_depth: int = 0):
        self.query_vars = tuple(query_vars)
        self.steps = steps
        self.max_depth = max_depth
        self._error = None
        try:
            values = [resolve(v, bindings) for v in self.query_vars]
        except CyclicTermError as e:
            self._error = e
            self._values = ()
            return
        self._values = tuple(_normalize(values, set(self.query_vars)))

    @property
    def is_cyclic(self) -> bool:
        return self._error is not None

    def _check(self):
        if self._error is not None:
            raise CyclicTermError(str(self._error))

    @property
    def answer(self) -> tuple[tuple[str, Term], ...]:
        self._check()
        return tuple((format_var(v), t) for v, t in zip(self.query_vars, self._values))

    @property
    def bindings(self) -> dict[Var, Term]:
        self._check()
        return {v: t for v, t in zip(self.query_vars, self._values) if t != v}

    def format(self) -> str:
        pairs = [f"{format_var(v)} = {format_term(t)}" for v, t in self.bindings.items()]
        return ", ".join(pairs) if pairs else "yes"

    def __eq__(self, other):
        if not isinstance(other, Solution):
            return NotImplemented
        if self.is_cyclic or other.is_cyclic:
            return False
        return self.answer == other.answer

    def __hash__(self):
        return hash(self._values)

    def __repr__(self):
        return "Solution(<cyclic>)" if self.is_cyclic else f"Solution({self.format()})"


def _normalize(values: list[Term], keep: set[Var]) -> list[Term]:
    table: dict[Var, Var] = {}

    def rename(v: Var) -> Var:
        if v in keep:
            return v
        new = table.get(v)
        if new is None:
            new = table[v] = Var(f"_G{len(table) + 1}")
        return new

    return [map_vars(t, rename) for t in values]


def stderr_sink(line: str) -> None:
    print(line, file=sys.stderr)


class _Asserted:
    __slots__ = ("literal",)

    def __init__(self, literal: Literal):
        self.literal = literal


class _ChoicePoint:
    __slots__ = ("goal", "depth", "candidates", "index", "rest", "mark", "pending")

    def __init__(self, goal, depth, candidates, rest, mark, pending):
        self.goal = goal
        self.depth = depth
        self.candidates = candidates
        self.index = 0
        self.rest = rest
        self.mark = mark
        self.pending = pending


_FAIL = object()


def _chain(actions: Sequence[Action], depth: int, rest):
    cont = rest
    for a in reversed(actions):
        cont = (a, depth, cont)
    return cont


class _Machine:
    """One depth-first search over a continuation.

    In collect mode, assert actions do not touch the knowledge base; they
    are gathered per solution instead (used to fire forward procedures).
    """

    def __init__(self, planner: Planner, gen: Iterator[int], collect: bool = False):
        self.planner = planner
        self.kb = planner.kb
        self.cfg = planner.cfg
        self.sink = planner.sink
        self.gen = gen
        self.collect = collect
        self.bindings: dict[Var, Term] = {}
        self.trail: list = []
        self.choicepoints: list[_ChoicePoint] = []
        self.steps = 0
        self.max_depth = 0

    def run(self, cont) -> Iterator:
        pending = None
        while True:
            if cont is None:
                yield pending
                nxt = self._backtrack()
            else:
                action, depth, rest = cont
                nxt = self._step(action, depth, rest, pending)
                if nxt is _FAIL:
                    nxt = self._backtrack()
            if nxt is None:
                # exhausted: effects after the last choicepoint was popped go too
                self._undo(0)
                return
            cont, pending = nxt

    def unwind(self) -> None:
        self._undo(0)
        self.choicepoints.clear()

    def _emit(self, line: str) -> None:
        if self.sink is not None:
            self.sink(line)

    def _show(self, lit: Literal) -> str:
        try:
            return str(instantiate(lit, self.bindings))
        except CyclicTermError:
            return str(lit)

    def _undo(self, mark: int) -> None:
        trail, bindings = self.trail, self.bindings
        while len(trail) > mark:
            entry = trail.pop()
            if type(entry) is Var:
                del bindings[entry]
            else:
                self.kb.retract_literal(entry.literal)

    def _unify(self, a: Term, b: Term) -> bool:
        mark = len(self.trail)
        if unify_into(a, b, self.bindings, self.cfg.occurs_check, self.trail):
            if self.sink is not None:
                for v in self.trail[mark:]:
                    if type(v) is Var:
                        self._emit(f"BIND {format_var(v)}={format_term(self.bindings[v])}")
            return True
        self._undo(mark)
        return False

    def _step(self, action: Action, depth: int, rest, pending):
        if depth > self.cfg.depth_limit:
            raise DepthLimitExceeded(f"depth limit {self.cfg.depth_limit} exceeded")
        self.steps += 1
        if depth > self.max_depth:
            self.max_depth = depth
        lit = action.literal
        if type(action) is Subgoal:
            if self.sink is not None:
                self._emit(f"GOAL d={depth} {self._show(lit)}")
            builtin = self._builtin(lit)
            if builtin is not None:
                if builtin:
                    return rest, pending
                self._emit("FAIL")
                return _FAIL
            candidates = self.kb.query_index(lit)
            nxt = None
            if candidates:
                cp = _ChoicePoint(lit, depth, candidates, rest, len(self.trail), pending)
                self.choicepoints.append(cp)
                nxt = self._next_alternative(cp)
            if nxt is None:
                self._emit("FAIL")
                return _FAIL
            return nxt
        if type(action) is Assert:
            if self.collect:
                return rest, (lit, pending)
            self.planner._store(instantiate(lit, self.bindings), self._record, self.gen)
            return rest, pending
        goal = instantiate(lit, self.bindings)
        if not goal.ground:
            raise NonGroundError(f"fail-test needs a ground goal, got {goal}")
        if self.planner._exhausts(goal, depth + 1, self.gen):
            if action.then_assert:
                if self.collect:
                    return rest, (goal.negate(), pending)
                self.planner._store(goal.negate(), self._record, self.gen)
            return rest, pending
        self._emit("FAIL")
        return _FAIL

    def _builtin(self, lit: Literal) -> bool | None:
        atom = lit.atom
        if type(atom) is Sym:
            if atom.name == "true" and lit.positive:
                return True
            return None
        if atom.functor == "=" and len(atom.args) == 2:
            a, b = atom.args
            if lit.positive:
                return self._unify(a, b)
            a, b = resolve(a, self.bindings), resolve(b, self.bindings)
            if not (is_ground(a) and is_ground(b)):
                raise NonGroundError("negated equality needs ground arguments")
            return not same_entity(a, b)
        return None

    def _record(self, stored: Literal) -> None:
        self.trail.append(_Asserted(stored))

    def _next_alternative(self, cp: _ChoicePoint):
        cands = cp.candidates
        while cp.index < len(cands):
            cand = cands[cp.index]
            cp.index += 1
            if cp.index == len(cands):
                # last alternative: nothing left to come back to
                self.choicepoints.pop()
            if type(cand) is Literal:
                if self.sink is not None:
                    self._emit(f"TRY fact {cand}")
                atom = cand.atom if cand.ground else standardize_apart(cand.atom, next(self.gen))
                body = ()
            else:
                if self.sink is not None:
                    self._emit(f"TRY proc {cand.id}")
                g = next(self.gen)
                proc = cand.map(lambda t: standardize_apart(t, g))
                atom = proc.pattern.atom
                body = proc.body
            if self._unify(cp.goal.atom, atom):
                return _chain(body, cp.depth + 1, cp.rest), cp.pending
        return None

    def _backtrack(self):
        while self.choicepoints:
            cp = self.choicepoints[-1]
            n = len(self.trail) - cp.mark
            self._undo(cp.mark)
            self._emit(f"UNDO {n}")
            nxt = self._next_alternative(cp)
            if nxt is not None:
                return nxt
            self._emit("FAIL")
        return None


class Planner:
    """Evaluator bound to one knowledge base and configuration."""

    def __init__(
        self,
        kb: KnowledgeBase | None = None,
        cfg: SolverConfig | None = None,
        sink: TraceSink | None = None,
    ):
        self.kb = kb if kb is not None else KnowledgeBase()
        self.cfg = cfg if cfg is not None else SolverConfig()
        if sink is None and self.cfg.trace:
            sink = stderr_sink
        self.sink = sink
        self.contradictions: list[Literal] = []

    def _emit(self, line: str) -> None:
        if self.sink is not None:
            self.sink(line)

    # -- storage ------------------------------------------------------------

    def store_implication(self, imp: Implication, readings: Iterable[str]) -> list[str]:
        return [self.kb.store_procedure(p) for p in compile_implication(imp, readings)]

    def tell(self, lit: Literal) -> tuple[AssertOutcome, list[Literal]]:
        """Store `lit` and forward-chain from it; returns the outcome and derivations."""
        return self._store(lit, None, count(1))

    def _store(self, lit: Literal, record, gen) -> tuple[AssertOutcome, list[Literal]]:
        if not self._add(lit, record):
            return AssertOutcome.DUPLICATE, []
        return AssertOutcome.ADDED, self._propagate_from(canonical(lit), record, gen)

    def _add(self, lit: Literal, record) -> bool:
        if self.kb.assert_literal(lit) is AssertOutcome.DUPLICATE:
            return False
        stored = canonical(lit)
        if record is not None:
            record(stored)
        self._emit(f"ASSERT {stored}")
        if self.kb.contains(stored.negate()):
            self.contradictions.append(stored)
        return True

    # -- forward chaining ---------------------------------------------------

    def propagate(self, lit: Literal) -> list[Literal]:
        return self._propagate_from(canonical(lit), None, count(1))

    def _propagate_from(self, lit: Literal, record, gen) -> list[Literal]:
        derived: list[Literal] = []
        frontier = deque([lit])
        while frontier:
            current = frontier.popleft()
            for proc in self.kb.assert_procedures(current):
                for new in self._fire(proc, current, gen):
                    if self._add(new, record):
                        stored = canonical(new)
                        derived.append(stored)
                        frontier.append(stored)
                        if len(frontier) > self.cfg.depth_limit:
                            raise DepthLimitExceeded(
                                f"propagation frontier exceeds {self.cfg.depth_limit}"
                            )
        return derived

    def _fire(self, proc: Procedure, lit: Literal, gen) -> list[Literal]:
        g = next(gen)
        proc = proc.map(lambda t: standardize_apart(t, g))
        atom = lit.atom if lit.ground else standardize_apart(lit.atom, next(gen))
        m = _Machine(self, gen, collect=True)
        if not m._unify(proc.pattern.atom, atom):
            return []
        out: list[Literal] = []
        runner = m.run(_chain(proc.body, 1, None))
        try:
            for pending in runner:
                batch = []
                while pending is not None:
                    batch.append(instantiate(pending[0], m.bindings))
                    pending = pending[1]
                out.extend(reversed(batch))
        finally:
            runner.close()
            m.unwind()
        return out

    # -- backward chaining --------------------------------------------------

    def solve(self, goal: Literal | Sequence[Literal]) -> Iterator[Solution]:
        """Lazily enumerate solutions, depth first and left to right.

        A sequence of literals is solved as a conjunction. Abandoning the
        iterator keeps the effects of the last solution; running it to
        exhaustion (or an error) restores the knowledge base.
        """
        goals = (goal,) if isinstance(goal, Literal) else tuple(goal)
        for g in goals:
            if not isinstance(g, Literal):
                raise MalformedError(f"not a literal: {g!r}")
        return self._solve(goals)

    def _solve(self, goals: tuple[Literal, ...]) -> Iterator[Solution]:
        qvars: list[Var] = []
        for g in goals:
            qvars.extend(v for v in variables(g.atom) if v not in qvars)
        m = _Machine(self, count(1))
        limit = self.cfg.solution_limit
        found = 0
        runner = m.run(_chain([Subgoal(g) for g in goals], 0, None))
        try:
            for _ in runner:
                yield Solution(qvars, m.bindings, m.steps, m.max_depth)
                found += 1
                if limit is not None and found >= limit:
                    return
        except Exception:
            m.unwind()
            raise

    def fail_test(self, goal: Literal, then_assert: bool = False) -> bool:
        """True iff proving `goal` fails exhaustively; optionally assert its negation."""
        if not goal.ground:
            raise NonGroundError(f"fail-test needs a ground goal, got {goal}")
        gen = count(1)
        if not self._exhausts(goal, 0, gen):
            return False
        if then_assert:
            self._store(goal.negate(), None, gen)
        return True

    def _exhausts(self, goal: Literal, depth: int, gen) -> bool:
        m = _Machine(self, gen)
        runner = m.run((Subgoal(goal), depth, None))
        try:
            for _ in runner:
                return False
            return True
        finally:
            runner.close()
            m.unwind()


def solve(kb: KnowledgeBase, goal: Literal, cfg: SolverConfig | None = None,
          sink: TraceSink | None = None) -> Iterator[Solution]:
    return Planner(kb, cfg, sink).solve(goal)


def propagate(kb: KnowledgeBase, lit: Literal, cfg: SolverConfig | None = None,
              sink: TraceSink | None = None) -> list[Literal]:
    return Planner(kb, cfg, sink).propagate(lit)


def fail_test(kb: KnowledgeBase, goal: Literal, cfg: SolverConfig | None = None,
              then_assert: bool = False, sink: TraceSink | None = None) -> bool:
    return Planner(kb, cfg, sink).fail_test(goal, then_assert)
