"""The Horn-clause subset: clause syntax, SLD solving, and lowering into
Planner procedures.

Grammar::

    clause  := term [":-" goal {"," goal}] "."
    query   := "?-" goal {"," goal} "."
    term    := VAR | INT | atom ["(" term {"," term} ")"] | list
    list    := "[" "]" | "[" term {"," term} ["|" term] "]"

`%` starts a line comment. There is no negation; `naf(G)` tests for
exhaustive failure of a ground goal without asserting anything.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import count
from typing import Iterator, Sequence

from .errors import (
    CyclicTermError,
    DepthLimitExceeded,
    MalformedError,
    NegationUnsupported,
    NonGroundError,
    ParseError,
)
from .kb import AssertOutcome, FailTest, KnowledgeBase, Literal, Procedure, Subgoal, Trigger, instantiate
from .planner import Solution, SolverConfig, TraceSink, stderr_sink
from .terms import (
    NIL, Compound, Int, Sym, Term, Var, format_term, format_var, make_list,
    standardize_apart, unify_into, variables,
)

PROLOG_DEFAULTS = SolverConfig(occurs_check=False)
TRUE = Literal.pos(Sym("true"))


@dataclass(frozen=True)
class HornClause:
    head: Literal
    body: tuple[Literal, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(self.body))
        for lit in (self.head, *self.body):
            if not lit.positive:
                raise MalformedError("Horn clauses contain only positive literals")

    @property
    def is_fact(self) -> bool:
        return not self.body

    def __str__(self):
        return format_clause(self)


@dataclass(frozen=True)
class Query:
    goals: tuple[Literal, ...]

    def __str__(self):
        return "?- " + ", ".join(format_term(g.atom) for g in self.goals) + "."


@dataclass
class Program:
    """Clauses in source order, with per-predicate numbering."""

    clauses: list[HornClause] = field(default_factory=list)

    def __post_init__(self):
        self._index: dict[tuple, list[tuple[str, HornClause]]] = {}
        for c in list(self.clauses):
            self._register(c)

    def _register(self, c: HornClause) -> None:
        name, arity, _ = c.head.key
        bucket = self._index.setdefault(c.head.key, [])
        bucket.append((f"{name}/{arity}#{len(bucket) + 1}", c))

    def add(self, clause: HornClause) -> None:
        self.clauses.append(clause)
        self._register(clause)

    def numbered(self) -> list[tuple[str, HornClause]]:
        seen: dict[tuple, int] = {}
        out = []
        for c in self.clauses:
            k = seen[c.head.key] = seen.get(c.head.key, 0) + 1
            name, arity, _ = c.head.key
            out.append((f"{name}/{arity}#{k}", c))
        return out

    def clauses_for(self, goal: Literal) -> list[tuple[str, HornClause]]:
        return self._index.get(goal.key, [])

    def __str__(self):
        return "".join(format_clause(c) + "\n" for c in self.clauses)


def format_clause(c: HornClause) -> str:
    head = format_term(c.head.atom)
    if not c.body:
        return head + "."
    return head + " :- " + ", ".join(format_term(g.atom) for g in c.body) + "."


# -- lexer / parser ------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+|\n)
  | (?P<comment>%[^\n]*)
  | (?P<neck>:-)
  | (?P<query>\?-)
  | (?P<int>-?[0-9]+)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<atom>[a-z][A-Za-z0-9_]*)
  | (?P<qatom>'(?:[^'\\\n]|\\.)*')
  | (?P<punct>[()\[\],|])
  | (?P<end>\.(?=\s|%|\Z))
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int
    start: int = 0
    end: int = 0


def _tokenize(text: str) -> list[_Tok]:
    toks, pos, line, col = [], 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind == "ws" and s == "\n":
            line, col = line + 1, 1
        else:
            if kind not in ("ws", "comment"):
                if kind == "qatom":
                    s = re.sub(r"\\(.)", r"\1", s[1:-1])
                toks.append(_Tok(kind, s, line, col, pos, m.end()))
            col += len(m.group())
        pos = m.end()
    toks.append(_Tok("eof", "", line, col, pos, pos))
    return toks


_NAMES = {"end": ".", "neck": ":-"}


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.anon = count(1)

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def fail(self, msg: str, tok: _Tok):
        where = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(f"{msg}, found {where}", tok.line, tok.col)

    def expect(self, kind: str, text: str | None = None) -> _Tok:
        t = self.peek()
        if t.kind != kind or (text is not None and t.text != text):
            self.fail(f"expected {text or _NAMES.get(kind, kind)!r}", t)
        return self.next()

    def items(self) -> Iterator[HornClause | Query]:
        while self.peek().kind != "eof":
            if self.peek().kind == "query":
                self.next()
                goals = self.goals()
                self.expect("end")
                yield Query(tuple(goals))
                continue
            head = self.goal()
            body: list[Literal] = []
            if self.peek().kind == "neck":
                self.next()
                body = self.goals()
            self.expect("end")
            yield HornClause(head, tuple(body))

    def goals(self) -> list[Literal]:
        out = [self.goal()]
        while self.peek().kind == "punct" and self.peek().text == ",":
            self.next()
            out.append(self.goal())
        return out

    def goal(self) -> Literal:
        tok = self.peek()
        t = self.term()
        if type(t) not in (Sym, Compound) or t == NIL:
            raise ParseError("expected a callable goal", tok.line, tok.col)
        if type(t) is Compound and t.functor == "naf" and (
            len(t.args) != 1 or type(t.args[0]) not in (Sym, Compound)
        ):
            raise ParseError("naf/1 needs a callable goal", tok.line, tok.col)
        return Literal.pos(t)

    def term(self) -> Term:
        tok = self.next()
        if tok.kind == "var":
            if tok.text == "_":
                return Var(f"_{next(self.anon)}")
            return Var(tok.text)
        if tok.kind == "int":
            return Int(int(tok.text))
        if tok.kind in ("atom", "qatom"):
            if tok.kind == "atom" and tok.text == "not":
                raise NegationUnsupported("negation is not available in Prolog mode",
                                          tok.line, tok.col)
            nxt = self.peek()
            if nxt.kind == "punct" and nxt.text == "(" and nxt.start == tok.end:
                self.next()
                args = [self.term()]
                while self.peek().kind == "punct" and self.peek().text == ",":
                    self.next()
                    args.append(self.term())
                self.expect("punct", ")")
                return Compound(tok.text, args)
            return Sym(tok.text)
        if tok.kind == "punct" and tok.text == "[":
            if self.peek().kind == "punct" and self.peek().text == "]":
                self.next()
                return NIL
            items = [self.term()]
            while self.peek().kind == "punct" and self.peek().text == ",":
                self.next()
                items.append(self.term())
            tail: Term = NIL
            if self.peek().kind == "punct" and self.peek().text == "|":
                self.next()
                tail = self.term()
            self.expect("punct", "]")
            return make_list(items, tail)
        self.fail("expected a term", tok)


def parse_script(text: str) -> list[HornClause | Query]:
    """Clauses and `?-` queries in source order."""
    return list(_Parser(text).items())


def parse_program(text: str) -> Program:
    prog = Program()
    for item in parse_script(text):
        if isinstance(item, Query):
            raise MalformedError("queries are not allowed in a program")
        prog.add(item)
    return prog


def parse_query(text: str) -> tuple[Literal, ...]:
    """Parse `goal, goal.`; a leading `?-` and the final period are optional."""
    text = text.strip()
    if not text.startswith("?-"):
        text = "?- " + text
    if not text.endswith("."):
        text += "."
    items = parse_script(text)
    if len(items) != 1 or not isinstance(items[0], Query):
        raise MalformedError("expected exactly one query")
    return items[0].goals


# -- SLD resolution ------------------------------------------------------------


class _SLD:
    def __init__(self, program: Program, cfg: SolverConfig, sink: TraceSink | None, gen):
        self.program = program
        self.cfg = cfg
        self.sink = sink
        self.gen = gen
        self.bindings: dict[Var, Term] = {}
        self.trail: list[Var] = []
        self.stack: list[list] = []  # [goal, depth, clauses, next index, continuation, mark]
        self.steps = 0
        self.max_depth = 0

    def emit(self, line: str) -> None:
        if self.sink is not None:
            self.sink(line)

    def undo(self, mark: int) -> None:
        while len(self.trail) > mark:
            del self.bindings[self.trail.pop()]

    def run(self, cont) -> Iterator[None]:
        while True:
            if cont is None:
                yield None
                cont = self.retry()
            else:
                cont = self.call(*cont)
            if cont is False:
                return

    def call(self, goal: Literal, depth: int, rest):
        if depth > self.cfg.depth_limit:
            raise DepthLimitExceeded(f"depth limit {self.cfg.depth_limit} exceeded")
        self.steps += 1
        self.max_depth = max(self.max_depth, depth)
        if self.sink is not None:
            self.emit(f"GOAL d={depth} {_display(goal, self.bindings)}")
        atom = goal.atom
        if atom == TRUE.atom:
            return rest
        if type(atom) is Compound and atom.functor == "naf" and len(atom.args) == 1:
            inner = instantiate(Literal.pos(atom.args[0]), self.bindings)
            if not inner.ground:
                raise NonGroundError(f"naf needs a ground goal, got {inner}")
            sub = _SLD(self.program, self.cfg, self.sink, self.gen)
            runner = sub.run((inner, depth + 1, None))
            try:
                proved = next(runner, False) is None
            finally:
                runner.close()
            if not proved:
                return rest
            self.emit("FAIL")
            return self.retry()
        clauses = self.program.clauses_for(goal)
        self.stack.append([goal, depth, clauses, 0, rest, len(self.trail)])
        return self.resume(first=True)

    def resume(self, first: bool = False):
        frame = self.stack[-1]
        goal, depth, clauses, i, rest, mark = frame
        if not first:
            n = len(self.trail) - mark
            self.undo(mark)
            self.emit(f"UNDO {n}")
        while i < len(clauses):
            cid, clause = clauses[i]
            i += 1
            frame[3] = i
            if self.sink is not None:
                self.emit(f"TRY {'fact' if clause.is_fact else 'proc'} {cid}")
            g = next(self.gen)
            head = standardize_apart(clause.head.atom, g)
            if unify_into(goal.atom, head, self.bindings, self.cfg.occurs_check, self.trail):
                if self.sink is not None:
                    for v in self.trail[mark:]:
                        self.emit(f"BIND {format_var(v)}={format_term(self.bindings[v])}")
                if i == len(clauses):
                    self.stack.pop()
                cont = rest
                for b in reversed(clause.body):
                    cont = (b.map(lambda t: standardize_apart(t, g)), depth + 1, cont)
                return cont
            self.undo(mark)
        self.stack.pop()
        self.emit("FAIL")
        return self.retry()

    def retry(self):
        if not self.stack:
            return False
        return self.resume()

    def unwind(self) -> None:
        self.undo(0)
        self.stack.clear()


def _display(goal: Literal, bindings) -> str:
    try:
        return str(instantiate(goal, bindings))
    except CyclicTermError:
        return str(goal)


def sld_solve(
    program: Program,
    query: Sequence[Literal] | Literal,
    cfg: SolverConfig | None = None,
    sink: TraceSink | None = None,
) -> Iterator[Solution]:
    """Depth-first, leftmost-goal SLD resolution in clause source order.

    Defaults to no occurs check. Cyclic answers are yielded; reading
    their bindings raises CyclicTermError.
    """
    if isinstance(query, Literal):
        query = (query,)
    query = tuple(query)
    for q in query:
        if not q.positive:
            raise MalformedError("Prolog queries are positive")
    cfg = cfg if cfg is not None else PROLOG_DEFAULTS
    if sink is None and cfg.trace:
        sink = stderr_sink
    return _sld(program, query, cfg, sink)


def _sld(program, query, cfg, sink):
    qvars: list[Var] = []
    for q in query:
        for v in variables(q.atom):
            if v not in qvars:
                qvars.append(v)
    m = _SLD(program, cfg, sink, count(1))
    cont = None
    for q in reversed(query):
        cont = (q, 0, cont)
    found = 0
    runner = m.run(cont)
    for _ in runner:
        yield Solution(qvars, m.bindings, m.steps, m.max_depth)
        found += 1
        if cfg.solution_limit is not None and found >= cfg.solution_limit:
            runner.close()
            return


# -- lowering ------------------------------------------------------------------


def _lower_goal(g: Literal):
    atom = g.atom
    if type(atom) is Compound and atom.functor == "naf" and len(atom.args) == 1:
        return FailTest(Literal.pos(atom.args[0]))
    return Subgoal(g)


def lower_to_planner(program: Program) -> KnowledgeBase:
    """Facts become assertions and rules become on-goal procedures.

    The Planner tries facts before procedures and stores each fact once,
    so a fact that follows a rule of its predicate, or repeats an earlier
    fact, is lowered to a procedure with body `true` to keep source order.
    """
    kb = KnowledgeBase()
    has_proc: set[tuple] = set()
    for cid, clause in program.numbered():
        key = clause.head.key
        if clause.is_fact and key not in has_proc:
            if kb.assert_literal(clause.head) is AssertOutcome.ADDED:
                continue
        body = tuple(_lower_goal(g) for g in clause.body) or (Subgoal(TRUE),)
        kb.store_procedure(Procedure(cid, Trigger.ON_GOAL, clause.head, body))
        has_proc.add(key)
    return kb
