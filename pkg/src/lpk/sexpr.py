"""S-expression surface syntax for Planner and resolution files.

    (assert (human socrates))
    (imply ((human X)) (mortal X) :bwd :fwd)
    (goal (mortal X))

Uppercase or underscore-initial tokens are variables. The head of a list
is always a functor, so `(Peking)` is the constant Peking and `()` is the
empty list.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import count

from .errors import ParseError
from .kb import Assert, FailTest, Literal, Procedure, Subgoal, Trigger
from .terms import NIL, Compound, Int, Sym, Term, Var, format_var

_INT = re.compile(r"[+-]?[0-9]+\Z")
_BARE = re.compile(r"[a-z][A-Za-z0-9_\-*+/<>=!?.]*\Z")
_DELIMS = set("()\";")


@dataclass
class Node:
    line: int
    column: int


@dataclass
class SList(Node):
    items: list = field(default_factory=list)


@dataclass
class SToken(Node):
    text: str = ""


@dataclass
class SString(Node):
    value: str = ""


def read_all(text: str) -> list[Node]:
    """Parse every datum in `text`; `;` starts a comment."""
    out: list[Node] = []
    stack: list[SList] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if c.isspace():
            i, col = i + 1, col + 1
            continue
        if c == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c == "(":
            stack.append(SList(line, col))
            i, col = i + 1, col + 1
            continue
        if c == ")":
            if not stack:
                raise ParseError("unexpected ')'", line, col)
            node = stack.pop()
            (stack[-1].items if stack else out).append(node)
            i, col = i + 1, col + 1
            continue
        start_line, start_col = line, col
        if c == '"':
            j = i + 1
            buf = []
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n:
                    j += 1
                if text[j] == "\n":
                    raise ParseError("unterminated string", start_line, start_col)
                buf.append(text[j])
                j += 1
            if j >= n:
                raise ParseError("unterminated string", start_line, start_col)
            node = SString(start_line, start_col, "".join(buf))
            col += j + 1 - i
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in _DELIMS:
                j += 1
            node = SToken(start_line, start_col, text[i:j])
            col += j - i
            i = j
        (stack[-1].items if stack else out).append(node)
    if stack:
        raise ParseError("unbalanced '(' at end of input", line, col)
    return out


class TermReader:
    """Converts data to terms; one instance numbers anonymous variables."""

    def __init__(self):
        self._anon = count(1)

    def term(self, node: Node) -> Term:
        if isinstance(node, SString):
            raise ParseError("strings are not terms", node.line, node.column)
        if isinstance(node, SToken):
            text = node.text
            if _INT.match(text):
                return Int(int(text))
            if text.startswith(":"):
                raise ParseError(f"keyword {text} is not a term", node.line, node.column)
            if text == "_":
                return Var(f"_{next(self._anon)}")
            if text[0].isupper() or text[0] == "_":
                return Var(text)
            return Sym(text)
        if not node.items:
            return NIL
        head = node.items[0]
        if not isinstance(head, SToken) or head.text.startswith(":") or _INT.match(head.text):
            raise ParseError("list head must be a functor name", node.line, node.column)
        args = [self.term(x) for x in node.items[1:]]
        return Compound(head.text, args) if args else Sym(head.text)

    def literal(self, node: Node) -> Literal:
        negative = False
        while (
            isinstance(node, SList)
            and len(node.items) == 2
            and isinstance(node.items[0], SToken)
            and node.items[0].text == "not"
        ):
            negative = not negative
            node = node.items[1]
        atom = self.term(node)
        if type(atom) not in (Sym, Compound) or atom == NIL:
            raise ParseError("expected a literal", node.line, node.column)
        return Literal(not negative, atom)


def keyword(node: Node) -> str | None:
    if isinstance(node, SToken) and node.text.startswith(":"):
        return node.text[1:]
    return None


def read_procedure(node: SList, reader: TermReader) -> Procedure:
    """`(proc ID :on-goal|:on-assert PATTERN ACTION...)`."""
    items = node.items
    if len(items) < 4:
        raise ParseError("proc needs an id, a trigger and a pattern", node.line, node.column)
    ident = items[1]
    if isinstance(ident, SString):
        pid = ident.value
    elif isinstance(ident, SToken) and keyword(ident) is None:
        pid = ident.text
    else:
        raise ParseError("bad procedure id", ident.line, ident.column)
    trig = keyword(items[2])
    if trig not in ("on-goal", "on-assert"):
        raise ParseError("trigger must be :on-goal or :on-assert", items[2].line, items[2].column)
    pattern = reader.literal(items[3])
    body = []
    for a in items[4:]:
        if not (isinstance(a, SList) and a.items and isinstance(a.items[0], SToken)):
            raise ParseError("bad action", a.line, a.column)
        op = a.items[0].text
        rest = a.items[1:]
        if op == "goal" and len(rest) == 1:
            body.append(Subgoal(reader.literal(rest[0])))
        elif op == "assert" and len(rest) == 1:
            body.append(Assert(reader.literal(rest[0])))
        elif op == "fail-test" and len(rest) in (1, 2):
            flag = len(rest) == 2
            if flag and keyword(rest[1]) != "assert":
                raise ParseError("expected :assert", rest[1].line, rest[1].column)
            body.append(FailTest(reader.literal(rest[0]), flag))
        else:
            raise ParseError(f"unknown action {op!r}", a.line, a.column)
    if trig == "on-goal" and not body:
        raise ParseError("on-goal procedure needs a body", node.line, node.column)
    return Procedure(pid, Trigger(trig), pattern, tuple(body))


# -- printing ----------------------------------------------------------------


def format_sterm(t: Term) -> str:
    out: list[str] = []
    stack: list[object] = [t]
    while stack:
        x = stack.pop()
        if type(x) is str:
            out.append(x)
        elif type(x) is Var:
            out.append(format_var(x))
        elif type(x) is Sym:
            out.append(x.name if _BARE.match(x.name) else f"({x.name})")
        elif type(x) is Int:
            out.append(str(x.value))
        else:
            stack.append(")")
            for arg in reversed(x.args):
                stack.append(arg)
                stack.append(" ")
            out.append("(" + x.functor)
    return "".join(out)


def format_sliteral(lit: Literal) -> str:
    text = format_sterm(lit.atom)
    return text if lit.positive else f"(not {text})"


def format_command_assert(lit: Literal) -> str:
    return f"(assert {format_sliteral(lit)})"


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def format_action(a) -> str:
    if isinstance(a, Subgoal):
        return f"(goal {format_sliteral(a.literal)})"
    if isinstance(a, Assert):
        return f"(assert {format_sliteral(a.literal)})"
    flag = " :assert" if a.then_assert else ""
    return f"(fail-test {format_sliteral(a.literal)}{flag})"


def format_procedure(p: Procedure) -> str:
    parts = [f"(proc {_quote(p.id)} :{p.trigger.value} {format_sliteral(p.pattern)}"]
    parts.extend(format_action(a) for a in p.body)
    return " ".join(parts) + ")"
