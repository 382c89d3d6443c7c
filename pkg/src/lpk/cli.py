"""Command-line front end: batch files and an interactive REPL for all three modes."""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, TextIO, Union

from . import prolog
from .errors import LogicError, ParseError, UnknownCommand
from .kb import KnowledgeBase, Literal, Procedure
from .planner import READINGS, Implication, Planner, Solution, SolverConfig, stderr_sink
from .resolution import And, CNFClause, Formula, Implies, LimitHit, Refutation, clausify, read_formula, refute
from .sexpr import Node, SList, SString, SToken, TermReader, keyword, read_all, read_procedure

MODES = ("planner", "prolog", "resolve")
EXTENSIONS = {".plan": "planner", ".pl": "prolog", ".res": "resolve"}


# -- commands ------------------------------------------------------------------


@dataclass(frozen=True)
class Load:
    path: str
    text: str = field(default="", compare=False)


@dataclass(frozen=True)
class AssertCmd:
    item: Union[Literal, Formula]
    text: str = field(default="", compare=False)


@dataclass(frozen=True)
class Goal:
    literal: Literal
    text: str = field(default="", compare=False)


@dataclass(frozen=True)
class Naf:
    literal: Literal
    then_assert: bool = False
    text: str = field(default="", compare=False)


@dataclass(frozen=True)
class Imply:
    implication: Implication
    readings: tuple[str, ...] | None = None
    text: str = field(default="", compare=False)


@dataclass(frozen=True)
class Proc:
    procedure: Procedure
    text: str = field(default="", compare=False)


@dataclass(frozen=True)
class Clause:
    clause: prolog.HornClause
    text: str = field(default="", compare=False)


@dataclass(frozen=True)
class Query:
    goals: tuple[Literal, ...]
    text: str = field(default="", compare=False)


@dataclass(frozen=True)
class Prove:
    formula: Formula
    text: str = field(default="", compare=False)


@dataclass(frozen=True)
class Set:
    option: str
    value: str
    text: str = field(default="", compare=False)


@dataclass(frozen=True)
class Dump:
    text: str = field(default="", compare=False)


@dataclass(frozen=True)
class Quit:
    text: str = field(default="", compare=False)


Command = Union[Load, AssertCmd, Goal, Naf, Imply, Proc, Clause, Query, Prove, Set, Dump, Quit]


def _source(text: str, node: Node) -> str:
    return " ".join(text.splitlines()[node.line - 1:node.line])


def _datum_text(node: Node) -> str:
    if isinstance(node, SToken):
        return node.text
    if isinstance(node, SString):
        return '"' + node.value + '"'
    return "(" + " ".join(_datum_text(x) for x in node.items) + ")"


def parse_readings(text: str) -> tuple[str, ...]:
    if text == "all":
        return READINGS
    parts = tuple(p.strip() for p in text.split(",") if p.strip())
    bad = [p for p in parts if p not in READINGS]
    if bad or not parts:
        raise ValueError(f"bad readings: {text!r}")
    return parts


def sexpr_commands(text: str, mode: str) -> list[Command]:
    """Commands of a planner or resolve file; raises ParseError on the first problem."""
    reader = TermReader()
    return [_sexpr_command(node, mode, reader) for node in read_all(text)]


def _sexpr_command(node: Node, mode: str, reader: TermReader) -> Command:
    text = _datum_text(node)
    if not (isinstance(node, SList) and node.items and isinstance(node.items[0], SToken)):
        raise ParseError("expected a command", node.line, node.column)
    op, args = node.items[0].text, node.items[1:]

    def arity(n: int):
        if len(args) != n:
            raise ParseError(f"{op} takes {n} argument(s)", node.line, node.column)

    if op == "assert":
        arity(1)
        item = reader.literal(args[0]) if mode == "planner" else read_formula(args[0], reader)
        return AssertCmd(item, text)
    if op == "goal" and mode == "planner":
        arity(1)
        return Goal(reader.literal(args[0]), text)
    if op == "naf" and mode == "planner":
        flags = [keyword(a) for a in args[1:]]
        if not args or any(f != "assert" for f in flags) or len(flags) > 1:
            raise ParseError("usage: (naf LITERAL [:assert])", node.line, node.column)
        return Naf(reader.literal(args[0]), bool(flags), text)
    if op == "imply":
        if len(args) < 2:
            raise ParseError("usage: (imply (ANTECEDENT...) CONSEQUENT [:reading...])",
                             node.line, node.column)
        ante = args[0]
        if isinstance(ante, SList) and ante.items and isinstance(ante.items[0], SList):
            antecedents = [reader.literal(x) for x in ante.items]
        else:
            antecedents = [reader.literal(ante)]
        consequent = reader.literal(args[1])
        readings: list[str] = []
        for a in args[2:]:
            k = keyword(a)
            if k == "all":
                readings.extend(READINGS)
            elif k in READINGS:
                readings.append(k)
            else:
                raise ParseError(f"unknown reading {_datum_text(a)}", a.line, a.column)
        return Imply(Implication(antecedents, consequent), tuple(readings) or None, text)
    if op == "proc" and mode == "planner":
        return Proc(read_procedure(node, reader), text)
    if op == "prove" and mode == "resolve":
        arity(1)
        return Prove(read_formula(args[0], reader), text)
    if op == "load":
        arity(1)
        a = args[0]
        return Load(a.value if isinstance(a, SString) else _datum_text(a), text)
    if op == "set":
        arity(2)
        return Set(_datum_text(args[0]), _datum_text(args[1]), text)
    if op == "dump":
        arity(0)
        return Dump(text)
    if op == "quit":
        arity(0)
        return Quit(text)
    raise UnknownCommand(f"unknown command {op!r} in {mode} mode")


def prolog_commands(text: str) -> list[Command]:
    out: list[Command] = []
    for item in prolog.parse_script(text):
        if isinstance(item, prolog.Query):
            out.append(Query(item.goals, str(item)))
        else:
            out.append(Clause(item, str(item)))
    return out


def parse_commands(text: str, mode: str) -> list[Command]:
    return prolog_commands(text) if mode == "prolog" else sexpr_commands(text, mode)


# -- session -------------------------------------------------------------------


@dataclass
class SessionTranscript:
    entries: list[tuple[str, list[str]]] = field(default_factory=list)

    def render(self) -> str:
        out = []
        for command, lines in self.entries:
            if command:
                out.append(f"> {command}\n")
            out.extend(line + "\n" for line in lines)
        return "".join(out)


class Session:
    """Engine state for one run of the CLI, in one mode."""

    def __init__(self, mode: str, cfg: SolverConfig, readings: tuple[str, ...] = ("bwd",),
                 base: Path | None = None):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode
        self.cfg = cfg
        self.readings = readings
        self.base = base or Path.cwd()
        self.kb = KnowledgeBase()
        self.program = prolog.Program()
        self.axioms: list[CNFClause] = []
        self.failed = False
        self.errored = False
        self.quit = False
        self.transcript = SessionTranscript()
        self._planner()

    def _planner(self) -> None:
        self.planner = Planner(self.kb, self.cfg, stderr_sink if self.cfg.trace else None)

    @property
    def exit_code(self) -> int:
        return 2 if self.errored else 1 if self.failed else 0

    def run(self, commands: list[Command]) -> None:
        for cmd in commands:
            if self.quit:
                break
            lines = self.execute(cmd)
            self.transcript.entries.append(("" if isinstance(cmd, Clause) else cmd.text, lines))

    def execute(self, cmd: Command) -> list[str]:
        try:
            return self._execute(cmd)
        except (LogicError, ValueError, OSError) as e:
            self.errored = True
            return [f"error: {e}"]

    def solutions(self, cmd: Goal | Query) -> Iterator[Solution]:
        if isinstance(cmd, Goal):
            return self.planner.solve(cmd.literal)
        return prolog.sld_solve(self.program, cmd.goals, self.cfg,
                                stderr_sink if self.cfg.trace else None)

    def _execute(self, cmd: Command) -> list[str]:
        if isinstance(cmd, (Goal, Query)):
            lines = [s.format() for s in self.solutions(cmd)]
            if not lines:
                self.failed = True
                return ["no"]
            return lines
        if isinstance(cmd, AssertCmd):
            if self.mode == "resolve":
                return self._axiom(cmd.item)
            n = len(self.planner.contradictions)
            outcome, derived = self.planner.tell(cmd.item)
            lines = [f"{outcome.value} {cmd.item}"]
            lines += [f"derived {d}" for d in derived]
            lines += [f"contradiction {c}" for c in self.planner.contradictions[n:]]
            return lines
        if isinstance(cmd, Imply):
            if self.mode == "resolve":
                imp = cmd.implication
                return self._axiom(Implies(And(*imp.antecedents), imp.consequent))
            ids = self.planner.store_implication(cmd.implication, cmd.readings or self.readings)
            return [f"stored {i}" for i in ids]
        if isinstance(cmd, Proc):
            return [f"stored {self.kb.store_procedure(cmd.procedure)}"]
        if isinstance(cmd, Naf):
            n = len(self.kb)
            ok = self.planner.fail_test(cmd.literal, cmd.then_assert)
            if not ok:
                self.failed = True
                return ["no"]
            lines = ["yes"]
            if cmd.then_assert and len(self.kb) > n:
                lines.append(f"asserted {cmd.literal.negate()}")
            return lines
        if isinstance(cmd, Clause):
            self.program.add(cmd.clause)
            return []
        if isinstance(cmd, Prove):
            result = refute(self.axioms, cmd.formula, self.cfg)
            if isinstance(result, Refutation):
                return [f"proved in {_count(len(result.steps), 'step')}", *result.lines()]
            if isinstance(result, LimitHit):
                self.errored = True
                return [f"error: clause limit {self.cfg.max_clauses} reached"]
            self.failed = True
            return [f"not proved: saturated after {_count(result.clauses, 'clause')}"]
        if isinstance(cmd, Set):
            self.set_option(cmd.option, cmd.value)
            return [f"set {cmd.option} {cmd.value}"]
        if isinstance(cmd, Dump):
            if self.mode == "planner":
                return self.kb.dump().splitlines()
            if self.mode == "prolog":
                return str(self.program).splitlines()
            return [str(c) for c in self.axioms]
        if isinstance(cmd, Load):
            return self.load(cmd.path)
        if isinstance(cmd, Quit):
            self.quit = True
            return []
        raise UnknownCommand(f"unknown command {cmd!r}")

    def _axiom(self, f: Formula) -> list[str]:
        new = clausify(f)
        self.axioms.extend(new)
        return [f"axiom {c}" for c in new]

    def load(self, path: str) -> list[str]:
        p = Path(path)
        if not p.is_absolute():
            p = self.base / p
        commands = parse_commands(p.read_text(encoding="utf-8"), self.mode)
        lines: list[str] = []
        for cmd in commands:
            if self.quit:
                break
            out = self.execute(cmd)
            if not isinstance(cmd, Clause):
                lines.append(f"> {cmd.text}")
            lines.extend(out)
        return lines

    def set_option(self, option: str, value: str) -> None:
        cfg = self.cfg
        if option == "occurs-check":
            cfg = replace(cfg, occurs_check=_flag(value))
        elif option == "trace":
            cfg = replace(cfg, trace=_flag(value))
        elif option == "depth":
            cfg = replace(cfg, depth_limit=int(value))
        elif option == "max-clauses":
            cfg = replace(cfg, max_clauses=int(value))
        elif option == "solutions":
            cfg = replace(cfg, solution_limit=None if value == "all" else int(value))
        elif option == "readings":
            self.readings = parse_readings(value)
            return
        else:
            raise ValueError(f"unknown option {option!r}")
        self.cfg = cfg
        self._planner()


def _count(n: int, noun: str) -> str:
    return f"{n} {noun}" if n == 1 else f"{n} {noun}s"


def _flag(value: str) -> bool:
    if value in ("on", "true", "1", "yes"):
        return True
    if value in ("off", "false", "0", "no"):
        return False
    raise ValueError(f"expected on or off, got {value!r}")


def default_config(mode: str) -> SolverConfig:
    return prolog.PROLOG_DEFAULTS if mode == "prolog" else SolverConfig()


def run_file(path: str | Path, mode: str | None = None, cfg: SolverConfig | None = None,
             readings: tuple[str, ...] = ("bwd",)) -> tuple[SessionTranscript, int]:
    """Execute a file; returns the transcript and the exit code (0, 1 or 2)."""
    path = Path(path)
    mode = mode or EXTENSIONS.get(path.suffix, "planner")
    session = Session(mode, cfg or default_config(mode), readings, base=path.parent)
    try:
        commands = parse_commands(path.read_text(encoding="utf-8"), mode)
    except (LogicError, OSError, UnicodeDecodeError) as e:
        session.transcript.entries.append(("", [f"error: {e}"]))
        return session.transcript, 2
    session.run(commands)
    return session.transcript, session.exit_code


# -- REPL ----------------------------------------------------------------------


def repl(mode: str, cfg: SolverConfig | None = None, stdin: TextIO | None = None,
         stdout: TextIO | None = None, readings: tuple[str, ...] = ("bwd",)) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    session = Session(mode, cfg or default_config(mode), readings)
    interactive = stdin.isatty()
    pending: Iterator[Solution] | None = None

    def say(line: str) -> None:
        print(line, file=stdout, flush=True)

    def show_next(first: bool) -> None:
        nonlocal pending
        try:
            sol = next(pending)
            say(sol.format())
        except StopIteration:
            pending = None
            say("no" if first else "no more solutions")
        except LogicError as e:
            pending = None
            say(f"error: {e}")

    while True:
        if interactive:
            stdout.write("?- " if pending is None else "")
            stdout.flush()
        line = stdin.readline()
        if not line:
            return 0
        line = line.strip()
        if not line:
            continue
        if line == ";":
            if pending is None:
                say("error: no pending query")
            else:
                show_next(False)
            continue
        pending = None
        try:
            cmd = _repl_command(line, mode)
        except (LogicError, ValueError) as e:
            say(f"error: {e}")
            continue
        if isinstance(cmd, Quit):
            return 0
        if isinstance(cmd, (Goal, Query)):
            try:
                pending = session.solutions(cmd)
            except LogicError as e:
                say(f"error: {e}")
                continue
            show_next(True)
            continue
        for out in session.execute(cmd):
            say(out)


def _repl_command(line: str, mode: str) -> Command:
    if line.startswith(":"):
        parts = line[1:].split()
        if not parts:
            raise UnknownCommand("error: unknown command")
        name, rest = parts[0], parts[1:]
        if name == "set" and len(rest) == 2:
            return Set(rest[0], rest[1], line)
        if name == "quit" and not rest:
            return Quit(line)
        if name == "dump" and not rest:
            return Dump(line)
        if name == "load" and len(rest) == 1:
            return Load(rest[0], line)
        raise UnknownCommand("unknown command")
    if mode == "prolog":
        if line in ("halt.", "quit."):
            return Quit(line)
        commands = prolog_commands(line)
    else:
        commands = sexpr_commands(line, mode)
    if len(commands) != 1:
        raise ValueError("expected exactly one command per line")
    return commands[0]


# -- entry point ---------------------------------------------------------------


def _env(name: str) -> str | None:
    value = os.environ.get(f"LPK_{name}")
    return value if value else None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lpk", description="Planner, Prolog-subset and resolution engines.")
    ap.add_argument("file", nargs="?", help="file to run (.plan, .pl, .res); omit for a REPL")
    ap.add_argument("--mode", choices=MODES)
    ap.add_argument("--occurs-check", choices=("on", "off"))
    ap.add_argument("--depth", type=int)
    ap.add_argument("--max-clauses", type=int)
    ap.add_argument("--solutions", help="solution limit per goal, or 'all'")
    ap.add_argument("--readings", help="bwd, all, or a comma list of fwd,fwd-contra,bwd,bwd-contra")
    ap.add_argument("--trace", action="store_true", default=None, help="trace to stderr")
    return ap


def config_from_args(args: argparse.Namespace, mode: str) -> tuple[SolverConfig, tuple[str, ...]]:
    cfg = default_config(mode)
    occurs = args.occurs_check or _env("OCCURS_CHECK")
    if occurs is not None:
        cfg = replace(cfg, occurs_check=_flag(occurs))
    depth = args.depth if args.depth is not None else _env("DEPTH")
    if depth is not None:
        cfg = replace(cfg, depth_limit=int(depth))
    clauses = args.max_clauses if args.max_clauses is not None else _env("MAX_CLAUSES")
    if clauses is not None:
        cfg = replace(cfg, max_clauses=int(clauses))
    sols = args.solutions or _env("SOLUTIONS")
    if sols is not None:
        cfg = replace(cfg, solution_limit=None if sols == "all" else int(sols))
    trace = args.trace if args.trace is not None else (_env("TRACE") and _flag(_env("TRACE")))
    if trace:
        cfg = replace(cfg, trace=True)
    readings = parse_readings(args.readings or _env("READINGS") or "bwd")
    return cfg, readings


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    mode = args.mode or _env("MODE")
    if mode is None:
        mode = EXTENSIONS.get(Path(args.file).suffix, "planner") if args.file else "planner"
    if mode not in MODES:
        print(f"error: unknown mode {mode!r}", file=sys.stderr)
        return 2
    try:
        cfg, readings = config_from_args(args, mode)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if args.file is None:
        return repl(mode, cfg, readings=readings)
    transcript, code = run_file(args.file, mode, cfg, readings)
    sys.stdout.write(transcript.render())
    return code


if __name__ == "__main__":
    sys.exit(main())
