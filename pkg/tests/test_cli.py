import io
import re
import subprocess
import sys
from pathlib import Path

import pytest

from lpk.cli import (
    AssertCmd,
    Goal,
    Imply,
    Session,
    main,
    parse_commands,
    repl,
    run_file,
)
from lpk.errors import ParseError, UnknownCommand
from lpk.planner import SolverConfig

CORPUS = Path(__file__).parent / "corpus"
SOURCES = sorted(p for p in CORPUS.iterdir() if p.suffix in (".plan", ".pl", ".res"))


def declared_exit(path: Path) -> int:
    m = re.search(r"exit: (\d)", path.read_text().splitlines()[0])
    return int(m.group(1))


@pytest.mark.parametrize("path", SOURCES, ids=lambda p: p.name)
def test_golden_corpus(path):
    transcript, code = run_file(path)
    assert code == declared_exit(path)
    assert transcript.render() == (CORPUS / (path.name + ".out")).read_text()


def test_corpus_covers_every_exit_code_and_mode():
    assert {declared_exit(p) for p in SOURCES} == {0, 1, 2}
    assert {p.suffix for p in SOURCES} == {".plan", ".pl", ".res"}


def tty_free(text):
    return io.StringIO(text)


def run_repl(mode, text, cfg=None):
    out = io.StringIO()
    code = repl(mode, cfg, tty_free(text), out)
    return out.getvalue().splitlines(), code


MEMBER = "member(X, [X|_]).\nmember(X, [_|T]) :- member(X, T).\n"


def test_repl_incremental_solutions():
    lines, code = run_repl("prolog", MEMBER + "?- member(W,[a,b]).\n;\n;\n")
    assert lines == ["W = a", "W = b", "no more solutions"] and code == 0


def test_repl_set_occurs_check():
    text = "unifytest(X, X).\n?- unifytest(X, f(X)).\n:set occurs-check on\n?- unifytest(X, f(X)).\n"
    lines, _ = run_repl("prolog", text)
    assert lines[0].startswith("error: cyclic")
    assert lines[-1] == "no"


def test_repl_unknown_command_keeps_going():
    lines, code = run_repl("planner", ":frobnicate\n(assert (p))\n(goal (p))\n:quit\n(goal (p))\n")
    assert lines == ["error: unknown command", "added p", "yes"] and code == 0


def test_repl_resource_error_does_not_end_session():
    text = "(set depth 20)\n(proc loop :on-goal (p) (goal (p)))\n(goal (p))\n(assert (q))\n"
    lines, _ = run_repl("planner", text)
    assert lines[-2] == "error: depth limit 20 exceeded"
    assert lines[-1] == "added q"


def test_repl_dump_and_load(tmp_path):
    f = tmp_path / "facts.plan"
    f.write_text("(assert (human socrates))\n")
    lines, _ = run_repl("planner", f":load {f}\n:dump\n")
    assert lines == ["> (assert (human socrates))", "added human(socrates)", "(assert (human socrates))"]


def test_repl_resolve_mode():
    lines, _ = run_repl("resolve", "(assert (p))\n(assert (not (p)))\n(prove (cheese))\n")
    assert lines[2] == "proved in 1 step"


def test_syntax_error_aborts_before_running(tmp_path):
    f = tmp_path / "bad.plan"
    f.write_text("(assert (human socrates))\n(goal (human X)\n")
    transcript, code = run_file(f)
    assert code == 2
    assert transcript.render().startswith("error: unbalanced")
    assert "added" not in transcript.render()


def test_missing_file_is_exit_2(tmp_path):
    assert run_file(tmp_path / "nope.plan")[1] == 2


def test_unknown_command_is_an_error():
    with pytest.raises(UnknownCommand):
        parse_commands("(frobnicate)", "planner")
    with pytest.raises(UnknownCommand):
        parse_commands("(goal (p))", "resolve")
    with pytest.raises(ParseError):
        parse_commands("(imply ((p)) (q) :sideways)", "planner")


def test_command_types():
    cmds = parse_commands("(assert (p))\n(imply ((p)) (q) :all)\n(goal (q X))\n", "planner")
    assert [type(c) for c in cmds] == [AssertCmd, Imply, Goal]
    assert cmds[1].readings == ("fwd", "fwd-contra", "bwd", "bwd-contra")


def test_replaying_commands_reproduces_transcript():
    for path in SOURCES:
        a, _ = run_file(path)
        b, _ = run_file(path)
        assert a.render() == b.render()
    commands = parse_commands((CORPUS / "forward.plan").read_text(), "planner")
    whole = Session("planner", SolverConfig(), base=CORPUS)
    whole.run(commands)
    stepwise = Session("planner", SolverConfig(), base=CORPUS)
    for cmd in commands:
        stepwise.run([cmd])
    assert whole.transcript.render() == stepwise.transcript.render()


def test_main_flags_and_trace(capsys):
    code = main(["--trace", "--readings", "all", str(CORPUS / "mortal.plan")])
    out, err = capsys.readouterr()
    assert code == 0
    assert "stored fwd:human(X)=>mortal(X)" not in out  # the file picks :bwd itself
    assert "GOAL d=0 mortal(socrates)" in err


def test_main_env_overrides(monkeypatch, capsys):
    monkeypatch.setenv("LPK_DEPTH", "5")
    code = main(["--mode", "planner", str(CORPUS / "loop.plan")])
    assert code == 2
    monkeypatch.setenv("LPK_OCCURS_CHECK", "on")
    code = main([str(CORPUS / "cyclic.pl")])
    out, _ = capsys.readouterr()
    assert code == 1 and "?- eq(A,f(A)).\nno\n" in out


def test_default_readings_flag(tmp_path, capsys):
    f = tmp_path / "r.plan"
    f.write_text("(imply ((human X)) (mortal X))\n")
    main(["--readings", "fwd,bwd", str(f)])
    out, _ = capsys.readouterr()
    assert out.count("stored") == 2


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lpk", str(CORPUS / "member.pl")],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout == (CORPUS / "member.pl.out").read_text()
