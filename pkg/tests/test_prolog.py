import random

import pytest

from lpk.errors import CyclicTermError, DepthLimitExceeded, NegationUnsupported, NonGroundError, ParseError
from lpk.kb import Literal
from lpk.planner import Implication, Planner, SolverConfig, compile_implication
from lpk.prolog import (
    PROLOG_DEFAULTS,
    HornClause,
    lower_to_planner,
    parse_program,
    parse_query,
    parse_script,
    sld_solve,
)
from lpk.terms import Compound, Sym, Var

from helpers import L, answers, is_subsequence, random_horn_program

MEMBER = "member(X, [X|_]).\nmember(X, [_|T]) :- member(X, T).\n"
APPEND = "append([], L, L).\nappend([H|T], L, [H|R]) :- append(T, L, R).\n"


def formats(sols):
    return [s.format() for s in sols]


def test_parse_rule_and_fact():
    (rule,) = parse_program("mortal(X) :- human(X).").clauses
    assert rule.head == L("(mortal X)") and rule.body == (L("(human X)"),)
    (fact,) = parse_program("human(socrates).").clauses
    assert fact.is_fact and fact.body == ()


def test_parse_errors_carry_location():
    with pytest.raises(ParseError) as e:
        parse_program("p :- q")
    assert "end of input" in str(e.value)
    assert (e.value.line, e.value.column) == (1, 7)
    with pytest.raises(ParseError) as e:
        parse_program("ok.\nbad(X :- q.")
    assert e.value.line == 2


def test_negation_is_rejected():
    with pytest.raises(NegationUnsupported):
        parse_program("p(X) :- not(q(X)).")


def test_comments_and_lists():
    prog = parse_program("% header\nl([a, b | T]). % trailing\nl([]).\n")
    first, second = prog.clauses
    assert first.head.atom.args[0] == Compound("cons", [Sym("a"), Compound("cons", [Sym("b"), Var("T")])])
    assert second.head == Literal.pos(Compound("l", [Sym("nil")]))


def test_compound_needs_adjacent_paren():
    with pytest.raises(ParseError):
        parse_program("p (a).")


def test_source_order_is_kept():
    prog = parse_program("q(b).\np(a).\nq(a).\n")
    assert [cid for cid, _ in prog.numbered()] == ["q/1#1", "p/1#1", "q/1#2"]
    assert [c.head for _, c in prog.clauses_for(L("(q X)"))] == [L("(q b)"), L("(q a)")]


def test_member_and_append():
    assert formats(sld_solve(parse_program(MEMBER), parse_query("member(W, [a,b])."))) == ["W = a", "W = b"]
    sols = list(sld_solve(parse_program(APPEND), parse_query("append([a], [b], Z).")))
    assert formats(sols) == ["Z = [a,b]"]


def test_left_recursion_hits_depth_limit():
    prog = parse_program("p :- p.\np.\n")
    with pytest.raises(DepthLimitExceeded):
        list(sld_solve(prog, parse_query("p."), SolverConfig(depth_limit=50, occurs_check=False)))


def test_occurs_check_default_off():
    prog = parse_program("eq(X, X).")
    (sol,) = sld_solve(prog, parse_query("eq(Y, f(Y))."))
    assert sol.is_cyclic
    with pytest.raises(CyclicTermError):
        sol.format()
    assert list(sld_solve(prog, parse_query("eq(Y, f(Y))."), SolverConfig(occurs_check=True))) == []


def test_naf_in_queries():
    prog = parse_program("human(socrates).\n")
    assert formats(sld_solve(prog, parse_query("naf(human(zeus))."))) == ["yes"]
    assert formats(sld_solve(prog, parse_query("naf(human(socrates))."))) == []
    with pytest.raises(NonGroundError):
        list(sld_solve(prog, parse_query("naf(human(X)).")))


def test_lowering_examples():
    kb = lower_to_planner(parse_program("human(socrates).\nmortal(X) :- human(X).\n"))
    assert list(kb) == [L("(human socrates)")]
    (proc,) = kb.goal_procedures(L("(mortal X)"))
    (bwd,) = compile_implication(Implication(L("(human X)"), L("(mortal X)")), {"bwd"})
    assert (proc.trigger, proc.pattern, proc.body) == (bwd.trigger, bwd.pattern, bwd.body)

    kb = lower_to_planner(parse_program(MEMBER))
    sols = Planner(kb, PROLOG_DEFAULTS).solve(parse_query("member(W, [a,b]).")[0])
    assert formats(sols) == ["W = a", "W = b"]


def test_lowering_keeps_order_when_facts_follow_rules():
    prog = parse_program("p(a).\np(X) :- q(X).\np(c).\np(a).\nq(b).\n")
    kb = lower_to_planner(prog)
    goal = parse_query("p(W).")
    expected = formats(sld_solve(prog, goal))
    assert expected == ["W = a", "W = b", "W = c", "W = a"]
    assert formats(Planner(kb, PROLOG_DEFAULTS).solve(goal)) == expected


def test_subset_theorem_on_random_programs():
    rng = random.Random(2024)
    nonempty = 0
    for _ in range(50):
        prog, query = random_horn_program(rng)
        sld = answers(sld_solve(prog, query))
        planner = answers(Planner(lower_to_planner(prog), PROLOG_DEFAULTS).solve(query))
        assert sld == planner, str(prog)
        nonempty += bool(sld)
    assert nonempty >= 10


def test_occurs_check_only_removes_answers():
    rng = random.Random(99)
    diverged = 0
    for _ in range(300):
        prog, query = random_horn_program(rng)
        off = answers(sld_solve(prog, query))
        on = answers(sld_solve(prog, query, SolverConfig(occurs_check=True)))
        assert "<cyclic>" not in on
        assert is_subsequence(on, [x for x in off if x != "<cyclic>"])
        diverged += on != off
    assert diverged > 0


def test_round_trip():
    rng = random.Random(5)
    for _ in range(50):
        prog, _ = random_horn_program(rng)
        again = parse_program(str(prog))
        assert again.clauses == prog.clauses
    text = "q('Odd atom', [a|T], 7) :- r(T), naf(s).\n"
    assert str(parse_program(text)) == "q('Odd atom',[a|T],7) :- r(T), naf(s).\n"


def test_script_mixes_clauses_and_queries():
    items = parse_script(MEMBER + "?- member(a, [a]).\n")
    assert [type(i).__name__ for i in items] == ["HornClause", "HornClause", "Query"]


def test_horn_clause_rejects_negative_literals():
    with pytest.raises(ValueError):
        HornClause(L("(not (p))"), ())
