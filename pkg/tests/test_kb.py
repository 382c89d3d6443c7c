import random

import pytest

from lpk.cli import Session, sexpr_commands
from lpk.errors import MalformedError, NonGroundError
from lpk.kb import (
    Assert,
    AssertOutcome,
    KnowledgeBase,
    Literal,
    Procedure,
    Subgoal,
    Trigger,
    canonical,
    same_entity,
)
from lpk.planner import SolverConfig
from lpk.terms import Int, Sym, Var, unify

from helpers import L, T


def goal_proc(pid, pattern, *subgoals):
    return Procedure(pid, Trigger.ON_GOAL, L(pattern), tuple(Subgoal(L(s)) for s in subgoals))


def test_assert_and_duplicate():
    kb = KnowledgeBase()
    assert kb.assert_literal(L("(human socrates)")) is AssertOutcome.ADDED
    assert kb.assert_literal(L("(human socrates)")) is AssertOutcome.DUPLICATE
    assert len(kb) == 1


def test_negative_literal_is_separate_entry():
    kb = KnowledgeBase()
    kb.assert_literal(L("(human socrates)"))
    assert kb.assert_literal(L("(not (human socrates))")) is AssertOutcome.ADDED
    assert kb.query_index(L("(human X)")) == [L("(human socrates)")]
    assert kb.query_index(L("(not (human X))")) == [L("(not (human socrates))")]


def test_duplicates_modulo_variable_names():
    kb = KnowledgeBase()
    assert kb.assert_literal(L("(likes X Y)")) is AssertOutcome.ADDED
    assert kb.assert_literal(L("(likes A B)")) is AssertOutcome.DUPLICATE
    assert kb.assert_literal(L("(likes A A)")) is AssertOutcome.ADDED
    assert canonical(L("(likes Q R)")) == canonical(L("(likes X Y)"))


def test_malformed_literal():
    with pytest.raises(MalformedError):
        Literal.pos(Var("X"))
    with pytest.raises(MalformedError):
        Literal.pos(Int(3))


def test_retract_examples():
    kb = KnowledgeBase()
    assert kb.retract_literal(L("(human socrates)")) is False
    kb.assert_literal(L("(human socrates)"))
    assert kb.retract_literal(L("(human socrates)")) is True
    assert kb.query_index(L("(human X)")) == []
    assert kb.assert_literal(L("(human socrates)")) is AssertOutcome.ADDED


def test_query_index_order():
    kb = KnowledgeBase()
    for text in ("(human socrates)", "(human plato)", "(dog fido)"):
        kb.assert_literal(L(text))
    assert kb.query_index(L("(human X)")) == [L("(human socrates)"), L("(human plato)")]
    assert kb.query_index(L("(not (human X))")) == []
    p = goal_proc("p1", "(human X)", "(greek X)")
    kb.store_procedure(p)
    assert kb.query_index(L("(human X)")) == [L("(human socrates)"), L("(human plato)"), p]


def test_store_procedure_examples():
    kb = KnowledgeBase()
    g = goal_proc("g", "(mortal X)", "(human X)")
    assert kb.store_procedure(g) == "g"
    assert kb.query_index(L("(mortal X)")) == [g]
    on_assert = Procedure("a", Trigger.ON_ASSERT, L("(human X)"), (Assert(L("(mortal X)")),))
    kb.store_procedure(on_assert)
    assert kb.query_index(L("(human X)")) == []
    assert kb.assert_procedures(L("(human socrates)")) == [on_assert]
    g2 = goal_proc("g2", "(mortal X)", "(god X)")
    kb.store_procedure(g2)
    assert kb.query_index(L("(mortal Y)")) == [g, g2]


def test_procedure_invariants():
    with pytest.raises(MalformedError):
        Procedure("empty", Trigger.ON_GOAL, L("(p)"), ())
    kb = KnowledgeBase()
    kb.store_procedure(goal_proc("x", "(p)", "(q)"))
    kb.store_procedure(goal_proc("x", "(p)", "(q)"))
    with pytest.raises(MalformedError):
        kb.store_procedure(goal_proc("x", "(p)", "(r)"))


def test_same_entity_examples():
    peking, beijing = Sym("Peking"), Sym("Beijing")
    assert same_entity(peking, beijing) is False
    assert same_entity(peking, peking) is True
    assert same_entity(T("(f a b)"), T("(f a b)"))
    assert not same_entity(T("(f a)"), T("(g a)"))
    with pytest.raises(NonGroundError):
        same_entity(Var("X"), peking)


def test_unique_names_for_distinct_constants():
    names = [Sym(n) for n in ("a", "b", "Peking", "Beijing", "c1")] + [Int(1), Int(2)]
    for x in names:
        for y in names:
            if x != y:
                assert not same_entity(x, y)
                assert unify(x, y) is None


# -- randomized round trip against a naive list model --------------------------

POOL = [L(t) for t in (
    "(p a)", "(p b)", "(not (p a))", "(q a b)", "(q X Y)", "(q Z W)", "(q X X)",
    "(r)", "(not (r))", "(p X)", "(s (f X) a)", "(s (f Y) a)",
)]
PATTERNS = [L(t) for t in ("(p X)", "(not (p X))", "(q X Y)", "(r)", "(not (r))", "(s X Y)")]


def model_query(model, pattern):
    return [lit for lit in model if lit.key == pattern.key]


def test_random_sequences_match_list_model():
    rng = random.Random(11)
    for _ in range(500):
        kb, model = KnowledgeBase(), []
        for _ in range(rng.randint(1, 25)):
            lit = rng.choice(POOL)
            c = canonical(lit)
            if rng.random() < 0.6:
                expected = AssertOutcome.DUPLICATE if c in model else AssertOutcome.ADDED
                assert kb.assert_literal(lit) is expected
                if c not in model:
                    model.append(c)
            else:
                assert kb.retract_literal(lit) is (c in model)
                if c in model:
                    model.remove(c)
        for pat in PATTERNS:
            got = kb.query_index(pat)
            assert got == model_query(model, pat)
            assert all(x.positive == pat.positive for x in got)


def test_dump_round_trips_through_commands():
    kb = KnowledgeBase()
    for text in ("(human socrates)", "(not (human zeus))", "(at (Peking) X)", "(age bob 42)"):
        kb.assert_literal(L(text))
    kb.store_procedure(goal_proc("bwd rule", "(mortal X)", "(human X)"))
    text = kb.dump()
    session = Session("planner", SolverConfig())
    session.run(sexpr_commands(text, "planner"))
    assert session.exit_code == 0
    assert session.kb.dump() == text
    assert text.splitlines()[0] == "(assert (age bob 42))"


def test_snapshot_is_independent():
    kb = KnowledgeBase()
    kb.assert_literal(L("(p a)"))
    snap = kb.snapshot()
    kb.assert_literal(L("(p b)"))
    assert len(snap) == 1 and len(kb) == 2
