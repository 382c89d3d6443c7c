"""Shared fixtures: compact literal syntax and random program generators."""

from __future__ import annotations

import itertools
import random

from lpk.kb import Literal
from lpk.prolog import HornClause, Program
from lpk.sexpr import TermReader, read_all
from lpk.terms import Compound, Sym, Term, Var


def T(text: str) -> Term:
    (node,) = read_all(text)
    return TermReader().term(node)


def L(text: str) -> Literal:
    (node,) = read_all(text)
    return TermReader().literal(node)


def sym(name: str) -> Sym:
    return Sym(name)


# -- propositional / ground Horn programs --------------------------------------


def random_ground_horn(rng: random.Random, atoms: int = 8, rules: int = 12):
    """Facts and acyclic rules over p0..p{atoms-1}; a rule's head index exceeds its body's."""
    names = [f"p{i}" for i in range(rng.randint(2, atoms))]
    facts = sorted(rng.sample(names, rng.randint(0, min(3, len(names)))))
    out = []
    for _ in range(rng.randint(0, rules)):
        h = rng.randrange(1, len(names))
        body = sorted(set(rng.sample(range(h), rng.randint(1, min(3, h)))))
        out.append((names[h], tuple(names[b] for b in body)))
    return names, facts, out


def naive_fixpoint(facts, rules) -> set[str]:
    known = set(facts)
    changed = True
    while changed:
        changed = False
        for head, body in rules:
            if head not in known and all(b in known for b in body):
                known.add(head)
                changed = True
    return known


# -- first-order Horn programs with acyclic predicate dependency ---------------

CONSTANTS = ("a", "b", "c")


def _rand_term(rng: random.Random, vars_: list[Var], depth: int = 1) -> Term:
    r = rng.random()
    if vars_ and r < 0.45:
        return rng.choice(vars_)
    if depth > 0 and r > 0.75:
        return Compound("f", [_rand_term(rng, vars_, depth - 1)])
    return Sym(rng.choice(CONSTANTS))


def _atom(name: str, args: list[Term]) -> Literal:
    return Literal.pos(Compound(name, args) if args else Sym(name))


def random_horn_program(rng: random.Random, preds: int = 6, clauses: int = 10):
    """A terminating program: predicate i's bodies only call predicates < i."""
    sig = [(f"q{i}", rng.randint(0, 2)) for i in range(rng.randint(2, preds))]
    prog = Program()
    for _ in range(rng.randint(1, clauses)):
        i = rng.randrange(len(sig))
        name, arity = sig[i]
        vs = [Var(v) for v in ("X", "Y", "Z")[: rng.randint(0, 3)]]
        head = _atom(name, [_rand_term(rng, vs) for _ in range(arity)])
        body = []
        if i > 0 and rng.random() < 0.7:
            for j in rng.sample(range(i), rng.randint(1, min(2, i))):
                bn, ba = sig[j]
                body.append(_atom(bn, [_rand_term(rng, vs) for _ in range(ba)]))
        prog.add(HornClause(head, tuple(body)))
    name, arity = rng.choice(sig)
    qv = [Var("A")] if rng.random() < 0.3 else [Var("A"), Var("B")]
    query = _atom(name, [_rand_term(rng, qv) for _ in range(arity)])
    return prog, (query,)


def answers(solutions) -> list:
    return ["<cyclic>" if s.is_cyclic else s.answer for s in solutions]


def is_subsequence(small, big) -> bool:
    it = iter(big)
    return all(any(x == y for y in it) for x in small)


# -- propositional clause sets --------------------------------------------------


def random_clause_set(rng: random.Random, atoms: int = 5, clauses: int = 8):
    names = [f"a{i}" for i in range(rng.randint(1, atoms))]
    out = []
    for _ in range(rng.randint(1, clauses)):
        k = rng.randint(1, 3)
        out.append(tuple((rng.random() < 0.5, n) for n in rng.sample(names, min(k, len(names)))))
    return names, out


def truth_table_sat(names, clause_set) -> bool:
    for values in itertools.product((False, True), repeat=len(names)):
        env = dict(zip(names, values))
        if all(any(env[n] == pos for pos, n in c) for c in clause_set):
            return True
    return False
