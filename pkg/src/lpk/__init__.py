"""Planner-style pattern-directed invocation, a pure Prolog subset, and a resolution prover."""

from .errors import (
    ClauseLimitExceeded,
    CyclicTermError,
    DepthLimitExceeded,
    ExistentialUnsupported,
    LogicError,
    MalformedError,
    NegationUnsupported,
    NonGroundError,
    ParseError,
    UnknownCommand,
)
from .kb import KnowledgeBase, Literal, Procedure, Trigger, same_entity
from .planner import Implication, Planner, Solution, SolverConfig, compile_implication
from .prolog import Program, lower_to_planner, parse_program, parse_query, sld_solve
from .resolution import clausify, prove, refute, resolve_pair
from .terms import Compound, Int, Substitution, Sym, Var, apply_substitution, unify

__version__ = "0.1.0"

__all__ = [
    "ClauseLimitExceeded",
    "Compound",
    "CyclicTermError",
    "DepthLimitExceeded",
    "ExistentialUnsupported",
    "Implication",
    "Int",
    "KnowledgeBase",
    "Literal",
    "LogicError",
    "MalformedError",
    "NegationUnsupported",
    "NonGroundError",
    "ParseError",
    "Planner",
    "Procedure",
    "Program",
    "Solution",
    "SolverConfig",
    "Substitution",
    "Sym",
    "Trigger",
    "UnknownCommand",
    "Var",
    "apply_substitution",
    "clausify",
    "compile_implication",
    "lower_to_planner",
    "parse_program",
    "parse_query",
    "prove",
    "refute",
    "resolve_pair",
    "same_entity",
    "sld_solve",
    "unify",
]
