"""Terms, substitutions and unification.

Every engine in the package speaks this vocabulary. Terms are immutable
and hash in constant time; equality, formatting, substitution and
unification all run on explicit stacks, so term depth is bounded only by
memory.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Iterator, Mapping
from typing import Union

from .errors import CyclicTermError, MalformedError

__all__ = [
    "Var", "Sym", "Int", "Compound", "Term", "Substitution", "NIL",
    "walk", "unify", "unify_into", "resolve", "apply_substitution",
    "standardize_apart", "variables", "is_ground", "format_term",
    "make_list", "map_vars",
]


class Var:
    """A logic variable, identified by its name and generation."""

    __slots__ = ("name", "gen", "_hash")

    def __init__(self, name: str, gen: int = 0):
        if gen < 0:
            raise ValueError("generation must be nonnegative")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "gen", gen)
        object.__setattr__(self, "_hash", hash(("var", name, gen)))

    def __setattr__(self, key, value):
        raise AttributeError("terms are immutable")

    def __eq__(self, other):
        return self is other or (
            type(other) is Var and other.name == self.name and other.gen == self.gen
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Var({self.name!r}, {self.gen})"

    def __str__(self):
        return format_term(self)

    def __reduce__(self):
        return (Var, (self.name, self.gen))


class Sym:
    """A constant symbol. Zero-arity compounds are written as symbols."""

    __slots__ = ("name", "_hash")

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "_hash", hash(("sym", name)))

    def __setattr__(self, key, value):
        raise AttributeError("terms are immutable")

    def __eq__(self, other):
        return self is other or (type(other) is Sym and other.name == self.name)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Sym({self.name!r})"

    def __str__(self):
        return format_term(self)

    def __reduce__(self):
        return (Sym, (self.name,))


class Int:
    __slots__ = ("value", "_hash")

    def __init__(self, value: int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise TypeError("Int wraps a Python int")
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "_hash", hash(("int", value)))

    def __setattr__(self, key, value):
        raise AttributeError("terms are immutable")

    def __eq__(self, other):
        return self is other or (type(other) is Int and other.value == self.value)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Int({self.value})"

    def __str__(self):
        return str(self.value)

    def __reduce__(self):
        return (Int, (self.value,))


class Compound:
    """A functor applied to one or more argument terms."""

    __slots__ = ("functor", "args", "ground", "_hash")

    def __init__(self, functor: str, args: Iterable[Term]):
        args = tuple(args)
        if not args:
            raise MalformedError("compound terms need arity >= 1; use Sym")
        ground = True
        for a in args:
            if type(a) is Var or (type(a) is Compound and not a.ground):
                ground = False
            elif type(a) not in (Sym, Int, Compound):
                raise TypeError(f"not a term: {a!r}")
        object.__setattr__(self, "functor", functor)
        object.__setattr__(self, "args", args)
        object.__setattr__(self, "ground", ground)
        object.__setattr__(
            self, "_hash", hash((functor, tuple(a._hash for a in args)))
        )

    def __setattr__(self, key, value):
        raise AttributeError("terms are immutable")

    @property
    def arity(self) -> int:
        return len(self.args)

    def __eq__(self, other):
        if self is other:
            return True
        if type(other) is not Compound or other._hash != self._hash:
            return False
        stack = [(self, other)]
        while stack:
            a, b = stack.pop()
            if a is b:
                continue
            if type(a) is Compound:
                if (
                    type(b) is not Compound
                    or a._hash != b._hash
                    or a.functor != b.functor
                    or len(a.args) != len(b.args)
                ):
                    return False
                stack.extend(zip(a.args, b.args))
            elif a != b:
                return False
        return True

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Compound({self.functor!r}, {list(self.args)!r})"

    def __str__(self):
        return format_term(self)

    def __reduce__(self):
        return (Compound, (self.functor, self.args))


Term = Union[Var, Sym, Int, Compound]

NIL = Sym("nil")


def make_list(items: Iterable[Term], tail: Term = NIL) -> Term:
    out = tail
    for item in reversed(list(items)):
        out = Compound("cons", (item, out))
    return out


def is_ground(t: Term) -> bool:
    if type(t) is Compound:
        return t.ground
    return type(t) is not Var


def variables(t: Term) -> list[Var]:
    """Distinct variables of `t` in left-to-right order of first occurrence."""
    seen: dict[Var, None] = {}
    stack = [t]
    while stack:
        x = stack.pop()
        if type(x) is Var:
            seen.setdefault(x)
        elif type(x) is Compound and not x.ground:
            stack.extend(reversed(x.args))
    return list(seen)


def _var_key(v: Var) -> tuple[int, str]:
    return (v.gen, v.name)


# -- formatting --------------------------------------------------------------

_PLAIN_ATOM = re.compile(r"[a-z][A-Za-z0-9_]*\Z")


def format_atom(name: str) -> str:
    if _PLAIN_ATOM.match(name):
        return name
    escaped = name.replace("\\", "\\\\").replace("'", "\\'")
    return f"'{escaped}'"


def format_var(v: Var) -> str:
    return v.name if v.gen == 0 else f"{v.name}_{v.gen}"


def format_term(t: Term) -> str:
    """Canonical text: `f(a,X)`, lists as `[a,b|T]`, odd names quoted."""
    out: list[str] = []
    stack: list[object] = [t]
    while stack:
        x = stack.pop()
        if type(x) is str:
            out.append(x)
        elif type(x) is Var:
            out.append(format_var(x))
        elif type(x) is Sym:
            out.append("[]" if x == NIL else format_atom(x.name))
        elif type(x) is Int:
            out.append(str(x.value))
        elif x.functor == "cons" and len(x.args) == 2:
            items = []
            cur = x
            while type(cur) is Compound and cur.functor == "cons" and len(cur.args) == 2:
                items.append(cur.args[0])
                cur = cur.args[1]
            stack.append("]")
            if cur != NIL:
                stack.append(cur)
                stack.append("|")
            for i in range(len(items) - 1, -1, -1):
                stack.append(items[i])
                if i:
                    stack.append(",")
            out.append("[")
        else:
            stack.append(")")
            for i in range(len(x.args) - 1, -1, -1):
                stack.append(x.args[i])
                if i:
                    stack.append(",")
            out.append(format_atom(x.functor) + "(")
    return "".join(out)


# -- substitutions -----------------------------------------------------------


class Substitution(Mapping):
    """An immutable finite map from variables to terms.

    Always truthy: the empty substitution is a successful unifier, and
    failure is reported separately as ``None``.
    """

    __slots__ = ("_bindings", "_cyclic")

    def __init__(self, bindings: Mapping[Var, Term] | Iterable[tuple[Var, Term]] = ()):
        b = dict(bindings)
        for v, t in b.items():
            if type(v) is not Var:
                raise TypeError(f"substitution keys must be variables, got {v!r}")
            if t == v:
                raise MalformedError(f"binding maps {format_var(v)} to itself")
        self._bindings = b
        self._cyclic = None

    @classmethod
    def _trusted(cls, bindings: dict) -> Substitution:
        s = cls.__new__(cls)
        s._bindings = bindings
        s._cyclic = None
        return s

    def __getitem__(self, v):
        return self._bindings[v]

    def __iter__(self):
        return iter(self._bindings)

    def __len__(self):
        return len(self._bindings)

    def __bool__(self):
        return True

    def __eq__(self, other):
        if isinstance(other, Substitution):
            return self._bindings == other._bindings
        if isinstance(other, Mapping):
            return self._bindings == dict(other)
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._bindings.items()))

    def __repr__(self):
        return f"Substitution({self.format()})"

    def format(self) -> str:
        items = sorted(self._bindings.items(), key=lambda kv: _var_key(kv[0]))
        return "{" + ", ".join(f"{format_var(v)}={format_term(t)}" for v, t in items) + "}"

    @property
    def cyclic(self) -> frozenset[Var]:
        """Variables whose materialization would never terminate."""
        if self._cyclic is None:
            self._cyclic = frozenset(_cyclic_vars(self._bindings))
        return self._cyclic

    @property
    def is_cyclic(self) -> bool:
        return bool(self.cyclic)

    def restrict(self, vs: Iterable[Var]) -> Substitution:
        return Substitution._trusted({v: self._bindings[v] for v in vs if v in self._bindings})


def _cyclic_vars(b: Mapping[Var, Term]) -> set[Var]:
    graph = {v: [w for w in variables(t) if w in b] for v, t in b.items()}
    state: dict[Var, int] = {}  # 1 open, 2 acyclic, 3 reaches a cycle
    for root in graph:
        if root in state:
            continue
        state[root] = 1
        frames = [[root, iter(graph[root]), False]]
        while frames:
            frame = frames[-1]
            for w in frame[1]:
                s = state.get(w)
                if s is None:
                    state[w] = 1
                    frames.append([w, iter(graph[w]), False])
                    break
                if s != 2:
                    frame[2] = True
            else:
                frames.pop()
                state[frame[0]] = 3 if frame[2] else 2
                if frame[2] and frames:
                    frames[-1][2] = True
    return {v for v, s in state.items() if s == 3}


def walk(t: Term, bindings: Mapping[Var, Term]) -> Term:
    while type(t) is Var:
        nxt = bindings.get(t)
        if nxt is None:
            return t
        t = nxt
    return t


def _occurs(v: Var, t: Term, bindings: Mapping[Var, Term]) -> bool:
    stack = [t]
    while stack:
        x = walk(stack.pop(), bindings)
        if x is v or x == v:
            return True
        if type(x) is Compound and not x.ground:
            stack.extend(x.args)
    return False


def unify_into(
    a: Term,
    b: Term,
    bindings: dict[Var, Term],
    occurs_check: bool = True,
    trail: list | None = None,
) -> bool:
    """Destructively extend `bindings` with a most general unifier of a and b.

    New bindings are appended to `trail` so the caller can roll them back;
    on failure the partial bindings are left in place for that purpose.
    When two unbound variables meet, the one with the larger
    (generation, name) key is bound, which makes the result independent
    of argument order.
    """
    stack = [(a, b)]
    seen: set | None = None if occurs_check else set()
    while stack:
        x, y = stack.pop()
        x = walk(x, bindings)
        y = walk(y, bindings)
        if x is y:
            continue
        tx, ty = type(x), type(y)
        if tx is Var:
            if ty is Var:
                if x == y:
                    continue
                if _var_key(x) < _var_key(y):
                    x, y = y, x
            elif occurs_check and _occurs(x, y, bindings):
                return False
            bindings[x] = y
            if trail is not None:
                trail.append(x)
        elif ty is Var:
            if occurs_check and _occurs(y, x, bindings):
                return False
            bindings[y] = x
            if trail is not None:
                trail.append(y)
        elif tx is Compound:
            if ty is not Compound or x.functor != y.functor or len(x.args) != len(y.args):
                return False
            if x.ground and y.ground:
                if x == y:
                    continue
                return False
            if seen is not None:
                # without the occurs check, cyclic bindings can revisit a pair
                key = (id(x), id(y))
                if key in seen:
                    continue
                seen.add(key)
            stack.extend(zip(reversed(x.args), reversed(y.args)))
        elif x != y:
            return False
    return True


def unify(
    a: Term,
    b: Term,
    s: Mapping[Var, Term] | None = None,
    occurs_check: bool = True,
) -> Substitution | None:
    """Return a most general unifier extending `s`, or None if there is none.

    With `occurs_check` off a binding such as X -> f(X) may be created; the
    result then reports it through `Substitution.cyclic`, and materializing
    it raises CyclicTermError.
    """
    bindings = dict(s) if s else {}
    if not unify_into(a, b, bindings, occurs_check):
        return None
    return Substitution._trusted(bindings)


_EXIT_VAR = object()
_BUILD = object()


def resolve(t: Term, bindings: Mapping[Var, Term]) -> Term:
    """Replace bound variables in `t` until none remain.

    Raises CyclicTermError when a variable is reached again while its own
    binding is still being expanded.
    """
    if not bindings or (type(t) is Compound and t.ground) or type(t) in (Sym, Int):
        return t
    memo: dict[Var, Term] = {}
    active: set[Var] = set()
    out: list[Term] = []
    stack: list[tuple[object, object]] = [(t, None)]
    while stack:
        node, tag = stack.pop()
        if tag is _EXIT_VAR:
            active.discard(node)
            memo[node] = out[-1]
        elif tag is _BUILD:
            n = len(node.args)
            args = out[-n:]
            del out[-n:]
            if all(x is y for x, y in zip(args, node.args)):
                out.append(node)
            else:
                out.append(Compound(node.functor, args))
        elif type(node) is Var:
            if node in memo:
                out.append(memo[node])
            elif node in bindings:
                if node in active:
                    raise CyclicTermError(f"cyclic binding for {format_var(node)}")
                active.add(node)
                stack.append((node, _EXIT_VAR))
                stack.append((bindings[node], None))
            else:
                out.append(node)
        elif type(node) is Compound and not node.ground:
            stack.append((node, _BUILD))
            for arg in reversed(node.args):
                stack.append((arg, None))
        else:
            out.append(node)
    return out[0]


def apply_substitution(s: Mapping[Var, Term], t: Term) -> Term:
    return resolve(t, s)


def map_vars(t: Term, fn) -> Term:
    """Rebuild `t` with every variable v replaced by fn(v)."""
    if is_ground(t):
        return t
    if type(t) is Var:
        return fn(t)
    out: list[Term] = []
    stack: list[tuple[Term, object]] = [(t, None)]
    while stack:
        node, tag = stack.pop()
        if tag is _BUILD:
            n = len(node.args)
            args = out[-n:]
            del out[-n:]
            out.append(Compound(node.functor, args))
        elif type(node) is Var:
            out.append(fn(node))
        elif type(node) is Compound and not node.ground:
            stack.append((node, _BUILD))
            for arg in reversed(node.args):
                stack.append((arg, None))
        else:
            out.append(node)
    return out[0]


def renamer(generation: int):
    """Return a var-mapping function that moves variables into `generation`.

    Variables sharing a name but differing in generation get the old
    generation folded into the new name, so distinct inputs stay distinct.
    """
    table: dict[Var, Var] = {}
    names: dict[str, int] = {}

    def rename(v: Var) -> Var:
        new = table.get(v)
        if new is None:
            owner = names.setdefault(v.name, v.gen)
            name = v.name if owner == v.gen else f"{v.name}_{v.gen}"
            new = table[v] = Var(name, generation)
        return new

    return rename


def standardize_apart(t: Term, generation: int) -> Term:
    return map_vars(t, renamer(generation))


def iter_subterms(t: Term) -> Iterator[Term]:
    stack = [t]
    while stack:
        x = stack.pop()
        yield x
        if type(x) is Compound:
            stack.extend(reversed(x.args))
