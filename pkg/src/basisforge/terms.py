"""Hash-consed terms over a fixed registry of arithmetic operation symbols.

Every structurally distinct term exists exactly once, so ``is`` and ``==``
coincide and DAG sizes are well defined.
"""

from __future__ import annotations

import threading
import weakref
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping


class ArityError(ValueError):
    pass


class UnknownSymbol(KeyError):
    pass


@dataclass(frozen=True)
class OpSymbol:
    name: str
    arity: int

    def __call__(self, *children) -> "Op":
        return Op(self, [as_term(c) for c in children])

    def __repr__(self):
        return f"OpSymbol({self.name!r}/{self.arity})"

    def __reduce__(self):
        return (symbol, (self.name,))


_SYMBOLS: dict[str, OpSymbol] = {}
_IMPLS: dict[str, Callable] = {}
_registry_lock = threading.Lock()


def register_symbol(name: str, arity: int, impl: Callable | None = None,
                    replace: bool = False) -> OpSymbol:
    """Add (or fetch) a named symbol.

    ``impl(*args, lim)`` evaluates the symbol on plain integers. Builtin
    symbols get their semantics from :mod:`basisforge.evaluation` instead.
    Re-registering a name with a different arity is an error; a different
    ``impl`` is only accepted with ``replace=True``.
    """
    if arity not in (1, 2):
        raise ArityError(f"symbol {name!r}: arity must be 1 or 2, got {arity}")
    if not name.isidentifier():
        raise ValueError(f"symbol name must be an identifier: {name!r}")
    with _registry_lock:
        sym = _SYMBOLS.get(name)
        if sym is not None and sym.arity != arity:
            raise ArityError(f"symbol {name!r} already registered with arity {sym.arity}")
        if sym is None:
            sym = _SYMBOLS[name] = OpSymbol(name, arity)
        if impl is not None:
            old = _IMPLS.get(name)
            if old is not None and old is not impl and not replace:
                raise ValueError(f"symbol {name!r} already has a definition")
            _IMPLS[name] = impl
        return sym


def symbol(name: str) -> OpSymbol:
    try:
        return _SYMBOLS[name]
    except KeyError:
        raise UnknownSymbol(name) from None


def is_registered(name: str) -> bool:
    return name in _SYMBOLS


def symbol_impl(sym: OpSymbol) -> Callable | None:
    return _IMPLS.get(sym.name)


def registered_symbols() -> list[OpSymbol]:
    return list(_SYMBOLS.values())


ADD = register_symbol("add", 2)
MOD = register_symbol("mod", 2)
EXP2 = register_symbol("exp2", 1)
MONUS = register_symbol("monus", 2)
MUL = register_symbol("mul", 2)
DIV = register_symbol("div", 2)
POW = register_symbol("pow", 2)
SQUARE = register_symbol("sq", 1)
DOUBLE = register_symbol("double", 1)
SUCC = register_symbol("succ", 1)
PAIR = register_symbol("pair", 2)
LEFT = register_symbol("L", 1)
RIGHT = register_symbol("R", 1)

BUILTINS = frozenset({ADD, MOD, EXP2, MONUS, MUL, DIV, POW, SQUARE, DOUBLE,
                      SUCC, PAIR, LEFT, RIGHT})

# Short names accepted wherever a signature is written as text.
_ALIASES = {"+": "add", "%": "mod", "-.": "monus", "*": "mul", "/": "div",
            "^": "pow", "l": "L", "r": "R", "square": "sq", "2^x": "exp2"}


def symbol_from_text(name: str) -> OpSymbol:
    name = name.strip()
    return symbol(_ALIASES.get(name, name))


# ---------------------------------------------------------------------------
# Terms

_table: "weakref.WeakValueDictionary[tuple, Term]" = weakref.WeakValueDictionary()
_table_lock = threading.Lock()


def _intern(key, make):
    with _table_lock:
        t = _table.get(key)
        if t is None:
            t = make()
            _table[key] = t
        return t


class Term:
    __slots__ = ("tree_size", "free", "__weakref__")

    tree_size: int
    free: frozenset

    @property
    def children(self) -> tuple["Term", ...]:
        return ()

    def __setattr__(self, name, value):
        raise AttributeError("terms are immutable")

    def __str__(self):
        from .syntax import to_text
        return to_text(self)

    # operator sugar for building terms in Python code and tests
    def __add__(self, other):
        return ADD(self, other)

    def __radd__(self, other):
        return ADD(other, self)

    def __mod__(self, other):
        return MOD(self, other)

    def __rmod__(self, other):
        return MOD(other, self)

    def __mul__(self, other):
        return MUL(self, other)

    def __rmul__(self, other):
        return MUL(other, self)

    def __floordiv__(self, other):
        return DIV(self, other)

    def __rfloordiv__(self, other):
        return DIV(other, self)


class Const(Term):
    __slots__ = ("value",)
    __match_args__ = ("value",)

    def __new__(cls, value: int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise TypeError(f"constant must be an int, got {value!r}")
        if value < 0:
            raise ValueError(f"constants are non-negative, got {value}")

        def make():
            t = object.__new__(cls)
            object.__setattr__(t, "value", value)
            object.__setattr__(t, "tree_size", 1)
            object.__setattr__(t, "free", frozenset())
            return t
        return _intern(("c", value), make)

    def __repr__(self):
        return f"Const({self.value})"

    def __reduce__(self):
        return (Const, (self.value,))


class Var(Term):
    __slots__ = ("index",)
    __match_args__ = ("index",)

    def __new__(cls, index: int):
        if not isinstance(index, int) or index < 0:
            raise ValueError(f"variable index must be a non-negative int, got {index!r}")

        def make():
            t = object.__new__(cls)
            object.__setattr__(t, "index", index)
            object.__setattr__(t, "tree_size", 1)
            object.__setattr__(t, "free", frozenset((index,)))
            return t
        return _intern(("v", index), make)

    def __repr__(self):
        return f"Var({self.index})"

    def __reduce__(self):
        return (Var, (self.index,))


class Op(Term):
    __slots__ = ("symbol", "args")
    __match_args__ = ("symbol", "args")

    def __new__(cls, sym: OpSymbol, children: Iterable[Term]):
        children = tuple(children)
        if len(children) != sym.arity:
            raise ArityError(f"{sym.name} takes {sym.arity} argument(s), got {len(children)}")
        for c in children:
            if not isinstance(c, Term):
                raise TypeError(f"child of {sym.name} is not a Term: {c!r}")

        def make():
            t = object.__new__(cls)
            object.__setattr__(t, "symbol", sym)
            object.__setattr__(t, "args", children)
            object.__setattr__(t, "tree_size", 1 + sum(c.tree_size for c in children))
            free = children[0].free
            for c in children[1:]:
                free = free | c.free
            object.__setattr__(t, "free", free)
            return t
        return _intern(("o", sym.name, *children), make)

    @property
    def children(self):
        return self.args

    def __repr__(self):
        return f"Op({self.symbol.name}, {list(self.args)!r})"

    def __reduce__(self):
        return (Op, (self.symbol, self.args))


def as_term(x) -> Term:
    if isinstance(x, Term):
        return x
    if isinstance(x, int):
        return Const(x)
    raise TypeError(f"cannot make a term from {x!r}")


X, Y, Z = Var(0), Var(1), Var(2)


def build(kind, children=()) -> Term:
    """Construct a term from a node kind.

    ``kind`` is an :class:`OpSymbol` (or its registered name), a
    ``("const", n)`` / ``("var", i)`` tuple, or ``Const``/``Var`` with a single
    int child.
    """
    children = list(children)
    if isinstance(kind, tuple):
        tag, payload = kind
        if children:
            raise ArityError(f"{tag} takes no children")
        return Const(payload) if tag == "const" else Var(payload)
    if kind is Const or kind is Var:
        if len(children) != 1 or not isinstance(children[0], int):
            raise ArityError(f"{kind.__name__} takes exactly one int payload")
        return kind(children[0])
    if isinstance(kind, str):
        kind = symbol(kind)
    return Op(kind, [as_term(c) for c in children])


def postorder(t: Term) -> Iterator[Term]:
    """Yield each distinct subterm once, children before parents."""
    seen = set()
    stack = [(t, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            yield node
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for c in reversed(node.children):
            if id(c) not in seen:
                stack.append((c, False))


def free_vars(t: Term) -> frozenset:
    return t.free


def arity(t: Term) -> int:
    """Number of variables the term ranges over: 1 + the largest index."""
    return max(t.free) + 1 if t.free else 0


def symbols_of(t: Term) -> set:
    return {n.symbol for n in postorder(t) if isinstance(n, Op)}


def max_const(t: Term) -> int:
    return max((n.value for n in postorder(t) if isinstance(n, Const)), default=0)


def rebuild(t: Term, leaf: Callable[[Term], Term | None] | None = None,
            node: Callable[[Op, tuple], Term] | None = None) -> Term:
    """Bottom-up DAG rewrite without recursion.

    ``leaf(t)`` may return a replacement for a leaf (or None to keep it);
    ``node(op, new_children)`` builds the replacement for an inner node.
    """
    out: dict[int, Term] = {}
    for n in postorder(t):
        if isinstance(n, Op):
            kids = tuple(out[id(c)] for c in n.args)
            if node is not None:
                out[id(n)] = node(n, kids)
            else:
                out[id(n)] = n if kids == n.args else Op(n.symbol, kids)
        else:
            r = leaf(n) if leaf is not None else None
            out[id(n)] = n if r is None else r
    return out[id(t)]


def substitute(t: Term, assignment: Mapping[int, Term]) -> Term:
    """Simultaneous substitution of variables; unmapped variables stay."""
    if not assignment or not (t.free & assignment.keys()):
        return t
    assignment = {k: as_term(v) for k, v in assignment.items()}
    return rebuild(t, leaf=lambda n: assignment.get(n.index) if isinstance(n, Var) else None)


def size(t: Term) -> tuple[int, int]:
    """(tree node count, number of distinct subterms)."""
    return t.tree_size, sum(1 for _ in postorder(t))


def depth(t: Term) -> int:
    d: dict[int, int] = {}
    for n in postorder(t):
        d[id(n)] = 1 + max((d[id(c)] for c in n.children), default=0)
    return d[id(t)]


def subterm_at(t: Term, path: Iterable[int]) -> Term:
    for i in path:
        t = t.children[i]
    return t


def replace_at(t: Term, path: tuple[int, ...], new: Term) -> Term:
    if not path:
        return new
    i = path[0]
    kids = list(t.children)
    kids[i] = replace_at(kids[i], path[1:], new)
    return Op(t.symbol, kids)


@dataclass(frozen=True)
class Signature:
    """Symbols a term may use; constants are always admitted.

    ``variables`` bounds the variable indices (None means unbounded).
    """
    symbols: frozenset
    variables: int | None = None
    constants: bool = True

    def __init__(self, symbols: Iterable = (), variables: int | None = None,
                 constants: bool = True):
        syms = frozenset(symbol_from_text(s) if isinstance(s, str) else s for s in symbols)
        object.__setattr__(self, "symbols", syms)
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "constants", constants)

    @classmethod
    def parse(cls, text: str, variables: int | None = None) -> "Signature":
        names = [s for s in text.replace(" ", "").split(",") if s]
        return cls(names, variables)

    def __contains__(self, sym):
        return sym in self.symbols

    def __le__(self, other: "Signature"):
        return self.symbols <= other.symbols

    def names(self) -> list[str]:
        return sorted(s.name for s in self.symbols)

    def __str__(self):
        return "{" + ", ".join(self.names()) + "}"


MINIMAL = Signature({ADD, MOD, EXP2})
EXTENDED = Signature(BUILTINS)


def violations(t: Term, s: Signature) -> list[Term]:
    bad = []
    for n in postorder(t):
        if isinstance(n, Op):
            if n.symbol not in s.symbols:
                bad.append(n)
        elif isinstance(n, Var):
            if s.variables is not None and n.index >= s.variables:
                bad.append(n)
        elif not s.constants:
            bad.append(n)
    return bad


def conforms(t: Term, s: Signature) -> bool:
    return not violations(t, s)
