"""Low-arity bases built on Cantor pairing.

* A finite set of *unary* functions that generates every unary function of a
  binary-closed basis: ``l, r, d, u, v`` plus a lifted copy of each basis
  symbol, threading a pair-encoded stack through the computation.
* Two single binary operations, ``h`` and ``g``, that each generate the whole
  class on their own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .evaluation import (EvalLimits, LimitExceeded, Tower, evaluate, exp2,
                         pair, unpair)
from .report import VerificationReport, check_equivalent
from .terms import (ADD, EXP2, LEFT, MOD, PAIR, RIGHT, Const, Op, OpSymbol,
                    Signature, Term, X, Y, as_term, conforms, is_registered,
                    postorder, rebuild, register_symbol, substitute, symbol,
                    symbol_impl, UnknownSymbol)

unpair_l = lambda z: unpair(z)[0]
unpair_r = lambda z: unpair(z)[1]


def P(a, b) -> Term:
    return Op(PAIR, (as_term(a), as_term(b)))


def L(a) -> Term:
    return Op(LEFT, (as_term(a),))


def R(a) -> Term:
    return Op(RIGHT, (as_term(a),))


class NonUnary(ValueError):
    pass


# ---------------------------------------------------------------------------
# Lifting

def _as_function_term(f, expected_arity: int) -> Term:
    if isinstance(f, OpSymbol):
        if f.arity != expected_arity:
            raise ValueError(f"{f.name} has arity {f.arity}, expected {expected_arity}")
        return Op(f, (X, Y)[:f.arity])
    f = as_term(f)
    if f.free and max(f.free) >= expected_arity:
        raise ValueError(f"term uses variable {max(f.free)}, expected arity {expected_arity}")
    return f


def lift_unary(f) -> Term:
    """f'(z) = [f(l(z)) | r(z)]"""
    f = _as_function_term(f, 1)
    return P(substitute(f, {0: L(X)}), R(X))


def lift_binary(h) -> Term:
    """h''(z) = [h(l(z), l(r(z))) | r(r(z))]"""
    h = _as_function_term(h, 2)
    return P(substitute(h, {0: L(X), 1: L(R(X))}), R(R(X)))


D_DEF = P(X, X)
U_DEF = P(L(X), X)
V_DEF = P(L(R(X)), P(L(X), R(R(X))))


def _definitional(name: str, body: Term) -> OpSymbol:
    """Register a unary symbol whose meaning is ``body`` with x bound to the argument."""
    if is_registered(name) and getattr(symbol_impl(symbol(name)), "body", None) is body:
        return symbol(name)

    def impl(z, lim):
        return evaluate(body, (z,), lim)
    impl.body = body
    return register_symbol(name, 1, impl, replace=True)


D = _definitional("d", D_DEF)
U = _definitional("u", U_DEF)
V = _definitional("v", V_DEF)


@dataclass
class LiftedBasis:
    """The unary functions simulating a basis whose symbols have arity 1 or 2."""
    basis: tuple
    unary: dict = field(default_factory=dict)      # basis symbol -> lifted symbol
    binary: dict = field(default_factory=dict)
    definitions: dict = field(default_factory=dict)  # lifted symbol -> defining term

    @classmethod
    def of(cls, basis: Sequence[OpSymbol]) -> "LiftedBasis":
        lb = cls(tuple(basis))
        for s in (D, U, V):
            lb.definitions[s] = _body(s)
        lb.definitions[LEFT] = L(X)
        lb.definitions[RIGHT] = R(X)
        for sym in basis:
            body = lift_unary(sym) if sym.arity == 1 else lift_binary(sym)
            lifted = _definitional(f"lift_{sym.name}", body)
            (lb.unary if sym.arity == 1 else lb.binary)[sym] = lifted
            lb.definitions[lifted] = body
        return lb

    @property
    def symbols(self) -> list[OpSymbol]:
        return list(self.definitions)

    def signature(self) -> Signature:
        return Signature(self.definitions, variables=1)


def _body(sym: OpSymbol) -> Term:
    return symbol_impl(sym).body


def _constant_term(n: int, basis) -> Term:
    """n as a term in x over {add, mod, exp2}: 0 = x mod x, 1 = 2^0, then binary doubling."""
    if not {ADD, MOD, EXP2} <= set(basis):
        raise ValueError("constants inside compiled terms need add, mod and exp2 in the basis")
    zero = Op(MOD, (X, X))
    if n == 0:
        return zero
    one = Op(EXP2, (zero,))
    acc = one
    for bit in bin(n)[3:]:
        acc = acc + acc
        if bit == "1":
            acc = acc + one
    return acc


def _compose(outer: Term, inner: Term) -> Term:
    return substitute(outer, {0: inner})


def compile_to_unary(F: Term, lifted: LiftedBasis) -> Term:
    """Composition-only term F' over the lifted basis with F(x) = l(F'(d(x))).

    Identity maps to identity, ``g(f)`` to ``g'(f')`` and ``h(f, g)`` to
    ``h''(f'(v(g'(u(x)))))``. Constants are first rewritten into basis terms.
    """
    if F.free - {0}:
        raise NonUnary(f"term has free variables {sorted(F.free)}; expected only x")
    basis = set(lifted.basis)
    for n in postorder(F):
        if isinstance(n, Op) and n.symbol not in basis:
            raise UnknownSymbol(f"{n.symbol.name} is not in the basis")
    F = rebuild(F, leaf=lambda n: _constant_term(n.value, basis) if isinstance(n, Const) else None)

    def node(op: Op, kids):
        sym = op.symbol
        if sym.arity == 1:
            (f1,) = kids
            return Op(lifted.unary[sym], (f1,))
        f1, g1 = kids
        chain = Op(U, (X,))
        if g1 is not X:
            # v(u(x)) = [l(x) | x] = u(x), so v is only needed after a real g'
            chain = Op(V, (_compose(g1, chain),))
        chain = _compose(f1, chain)
        return Op(lifted.binary[sym], (chain,))

    return rebuild(F, node=node)


def decode(compiled: Term) -> Term:
    """l(F'(d(x))): the unary function a compiled term stands for."""
    return L(_compose(compiled, Op(D, (X,))))


def expand(t: Term, lifted: LiftedBasis) -> Term:
    """Replace lifted symbols by their pairing definitions."""
    defs = lifted.definitions

    def node(op, kids):
        body = defs.get(op.symbol)
        if body is None or op.symbol in (LEFT, RIGHT):
            return Op(op.symbol, kids)
        return _compose(body, kids[0])

    return rebuild(t, node=node)


def check_unary_compilation(F: Term, lifted: LiftedBasis, interval=(0, 60),
                            lim: EvalLimits | None = None) -> VerificationReport:
    compiled = compile_to_unary(F, lifted)
    rep = check_equivalent(F, decode(compiled), [interval], lim, name="unary compilation")
    rep.stats["compiled"] = str(compiled)
    return rep


# ---------------------------------------------------------------------------
# The single operation h

def exact_log(n: int, base: int) -> int | None:
    """k with base**k == n, or None."""
    if n < 1:
        return None
    k = max(0, round(n.bit_length() / math.log2(base)) - 1)
    for cand in (k, k + 1, k + 2, k - 1):
        if cand >= 0 and base ** cand == n:
            return cand
    return None


def _pow_checked(base: int, e: int, lim: EvalLimits) -> int:
    if e * math.log2(base) > lim.max_bits:
        raise LimitExceeded(f"{base}^{e} exceeds the bit cap")
    return base ** e


def _is_exp2_of(y: int, x: int) -> bool:
    """y == 2**x, without building 2**x."""
    return y > 0 and y & (y - 1) == 0 and y.bit_length() - 1 == x


def h_guards(x: int, y: int) -> list[int]:
    """Indices (0-4) of the case guards of h that fire at (x, y)."""
    fired = []
    if x == y:
        fired.append(0)
    if _is_exp2_of(y, x):
        fired.append(1)
    if _is_exp2_of(x, y):
        fired.append(2)
    a, b = exact_log(x, 3), exact_log(y, 5)
    if a and b:
        fired.append(3)
    a, b = exact_log(x, 5), exact_log(y, 3)
    if a and b:
        fired.append(4)
    return fired


def eval_h(x: int, y: int, lim: EvalLimits | None = None) -> int:
    """h(x, y), first matching case:

    ====================  ==============
    x = y                 2^x
    y = 2^x               3^(x+1)
    x = 2^y               5^(y+1)
    (3^(a+1), 5^(b+1))    a + b
    (5^(a+1), 3^(b+1))    a mod b
    otherwise             0
    ====================  ==============
    """
    lim = lim or EvalLimits()
    if x == y:
        v = exp2(x, lim)
        if isinstance(v, Tower):
            raise LimitExceeded(f"2^{x} exceeds the bit cap")
        return v
    if _is_exp2_of(y, x):
        return _pow_checked(3, x + 1, lim)
    if _is_exp2_of(x, y):
        return _pow_checked(5, y + 1, lim)
    a, b = exact_log(x, 3), exact_log(y, 5)
    if a and b:
        return (a - 1) + (b - 1)
    a, b = exact_log(x, 5), exact_log(y, 3)
    if a and b:
        a, b = a - 1, b - 1
        return a % b if b else a
    return 0


H = register_symbol("h", 2, eval_h)


def h(a, b) -> Term:
    return Op(H, (as_term(a), as_term(b)))


def h_exp2(u) -> Term:
    return h(u, u)


def h_add(u, v) -> Term:
    return h(h(u, h(u, u)), h(h(v, v), v))


def h_mod(u, v) -> Term:
    return h(h(h(u, u), u), h(v, h(v, v)))


def constant_as_h(n: int, var: Term = X) -> Term:
    """n as a term over {h} in one variable: 0 = x mod x, 1 = h(0,0), 2 = h(1,1), n+1 = 1 + n."""
    zero = h_mod(var, var)
    if n == 0:
        return zero
    one = h(zero, zero)
    if n == 1:
        return one
    acc = h(one, one)
    for _ in range(2, n):
        acc = h_add(one, acc)
    return acc


def compile_to_h(t: Term, pure: bool = False) -> Term:
    """Rewrite a term over {add, mod, exp2} into one over {h}.

    With ``pure`` the integer literals become h-terms in the first variable.
    """
    if not conforms(t, Signature({ADD, MOD, EXP2})):
        raise ValueError("compile_to_h expects a term over {add, mod, exp2}")

    def leaf(n):
        if pure and isinstance(n, Const):
            return constant_as_h(n.value)
        return None

    def node(op, kids):
        if op.symbol is EXP2:
            return h_exp2(*kids)
        if op.symbol is ADD:
            return h_add(*kids)
        return h_mod(*kids)

    return rebuild(t, leaf=leaf, node=node)


def h_disjointness_audit(bound: int = 2 ** 16) -> VerificationReport:
    """Check that no two guards of h fire together on [0, bound]^2.

    Only points where some guard fires can overlap, so exactly those are visited.
    """
    cands = set()
    for x in range(bound + 1):
        cands.add((x, x))
        if x.bit_length() <= 18 and (1 << x) <= bound:
            cands.add((x, 1 << x))
            cands.add((1 << x, x))
    p3 = [3 ** k for k in range(1, 64) if 3 ** k <= bound]
    p5 = [5 ** k for k in range(1, 64) if 5 ** k <= bound]
    cands.update((a, b) for a in p3 for b in p5)
    cands.update((a, b) for a in p5 for b in p3)
    rep = VerificationReport("h guard disjointness")
    for p in sorted(cands):
        rep.points += 1
        fired = h_guards(*p)
        if len(fired) > 1:
            rep.counterexamples.append({"point": p, "expected": "one guard", "got": fired})
    return rep.finish()


# ---------------------------------------------------------------------------
# The single operation g over a unary basis

def f0_iterate(i: int, x: int) -> int:
    """The i-th iterate of x -> 2(x+1): 2^i x + 2^(i+1) - 2."""
    return (x << i) + (1 << (i + 1)) - 2


@dataclass
class UnaryBasis:
    """Named unary functions f0, ..., f_{k-1}; f0 must be x -> 2(x+1)."""
    functions: list                  # Terms in x, or callables int -> int
    names: list = field(default_factory=list)

    def __post_init__(self):
        if not self.functions:
            raise ValueError("a unary basis needs at least f0")
        if not self.names:
            self.names = [f"f{i}" for i in range(len(self.functions))]
        for i, f in enumerate(self.functions):
            if isinstance(f, Term) and f.free - {0}:
                raise NonUnary(f"{self.names[i]} is not unary")
        for x in range(64):
            if self.call(0, x) != 2 * (x + 1):
                raise ValueError("f0 must be x -> 2(x+1)")

    @property
    def k(self) -> int:
        return len(self.functions)

    def call(self, i: int, x: int, lim: EvalLimits | None = None) -> int:
        f = self.functions[i]
        if isinstance(f, Term):
            return evaluate(f, (x,), lim)
        return f(x)


def g_guards(x: int, y: int, basis: UnaryBasis) -> list:
    fired = [i for i in range(basis.k) if y == f0_iterate(i, x)]
    if x % 2 == 0 and y % 2 == 1:
        fired.append("pair")
    return fired


def eval_g(x: int, y: int, basis: UnaryBasis, lim: EvalLimits | None = None) -> int:
    for i in range(basis.k):
        # y = 2^i x + 2^(i+1) - 2, solved for x
        num = y + 2 - (1 << (i + 1))
        if num >= 0 and num == x << i:
            return basis.call(i, x, lim)
    if x % 2 == 0 and y % 2 == 1:
        return pair(x // 2, (y - 1) // 2)
    return 0


def install_g(basis: UnaryBasis) -> OpSymbol:
    """Register ``g`` and the basis functions ``f0..`` as symbols."""
    for i, name in enumerate(basis.names):
        register_symbol(name, 1, lambda x, lim, i=i: basis.call(i, x, lim), replace=True)
    return register_symbol("g", 2, lambda x, y, lim: eval_g(x, y, basis, lim), replace=True)


def g_disjointness_audit(basis: UnaryBasis, bound: int = 10 ** 4) -> VerificationReport:
    """Only points on some iterate of f0 can have two guards firing; visit those."""
    rep = VerificationReport("g guard disjointness")
    for x in range(bound + 1):
        for i in range(basis.k):
            y = f0_iterate(i, x)
            if y > bound:
                break
            rep.points += 1
            fired = g_guards(x, y, basis)
            if len(fired) > 1:
                rep.counterexamples.append({"point": (x, y), "expected": "one guard", "got": fired})
    return rep.finish()


def default_unary_basis() -> UnaryBasis:
    from .syntax import parse
    return UnaryBasis([parse("2 * (x + 1)"), parse("2^x"), parse("x % 3"),
                       parse("L(x)"), parse("R(x)")])


# ---------------------------------------------------------------------------
# The displayed remainder identity 2^(x mod 2) = 2^x / 2^(x/2 + x/2)

def mod2_identity_sides() -> tuple[Term, Term]:
    from .syntax import parse
    return parse("2^(x % 2)"), parse("2^x / 2^(x / 2 + x / 2)")


def check_mod2_identity(interval=(0, 64), lim: EvalLimits | None = None) -> VerificationReport:
    lhs, rhs = mod2_identity_sides()
    return check_equivalent(lhs, rhs, [interval], lim, name="2^(x mod 2) identity")


__all__ = ["P", "L", "R", "pair", "unpair", "unpair_l", "unpair_r", "lift_unary", "lift_binary",
           "LiftedBasis", "compile_to_unary", "decode", "expand", "check_unary_compilation",
           "D", "U", "V", "NonUnary", "eval_h", "H", "h", "h_exp2", "h_add", "h_mod",
           "constant_as_h", "compile_to_h", "h_guards", "h_disjointness_audit", "exact_log",
           "f0_iterate", "UnaryBasis", "eval_g", "g_guards", "install_g",
           "g_disjointness_audit", "default_unary_basis", "mod2_identity_sides",
           "check_mod2_identity"]
