"""Compile extended arithmetic into {x+y, x mod y, 2^x}.

Each derived symbol has a fixed template over the minimal basis:

* ``x^2   = 2^(x+x) mod (2^x + x)``
* ``x -. y = ((2^(x+y) + x) mod (2^(x+y) + y)) mod (2^(x+y) + x)``
* ``2xy   = (x+y)^2 -. (x^2 + y^2)``                   (squares and monus expanded)
* ``x / y = (2(x+1)(x -. x mod y)) mod (2(x+1)y -. 1)``  (2ab, monus expanded)
* ``x * y = (2xy) / 2``
* ``2x = x + x``, ``x + 1`` for succ
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

from .evaluation import EvalLimits
from .report import VerificationReport, check_equivalent
from .terms import (DIV, DOUBLE, EXP2, MINIMAL, MONUS, MUL,
                    SQUARE, SUCC, Const, Op, OpSymbol, Signature, Term, X, Y,
                    as_term, postorder, replace_at, size, substitute,
                    subterm_at)


class UnsupportedSymbol(ValueError):
    def __init__(self, sym: OpSymbol):
        super().__init__(f"no lowering formula for {sym.name!r}")
        self.symbol = sym


def exp2(u):
    return Op(EXP2, (as_term(u),))


def lower_square(u) -> Term:
    u = as_term(u)
    return (exp2(u + u)) % (exp2(u) + u)


def lower_monus(u, v) -> Term:
    u, v = as_term(u), as_term(v)
    big = exp2(u + v)
    return ((big + u) % (big + v)) % (big + u)


def lower_double_product(u, v) -> Term:
    u, v = as_term(u), as_term(v)
    return lower_monus(lower_square(u + v), lower_square(u) + lower_square(v))


def lower_div(u, v) -> Term:
    u, v = as_term(u), as_term(v)
    u1 = u + 1
    numerator = lower_double_product(u1, lower_monus(u, u % v))
    modulus = lower_monus(lower_double_product(u1, v), Const(1))
    return numerator % modulus


def lower_product(u, v) -> Term:
    return lower_div(lower_double_product(u, v), Const(2))


# Single-rule forms with native derived operations, for checking each
# identity on its own.
def square_identity(u=X) -> Term:
    return lower_square(u)


def monus_identity(u=X, v=Y) -> Term:
    return lower_monus(u, v)


def div_identity(u=X, v=Y) -> Term:
    u, v = as_term(u), as_term(v)
    two_u1 = Const(2) * (u + 1)
    return (two_u1 * Op(MONUS, (u, u % v))) % Op(MONUS, (two_u1 * v, Const(1)))


def double_product_identity(u=X, v=Y) -> Term:
    u, v = as_term(u), as_term(v)
    sq = lambda w: Op(SQUARE, (w,))
    return Op(MONUS, (sq(u + v), sq(u) + sq(v)))


@dataclass(frozen=True)
class RewriteRule:
    name: str
    source: OpSymbol
    template: Term          # placeholders are Var(0) and Var(1)
    citation: str

    def apply(self, children) -> Term:
        return substitute(self.template, dict(enumerate(children)))


def _rule(name, source, builder: Callable, citation):
    args = (X,) if source.arity == 1 else (X, Y)
    return RewriteRule(name, source, builder(*args), citation)


RULES: dict[OpSymbol, RewriteRule] = {r.source: r for r in [
    _rule("double", DOUBLE, lambda u: u + u, "2x = x + x"),
    _rule("succ", SUCC, lambda u: u + 1, "x + 1"),
    _rule("square", SQUARE, lower_square, "2^(x+x) mod (2^x + x) = x^2"),
    _rule("monus", MONUS, lower_monus, "x -. y = ((2^(x+y)+x) mod (2^(x+y)+y)) mod (2^(x+y)+x)"),
    _rule("div", DIV, lower_div, "x / y = (2(x+1)(x -. x mod y)) mod (2(x+1)y -. 1)"),
    _rule("mul", MUL, lower_product, "xy = (2xy) / 2, 2xy = (x+y)^2 -. (x^2+y^2)"),
]}
RULES_BY_NAME = {r.name: r for r in RULES.values()}


@dataclass(frozen=True)
class TraceStep:
    rule: str
    position: tuple
    before: tuple           # (tree, dag) size of the whole term
    after: tuple

    def to_json(self) -> str:
        return json.dumps({"rule": self.rule, "position": list(self.position),
                           "before": list(self.before), "after": list(self.after)})


class LoweringTrace(list):
    def to_jsonl(self) -> str:
        return "".join(step.to_json() + "\n" for step in self)

    def rule_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for step in self:
            counts[step.rule] = counts.get(step.rule, 0) + 1
        return counts


def _rewrite_positions(t: Term, keep: frozenset) -> list[tuple[tuple, OpSymbol]]:
    """Tree positions (post-order, innermost first) of nodes that need a rule."""
    found = []
    stack = [(t, (), False)]
    while stack:
        node, path, expanded = stack.pop()
        if expanded:
            if isinstance(node, Op) and node.symbol not in keep:
                found.append((path, node.symbol))
            continue
        stack.append((node, path, True))
        for i in reversed(range(len(node.children))):
            stack.append((node.children[i], path + (i,), False))
    return found


def lower(t: Term, target: Signature = MINIMAL) -> tuple[Term, LoweringTrace]:
    """Rewrite ``t`` bottom-up until it only uses the target's symbols.

    Returns the lowered term and the trace of rule applications; replaying the
    trace on ``t`` (see :func:`replay`) gives the same term.
    """
    keep = target.symbols
    if not MINIMAL.symbols <= keep:
        raise ValueError(f"target signature must contain {MINIMAL}")
    for n in postorder(t):
        if isinstance(n, Op) and n.symbol not in keep and n.symbol not in RULES:
            raise UnsupportedSymbol(n.symbol)
    trace = LoweringTrace()
    cur = t
    before = size(cur)
    memo: dict[Term, Term] = {}   # keyed by node: ids of dead terms get reused
    for path, sym in _rewrite_positions(t, keep):
        node = subterm_at(cur, path)
        new = memo.get(node)
        if new is None:
            new = memo[node] = RULES[sym].apply(node.children)
        cur = replace_at(cur, path, new)
        after = size(cur)
        trace.append(TraceStep(RULES[sym].name, path, before, after))
        before = after
    return cur, trace


def lower_term(t: Term, target: Signature = MINIMAL) -> Term:
    return lower(t, target)[0]


def replay(t: Term, trace) -> Term:
    for step in trace:
        node = subterm_at(t, step.position)
        t = replace_at(t, tuple(step.position), RULES_BY_NAME[step.rule].apply(node.children))
    return t


def verify_lowering(t: Term, ranges, lim: EvalLimits | None = None,
                    workers: int = 1) -> VerificationReport:
    lowered, trace = lower(t)
    rep = check_equivalent(t, lowered, ranges, lim, name="lowering", workers=workers)
    rep.stats.update(input_size=list(size(t)), output_size=list(size(lowered)),
                     rules=trace.rule_counts())
    return rep


__all__ = ["UnsupportedSymbol", "lower_square", "lower_monus", "lower_double_product",
           "lower_div", "lower_product", "square_identity", "monus_identity", "div_identity",
           "double_product_identity", "RewriteRule", "RULES", "TraceStep", "LoweringTrace",
           "lower", "lower_term", "replay", "verify_lowering"]
