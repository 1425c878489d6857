"""Inductive growth bounds for terms over weak sub-bases.

Each certifier walks a unary term bottom-up and produces the constants that
make a shape predicate hold at every input:

=================  ===========================  =============================================
sub-basis          certificate                  predicate on t(a)
=================  ===========================  =============================================
{mod, exp2}        ``ModExp(B)``                power of two, or ``<= max(B, a)``
{add, exp2}        ``AddExp(tag)``              constant, or strictly increasing in ``a``
{add, mod}         ``AddMod(A, B)``             ``< A*a + B``
{double, mod,      ``DoubleModExp(A, B)``       power of two, or ``<= A*max(B, a)``
exp2}
=================  ===========================  =============================================
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .evaluation import (EvalLimits, LimitExceeded, Tower, compare,
                         is_power_of_two, evaluate)
from .report import VerificationReport
from .terms import (ADD, DOUBLE, EXP2, MOD, Const, Op, Signature, Term, Var,
                    postorder, violations)

MOD_EXP = Signature({MOD, EXP2}, variables=1)
ADD_EXP = Signature({ADD, EXP2}, variables=1)
ADD_MOD = Signature({ADD, MOD}, variables=1)
DOUBLE_MOD_EXP = Signature({DOUBLE, MOD, EXP2}, variables=1)


class SignatureViolation(ValueError):
    pass


@dataclass(frozen=True)
class ModExp:
    B: int

    def holds(self, a, v) -> bool:
        return is_power_of_two(v) or compare(v, max(self.B, a)) <= 0

    def __str__(self):
        return f"B={self.B}"


@dataclass(frozen=True)
class AddExp:
    tag: str            # "Constant" or "StrictlyIncreasing"

    def __str__(self):
        return self.tag


@dataclass(frozen=True)
class AddMod:
    A: int
    B: int

    def holds(self, a, v) -> bool:
        return compare(v, self.A * a + self.B) < 0

    def __str__(self):
        return f"A={self.A} B={self.B}"


@dataclass(frozen=True)
class DoubleModExp:
    A: int
    B: int

    def holds(self, a, v) -> bool:
        return is_power_of_two(v) or compare(v, self.A * max(self.B, a)) <= 0

    def __str__(self):
        return f"A={self.A} B={self.B}"


GrowthCertificate = ModExp | AddExp | AddMod | DoubleModExp


def _require(t: Term, sig: Signature):
    bad = violations(t, sig)
    if bad:
        raise SignatureViolation(f"term uses {bad[0]!r} outside {sig} (unary)")


def certify_mod_exp(t: Term) -> ModExp:
    _require(t, MOD_EXP)
    b: dict[int, int] = {}
    for n in postorder(t):
        match n:
            case Const(c):
                b[id(n)] = c
            case Var():
                b[id(n)] = 0
            case Op(sym, (_,)) if sym is EXP2:
                b[id(n)] = 0
            case Op(_, (t1, t2)):
                b[id(n)] = max(b[id(t1)], b[id(t2)])
    return ModExp(b[id(t)])


def certify_add_exp(t: Term) -> AddExp:
    # Structural on purpose: a variable occurrence forces strict increase.
    _require(t, ADD_EXP)
    return AddExp("StrictlyIncreasing" if t.free else "Constant")


def certify_add_mod(t: Term) -> AddMod:
    _require(t, ADD_MOD)
    ab: dict[int, tuple[int, int]] = {}
    for n in postorder(t):
        match n:
            case Const(c):
                ab[id(n)] = (0, c + 1)
            case Var():
                ab[id(n)] = (1, 1)
            case Op(sym, (t1, t2)) if sym is ADD:
                (a1, b1), (a2, b2) = ab[id(t1)], ab[id(t2)]
                ab[id(n)] = (a1 + a2, b1 + b2)
            case Op(_, (t1, _)):
                ab[id(n)] = ab[id(t1)]
    return AddMod(*ab[id(t)])


def certify_double_mod_exp(t: Term) -> DoubleModExp:
    _require(t, DOUBLE_MOD_EXP)
    ab: dict[int, tuple[int, int]] = {}
    for n in postorder(t):
        match n:
            case Const(c):
                ab[id(n)] = (1, c)
            case Var():
                ab[id(n)] = (1, 0)
            case Op(sym, (t1,)) if sym is DOUBLE:
                a1, b1 = ab[id(t1)]
                ab[id(n)] = (2 * a1, b1)
            case Op(sym, (_,)) if sym is EXP2:
                ab[id(n)] = (1, 0)
            case Op(_, (t1, t2)):
                (a1, b1), (a2, b2) = ab[id(t1)], ab[id(t2)]
                ab[id(n)] = (max(a1, a2), max(b1, b2))
    return DoubleModExp(*ab[id(t)])


CERTIFIERS = {
    "mod-exp": (certify_mod_exp, MOD_EXP),
    "add-exp": (certify_add_exp, ADD_EXP),
    "add-mod": (certify_add_mod, ADD_MOD),
    "double-mod-exp": (certify_double_mod_exp, DOUBLE_MOD_EXP),
}


def certify(t: Term, lemma: str) -> GrowthCertificate:
    try:
        fn, _ = CERTIFIERS[lemma]
    except KeyError:
        raise ValueError(f"unknown certificate kind {lemma!r}; choose from {sorted(CERTIFIERS)}") from None
    return fn(t)


def _value(t, a, lim):
    try:
        return evaluate(t, (a,), lim, allow_tower=True)
    except LimitExceeded:
        return None


def check_certificate(t: Term, cert: GrowthCertificate, interval: tuple[int, int],
                      lim: EvalLimits | None = None) -> VerificationReport:
    """Evaluate the certificate's predicate at every point of ``interval``.

    Points whose value cannot be decided within the limits are reported as
    inconclusive.
    """
    if len(t.free - {0}) > 0:
        raise SignatureViolation("certificates are checked on unary terms in x")
    lim = lim or EvalLimits()
    lo, hi = interval
    rep = VerificationReport(f"certificate {cert}")
    if isinstance(cert, AddExp):
        first = _value(t, lo, lim)
        prev = first
        rep.points = 1
        for a in range(lo + 1, hi + 1):
            rep.points += 1
            v = _value(t, a, lim)
            if v is None or prev is None:
                rep.inconclusive.append((a,))
            elif cert.tag == "Constant":
                if compare(v, first) != 0:
                    rep.counterexamples.append({"point": (a,), "expected": first, "got": v})
            elif compare(prev, v) >= 0:
                rep.counterexamples.append({"point": (a,), "expected": f"> {prev!r}", "got": v})
            prev = v
        return rep.finish()
    for a in range(lo, hi + 1):
        rep.points += 1
        v = _value(t, a, lim)
        if v is None:
            rep.inconclusive.append((a,))
        elif not cert.holds(a, v):
            rep.counterexamples.append({"point": (a,), "expected": str(cert), "got": v})
    return rep.finish()


def random_term(sig: Signature, max_size: int, max_const: int, rng: random.Random,
                n_vars: int = 1) -> Term:
    """A random term over ``sig`` with tree size at most ``max_size``."""
    syms = sorted(sig.symbols, key=lambda s: s.name)
    unary = [s for s in syms if s.arity == 1]
    binary = [s for s in syms if s.arity == 2]

    def gen(budget):
        choices = ["leaf"]
        if unary and budget >= 2:
            choices.append("unary")
        if binary and budget >= 3:
            choices.append("binary")
        kind = rng.choice(choices) if len(choices) == 1 or rng.random() < 0.75 else "leaf"
        if kind == "leaf":
            if rng.random() < 0.6:
                return Var(rng.randrange(n_vars))
            return Const(rng.randint(0, max_const))
        if kind == "unary":
            return Op(rng.choice(unary), (gen(budget - 1),))
        left_budget = rng.randint(1, budget - 2)
        a = gen(left_budget)
        b = gen(budget - 1 - a.tree_size)
        return Op(rng.choice(binary), (a, b))

    return gen(rng.randint(1, max_size))


__all__ = ["MOD_EXP", "ADD_EXP", "ADD_MOD", "DOUBLE_MOD_EXP", "SignatureViolation",
           "ModExp", "AddExp", "AddMod", "DoubleModExp", "GrowthCertificate",
           "certify_mod_exp", "certify_add_exp", "certify_add_mod", "certify_double_mod_exp",
           "certify", "CERTIFIERS", "check_certificate", "random_term", "Tower"]
