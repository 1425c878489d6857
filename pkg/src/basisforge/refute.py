"""Bounded search for a term over a signature that matches a target function.

Terms are enumerated bottom-up by tree size. Two terms with the same value
vector on the probe grid are one semantic class; only the first (smallest,
then lexicographically first by symbol) representative is kept. Finding
nothing proves nothing beyond the stated bounds.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from .evaluation import (EvalLimits, Failure, LimitExceeded, apply_op,
                         default_probes, digest_vector, eval_columns,
                         grid_points)
from .terms import Const, Op, Signature, Term, Var, arity, postorder

REFUTE_MAX_BITS = 4096
FOUND, NOT_FOUND = "Found", "NotFoundUpToBound"


@dataclass
class RefutationEvidence:
    target: str
    signature: str
    max_size: int
    max_const: int
    probes: int
    classes_enumerated: int = 0
    terms_considered: int = 0
    outcome: str = NOT_FOUND
    witness: str | None = None
    witness_size: int | None = None
    truncated: bool = False
    rejected_on_extended_grid: int = 0
    per_size: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def found(self) -> bool:
        return self.outcome == FOUND

    def to_dict(self) -> dict:
        d = {"target": self.target, "signature": self.signature,
             "bounds": {"max_size": self.max_size, "max_const": self.max_const,
                        "probes": self.probes},
             "classes_enumerated": self.classes_enumerated,
             "terms_considered": self.terms_considered,
             "outcome": self.outcome, "truncated": self.truncated,
             "rejected_on_extended_grid": self.rejected_on_extended_grid,
             "per_size": self.per_size}
        if self.witness is not None:
            d["witness"] = self.witness
            d["witness_size"] = self.witness_size
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _apply_vec(sym, vecs, lim):
    out = []
    for args in zip(*vecs):
        if any(a.__class__ is Failure for a in args):
            out.append(_FAIL)
            continue
        try:
            out.append(apply_op(sym, args, lim))
        except LimitExceeded:
            out.append(_FAIL)
    return tuple(out)


_FAIL = Failure("limit")
_COMMUTATIVE = {"add", "mul"}


def refute_membership(target: Term, sig: Signature, max_size: int, max_const: int = 3,
                      probes=None, extended=None, lim: EvalLimits | None = None,
                      max_classes: int = 2_000_000, plant=()) -> RefutationEvidence:
    """Search every term over ``sig`` up to ``max_size`` nodes for one equal to ``target``.

    ``plant`` lists known witnesses; their subterms join the pool at their own
    sizes even after ``max_classes`` truncates the enumeration, which checks
    that the matching pipeline recognizes them.
    """
    from .syntax import to_text

    t0 = time.perf_counter()
    lim = lim or EvalLimits(max_bits=REFUTE_MAX_BITS)
    n_vars = max(arity(target), 1)
    probes = [tuple(p) for p in (probes or default_probes(n_vars))]
    if extended is None:
        extended = grid_points([(0, 12)] * n_vars) if n_vars > 1 else [(a,) for a in range(64)]
    goal = tuple(eval_columns(target, probes, lim))
    if any(isinstance(v, Failure) for v in goal):
        raise LimitExceeded("target cannot be evaluated on the probe grid")
    goal_ext = tuple(eval_columns(target, extended, lim))

    ev = RefutationEvidence(to_text(target), str(sig), max_size, max_const, len(probes))
    syms = sorted(sig.symbols, key=lambda s: s.name)
    unary = [s for s in syms if s.arity == 1]
    binary = [s for s in syms if s.arity == 2]

    digests: dict[str, list[tuple]] = {}
    counter = [0]
    levels: list[list[tuple[tuple, Term]]] = [[] for _ in range(max_size + 1)]
    planted: dict[int, list[Term]] = {}
    for w in plant:
        for n in postorder(w):
            if n.tree_size <= max_size:
                planted.setdefault(n.tree_size, []).append(n)

    def admit(vec, term, level, forced=False):
        """Register a new class; returns True when it matches the target."""
        ev.terms_considered += 1
        d = digest_vector(vec)
        bucket = digests.setdefault(d, [])
        # Equal digests must also agree on the full vector before merging.
        if any(other == vec for other in bucket):
            return False
        if not forced and counter[0] >= max_classes:
            ev.truncated = True
            return False
        bucket.append(vec)
        counter[0] += 1
        levels[level].append((vec, term))
        if vec == goal:
            if tuple(eval_columns(term, extended, lim)) == goal_ext:
                ev.outcome, ev.witness, ev.witness_size = FOUND, to_text(term), term.tree_size
                return True
            ev.rejected_on_extended_grid += 1
        return False

    def finish():
        ev.classes_enumerated = counter[0]
        ev.seconds = time.perf_counter() - t0
        return ev

    leaves = [Var(i) for i in range(n_vars)] + [Const(c) for c in range(max_const + 1)]
    for size_ in range(1, max_size + 1):
        before = counter[0]
        if ev.truncated:
            pass
        elif size_ == 1:
            for leaf in leaves:
                if admit(tuple(eval_columns(leaf, probes, lim)), leaf, 1):
                    return finish()
        else:
            for sym in unary:
                for vec, term in list(levels[size_ - 1]):
                    if ev.truncated:
                        break
                    if admit(_apply_vec(sym, (vec,), lim), Op(sym, (term,)), size_):
                        return finish()
            for sym in binary:
                comm = sym.name in _COMMUTATIVE
                for i in range(1, size_ - 1):
                    j = size_ - 1 - i
                    if comm and i > j:
                        continue
                    left, right = list(levels[i]), list(levels[j])
                    for li, (va, ta) in enumerate(left):
                        start = li if comm and i == j else 0
                        if ev.truncated:
                            break
                        for vb, tb in right[start:]:
                            if admit(_apply_vec(sym, (va, vb), lim), Op(sym, (ta, tb)), size_):
                                return finish()
        for w in planted.get(size_, ()):
            if admit(tuple(eval_columns(w, probes, lim)), w, size_, forced=True):
                return finish()
        ev.per_size.append({"size": size_, "new_classes": counter[0] - before})
    return finish()


# Searches mirroring the non-membership results, plus the open question
# whether {add, div, exp2} reaches the remainder.
PRESETS = {
    "add-not-in-mod-exp": ("x + y", "mod,exp2"),
    "mod-not-in-add-exp": ("x % 2", "add,exp2"),
    "exp2-not-in-add-mod": ("2^x", "add,mod"),
    "square-not-in-double-mod-exp": ("sq(x)", "double,mod,exp2"),
    "add-not-in-succ-mod-exp": ("x + y", "succ,mod,exp2"),
    "add-not-in-monus-mod-exp": ("x + y", "monus,mod,exp2"),
    "mod-from-add-div-exp2": ("x % y", "add,div,exp2"),
}


__all__ = ["RefutationEvidence", "refute_membership", "PRESETS", "FOUND", "NOT_FOUND",
           "REFUTE_MAX_BITS"]
