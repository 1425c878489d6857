"""Exact evaluation of terms on the naturals.

Conventions: 0^0 = 1, x div 0 = 0, x mod 0 = x (so x mod 1 = 0), and monus
is truncated subtraction.

Powers of two whose exponent reaches the bit cap are never materialized.
They are carried as :class:`Tower` values, which the remainder operation can
still consume exactly (``2^e mod m`` via modular exponentiation); any other
operation on a tower raises :class:`LimitExceeded`.
"""

from __future__ import annotations

import hashlib
import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .terms import (ADD, DIV, DOUBLE, EXP2, LEFT, MOD, MONUS, MUL, PAIR, POW,
                    RIGHT, SQUARE, SUCC, Const, Term, Var, postorder,
                    symbol_impl)

DEFAULT_MAX_BITS = 2 ** 26
DEFAULT_MAX_STEPS = 10 ** 7


class LimitExceeded(ArithmeticError):
    """Resource exhaustion during evaluation (never a mathematical failure)."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point

    def __str__(self):
        msg = super().__str__()
        return msg if self.point is None else f"{msg} at point {self.point}"


class UnboundVariable(KeyError):
    pass


def default_max_bits() -> int:
    env = os.environ.get("BASISFORGE_MAX_BITS")
    return int(env) if env else DEFAULT_MAX_BITS


@dataclass(frozen=True)
class EvalLimits:
    max_bits: int = field(default_factory=default_max_bits)
    max_steps: int = DEFAULT_MAX_STEPS

    def __post_init__(self):
        if self.max_bits <= 0 or self.max_steps <= 0:
            raise ValueError("limits must be positive")


@dataclass(frozen=True)
class Tower:
    """The number 2**exponent, kept symbolic because it is over the bit cap."""
    exponent: "int | Tower"

    def __repr__(self):
        e = self.exponent
        if isinstance(e, int) and e.bit_length() > 64:
            return f"2^<{e.bit_length()}-bit exponent>"
        return f"2^{e!r}"


Value = "int | Tower"


def compare(a, b) -> int:
    """Three-way comparison of canonical values (every int is below every tower)."""
    a_t, b_t = isinstance(a, Tower), isinstance(b, Tower)
    if not a_t and not b_t:
        return (a > b) - (a < b)
    if a_t and b_t:
        return compare(a.exponent, b.exponent)
    return 1 if a_t else -1


def is_power_of_two(v) -> bool:
    if isinstance(v, Tower):
        return True
    return v > 0 and v & (v - 1) == 0


def _check(n: int, lim: EvalLimits):
    bits = n.bit_length()
    if bits > lim.max_bits:
        if n & (n - 1) == 0:
            return Tower(bits - 1)
        raise LimitExceeded(f"intermediate value has {bits} bits (cap {lim.max_bits})")
    return n


def _need_int(*args):
    for a in args:
        if isinstance(a, Tower):
            raise LimitExceeded(f"value {a!r} exceeds the bit cap")


def exp2(e, lim: EvalLimits):
    if isinstance(e, Tower) or e >= lim.max_bits:
        return Tower(e)
    return 1 << e


def mod(a, b, lim: EvalLimits):
    if isinstance(b, Tower):
        if not isinstance(a, Tower):
            return a
        return a if compare(a.exponent, b.exponent) < 0 else 0
    if b == 0:
        return a
    if isinstance(a, Tower):
        if isinstance(a.exponent, Tower):
            raise LimitExceeded(f"cannot reduce {a!r} modulo {b}")
        return pow(2, a.exponent, b)
    return a % b


def monus(a, b, lim: EvalLimits):
    if isinstance(b, Tower) and not isinstance(a, Tower):
        return 0
    _need_int(a, b)
    return a - b if a > b else 0


def div(a, b, lim: EvalLimits):
    if isinstance(b, Tower) and not isinstance(a, Tower):
        return 0
    if b == 0:
        return 0
    _need_int(a, b)
    return a // b


def add(a, b, lim: EvalLimits):
    _need_int(a, b)
    return _check(a + b, lim)


def mul(a, b, lim: EvalLimits):
    _need_int(a, b)
    if a and b and a.bit_length() + b.bit_length() > 2 * lim.max_bits:
        raise LimitExceeded("product exceeds the bit cap")
    return _check(a * b, lim)


def power(a, b, lim: EvalLimits):
    _need_int(a, b)
    if b == 0:
        return 1
    if a <= 1:
        return a
    if a & (a - 1) == 0:
        return exp2((a.bit_length() - 1) * b, lim)
    if b > 2 * lim.max_bits or (a.bit_length() - 1) * b > lim.max_bits:
        raise LimitExceeded(f"{a}^{b} exceeds the bit cap")
    return _check(a ** b, lim)


def double(a, lim: EvalLimits):
    if isinstance(a, Tower):
        if isinstance(a.exponent, Tower):
            raise LimitExceeded("cannot double a nested tower")
        return Tower(a.exponent + 1)
    return _check(a << 1, lim)


def pair(x: int, y: int) -> int:
    """Cantor pairing: (x+y)(x+y+1)/2 + x."""
    s = x + y
    return s * (s + 1) // 2 + x


def unpair(z: int) -> tuple[int, int]:
    """Inverse of :func:`pair`."""
    w = (math.isqrt(8 * z + 1) - 1) // 2
    t = w * (w + 1) // 2
    if not (t <= z < t + w + 1):
        raise AssertionError(f"integer square root post-check failed for {z}")
    x = z - t
    return x, w - x


def _pair(a, b, lim):
    _need_int(a, b)
    if max(a.bit_length(), b.bit_length()) + 1 > lim.max_bits // 2 + 1:
        raise LimitExceeded("pairing exceeds the bit cap")
    return _check(pair(a, b), lim)


def _left(z, lim):
    _need_int(z)
    return unpair(z)[0]


def _right(z, lim):
    _need_int(z)
    return unpair(z)[1]


_BUILTIN_IMPLS = {
    ADD: add,
    MOD: mod,
    MONUS: monus,
    MUL: mul,
    DIV: div,
    POW: power,
    EXP2: exp2,
    SQUARE: lambda a, lim: mul(a, a, lim),
    DOUBLE: double,
    SUCC: lambda a, lim: add(a, 1, lim),
    PAIR: _pair,
    LEFT: _left,
    RIGHT: _right,
}


def apply_op(sym, args, lim: EvalLimits):
    """Apply one operation symbol to already-evaluated arguments."""
    fn = _BUILTIN_IMPLS.get(sym)
    if fn is not None:
        return fn(*args, lim)
    fn = symbol_impl(sym)
    if fn is None:
        raise KeyError(f"symbol {sym.name!r} has no registered definition")
    _need_int(*args)
    return _check(fn(*args, lim), lim)


def _binding(env, i):
    try:
        v = env[i]
    except (KeyError, IndexError):
        raise UnboundVariable(f"variable {i} is not bound") from None
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise ValueError(f"variable {i} must be bound to a natural, got {v!r}")
    return v


def evaluate(t: Term, env: Mapping[int, int] | Sequence[int] = (),
             lim: EvalLimits | None = None, allow_tower: bool = False):
    """Exact value of ``t`` under ``env``.

    Shared subterms are evaluated once. With ``allow_tower`` the result may be a
    :class:`Tower`; otherwise an over-cap result raises :class:`LimitExceeded`.
    """
    lim = lim or EvalLimits()
    vals: dict[int, object] = {}
    steps = 0
    for n in postorder(t):
        steps += 1
        if steps > lim.max_steps:
            raise LimitExceeded(f"step budget {lim.max_steps} exhausted")
        if isinstance(n, Const):
            v = n.value
        elif isinstance(n, Var):
            v = _binding(env, n.index)
        else:
            v = apply_op(n.symbol, [vals[id(c)] for c in n.args], lim)
        vals[id(n)] = v
    result = vals[id(t)]
    if isinstance(result, Tower) and not allow_tower:
        raise LimitExceeded(f"result {result!r} exceeds the bit cap")
    return result


# Public short name; ``eval`` itself is a builtin.
eval_term = evaluate


class Failure:
    """Marker for a grid point whose evaluation hit a resource limit."""
    __slots__ = ("reason",)

    def __init__(self, reason: str):
        self.reason = reason

    def __repr__(self):
        return "<fail>"

    def __eq__(self, other):
        return isinstance(other, Failure)

    def __hash__(self):
        return hash(Failure)


def eval_columns(t: Term, points: Sequence[Sequence[int]], lim: EvalLimits | None = None):
    """Evaluate ``t`` at many points at once, one DAG node at a time.

    Returns a list aligned with ``points``; entries are ints, towers, or
    :class:`Failure` markers.
    """
    lim = lim or EvalLimits()
    nodes = list(postorder(t))
    if len(nodes) > lim.max_steps:
        raise LimitExceeded(f"term has {len(nodes)} nodes, step budget {lim.max_steps}")
    cols: dict[int, list] = {}
    n_pts = len(points)
    for n in nodes:
        if isinstance(n, Const):
            col = [n.value] * n_pts
        elif isinstance(n, Var):
            col = [_binding(p, n.index) for p in points]
        else:
            sym = n.symbol
            arg_cols = [cols[id(c)] for c in n.args]
            col = []
            for args in zip(*arg_cols):
                if any(a.__class__ is Failure for a in args):
                    col.append(args[0] if args[0].__class__ is Failure else args[1])
                    continue
                try:
                    col.append(apply_op(sym, args, lim))
                except LimitExceeded as e:
                    col.append(Failure(str(e)))
        cols[id(n)] = col
    return cols[id(t)]


def grid_points(ranges) -> list[tuple[int, ...]]:
    """Lexicographic points of a box given as inclusive (lo, hi) per variable."""
    return list(itertools.product(*(range(lo, hi + 1) for lo, hi in ranges)))


def _normalize_ranges(t: Term, ranges):
    if isinstance(ranges, Mapping):
        n = max(list(ranges) + [max(t.free, default=-1)]) + 1
        ranges = [ranges.get(i, (0, 0)) for i in range(n)]
    ranges = [tuple(r) for r in ranges]
    missing = [i for i in t.free if i >= len(ranges)]
    if missing:
        raise UnboundVariable(f"no range for variable(s) {missing}")
    return ranges


def _chunk_eval(args):
    t, pts, lim = args
    return eval_columns(t, pts, lim)


def eval_grid(t: Term, ranges, lim: EvalLimits | None = None, workers: int = 1,
              allow_failures: bool = False):
    """Table of ``(point, value)`` rows over an inclusive box, in lexicographic order.

    A failing point raises :class:`LimitExceeded` tagged with that point unless
    ``allow_failures`` is set, in which case the row holds a :class:`Failure`.
    """
    lim = lim or EvalLimits()
    ranges = _normalize_ranges(t, ranges)
    pts = grid_points(ranges)
    if workers > 1 and len(pts) > 1:
        step = -(-len(pts) // workers)
        chunks = [pts[i:i + step] for i in range(0, len(pts), step)]
        with ProcessPoolExecutor(workers) as ex:
            values = [v for part in ex.map(_chunk_eval, [(t, c, lim) for c in chunks]) for v in part]
    else:
        values = eval_columns(t, pts, lim)
    rows = []
    for p, v in zip(pts, values):
        if isinstance(v, Failure) and not allow_failures:
            raise LimitExceeded(v.reason, point=p)
        if isinstance(v, Tower) and not allow_failures:
            raise LimitExceeded(f"result {v!r} exceeds the bit cap", point=p)
        rows.append((p, v))
    return rows


def value_vector(t: Term, probes: Sequence[Sequence[int]], lim: EvalLimits | None = None):
    return tuple(eval_columns(t, probes, lim))


def digest_vector(values) -> str:
    h = hashlib.blake2b(digest_size=16)
    for v in values:
        if isinstance(v, Failure):
            h.update(b"!;")
        elif isinstance(v, Tower):
            h.update(f"T{v.exponent!r};".encode())
        else:
            h.update(f"{v:x};".encode())
    return h.hexdigest()


def fingerprint(t: Term, probes: Sequence[Sequence[int]], lim: EvalLimits | None = None) -> str:
    """Digest of the value vector over ``probes``; failures hash to a fixed marker."""
    return digest_vector(value_vector(t, probes, lim))


def default_probes(n_vars: int) -> list[tuple[int, ...]]:
    if n_vars <= 1:
        return [(a,) for a in range(16)]
    return grid_points([(0, 7)] * n_vars)
