import itertools

import pytest
from hypothesis import given
import hypothesis.strategies as st

from basisforge.evaluation import (EvalLimits, LimitExceeded, Tower, UnboundVariable,
                                   default_probes, eval_columns, eval_grid, evaluate,
                                   fingerprint, pair, unpair)
from basisforge.syntax import parse

from conftest import terms


def native(src, x=0, y=0):
    """Plain-Python reference for the conventions x mod 0 = x, x/0 = 0, 0^0 = 1."""
    table = {
        "x % y": x % y if y else x,
        "x / y": x // y if y else 0,
        "x ^ y": x ** y,
        "x -. y": max(x - y, 0),
        "x + y": x + y,
        "x * y": x * y,
    }
    return table[src]


@pytest.mark.parametrize("src, env, expected", [
    ("x % 0", {0: 7}, 7),
    ("0^0", {}, 1),
    ("2^(x+x) % (2^x + x)", {0: 3}, 9),
    ("5 / 0", {}, 0),
    ("x % 1", {0: 12}, 0),
    ("pair(1, 2)", {}, 7),
])
def test_eval_examples(src, env, expected):
    assert evaluate(parse(src), env) == expected


@pytest.mark.parametrize("src", ["x % y", "x / y", "x ^ y", "x -. y", "x + y", "x * y"])
def test_conventions_on_grid(src):
    t = parse(src)
    hi = 20 if src == "x ^ y" else 100
    for (x, y), v in eval_grid(t, [(0, hi), (0, hi)]):
        assert v == native(src, x, y), (x, y)


def test_div_mod_coherence():
    for x, y in itertools.product(range(60), range(1, 60)):
        q = evaluate(parse("x / y"), (x, y))
        r = evaluate(parse("x % y"), (x, y))
        assert q * y + r == x and r < y


def test_grid_order_and_tags():
    got = eval_grid(parse("x + y"), [(0, 1), (0, 1)])
    assert got == [((0, 0), 0), ((0, 1), 1), ((1, 0), 1), ((1, 1), 2)]
    got = eval_grid(parse("x % y"), [(0, 2), (0, 1)])
    assert [v for _, v in got] == [0, 0, 1, 0, 2, 0]


def test_grid_workers_match_serial():
    t = parse("(x * y) % (x + 3)")
    assert eval_grid(t, [(0, 30), (0, 30)], workers=2) == eval_grid(t, [(0, 30), (0, 30)])


def test_unbound_variable():
    with pytest.raises(UnboundVariable):
        evaluate(parse("x + y"), {0: 1})


def test_limit_exceeded_is_deterministic():
    lim = EvalLimits(max_bits=64)
    t = parse("2^(2^x)")
    for _ in range(3):
        with pytest.raises(LimitExceeded):
            evaluate(t, (7,), lim)
    assert evaluate(t, (5,), lim) == 2 ** 32


def test_tower_only_at_root():
    lim = EvalLimits(max_bits=64)
    v = evaluate(parse("2^x"), (100,), lim, allow_tower=True)
    assert isinstance(v, Tower) and v.exponent == 100
    # a reduction modulo a small number still goes through
    assert evaluate(parse("2^x % 7"), (100,), lim) == pow(2, 100, 7)
    with pytest.raises(LimitExceeded):
        evaluate(parse("2^x + 1"), (100,), lim)


def test_columns_mark_failures_per_point():
    lim = EvalLimits(max_bits=64)
    vals = eval_columns(parse("2^(2^x) + 1"), [(3,), (9,)], lim)
    assert vals[0] == 2 ** 8 + 1
    assert type(vals[1]).__name__ == "Failure"


def diagonal_pairs(limit):
    """Enumerate (x, y) along anti-diagonals; the n-th pair has code n."""
    out = []
    s = 0
    while len(out) < limit:
        for x in range(s + 1):
            out.append((x, s - x))
        s += 1
    return out[:limit]


def test_pairing_against_diagonal_walk():
    for code, (x, y) in enumerate(diagonal_pairs(5000)):
        assert pair(x, y) == code
        assert unpair(code) == (x, y)


@given(st.integers(0, 10 ** 40))
def test_unpair_round_trip_large(z):
    assert pair(*unpair(z)) == z


def test_pair_examples():
    assert pair(1, 2) == 7 and pair(0, 0) == 0 and pair(2, 1) == 8
    assert unpair(7) == (1, 2)


def test_fingerprint_separates_and_merges():
    probes = default_probes(2)
    assert fingerprint(parse("x + y"), probes) == fingerprint(parse("y + x"), probes)
    assert fingerprint(parse("x + y"), probes) != fingerprint(parse("x * y"), probes)
    assert len(default_probes(1)) == 16 and len(probes) == 64


@given(terms(), st.integers(0, 6), st.integers(0, 6))
def test_columns_agree_with_pointwise(t, x, y):
    lim = EvalLimits(max_bits=2048)
    try:
        single = evaluate(t, (x, y), lim, allow_tower=True)
    except LimitExceeded:
        single = None
    col = eval_columns(t, [(x, y)], lim)[0]
    if single is None:
        assert type(col).__name__ == "Failure"
    else:
        assert col == single
