import itertools
import math

import pytest
from hypothesis import given
import hypothesis.strategies as st

from basisforge.bases import (D, U, LiftedBasis, UnaryBasis, check_mod2_identity,
                              check_unary_compilation, compile_to_h, compile_to_unary,
                              constant_as_h, decode, default_unary_basis, eval_g, eval_h,
                              exact_log, expand, f0_iterate, g_disjointness_audit, h,
                              h_disjointness_audit, install_g, lift_binary, lift_unary,
                              mod2_identity_sides)
from basisforge.evaluation import evaluate, pair
from basisforge.lowering import lower_square
from basisforge.syntax import parse, to_text
from basisforge.terms import ADD, EXP2, LEFT, MOD, Op, UnknownSymbol, X, symbols_of

BASIS = [ADD, MOD, EXP2]


_SPECIAL = {}
for _a in range(40):
    for _b in range(30):
        _SPECIAL.setdefault((3 ** (_a + 1), 5 ** (_b + 1)), _a + _b)
        _SPECIAL.setdefault((5 ** (_a + 1), 3 ** (_b + 1)), _a % _b if _b else _a)


def h_oracle(x, y):
    """Case table of h, first match wins; the power cases come from a lookup table."""
    if x == y:
        return 2 ** x
    if y == 2 ** x:
        return 3 ** (x + 1)
    if x == 2 ** y:
        return 5 ** (y + 1)
    return _SPECIAL.get((x, y), 0)


def test_lift_binary_add_text():
    assert to_text(lift_binary(ADD)) == "[L(x) + L(R(x)) | R(R(x))]"


def test_lift_unary_examples():
    z = pair(3, 5)
    assert evaluate(lift_unary(X), (z,)) == z
    assert evaluate(lift_unary(parse("2^x")), (z,)) == pair(8, 5)


def test_lift_arity_checked():
    with pytest.raises(ValueError):
        lift_unary(ADD)
    with pytest.raises(ValueError):
        lift_unary(parse("x + y"))


@pytest.mark.parametrize("src, hi", [
    ("x + x", 100), ("2^x", 60), ("x % 3", 60), ("2^x % x", 60), ("x + x + 1", 60), ("x", 60),
])
def test_unary_compilation(src, hi):
    lifted = LiftedBasis.of(BASIS)
    rep = check_unary_compilation(parse(src), lifted, (0, hi))
    assert rep.status == "PASS", rep.summary()


def test_double_walkthrough():
    lifted = LiftedBasis.of(BASIS)
    compiled = compile_to_unary(parse("x + x"), lifted)
    a = lifted.binary[ADD]
    assert compiled is Op(a, (Op(U, (X,)),))
    assert decode(compiled) is Op(LEFT, (Op(a, (Op(U, (Op(D, (X,)),)),)),))
    # at x = 1: u(d(1)) = [1 | [1 | 1]], a maps it to [2 | 1] = 8
    assert evaluate(Op(U, (Op(D, (X,)),)), (1,)) == pair(1, pair(1, 1))
    assert evaluate(Op(a, (Op(U, (Op(D, (X,)),)),)), (1,)) == pair(2, 1) == 8
    assert all(evaluate(decode(compiled), (x,)) == 2 * x for x in range(101))


def test_identity_compiles_to_identity():
    assert compile_to_unary(X, LiftedBasis.of(BASIS)) is X


def test_expanded_term_only_uses_pairing():
    lifted = LiftedBasis.of(BASIS)
    F = parse("2^x % x")
    full = expand(decode(compile_to_unary(F, lifted)), lifted)
    assert {s.name for s in symbols_of(full)} <= {"pair", "L", "R", "add", "mod", "exp2"}
    assert all(evaluate(full, (x,)) == evaluate(F, (x,)) for x in range(31))


def test_compile_rejects_binary_and_unknown():
    lifted = LiftedBasis.of(BASIS)
    with pytest.raises(ValueError):
        compile_to_unary(parse("x + y"), lifted)
    with pytest.raises(UnknownSymbol):
        compile_to_unary(parse("x -. 1"), lifted)


@pytest.mark.parametrize("xy, expected", [((2, 2), 4), ((27, 625), 5), ((390625, 81), 1), ((5, 7), 0)])
def test_h_examples(xy, expected):
    assert eval_h(*xy) == expected == h_oracle(*xy)


def test_h_matches_oracle_on_small_grid():
    for x, y in itertools.product(range(700), repeat=2):
        assert eval_h(x, y) == h_oracle(x, y), (x, y)


@given(st.integers(0, 10 ** 30), st.integers(2, 7))
def test_exact_log(n, base):
    k = exact_log(n, base)
    if k is None:
        assert n == 0 or base ** round(math.log(n, base)) != n
    else:
        assert base ** k == n


def test_h_templates():
    assert all(evaluate(h(X, X), (x,)) == 2 ** x for x in range(13))
    add_t = compile_to_h(parse("x + y"))
    mod_t = compile_to_h(parse("x % y"))
    assert to_text(add_t) == "h(h(x, h(x, x)), h(h(y, y), y))"
    assert to_text(mod_t) == "h(h(h(x, x), x), h(y, h(y, y)))"
    for x, y in itertools.product(range(9), repeat=2):
        assert evaluate(add_t, (x, y)) == x + y
    for x, y in itertools.product(range(7), repeat=2):
        assert evaluate(mod_t, (x, y)) == (x % y if y else x)


def test_h_constants():
    for n in range(4):
        t = constant_as_h(n)
        assert {s.name for s in symbols_of(t)} == {"h"}
        assert all(evaluate(t, (x,)) == n for x in range(21))


def test_square_through_h():
    t = compile_to_h(lower_square(X), pure=True)
    assert {s.name for s in symbols_of(t)} == {"h"}
    assert [evaluate(t, (x,)) for x in range(6)] == [x * x for x in range(6)]


def test_h_audit():
    rep = h_disjointness_audit()
    assert rep.status == "PASS" and rep.points > 2 ** 16


def test_g_examples():
    one = UnaryBasis([parse("2 * (x + 1)")])
    assert eval_g(3, 3, one) == 8
    assert eval_g(4, 3, one) == pair(2, 1) == 8
    assert eval_g(3, 4, one) == 0


def test_g_iterates():
    basis = default_unary_basis()
    install_g(basis)
    for x in range(201):
        assert evaluate(parse("g(x, x)"), (x,)) == 2 * (x + 1)
        y = x
        for i in range(basis.k):
            assert y == f0_iterate(i, x)
            assert eval_g(x, y, basis) == basis.call(i, x)
            y = 2 * (y + 1)


def test_g_audit():
    assert g_disjointness_audit(default_unary_basis()).status == "PASS"


def test_unary_basis_checks_f0():
    with pytest.raises(ValueError):
        UnaryBasis([parse("x + 1")])


def test_mod2_identity():
    lhs, rhs = mod2_identity_sides()
    assert evaluate(lhs, (5,)) == evaluate(rhs, (5,)) == 2
    assert evaluate(lhs, (0,)) == evaluate(rhs, (0,)) == 1
    assert check_mod2_identity((0, 64)).status == "PASS"
