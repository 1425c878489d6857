import hypothesis.strategies as st
import pytest
from hypothesis import settings

from basisforge.terms import (ADD, DIV, DOUBLE, EXP2, MOD, MONUS, MUL, PAIR,
                              SQUARE, SUCC, Const, Op, Var)

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")

SMALL_OPS = [ADD, MOD, EXP2, MONUS, MUL, DIV, SQUARE, DOUBLE, SUCC, PAIR]


def terms(ops=SMALL_OPS, n_vars=2, max_const=20, max_leaves=12):
    leaves = st.one_of(st.integers(0, max_const).map(Const),
                       st.integers(0, n_vars - 1).map(Var))
    unary = [s for s in ops if s.arity == 1]
    binary = [s for s in ops if s.arity == 2]

    def extend(children):
        options = []
        if unary:
            options.append(st.tuples(st.sampled_from(unary), children)
                           .map(lambda p: Op(p[0], (p[1],))))
        if binary:
            options.append(st.tuples(st.sampled_from(binary), children, children)
                           .map(lambda p: Op(p[0], (p[1], p[2]))))
        return st.one_of(options)

    return st.recursive(leaves, extend, max_leaves=max_leaves)


@pytest.fixture
def lim():
    from basisforge.evaluation import EvalLimits
    return EvalLimits(max_bits=4096)
