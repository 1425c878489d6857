"""Arithmetic terms over the substitution basis {x+y, x mod y, 2^x}."""

from .terms import (ADD, DIV, DOUBLE, EXP2, LEFT, MINIMAL, MOD, MONUS, MUL,
                    PAIR, POW, RIGHT, SQUARE, SUCC, Const, Op, OpSymbol,
                    Signature, Term, Var, X, Y, Z, build, conforms, free_vars,
                    register_symbol, size, substitute)
from .evaluation import (EvalLimits, LimitExceeded, UnboundVariable, eval_grid,
                         evaluate, fingerprint, pair, unpair)
from .syntax import ParseError, parse, to_text
from .lowering import UnsupportedSymbol, lower, verify_lowering
from .report import VerificationReport, check_equivalent

__version__ = "0.1.0"

__all__ = [
    "ADD", "DIV", "DOUBLE", "EXP2", "LEFT", "MINIMAL", "MOD", "MONUS", "MUL", "PAIR", "POW",
    "RIGHT", "SQUARE", "SUCC", "Const", "Op", "OpSymbol", "Signature", "Term", "Var", "X", "Y",
    "Z", "build", "conforms", "free_vars", "register_symbol", "size", "substitute",
    "EvalLimits", "LimitExceeded", "UnboundVariable", "eval_grid", "evaluate", "fingerprint",
    "pair", "unpair", "ParseError", "parse", "to_text", "UnsupportedSymbol", "lower",
    "verify_lowering", "VerificationReport", "check_equivalent",
]
