import random

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from basisforge.certificates import (ADD_EXP, ADD_MOD, CERTIFIERS, DOUBLE_MOD_EXP, MOD_EXP,
                                     AddExp, AddMod, DoubleModExp, ModExp, SignatureViolation,
                                     certify, check_certificate, random_term)
from basisforge.syntax import parse
from basisforge.terms import conforms


@pytest.mark.parametrize("src, B", [("2^x % (x % 7)", 7), ("x", 0), ("2^x", 0)])
def test_mod_exp_examples(src, B):
    assert certify(parse(src), "mod-exp") == ModExp(B)


@pytest.mark.parametrize("src, tag", [("2^(x+2) + x", "StrictlyIncreasing"),
                                      ("2^(1+1)", "Constant"), ("x", "StrictlyIncreasing")])
def test_add_exp_examples(src, tag):
    assert certify(parse(src), "add-exp") == AddExp(tag)


@pytest.mark.parametrize("src, ab", [("(x + 3) % 5 + x", (2, 6)), ("7", (0, 8)), ("x % 2", (1, 1))])
def test_add_mod_examples(src, ab):
    assert certify(parse(src), "add-mod") == AddMod(*ab)


@pytest.mark.parametrize("src, ab", [("double(double(x))", (4, 0)), ("double(x) % 6", (2, 6)),
                                     ("2^(double(x))", (1, 0))])
def test_double_mod_exp_examples(src, ab):
    assert certify(parse(src), "double-mod-exp") == DoubleModExp(*ab)


def test_check_passes_for_certified_terms():
    assert check_certificate(parse("2^x % (x % 7)"), ModExp(7), (0, 1000)).status == "PASS"
    assert check_certificate(parse("(x+3)%5 + x"), AddMod(2, 6), (0, 10 ** 4)).status == "PASS"


def test_fabricated_certificate_fails_at_six():
    rep = check_certificate(parse("x + 1"), ModExp(5), (0, 100))
    assert rep.status == "FAIL"
    # a + 1 must be a power of two or at most max(5, a)
    bad = [a for a in range(101) if (a + 1) & a and a + 1 > max(5, a)]
    assert [c["point"][0] for c in rep.counterexamples] == bad
    # a = 6 (value 7) is a counterexample; a = 5 (value 6 > max(5, 5)) already is one
    assert 6 in bad and bad[0] == 5


def test_wrong_signature_rejected():
    with pytest.raises(SignatureViolation):
        certify(parse("x + 1"), "mod-exp")
    with pytest.raises(SignatureViolation):
        certify(parse("x % y"), "add-mod")
    with pytest.raises(ValueError):
        certify(parse("x"), "no-such-lemma")


def test_random_terms_respect_bounds():
    rng = random.Random(5)
    for sig in (MOD_EXP, ADD_EXP, ADD_MOD, DOUBLE_MOD_EXP):
        for _ in range(200):
            t = random_term(sig, 12, 10, rng)
            assert t.tree_size <= 12 and conforms(t, sig)


@pytest.mark.parametrize("lemma", sorted(CERTIFIERS))
@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 32))
def test_certificates_sound_on_small_range(lemma, seed):
    _, sig = CERTIFIERS[lemma]
    t = random_term(sig, 12, 10, random.Random(seed))
    rep = check_certificate(t, certify(t, lemma), (0, 64))
    assert not rep.counterexamples, (str(t), rep.counterexamples[:3])


@given(st.integers(0, 10), st.integers(0, 10))
def test_mod_exp_monotone_in_constants(c1, c2):
    # raising a constant never lowers B
    lo, hi = sorted((c1, c2))
    a = certify(parse(f"2^x % (x % {lo})"), "mod-exp").B
    b = certify(parse(f"2^x % (x % {hi})"), "mod-exp").B
    assert a <= b
