import re
from itertools import product

import pytest
from hypothesis import given, strategies as st

from chainforge.errors import ConfigurationError
from chainforge.words import (Alphabet, PatternMatcher, RewriteSystem, contains_factor, enumerate_words,
                              is_normal, normal_form, parse_word)
from chainforge.ideals import normal_words_ambient

EY = Alphabet(("e", "y"), frozenset("e"))
RS = RewriteSystem.idempotent(EY)


def test_normal_form_examples():
    assert normal_form("ee", RS) == "e"
    assert normal_form("", RS) == ""
    assert normal_form("eyee", RS) == "eye"
    assert normal_form("eeyeeey", RS) == "eyey"


def test_normal_form_without_rules_is_identity():
    assert normal_form("xxyy", None) == "xxyy"


def test_rule_outside_alphabet_rejected():
    with pytest.raises(ConfigurationError):
        RewriteSystem(EY, (("zz", "z"),))


def test_non_idempotent_rule_rejected():
    with pytest.raises(ConfigurationError):
        RewriteSystem(EY, (("ey", "e"),))


def test_alphabet_validation():
    with pytest.raises(ConfigurationError):
        Alphabet(())
    with pytest.raises(ConfigurationError):
        Alphabet(("x", "x"))
    with pytest.raises(ConfigurationError):
        Alphabet(("x",), frozenset("e"))


def test_parse_word_power_sugar():
    assert parse_word("xy³x") == "xyyyx"
    assert parse_word("xy^3x") == "xyyyx"
    assert parse_word("1") == ""
    assert parse_word("ez2e") == "ezze"


def test_contains_factor_examples():
    assert contains_factor("xyyx", {"xx", "xyx"}) is None
    assert contains_factor("xyyyx", {"xx", "xyx", "xyyx"}) is None
    assert contains_factor("xyyyx", {"xx", "xyx", "xyyx", "xyyyx"}) == (0, "xyyyx")
    assert contains_factor("xzxyx", {"xzx"}) == (0, "xzx")


def test_pattern_matcher_rejects_empty():
    with pytest.raises(ValueError):
        PatternMatcher(["", "x"])
    with pytest.raises(ValueError):
        PatternMatcher([])


def test_enumerate_words_examples():
    assert list(enumerate_words(Alphabet(("x", "y")), 1)) == ["", "x", "y"]
    assert list(enumerate_words(EY, 2, normal_words_ambient(EY))) == ["", "e", "y", "ey", "ye", "yy"]
    assert list(enumerate_words(Alphabet(("x",)), 0)) == [""]


def test_normal_form_properties_exhaustive():
    words = list(enumerate_words(EY, 6))
    for u in words:
        n = normal_form(u, RS)
        assert normal_form(n, RS) == n
        assert len(n) <= len(u)
        assert is_normal(n, RS)
    short = [w for w in words if len(w) <= 3]
    for u, v in product(short, short):
        assert normal_form(u + v, RS) == normal_form(normal_form(u, RS) + normal_form(v, RS), RS)


def _naive(w, patterns):
    best = None
    for p in patterns:
        for i in range(len(w) - len(p) + 1):
            if w[i:i + len(p)] == p:
                cand = (i, len(p), p)
                if best is None or cand < best:
                    best = cand
                break
    return None if best is None else (best[0], best[2])


pattern_sets = st.lists(st.text(alphabet="xyz", min_size=1, max_size=4), min_size=1, max_size=4)


@given(pattern_sets, st.text(alphabet="xyz", max_size=8))
def test_contains_factor_matches_naive_scan(patterns, w):
    assert contains_factor(w, patterns) == _naive(w, patterns)


def test_contains_factor_exhaustive_small():
    pats = ["xy", "yx", "xxy", "y"]
    for w in enumerate_words(Alphabet(("x", "y")), 8):
        assert contains_factor(w, pats) == _naive(w, pats)
