import random

import pytest
from hypothesis import given, settings, strategies as st

from chainforge import automata as fa
from chainforge.automata import Relation
from chainforge.errors import AlphabetMismatch, ConfigurationError
from chainforge.ideals import normal_words_ambient
from chainforge.words import Alphabet, contains_factor, enumerate_words

XY = Alphabet(("x", "y"))
EY = Alphabet(("e", "y"), frozenset("e"))


def pats(*ps):
    return fa.from_factor_patterns(XY, ps)


def test_factor_language_membership():
    a = pats("xx")
    assert not a.accepts("xyx")
    assert a.accepts("yxxy")
    assert a.deterministic and a.trim


def test_p2_language():
    a = pats("xx", "xyx")
    assert a.accepts("xyxy") and not a.accepts("xyyx")


def test_factor_language_with_ambient():
    amb = normal_words_ambient(EY)
    a = fa.from_factor_patterns(EY, ["eye"], amb)
    assert a.accepts("eye") and not a.accepts("eyye")
    assert not a.accepts("eeye")


def test_empty_pattern_rejected():
    with pytest.raises(ConfigurationError):
        fa.from_factor_patterns(XY, ["", "x"])


def test_combine_examples():
    sx, sy = pats("x"), pats("y")
    u = fa.combine(sx, sy, "union")
    assert fa.compare(u, fa.difference(fa.universal(XY), fa.from_words(XY, [""]))) is Relation.EQUAL
    assert fa.is_empty(fa.combine(sx, fa.complement(sx), "intersection"))
    two = fa.combine(sx, sx, "concatenation")
    for w in enumerate_words(XY, 6):
        assert two.accepts(w) == (w.count("x") >= 2)


def test_complement_examples():
    assert fa.compare(fa.complement(fa.empty(XY)), fa.universal(XY)) is Relation.EQUAL
    ystar = fa.complement(pats("x"))
    for w in enumerate_words(XY, 5):
        assert ystar.accepts(w) == ("x" not in w)
    a = pats("xy", "yyx")
    assert fa.compare(fa.complement(fa.complement(a)), a) is Relation.EQUAL


def test_compare_examples():
    a = pats("xx", "xyx")
    assert fa.compare(fa.canonicalize(a), a) is Relation.EQUAL
    assert fa.compare(pats("xx"), a) is Relation.PROPER_SUBSET
    assert fa.compare(a, pats("xx")) is Relation.PROPER_SUPERSET
    assert fa.compare(pats("xx"), pats("yy")) is Relation.INCOMPARABLE


def test_is_empty_examples():
    assert fa.is_empty(fa.empty(XY))
    assert not fa.is_empty(fa.universal(XY))
    a = pats("xyx")
    assert fa.is_empty(fa.intersection(a, fa.complement(a)))


def test_alphabet_mismatch():
    with pytest.raises(AlphabetMismatch):
        fa.union(pats("x"), fa.universal(EY))


def test_edge_export_format():
    text = pats("xx").to_edges()
    lines = text.strip().splitlines()
    assert lines[0].startswith("start:")
    assert lines[-1].startswith("accepting:")
    for line in lines[1:-1]:
        src, letter, dst = line.split()
        assert letter in ("x", "y") and src.isdigit() and dst.isdigit()


def test_shortest_word_and_quotient():
    a = pats("xyx", "yy")
    assert fa.shortest_word(a) == "yy"
    q = fa.left_quotient(a, "xy")
    assert q.accepts("x") and q.accepts("y")
    assert fa.shortest_word(fa.empty(XY)) is None


def test_factor_closed():
    assert fa.is_factor_closed(normal_words_ambient(EY))
    assert not fa.is_factor_closed(pats("x"))


def _random_patterns(rng):
    return [("".join(rng.choice("xy") for _ in range(rng.randint(1, 3)))) for _ in range(rng.randint(1, 3))]


def test_random_membership_matches_definition():
    rng = random.Random(7)
    words = list(enumerate_words(XY, 7))
    for _ in range(25):
        p1, p2 = _random_patterns(rng), _random_patterns(rng)
        a, b = pats(*p1), pats(*p2)
        ops = {
            "union": (fa.union(a, b), lambda w: bool(contains_factor(w, p1)) or bool(contains_factor(w, p2))),
            "inter": (fa.intersection(a, b), lambda w: bool(contains_factor(w, p1)) and bool(contains_factor(w, p2))),
            "compl": (fa.complement(a), lambda w: not contains_factor(w, p1)),
        }
        for auto, pred in ops.values():
            for w in words:
                assert auto.accepts(w) == pred(w)


def test_concatenation_membership():
    a, b = pats("xy"), fa.from_words(XY, ["y", "xx"])
    c = fa.concatenation(a, b)
    for w in enumerate_words(XY, 7):
        want = any(a.accepts(w[:k]) and b.accepts(w[k:]) for k in range(len(w) + 1))
        assert c.accepts(w) == want


pattern_lists = st.lists(st.text(alphabet="xy", min_size=1, max_size=3), min_size=1, max_size=3)


@settings(max_examples=40, deadline=None)
@given(pattern_lists, pattern_lists)
def test_de_morgan(p1, p2):
    a, b = pats(*p1), pats(*p2)
    left = fa.complement(fa.union(a, b))
    right = fa.intersection(fa.complement(a), fa.complement(b))
    assert fa.compare(left, right) is Relation.EQUAL


def test_compare_equivalence_relation():
    rng = random.Random(3)
    corpus = [pats(*_random_patterns(rng)) for _ in range(50)]
    for a in corpus:
        assert fa.compare(a, a) is Relation.EQUAL
    for a in corpus[:20]:
        for b in corpus[:20]:
            r = fa.compare(a, b)
            back = fa.compare(b, a)
            if r is Relation.EQUAL:
                assert back is Relation.EQUAL and a == b
            if r is Relation.PROPER_SUBSET:
                assert back is Relation.PROPER_SUPERSET
