"""Monomial two-sided ideals as upward-closed regular languages.

An ideal is stored as the language of monomials it contains, inside an
ambient factor-closed language of normal words (all words for the free
algebra, words without ``ee`` when ``e`` is idempotent).  Primality of a
monomial ideal reduces to a transitivity property of the complement
language C:  for all u, u' in C there is a w with nf(u w u') in C.

The decision runs on the trim DFA of C, extended with a flag recording the
last letter read when it is idempotent.  The flag is what the junction
merge (``...e`` times ``e...``) needs.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Union

from . import automata as fa
from .errors import ConfigurationError, NonConvergence
from .words import Alphabet, RewriteSystem, Word, enumerate_words, is_normal, normal_form, parse_word


class Status(str, Enum):
    PRIME = "prime"
    NOT_PRIME = "not_prime"
    SEMIPRIME = "semiprime"
    NOT_SEMIPRIME = "not_semiprime"


@dataclass(frozen=True)
class PrimalityVerdict:
    status: Status
    witness: Optional[tuple[Word, Word]] = None

    @property
    def is_prime(self) -> bool:
        return self.status is Status.PRIME

    def to_json(self):
        return {"status": self.status.value,
                "witness": list(self.witness) if self.witness is not None else None}


@dataclass(frozen=True)
class SemiprimalityVerdict:
    status: Status
    witness: Optional[Word] = None

    @property
    def is_semiprime(self) -> bool:
        return self.status is Status.SEMIPRIME

    def to_json(self):
        return {"status": self.status.value, "witness": self.witness}


@dataclass(frozen=True)
class NoViolation:
    checked_pairs: int

    def to_json(self):
        return {"result": "no_violation_found", "checked": self.checked_pairs}


@dataclass(frozen=True)
class Witness:
    u: Word
    u2: Word

    def to_json(self):
        return {"result": "witness", "u": self.u, "u2": self.u2}


def free_ambient(alphabet: Alphabet) -> fa.Automaton:
    return fa.universal(alphabet)


def normal_words_ambient(alphabet: Alphabet) -> fa.Automaton:
    squares = [a + a for a in alphabet.letters if a in alphabet.idempotents]
    if not squares:
        return fa.universal(alphabet)
    return fa.complement(fa.from_factor_patterns(alphabet, squares))


class MonomialIdeal:
    """A monomial ideal given by its full monomial language."""

    def __init__(self, alphabet: Alphabet, lang: fa.Automaton, ambient: fa.Automaton,
                 rewrite: Optional[RewriteSystem] = None,
                 generators: Optional[frozenset[Word]] = None, name: Optional[str] = None):
        self.alphabet = alphabet
        self.ambient = fa.canonicalize(ambient)
        self.lang = fa.intersection(lang, self.ambient)
        self.rewrite = rewrite
        self.generators = generators
        self.name = name
        self._complement: Optional[fa.Automaton] = None

    @property
    def idempotents(self) -> frozenset[str]:
        return self.rewrite.idempotents if self.rewrite is not None else frozenset()

    @property
    def complement(self) -> fa.Automaton:
        if self._complement is None:
            self._complement = fa.difference(self.ambient, self.lang)
        return self._complement

    def is_unit(self) -> bool:
        return self.lang.accepts("")

    def is_zero(self) -> bool:
        return fa.is_empty(self.lang)

    def renamed(self, name: str) -> "MonomialIdeal":
        return MonomialIdeal(self.alphabet, self.lang, self.ambient, self.rewrite, self.generators, name)

    def __contains__(self, w: Word) -> bool:
        return contains(self, w)

    def __repr__(self):
        label = self.name or (sorted(self.generators) if self.generators is not None else "lang")
        return f"MonomialIdeal({label}, states={self.lang.n_states})"


def _ambient_for(alphabet: Alphabet, rs: Optional[RewriteSystem]) -> fa.Automaton:
    if rs is not None and rs.rules:
        return normal_words_ambient(Alphabet(alphabet.letters, rs.idempotents))
    return free_ambient(alphabet)


def ideal_from_generators(alphabet: Alphabet, rs: Optional[RewriteSystem],
                          gens: Iterable[Word], name: Optional[str] = None) -> MonomialIdeal:
    gens = frozenset(gens)
    if not gens:
        raise ConfigurationError("at least one generator is required; use zero_ideal()")
    for g in gens:
        if g == "":
            raise ConfigurationError("the empty word generates the unit ideal")
        alphabet.check_word(g)
        if not is_normal(g, rs):
            raise ConfigurationError(f"generator {g!r} is not in normal form")
    ambient = _ambient_for(alphabet, rs)
    lang = fa.from_factor_patterns(alphabet, gens, ambient)
    return MonomialIdeal(alphabet, lang, ambient, rs, gens, name)


def ideal_from_language(alphabet: Alphabet, rs: Optional[RewriteSystem], lang: fa.Automaton,
                        name: Optional[str] = None) -> MonomialIdeal:
    """Ideal generated by a regular set of normal monomials."""
    ambient = _ambient_for(alphabet, rs)
    return MonomialIdeal(alphabet, fa.two_sided_closure(lang, ambient), ambient, rs, None, name)


def zero_ideal(alphabet: Alphabet, rs: Optional[RewriteSystem] = None) -> MonomialIdeal:
    ambient = _ambient_for(alphabet, rs)
    return MonomialIdeal(alphabet, fa.empty(alphabet), ambient, rs, frozenset(), "0")


def contains(i: MonomialIdeal, w: Word) -> bool:
    i.alphabet.check_word(w)
    return i.lang.accepts(normal_form(w, i.rewrite))


def _check_same(i: MonomialIdeal, j: MonomialIdeal) -> None:
    if i.alphabet != j.alphabet or i.ambient != j.ambient:
        raise ConfigurationError("ideals live in different ambient algebras")


def sum_(i: MonomialIdeal, j: MonomialIdeal) -> MonomialIdeal:
    _check_same(i, j)
    gens = i.generators | j.generators if i.generators is not None and j.generators is not None else None
    return MonomialIdeal(i.alphabet, fa.union(i.lang, j.lang), i.ambient, i.rewrite, gens)


def intersection(i: MonomialIdeal, j: MonomialIdeal) -> MonomialIdeal:
    _check_same(i, j)
    return MonomialIdeal(i.alphabet, fa.intersection(i.lang, j.lang), i.ambient, i.rewrite)


def product(i: MonomialIdeal, j: MonomialIdeal) -> MonomialIdeal:
    """All nf(u v) with u in i, v in j, re-closed upward."""
    _check_same(i, j)
    lang = fa.intersection(fa.concatenation(i.lang, j.lang), i.ambient)
    for e in sorted(i.idempotents):
        # u ending in e times v starting with e share the letter
        left = fa.intersection(i.lang, fa.ending_with(i.alphabet, e))
        right = fa.left_quotient(j.lang, e)
        lang = fa.union(lang, fa.concatenation(left, right))
    lang = fa.two_sided_closure(lang, i.ambient)
    return MonomialIdeal(i.alphabet, lang, i.ambient, i.rewrite)


def compare(i: MonomialIdeal, j: MonomialIdeal) -> fa.Relation:
    _check_same(i, j)
    return fa.compare(i.lang, j.lang)


def equal(i: MonomialIdeal, j: MonomialIdeal) -> bool:
    return compare(i, j) is fa.Relation.EQUAL


def is_subideal(i: MonomialIdeal, j: MonomialIdeal) -> bool:
    return compare(i, j) in (fa.Relation.EQUAL, fa.Relation.PROPER_SUBSET)


# -- decision machinery ---------------------------------------------------------

class _Complement:
    """Trim DFA of C with last-idempotent tracking; states are (q, last)."""

    def __init__(self, ideal: MonomialIdeal):
        if not fa.is_factor_closed(ideal.ambient):
            raise ConfigurationError("ambient language is not factor-closed")
        if ideal.is_unit():
            raise ConfigurationError("the unit ideal is not proper")
        self.dfa = ideal.complement
        self.letters = ideal.alphabet.letters
        self.idem = ideal.idempotents
        self.start = (self.dfa.start, None)
        # BFS in letter order: shortest, then lexicographically least, access words
        self.access: dict[tuple, Word] = {self.start: ""}
        queue = deque([self.start])
        while queue:
            p = queue.popleft()
            for a in self.letters:
                t = self.step(p, a)
                if t is not None and t not in self.access:
                    self.access[t] = self.access[p] + a
                    queue.append(t)
        self._reach_cache: dict[tuple, frozenset] = {}

    def step(self, p, a):
        q = self.dfa.step(p[0], a)
        if q is None:
            return None
        return (q, a if a in self.idem else None)

    def reach(self, p) -> frozenset:
        """States reachable from p, p included."""
        got = self._reach_cache.get(p)
        if got is None:
            seen = {p}
            queue = deque([p])
            while queue:
                s = queue.popleft()
                for a in self.letters:
                    t = self.step(s, a)
                    if t is not None and t not in seen:
                        seen.add(t)
                        queue.append(t)
            got = self._reach_cache[p] = frozenset(seen)
        return got

    def survive(self, survivors, first: bool, a: str):
        """Advance every survivor by one letter of the right-hand word."""
        if first:
            out = set()
            for q, last in survivors:
                if last is not None and last == a:
                    out.add(q)  # shared idempotent at the junction
                else:
                    t = self.dfa.step(q, a)
                    if t is not None:
                        out.add(t)
            return frozenset(out)
        return frozenset(t for q in survivors if (t := self.dfa.step(q, a)) is not None)

    def killing_word(self, survivors) -> Optional[Word]:
        """Shortest u' in C driving every survivor dead, or None."""
        start = (survivors, True, self.dfa.start)
        seen = {start: ""}
        queue = deque([start])
        while queue:
            key = queue.popleft()
            surv, first, r = key
            for a in self.letters:
                r2 = self.dfa.step(r, a)
                if r2 is None:
                    continue
                s2 = self.survive(surv, first, a)
                nxt = (s2, False, r2)
                if nxt in seen:
                    continue
                seen[nxt] = seen[key] + a
                if not s2:
                    return seen[nxt]
                queue.append(nxt)
        return None

    def self_killing_word(self, p) -> Optional[Word]:
        """Shortest u with access state p such that reading u kills reach(p)."""
        start = (self.reach(p), True, self.start)
        seen = {start: ""}
        queue = deque([start])
        while queue:
            key = queue.popleft()
            surv, first, r = key
            for a in self.letters:
                r2 = self.step(r, a)
                if r2 is None:
                    continue
                s2 = self.survive(surv, first, a)
                nxt = (s2, False, r2)
                if nxt in seen:
                    continue
                seen[nxt] = seen[key] + a
                if not s2 and r2 == p:
                    return seen[nxt]
                queue.append(nxt)
        return None

    def offending_language(self) -> fa.Automaton:
        """All u in C with nf(u w u) outside C for every w."""
        result = fa.empty(self.dfa.alphabet)
        for p in sorted(self.access, key=lambda s: (len(self.access[s]), self.access[s])):
            survivors = self.reach(p)

            def step(key, a, survivors=survivors):
                surv, first, r = key
                r2 = self.step(r, a)
                if r2 is None:
                    return None
                return (self.survive(surv, first, a), False, r2)

            lang = fa.explore(self.dfa.alphabet, (survivors, True, self.start), step,
                              lambda key, p=p: not key[0] and key[2] == p)
            result = fa.union(result, lang)
        return result


def _order(w: Word) -> tuple:
    return (len(w), w)


def is_prime(i: MonomialIdeal) -> PrimalityVerdict:
    c = _Complement(i)
    best = None
    by_reach: dict[frozenset, Optional[Word]] = {}
    for p, u in sorted(c.access.items(), key=lambda kv: _order(kv[1])):
        survivors = c.reach(p)
        if survivors not in by_reach:
            by_reach[survivors] = c.killing_word(survivors)
        u2 = by_reach[survivors]
        if u2 is None:
            continue
        key = (len(u) + len(u2), len(u), u, u2)
        if best is None or key < best:
            best = key
    if best is None:
        return PrimalityVerdict(Status.PRIME)
    return PrimalityVerdict(Status.NOT_PRIME, (best[2], best[3]))


def is_semiprime(i: MonomialIdeal) -> SemiprimalityVerdict:
    c = _Complement(i)
    best = None
    for p in c.access:
        u = c.self_killing_word(p)
        if u is not None and (best is None or _order(u) < _order(best)):
            best = u
    if best is None:
        return SemiprimalityVerdict(Status.SEMIPRIME)
    return SemiprimalityVerdict(Status.NOT_SEMIPRIME, best)


def semiprime_closure(i: MonomialIdeal, max_rounds: int = 8) -> MonomialIdeal:
    """Smallest semiprime monomial ideal containing ``i``."""
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    current = i
    for _ in range(max_rounds):
        if current.is_unit():
            return current
        offending = _Complement(current).offending_language()
        if fa.is_empty(offending):
            return current
        grown = fa.union(current.lang, fa.two_sided_closure(offending, current.ambient))
        current = MonomialIdeal(i.alphabet, grown, i.ambient, i.rewrite)
    if not fa.is_empty(_Complement(current).offending_language()):
        raise NonConvergence(f"no fixpoint within {max_rounds} rounds", current)
    return current


# -- definition-level checks ------------------------------------------------------

def _sandwich_candidates(i: MonomialIdeal, u: Word, u2: Word) -> fa.Automaton:
    """All nf(u w u2), w ranging over normal words."""
    alphabet = i.alphabet
    sigma = fa.universal(alphabet)
    lang = fa.concatenation(fa.concatenation(fa.from_words(alphabet, [u]), sigma),
                            fa.from_words(alphabet, [u2]))
    if u and u2 and u[-1] == u2[0] and u[-1] in i.idempotents:
        lang = fa.union(lang, fa.from_words(alphabet, [u + u2[1:]]))
    return fa.intersection(lang, i.ambient)


def certify_pair(i: MonomialIdeal, u: Word, u2: Word) -> bool:
    """True iff u, u2 lie outside i and u R u2 is inside i."""
    if contains(i, u) or contains(i, u2):
        return False
    outside = fa.intersection(_sandwich_candidates(i, u, u2), i.complement)
    return fa.is_empty(outside)


def _outside_words(i: MonomialIdeal, max_len: int) -> list[Word]:
    return [w for w in enumerate_words(i.alphabet, max_len, i.ambient) if not i.lang.accepts(w)]


def brute_force_check(i: MonomialIdeal, kind: str, max_u: int, max_w: int) -> Union[NoViolation, Witness]:
    """Exhaustive search for u, u' (|u|,|u'| <= max_u) with no rescuing w (|w| <= max_w).

    A reported witness is additionally certified for all w; an empty result
    only means no violation exists inside the bounds.
    """
    if kind not in ("prime", "semiprime"):
        raise ValueError(f"unknown kind {kind!r}")
    if max_u < 1 or max_w < 1:
        raise ValueError("bounds must be >= 1")
    us = _outside_words(i, max_u)
    ws = list(enumerate_words(i.alphabet, max_w, i.ambient))
    rs = i.rewrite

    def rescued(u, u2):
        return any(not i.lang.accepts(normal_form(u + w + u2, rs)) for w in ws)

    checked = 0
    pairs = ((u, u2) for u in us for u2 in us) if kind == "prime" else ((u, u) for u in us)
    for u, u2 in pairs:
        checked += 1
        if not rescued(u, u2) and certify_pair(i, u, u2):
            return Witness(u, u2)
    return NoViolation(checked)


# -- spec files -------------------------------------------------------------------

def ideal_from_spec(spec: dict) -> MonomialIdeal:
    """Build an ideal from ``{alphabet, idempotents, generators, ambient}``."""
    try:
        letters = spec["alphabet"]
    except KeyError:
        raise ConfigurationError("ideal spec: missing field 'alphabet'") from None
    if isinstance(letters, str):
        letters = list(letters)
    idem = spec.get("idempotents", [])
    gens = spec.get("generators")
    if gens is None:
        raise ConfigurationError("ideal spec: missing field 'generators'")
    if not isinstance(gens, list):
        raise ConfigurationError("ideal spec: 'generators' must be a list")
    alphabet = Alphabet(tuple(letters), frozenset(idem))
    ambient = spec.get("ambient", "normal_words" if idem else "free")
    if ambient not in ("free", "normal_words"):
        raise ConfigurationError(f"ideal spec: unknown ambient {ambient!r}")
    rs = RewriteSystem.idempotent(alphabet) if ambient == "normal_words" else None
    words = [parse_word(g) for g in gens]
    if not words:
        return zero_ideal(alphabet, rs)
    return ideal_from_generators(alphabet, rs, words, spec.get("name"))
