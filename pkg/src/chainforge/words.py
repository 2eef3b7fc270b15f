"""Free monoid core: alphabets, words, idempotent rewriting and factor matching.

Words are plain strings; each character is one letter.  Input strings may use
power sugar (``"xy^3x"`` or ``"xy³x"``), which :func:`parse_word` expands.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Iterator, Optional

from .errors import ConfigurationError

Word = str

_SUPERSCRIPTS = str.maketrans("⁰¹²³⁴⁵⁶⁷⁸⁹", "0123456789")
_POWER = re.compile(r"(.)\^?(\d+)")


@dataclass(frozen=True)
class Alphabet:
    letters: tuple[str, ...]
    idempotents: frozenset[str] = frozenset()

    def __post_init__(self):
        letters = tuple(self.letters)
        object.__setattr__(self, "letters", letters)
        object.__setattr__(self, "idempotents", frozenset(self.idempotents))
        if not letters:
            raise ConfigurationError("alphabet must be nonempty")
        if len(set(letters)) != len(letters):
            raise ConfigurationError(f"duplicate letters in {letters!r}")
        for a in letters:
            if len(a) != 1:
                raise ConfigurationError(f"letter {a!r} is not a single symbol")
        if not self.idempotents <= set(letters):
            raise ConfigurationError("idempotents must be letters of the alphabet")

    def __contains__(self, letter: str) -> bool:
        return letter in self.letters

    def __iter__(self):
        return iter(self.letters)

    def __len__(self):
        return len(self.letters)

    def index(self, letter: str) -> int:
        return self.letters.index(letter)

    def check_word(self, w: Word) -> None:
        for a in w:
            if a not in self.letters:
                raise ConfigurationError(f"letter {a!r} of {w!r} not in alphabet {self.letters}")


def parse_word(text: str) -> Word:
    """Expand power sugar: ``"xy^3x"`` and ``"xy³x"`` both become ``"xyyyx"``."""
    text = text.translate(_SUPERSCRIPTS).replace(" ", "")
    if text in ("", "1", "ε"):
        return ""
    return _POWER.sub(lambda m: m.group(1) * int(m.group(2)), text)


@dataclass(frozen=True)
class RewriteSystem:
    """Length-reducing rules; only the idempotent family ``aa -> a`` is supported."""

    alphabet: Alphabet
    rules: tuple[tuple[Word, Word], ...] = field(default=())

    def __post_init__(self):
        rules = tuple(self.rules)
        object.__setattr__(self, "rules", rules)
        for lhs, rhs in rules:
            for a in lhs + rhs:
                if a not in self.alphabet:
                    raise ConfigurationError(f"rule {lhs}->{rhs} uses letter {a!r} outside the alphabet")
            if not (len(lhs) == 2 and lhs[0] == lhs[1] and rhs == lhs[0]):
                raise ConfigurationError(f"unsupported rule {lhs}->{rhs}; only aa->a is allowed")

    @classmethod
    def idempotent(cls, alphabet: Alphabet) -> "RewriteSystem":
        return cls(alphabet, tuple((a + a, a) for a in alphabet.letters if a in alphabet.idempotents))

    @property
    def idempotents(self) -> frozenset[str]:
        return frozenset(rhs for _, rhs in self.rules)


def normal_form(w: Word, rs: Optional[RewriteSystem]) -> Word:
    """Collapse every run of an idempotent letter to a single occurrence."""
    if rs is None or not rs.rules:
        return w
    idem = rs.idempotents
    out: list[str] = []
    for a in w:
        if out and out[-1] == a and a in idem:
            continue
        out.append(a)
    return "".join(out)


def is_normal(w: Word, rs: Optional[RewriteSystem]) -> bool:
    return normal_form(w, rs) == w


class PatternMatcher:
    """Aho-Corasick automaton over a fixed set of nonempty patterns."""

    def __init__(self, patterns: Iterable[Word]):
        pats = sorted(set(patterns), key=lambda p: (len(p), p))
        if not pats:
            raise ValueError("at least one pattern is required")
        if any(p == "" for p in pats):
            raise ValueError("patterns must be nonempty")
        self.patterns = tuple(pats)
        self.goto: list[dict[str, int]] = [{}]
        self.fail: list[int] = [0]
        self.depth: list[int] = [0]
        # all patterns that are suffixes of the node's path
        self.out: list[tuple[Word, ...]] = [()]
        for p in pats:
            node = 0
            for a in p:
                nxt = self.goto[node].get(a)
                if nxt is None:
                    nxt = len(self.goto)
                    self.goto.append({})
                    self.fail.append(0)
                    self.depth.append(self.depth[node] + 1)
                    self.out.append(())
                    self.goto[node][a] = nxt
                node = nxt
            self.out[node] = (p,)
        queue = deque(self.goto[0].values())
        while queue:
            node = queue.popleft()
            self.out[node] = self.out[node] + self.out[self.fail[node]]
            for a, child in self.goto[node].items():
                f = self.fail[node]
                while f and a not in self.goto[f]:
                    f = self.fail[f]
                cand = self.goto[f].get(a, 0)
                self.fail[child] = cand if cand != child else 0
                queue.append(child)

    @property
    def n_nodes(self) -> int:
        return len(self.goto)

    def step(self, node: int, a: str) -> int:
        while node and a not in self.goto[node]:
            node = self.fail[node]
        return self.goto[node].get(a, 0)

    def first_match(self, w: Word) -> Optional[tuple[int, Word]]:
        """Leftmost-starting occurrence of any pattern (shortest on ties)."""
        longest = len(self.patterns[-1])
        best: Optional[tuple[int, Word]] = None
        node = 0
        for end, a in enumerate(w, start=1):
            if best is not None and end - longest > best[0]:
                break
            node = self.step(node, a)
            for p in self.out[node]:
                cand = (end - len(p), p)
                if best is None or (cand[0], len(p)) < (best[0], len(best[1])):
                    best = cand
        return best


def contains_factor(w: Word, patterns: Iterable[Word]) -> Optional[tuple[int, Word]]:
    """Leftmost occurrence ``(position, pattern)`` of a pattern as a factor of ``w``."""
    return PatternMatcher(patterns).first_match(w)


def enumerate_words(alphabet: Alphabet, max_len: int, ambient=None) -> Iterator[Word]:
    """All words of length <= max_len in length-then-lex order (letter order of the alphabet)."""
    if max_len < 0:
        raise ValueError("max_len must be >= 0")
    for n in range(max_len + 1):
        for letters in product(alphabet.letters, repeat=n):
            w = "".join(letters)
            if ambient is None or ambient.accepts(w):
                yield w
