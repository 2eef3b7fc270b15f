"""Finite automata over a fixed alphabet.

Every public constructor and operation returns a canonical automaton:
deterministic, minimal, trim (no dead state) and numbered in breadth-first
order with letters visited in alphabet order.  Two automata built from the
same language are therefore structurally identical.  The empty language is
a single non-accepting start state with no edges.
"""

from __future__ import annotations

from collections import deque
from enum import Enum
from typing import Callable, Hashable, Iterable, Optional

from .errors import AlphabetMismatch, ConfigurationError
from .words import Alphabet, PatternMatcher, Word


class Relation(str, Enum):
    EQUAL = "equal"
    PROPER_SUBSET = "proper_subset"
    PROPER_SUPERSET = "proper_superset"
    INCOMPARABLE = "incomparable"


class Automaton:
    """A finite automaton; transitions map ``(state, letter)`` to a set of states."""

    __slots__ = ("alphabet", "n_states", "start", "delta", "accepting", "deterministic", "trim")

    def __init__(self, alphabet: Alphabet, n_states: int, start: int,
                 delta: dict[tuple[int, str], frozenset[int]], accepting: Iterable[int]):
        self.alphabet = alphabet
        self.n_states = n_states
        self.start = start
        self.delta = {k: frozenset(v) for k, v in delta.items() if v}
        self.accepting = frozenset(accepting)
        if not 0 <= start < n_states:
            raise ConfigurationError("start state out of range")
        for (q, a), targets in self.delta.items():
            if a not in alphabet or not 0 <= q < n_states or any(not 0 <= t < n_states for t in targets):
                raise ConfigurationError(f"bad transition {(q, a)} -> {set(targets)}")
        self.deterministic = all(len(t) == 1 for t in self.delta.values())
        self.trim = self._is_trim()

    # -- basic queries -------------------------------------------------------

    def step(self, q: Optional[int], a: str) -> Optional[int]:
        """Deterministic successor, or None if the run dies."""
        if q is None:
            return None
        t = self.delta.get((q, a))
        if not t:
            return None
        if len(t) != 1:
            raise ConfigurationError("step() needs a deterministic automaton")
        return next(iter(t))

    def run(self, w: Word, q: Optional[int] = None) -> Optional[int]:
        q = self.start if q is None else q
        for a in w:
            q = self.step(q, a)
            if q is None:
                return None
        return q

    def accepts(self, w: Word) -> bool:
        current = {self.start}
        for a in w:
            current = {t for q in current for t in self.delta.get((q, a), ())}
            if not current:
                return False
        return bool(current & self.accepting)

    def successors(self, q: int) -> Iterable[tuple[str, int]]:
        for a in self.alphabet.letters:
            for t in sorted(self.delta.get((q, a), ())):
                yield a, t

    def _reachable(self) -> set[int]:
        seen = {self.start}
        queue = deque([self.start])
        while queue:
            q = queue.popleft()
            for _, t in self.successors(q):
                if t not in seen:
                    seen.add(t)
                    queue.append(t)
        return seen

    def _coreachable(self) -> set[int]:
        back: dict[int, set[int]] = {}
        for (q, _), targets in self.delta.items():
            for t in targets:
                back.setdefault(t, set()).add(q)
        seen = set(self.accepting)
        queue = deque(seen)
        while queue:
            q = queue.popleft()
            for p in back.get(q, ()):
                if p not in seen:
                    seen.add(p)
                    queue.append(p)
        return seen

    def _is_trim(self) -> bool:
        if not self.accepting:
            return self.n_states == 1 and not self.delta
        live = self._reachable() & self._coreachable()
        return len(live) == self.n_states

    def live_states(self) -> set[int]:
        return self._reachable() & self._coreachable()

    def __repr__(self):
        return (f"Automaton(states={self.n_states}, accepting={sorted(self.accepting)}, "
                f"alphabet={''.join(self.alphabet.letters)})")

    def __eq__(self, other):
        if not isinstance(other, Automaton):
            return NotImplemented
        return (self.alphabet == other.alphabet and self.n_states == other.n_states
                and self.start == other.start and self.delta == other.delta
                and self.accepting == other.accepting)

    def __hash__(self):
        return hash((self.n_states, self.accepting, frozenset(self.delta.items())))

    def to_edges(self) -> str:
        """Debug export: one ``src letter dst`` line per edge, then ``accepting: ...``."""
        lines = [f"start: {self.start}"]
        for q in range(self.n_states):
            for a, t in self.successors(q):
                lines.append(f"{q} {a} {t}")
        lines.append("accepting: " + " ".join(str(q) for q in sorted(self.accepting)))
        return "\n".join(lines) + "\n"


# -- canonical construction --------------------------------------------------

def explore(alphabet: Alphabet, start: Hashable,
            step: Callable[[Hashable, str], Optional[Hashable]],
            accepting: Callable[[Hashable], bool]) -> Automaton:
    """Build the canonical automaton of an on-the-fly deterministic machine.

    ``step`` returns None for a dead transition.  Keys must be hashable.
    """
    index = {start: 0}
    keys = [start]
    trans: list[dict[str, int]] = [{}]
    queue = deque([start])
    while queue:
        key = queue.popleft()
        src = index[key]
        for a in alphabet.letters:
            nxt = step(key, a)
            if nxt is None:
                continue
            if nxt not in index:
                index[nxt] = len(keys)
                keys.append(nxt)
                trans.append({})
                queue.append(nxt)
            trans[src][a] = index[nxt]
    acc = {i for i, k in enumerate(keys) if accepting(k)}
    return _canonical(alphabet, trans, acc)


def _canonical(alphabet: Alphabet, trans: list[dict[str, int]], acc: set[int]) -> Automaton:
    """Minimize and renumber a partial DFA whose start state is 0."""
    n = len(trans)
    # drop states that cannot reach acceptance
    back: list[set[int]] = [set() for _ in range(n)]
    for q, row in enumerate(trans):
        for t in row.values():
            back[t].add(q)
    live = set(acc)
    queue = deque(acc)
    while queue:
        q = queue.popleft()
        for p in back[q]:
            if p not in live:
                live.add(p)
                queue.append(p)
    if 0 not in live:
        return Automaton(alphabet, 1, 0, {}, ())
    # Moore refinement; the implicit dead state has class -1
    letters = alphabet.letters
    cls = {q: (1 if q in acc else 0) for q in live}
    while True:
        sigs = {}
        new_cls = {}
        for q in sorted(live):
            row = trans[q]
            sig = (cls[q],) + tuple(cls.get(row.get(a, -1), -1) if row.get(a) in live else -1
                                    for a in letters)
            new_cls[q] = sigs.setdefault(sig, len(sigs))
        if len(sigs) == len(set(cls.values())):
            cls = new_cls
            break
        cls = new_cls
    # renumber blocks breadth-first from the start block
    rep: dict[int, int] = {}
    for q in sorted(live):
        rep.setdefault(cls[q], q)
    order = {cls[0]: 0}
    queue = deque([cls[0]])
    edges: dict[tuple[int, str], frozenset[int]] = {}
    accepting = set()
    while queue:
        b = queue.popleft()
        q = rep[b]
        if q in acc:
            accepting.add(order[b])
        for a in letters:
            t = trans[q].get(a)
            if t is None or t not in live:
                continue
            tb = cls[t]
            if tb not in order:
                order[tb] = len(order)
                queue.append(tb)
            edges[(order[b], a)] = frozenset((order[tb],))
    return Automaton(alphabet, len(order), 0, edges, accepting)


def determinize(nfa: Automaton) -> Automaton:
    """Subset construction followed by canonicalization."""
    if nfa.deterministic and nfa.trim:
        return explore(nfa.alphabet, nfa.start, nfa.step, lambda q: q in nfa.accepting)

    def step(s, a):
        t = frozenset(x for q in s for x in nfa.delta.get((q, a), ()))
        return t or None

    return explore(nfa.alphabet, frozenset((nfa.start,)), step, lambda s: bool(s & nfa.accepting))


def canonicalize(a: Automaton) -> Automaton:
    return determinize(a)


# -- constructors -------------------------------------------------------------

def universal(alphabet: Alphabet) -> Automaton:
    return explore(alphabet, 0, lambda q, a: 0, lambda q: True)


def empty(alphabet: Alphabet) -> Automaton:
    return Automaton(alphabet, 1, 0, {}, ())


def from_words(alphabet: Alphabet, words: Iterable[Word]) -> Automaton:
    """Finite language."""
    ws = set(words)
    for w in ws:
        alphabet.check_word(w)
    prefixes = {w[:i] for w in ws for i in range(len(w) + 1)}
    return explore(alphabet, "", lambda p, a: p + a if p + a in prefixes else None, lambda p: p in ws)


def from_factor_patterns(alphabet: Alphabet, patterns: Iterable[Word],
                         ambient: Optional[Automaton] = None) -> Automaton:
    """Words having some pattern as a factor, intersected with ``ambient``."""
    pats = list(patterns)
    if not pats:
        raise ConfigurationError("at least one pattern is required")
    for p in pats:
        if p == "":
            raise ConfigurationError("empty pattern would generate the unit ideal")
        alphabet.check_word(p)
    ac = PatternMatcher(pats)
    found = -1

    def step(node, a):
        if node == found:
            return found
        nxt = ac.step(node, a)
        return found if ac.out[nxt] else nxt

    lang = explore(alphabet, 0, step, lambda node: node == found)
    if ambient is not None:
        lang = intersection(lang, ambient)
    return lang


def letter_count_below(alphabet: Alphabet, letter: str, bound: int) -> Automaton:
    """Words with fewer than ``bound`` occurrences of ``letter``."""
    return explore(alphabet, 0,
                   lambda k, a: (k + 1 if k + 1 < bound else None) if a == letter else k,
                   lambda k: True) if bound > 0 else empty(alphabet)


# -- boolean and rational operations -----------------------------------------

def _same_alphabet(a: Automaton, b: Automaton) -> None:
    if a.alphabet != b.alphabet:
        raise AlphabetMismatch(f"{a.alphabet.letters} vs {b.alphabet.letters}")


def _product(a: Automaton, b: Automaton, accept: Callable[[bool, bool], bool]) -> Automaton:
    _same_alphabet(a, b)
    a, b = canonicalize(a), canonicalize(b)
    need_a_dead = accept(False, True)
    need_b_dead = accept(True, False)

    def step(pair, letter):
        p, q = pair
        p2, q2 = a.step(p, letter), b.step(q, letter)
        if p2 is None and q2 is None:
            return None
        if p2 is None and not need_a_dead:
            return None
        if q2 is None and not need_b_dead:
            return None
        return (p2, q2)

    return explore(a.alphabet, (a.start, b.start), step,
                   lambda pq: accept(pq[0] in a.accepting, pq[1] in b.accepting))


def union(a: Automaton, b: Automaton) -> Automaton:
    return _product(a, b, lambda x, y: x or y)


def intersection(a: Automaton, b: Automaton) -> Automaton:
    return _product(a, b, lambda x, y: x and y)


def difference(a: Automaton, b: Automaton) -> Automaton:
    return _product(a, b, lambda x, y: x and not y)


def concatenation(a: Automaton, b: Automaton) -> Automaton:
    _same_alphabet(a, b)
    a, b = canonicalize(a), canonicalize(b)

    def with_b_start(p, qs):
        return qs | {b.start} if p is not None and p in a.accepting else qs

    def step(key, letter):
        p, qs = key
        p2 = a.step(p, letter)
        qs2 = frozenset(t for q in qs if (t := b.step(q, letter)) is not None)
        qs2 = with_b_start(p2, qs2)
        if p2 is None and not qs2:
            return None
        return (p2, qs2)

    start = (a.start, with_b_start(a.start, frozenset()))
    return explore(a.alphabet, start, step, lambda key: bool(key[1] & b.accepting))


def combine(a: Automaton, b: Automaton, mode: str) -> Automaton:
    ops = {"union": union, "intersection": intersection, "concatenation": concatenation}
    if mode not in ops:
        raise ValueError(f"unknown mode {mode!r}")
    return ops[mode](a, b)


def complement(a: Automaton, ambient: Optional[Automaton] = None) -> Automaton:
    """``L(ambient) \\ L(a)``; ambient defaults to all words."""
    if ambient is None:
        ambient = universal(a.alphabet)
    return difference(ambient, a)


def left_quotient(a: Automaton, prefix: Word) -> Automaton:
    """``{v : prefix + v in L(a)}``."""
    a = canonicalize(a)
    q = a.run(prefix)
    if q is None:
        return empty(a.alphabet)
    return explore(a.alphabet, q, a.step, lambda s: s in a.accepting)


def ending_with(alphabet: Alphabet, letter: str) -> Automaton:
    return explore(alphabet, False, lambda s, a: a == letter, lambda s: s)


def two_sided_closure(a: Automaton, ambient: Optional[Automaton] = None) -> Automaton:
    """Words having a factor in ``L(a)``, intersected with ``ambient``."""
    u = universal(a.alphabet)
    result = concatenation(concatenation(u, a), u)
    if ambient is not None:
        result = intersection(result, ambient)
    return result


# -- decisions ----------------------------------------------------------------

def is_empty(a: Automaton) -> bool:
    reach = a._reachable()
    return not (reach & a.accepting)


def is_subset(a: Automaton, b: Automaton) -> bool:
    return is_empty(difference(a, b))


def compare(a: Automaton, b: Automaton) -> Relation:
    _same_alphabet(a, b)
    ab = is_subset(a, b)
    ba = is_subset(b, a)
    if ab and ba:
        return Relation.EQUAL
    if ab:
        return Relation.PROPER_SUBSET
    if ba:
        return Relation.PROPER_SUPERSET
    return Relation.INCOMPARABLE


def shortest_word(a: Automaton) -> Optional[Word]:
    """Shortest accepted word, lexicographically least among them (alphabet order)."""
    seen = {a.start: ""}
    queue = deque([a.start])
    while queue:
        q = queue.popleft()
        if q in a.accepting:
            return seen[q]
        for letter, t in a.successors(q):
            if t not in seen:
                seen[t] = seen[q] + letter
                queue.append(t)
    return None


def is_factor_closed(a: Automaton) -> bool:
    """Every factor of an accepted word is accepted."""
    a = canonicalize(a)
    if is_empty(a):
        return True
    # prefix-closed: every live state accepts
    if len(a.accepting) != a.n_states:
        return False
    # suffix-closed: dropping the first letter stays inside
    return all(is_subset(left_quotient(a, letter), a) for letter in a.alphabet.letters)
