"""Parsing automata that split a word into successive leftmost-longest matches.

Three constructions share one representation, :class:`ParsingAutomaton`:

* constant patterns ``u`` with ``|u| >= 2``: window-profile automaton with
  q0 / search / verify states;
* regex patterns rejecting the empty word: searchleft / searchlong automaton
  running threads of the pattern automaton;
* regex patterns accepting the empty word (but not only it): an automaton
  that alternates "current match" and "one verbatim letter".

Every move carries a family name. The rewriting step pairs each family with
a way to move in the subject-side automaton (see ``ROLES``).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

from . import regex as rx
from .automata import Nfa, TransitionGraph, compile_regex

# How the subject-side automaton moves alongside each family:
#   read       both read the letter
#   stay       inside a match: subject side waits (only where a jump can follow)
#   jump       the match ends on this letter: subject side jumps along T_z
#   jump-read  the match ended just before: jump along T_z, then read the letter
ROLES = {
    "q0-search": "read",
    "search-search": "read",
    "q0-verify": "stay",
    "search-verify": "stay",
    "verify-verify": "stay",
    "verify-q0": "jump",
    "continue-left": "read",
    "start-long": "stay",
    "continue-long": "stay",
    "end-long": "jump",
    "letter-match": "jump",
    "extend": "stay",
    "end-then-letter": "jump-read",
}


@dataclass(frozen=True, eq=False)
class ParsingAutomaton:
    kind: str  # "const", "regex" or "nullable"
    states: tuple[Hashable, ...]
    moves: tuple[tuple[int, str, int, str], ...]
    initial: int
    finals: frozenset[int]

    @property
    def nfa(self) -> Nfa:
        trans = frozenset((p, a, r) for p, a, r, _ in self.moves)
        labels = tuple(state_label(s) for s in self.states)
        return Nfa(TransitionGraph(len(self.states), trans, labels), self.initial, self.finals)

    def moves_from(self) -> dict[int, list[tuple[str, int, str]]]:
        out: dict[int, list[tuple[str, int, str]]] = {}
        for p, a, r, fam in self.moves:
            out.setdefault(p, []).append((a, r, fam))
        return out

    def to_dot(self, name: str = "parser") -> str:
        return self.nfa.to_dot(name)

    def runs(self, word: str, limit: int = 16) -> list[list[tuple[int, str]]]:
        """Accepting runs on ``word`` as lists of (state, family) steps, at most ``limit``."""
        succ = self.moves_from()
        found: list[list[tuple[int, str]]] = []

        def go(p: int, i: int, path: list[tuple[int, str]]) -> None:
            if len(found) >= limit:
                return
            if i == len(word):
                if p in self.finals:
                    found.append(list(path))
                return
            for a, r, fam in succ.get(p, ()):
                if a == word[i]:
                    path.append((r, fam))
                    go(r, i + 1, path)
                    path.pop()

        go(self.initial, 0, [])
        return found


def state_label(s: Hashable) -> str:
    if s == "q0":
        return "q0"
    tag = s[0]
    if tag == "search":
        return f"search {_bits(s[1])}"
    if tag == "verify":
        return f"verify{s[1]} {_bits(s[2])}"
    if tag == "left":
        vec = "".join(_set(x) for x in s[1]) + "{q00}"
        return f"{vec} left {_set(s[2])}"
    if tag == "long":
        return f"{_set(s[1])} long {_set(s[2])}"
    if tag == "match":
        return f"{_set(s[1])} | {_set(s[2])}"
    return str(s)


def _bits(w: tuple[bool, ...]) -> str:
    return "".join("T" if b else "F" for b in w)


def _set(s: Iterable[int]) -> str:
    return "{" + ",".join(f"q{q}" for q in sorted(s)) + "}"


def _explore(start: Hashable, alphabet: Sequence[str], step) -> tuple[list, list, dict]:
    """Breadth-first closure of ``step(state, letter) -> [(target, family)]``."""
    ids = {start: 0}
    states = [start]
    moves = []
    queue = deque([start])
    while queue:
        s = queue.popleft()
        for a in alphabet:
            for t, fam in step(s, a):
                if t not in ids:
                    ids[t] = len(states)
                    states.append(t)
                    queue.append(t)
                moves.append((ids[s], a, ids[t], fam))
    return states, moves, ids


# ---------------------------------------------------------------- constant patterns


def profile_step(u: str, w: tuple[bool, ...], a: str) -> tuple[bool, ...]:
    """Profile after appending ``a``: bit j says the last j+1 letters equal u[:j+1]."""
    return tuple((a == u[0]) if j == 0 else (w[j - 1] and a == u[j]) for j in range(len(u) - 1))


def window_profiles(u: str, alphabet: Iterable[str] | None = None) -> set[tuple[bool, ...]]:
    """Profiles realised at some position of some nonempty word.

    ``alphabet`` defaults to the letters of ``u`` plus one letter outside it.
    """
    if len(u) < 2:
        raise ValueError("window profiles need a pattern of length at least 2")
    letters = sorted(set(alphabet)) if alphabet is not None else sorted(set(u)) + [None]
    start = tuple(False for _ in u[1:])
    seen: set[tuple[bool, ...]] = set()
    todo = [profile_step(u, start, a) for a in letters]
    while todo:
        w = todo.pop()
        if w in seen:
            continue
        seen.add(w)
        todo.extend(profile_step(u, w, a) for a in letters)
    return seen


def build_parsing_automaton_const(u: str, alphabet: Iterable[str]) -> ParsingAutomaton:
    if len(u) < 2:
        raise ValueError("constant parsing automaton needs |u| >= 2")
    k = len(u)
    letters = sorted(set(alphabet) | set(u))
    blank = tuple(False for _ in range(k - 1))

    def guard(w, a) -> bool:
        return not w[k - 2] or a != u[k - 1]

    def step(s, a):
        out = []
        if s == "q0":
            w2 = profile_step(u, blank, a)
            out.append((("search", w2), "q0-search"))
            if a == u[0]:
                out.append((("verify", 1, w2), "q0-verify"))
        elif s[0] == "search":
            w = s[1]
            if guard(w, a):
                w2 = profile_step(u, w, a)
                out.append((("search", w2), "search-search"))
                if a == u[0]:
                    out.append((("verify", 1, w2), "search-verify"))
        else:
            _, j, w = s
            if j < k - 1:
                if w[j - 1] and a == u[j] and guard(w, a):
                    out.append((("verify", j + 1, profile_step(u, w, a)), "verify-verify"))
            elif w[k - 2] and a == u[k - 1]:
                out.append(("q0", "verify-q0"))
        return out

    states, moves, _ = _explore("q0", letters, step)
    finals = frozenset(i for i, s in enumerate(states) if s == "q0" or s[0] == "search")
    return ParsingAutomaton("const", tuple(states), tuple(moves), 0, finals)


# ---------------------------------------------------------------- regex patterns


def red(sets: Sequence[Iterable[int]]) -> tuple[frozenset[int], ...]:
    """Left-to-right reduction: subtract earlier sets, drop what becomes empty."""
    out: list[frozenset[int]] = []
    seen: set[int] = set()
    for s in sets:
        rest = frozenset(s) - seen
        if rest:
            out.append(rest)
            seen |= rest
    return tuple(out)


def epsilon_member(r: rx.Regex) -> bool:
    return rx.nullable(r)


def normalize_initial(a: Nfa) -> Nfa:
    """Same language, with an initial state that has no incoming transitions."""
    g = a.graph
    if a.initial not in g.pred:
        return a
    fresh = g.n
    extra = {(fresh, sym, r) for q, sym, r in g.transitions if q == a.initial}
    labels = None if g.labels is None else g.labels + ("init",)
    finals = a.finals | ({fresh} if a.initial in a.finals else set())
    return Nfa(TransitionGraph(g.n + 1, g.transitions | extra, labels), fresh, frozenset(finals))


def build_parsing_automaton_regex(a0: Nfa, alphabet: Iterable[str]) -> ParsingAutomaton:
    """Searchleft/searchlong automaton for a pattern automaton rejecting the empty word."""
    if a0.graph.has_epsilon():
        raise ValueError("pattern automaton must be epsilon-free")
    if a0.initial in a0.finals:
        raise ValueError("pattern must reject the empty word")
    a0 = normalize_initial(a0)
    g, q00, fin = a0.graph, a0.initial, a0.finals
    letters = sorted(set(alphabet))
    empty: frozenset[int] = frozenset()

    def d(states, a) -> frozenset[int]:
        return g.step(states, a)

    def step(s, a):
        out = []
        if s[0] == "left":
            _, rho, forb = s
            dj = [d(x, a) for x in rho]
            big_d = empty.union(*dj)
            d0 = d((q00,), a)
            ds = d(forb, a)
            if ds & fin or big_d & fin:
                return out
            if not (d0 & fin):
                out.append((("left", red(dj + [d0]), ds), "continue-left"))
            if d0 - (ds | big_d):
                out.append((("long", d0, ds | big_d), "start-long"))
            if d0 & fin:
                out.append((("left", (), ds | big_d | d0), "letter-match"))
        else:
            _, s1, forb = s
            ds = d(forb, a)
            d1 = d(s1, a)
            if ds & fin:
                return out
            if d1 - ds:
                out.append((("long", d1, ds), "continue-long"))
            if d1 & fin:
                out.append((("left", (), ds | d1), "end-long"))
        return out

    states, moves, _ = _explore(("left", (), empty), letters, step)
    finals = frozenset(i for i, s in enumerate(states) if s[0] == "left")
    return ParsingAutomaton("regex", tuple(states), tuple(moves), 0, finals)


def build_parsing_automaton_nullable(a0: Nfa, alphabet: Iterable[str]) -> ParsingAutomaton:
    """Parser for a pattern that accepts the empty word.

    Such a pattern matches at every position, so a word splits as
    ``m1 a1 m2 a2 ... mn an m(n+1)`` where each ``mi`` is the longest prefix
    of the remaining suffix in the pattern language (possibly empty) and
    ``ai`` is copied verbatim. A state is ``(threads, forbidden)``: the pattern
    states reached by the current match, and the states of finished matches
    that must never reach a final state (which would make them longer).
    """
    if a0.graph.has_epsilon():
        raise ValueError("pattern automaton must be epsilon-free")
    if a0.initial not in a0.finals:
        raise ValueError("pattern must accept the empty word")
    a0 = normalize_initial(a0)
    g, q00, fin = a0.graph, a0.initial, a0.finals
    letters = sorted(set(alphabet))

    def step(s, a):
        _, threads, forb = s
        out = []
        ds = g.step(forb, a)
        d1 = g.step(threads, a) - ds
        if d1 and not ds & fin:
            out.append((("match", d1, ds), "extend"))
        if threads & fin:
            after = g.step(forb | threads, a)
            if not after & fin:
                out.append((("match", frozenset([q00]), after), "end-then-letter"))
        return out

    start = ("match", frozenset([q00]), frozenset())
    states, moves, _ = _explore(start, letters, step)
    finals = frozenset(i for i, s in enumerate(states) if s[1] & fin)
    return ParsingAutomaton("nullable", tuple(states), tuple(moves), 0, finals)


_cache: dict[tuple, ParsingAutomaton] = {}


def parsing_automaton(pattern: rx.Regex | str, alphabet: Iterable[str]) -> ParsingAutomaton:
    """Cached parser for a constant word (``str``, length >= 2) or a regex."""
    letters = tuple(sorted(set(alphabet)))
    key = (pattern, letters)
    hit = _cache.get(key)
    if hit is not None:
        return hit
    if isinstance(pattern, str):
        pa = build_parsing_automaton_const(pattern, letters)
    elif rx.nullable(pattern):
        pa = build_parsing_automaton_nullable(compile_regex(pattern), letters)
    else:
        pa = build_parsing_automaton_regex(compile_regex(pattern), letters)
    if len(_cache) < 1024:
        _cache[key] = pa
    return pa


def run_spans(pa: ParsingAutomaton, word: str) -> list[tuple[int, int]]:
    """Match spans (start, length) read off the unique accepting run.

    Raises ValueError unless there is exactly one accepting run.
    """
    runs = pa.runs(word, limit=2)
    if len(runs) != 1:
        raise ValueError(f"expected one accepting run on {word!r}, found {len(runs)}")
    spans = []
    start = None
    for i, (_, fam) in enumerate(runs[0]):
        if fam in ("q0-verify", "search-verify", "start-long"):
            start = i
        elif fam in ("verify-q0", "end-long"):
            spans.append((start, i + 1 - start))
            start = None
        elif fam == "letter-match":
            spans.append((i, 1))
        elif pa.kind == "nullable":
            if fam == "extend":
                start = i if start is None else start
            else:
                spans.append((i, 0) if start is None else (start, i - start))
                start = None
    if pa.kind == "nullable":
        n = len(word)
        spans.append((n, 0) if start is None else (start, n - start))
    return spans
