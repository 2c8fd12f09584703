"""Executable semantics of replaceall under leftmost-longest matching.

Patterns may be given as a :class:`~replsat.regex.Regex` or as a plain
``str``, which is read as a constant word (``""`` is the empty-word pattern).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Union

from . import regex as rx
from .automata import compile_regex

Pattern = Union[rx.Regex, str]


@dataclass(frozen=True)
class MatchSpan:
    start: int
    length: int

    @property
    def end(self) -> int:
        return self.start + self.length


@dataclass(frozen=True)
class Decomposition:
    """Subject split into gaps and matches: ``g0 m1 g1 m2 ... gk``."""

    subject: str
    spans: tuple[MatchSpan, ...]

    def gaps(self) -> tuple[str, ...]:
        out, pos = [], 0
        for s in self.spans:
            out.append(self.subject[pos : s.start])
            pos = s.end
        out.append(self.subject[pos:])
        return tuple(out)

    def parts(self) -> Iterator[tuple[str, str]]:
        """Yield ``("gap", text)`` and ``("match", text)`` left to right."""
        gaps = self.gaps()
        for gap, span in zip(gaps, self.spans):
            yield "gap", gap
            yield "match", self.subject[span.start : span.end]
        yield "gap", gaps[-1]

    def splice(self, replacement: str) -> str:
        return replacement.join(self.gaps())


def as_regex(e: Pattern) -> rx.Regex:
    return rx.literal(e) if isinstance(e, str) else e


def _longest_from(v: str, i: int, e: rx.Regex) -> int | None:
    """Length of the longest factor of ``v`` starting at ``i`` in L(e)."""
    a = compile_regex(e)
    g = a.graph
    cur = frozenset([a.initial])
    best = 0 if a.initial in a.finals else None
    for k in range(i, len(v)):
        cur = g.step(cur, v[k])
        if not cur:
            break
        if cur & a.finals:
            best = k + 1 - i
    return best


def leftmost_longest_match(v: str, e: Pattern) -> MatchSpan | None:
    e = as_regex(e)
    if rx.nullable(e):
        return MatchSpan(0, _longest_from(v, 0, e))
    for i in range(len(v)):
        n = _longest_from(v, i, e)
        if n is not None:
            return MatchSpan(i, n)
    return None


def replace_all(u: str, e: Pattern, v: str) -> str:
    """Replace every leftmost-longest match of ``e`` in ``u`` by ``v``."""
    e = as_regex(e)
    out: list[str] = []
    if rx.nullable(e):
        i = 0
        while True:
            n = _longest_from(u, i, e)
            out.append(v)
            if i + n == len(u):
                return "".join(out)
            out.append(u[i + n])
            i += n + 1
    return match_decomposition(u, e).splice(v)


def match_decomposition(v: str, e: Pattern) -> Decomposition:
    e = as_regex(e)
    if rx.nullable(e):
        raise ValueError("match_decomposition needs a pattern that rejects the empty word")
    spans = []
    pos = 0
    while pos < len(v):
        m = leftmost_longest_match(v[pos:], e)
        if m is None:
            break
        spans.append(MatchSpan(pos + m.start, m.length))
        pos += m.start + m.length
    return Decomposition(v, tuple(spans))


# Reference implementation: a literal transcription of the recursive
# definition on top of a backtracking membership test that does not use
# automata. Slow; meant for differential testing.


def regex_matches(e: rx.Regex, w: str) -> bool:
    """Membership by structural recursion over ``e``."""

    @lru_cache(maxsize=None)
    def m(node: rx.Regex, i: int, j: int) -> bool:
        if isinstance(node, rx.Empty):
            return False
        if isinstance(node, rx.Epsilon):
            return i == j
        if isinstance(node, rx.Lit):
            return j == i + 1 and w[i] == node.symbol
        if isinstance(node, rx.Union):
            return m(node.left, i, j) or m(node.right, i, j)
        if isinstance(node, rx.Concat):
            return any(m(node.left, i, k) and m(node.right, k, j) for k in range(i, j + 1))
        if isinstance(node, rx.Star):
            if i == j:
                return True
            return any(m(node.inner, i, k) and m(node, k, j) for k in range(i + 1, j + 1))
        raise TypeError(node)

    return m(e, 0, len(w))


def _reference_match(v: str, e: rx.Regex) -> tuple[int, int] | None:
    for i in range(len(v) + 1):
        ends = [j for j in range(i, len(v) + 1) if regex_matches(e, v[i:j])]
        if ends:
            return i, max(ends)
    return None


def replace_all_reference(u: str, e: Pattern, v: str) -> str:
    e = as_regex(e)
    m = _reference_match(u, e)
    if m is None:
        return u
    i, j = m
    if rx.nullable(e):
        # the leftmost match of a nullable pattern always starts at 0
        if j == len(u):
            return v
        return v + u[j] + replace_all_reference(u[j + 1 :], e, v)
    return u[:i] + v + replace_all_reference(u[j:], e, v)
