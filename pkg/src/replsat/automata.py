"""Finite automata over dense integer states.

A :class:`TransitionGraph` is a labelled graph without initial or final
states. An :class:`Nfa` pins one initial state and a set of finals on top of
a graph, so many automata can share one graph (the elimination engine relies
on this heavily).

Symbols are one-character strings; words are ``str``. ``None`` labels an
epsilon transition.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product as _cartesian
from typing import Hashable, Iterable, Iterator, Sequence

from . import regex as rx

EPS = None


class ResourceExhausted(Exception):
    """A configured state budget was exceeded."""


@dataclass(frozen=True, eq=False)
class TransitionGraph:
    """Immutable labelled graph on states ``0 .. n-1``.

    Equality is identity: graphs are shared by reference and used as cache
    keys, so structural hashing of large transition sets is avoided.
    """

    n: int
    transitions: frozenset
    labels: tuple | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        for q, _, r in self.transitions:
            if not (0 <= q < self.n and 0 <= r < self.n):
                raise ValueError(f"transition ({q}, {r}) leaves states 0..{self.n - 1}")

    @cached_property
    def succ(self) -> dict[int, dict[str | None, tuple[int, ...]]]:
        out: dict[int, dict[str | None, list[int]]] = {}
        for q, a, r in sorted(self.transitions, key=_tkey):
            out.setdefault(q, {}).setdefault(a, []).append(r)
        return {q: {a: tuple(rs) for a, rs in m.items()} for q, m in out.items()}

    @cached_property
    def pred(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for q, _, r in sorted(self.transitions, key=_tkey):
            out.setdefault(r, []).append(q)
        return out

    @cached_property
    def symbols(self) -> tuple[str, ...]:
        return tuple(sorted({a for _, a, _ in self.transitions if a is not EPS}))

    def step(self, states: Iterable[int], a: str) -> frozenset[int]:
        out: set[int] = set()
        succ = self.succ
        for q in states:
            out.update(succ.get(q, {}).get(a, ()))
        return frozenset(out)

    def has_epsilon(self) -> bool:
        return any(a is EPS for _, a, _ in self.transitions)

    def closure(self, states: Iterable[int]) -> frozenset[int]:
        seen = set(states)
        todo = list(seen)
        while todo:
            q = todo.pop()
            for r in self.succ.get(q, {}).get(EPS, ()):
                if r not in seen:
                    seen.add(r)
                    todo.append(r)
        return frozenset(seen)

    def reachable(self, sources: Iterable[int]) -> frozenset[int]:
        seen = set(sources)
        todo = list(seen)
        while todo:
            q = todo.pop()
            for rs in self.succ.get(q, {}).values():
                for r in rs:
                    if r not in seen:
                        seen.add(r)
                        todo.append(r)
        return frozenset(seen)

    def coreachable(self, targets: Iterable[int]) -> frozenset[int]:
        seen = set(targets)
        todo = list(seen)
        while todo:
            r = todo.pop()
            for q in self.pred.get(r, ()):
                if q not in seen:
                    seen.add(q)
                    todo.append(q)
        return frozenset(seen)

    def label(self, q: int) -> str:
        if self.labels is None:
            return f"q{q}"
        return str(self.labels[q])


def _tkey(t):
    q, a, r = t
    return (q, "" if a is None else "\x01" + a, r)


@dataclass(frozen=True, eq=False)
class Nfa:
    graph: TransitionGraph
    initial: int
    finals: frozenset[int]

    def __post_init__(self):
        if not 0 <= self.initial < self.graph.n or any(not 0 <= f < self.graph.n for f in self.finals):
            raise ValueError(f"endpoint outside states 0..{self.graph.n - 1}")

    @property
    def n(self) -> int:
        return self.graph.n

    def run_states(self, word: str) -> frozenset[int]:
        g = self.graph
        cur = g.closure([self.initial])
        for a in word:
            cur = g.closure(g.step(cur, a))
            if not cur:
                break
        return cur

    def accepts(self, word: str) -> bool:
        return bool(self.run_states(word) & self.finals)

    def is_empty(self) -> bool:
        return not (self.graph.reachable([self.initial]) & self.finals)

    def to_dot(self, name: str = "nfa") -> str:
        return "\n".join(dot_lines(self.graph, [self.initial], self.finals, name))


def dot_lines(
    graph: TransitionGraph,
    initials: Iterable[int],
    finals: Iterable[int],
    name: str,
) -> Iterator[str]:
    finals = set(finals)
    yield f"digraph {_gvquote(name)} {{"
    yield "  rankdir=LR;"
    yield '  node [shape=circle, fontname="monospace"];'
    for i, q in enumerate(sorted(set(initials))):
        yield f'  __start{i} [shape=point, label=""];'
        yield f"  __start{i} -> n{q};"
    for q in range(graph.n):
        shape = "doublecircle" if q in finals else "circle"
        yield f"  n{q} [shape={shape}, label={_gvquote(graph.label(q))}];"
    merged: dict[tuple[int, int], list[str]] = {}
    for q, a, r in sorted(graph.transitions, key=_tkey):
        merged.setdefault((q, r), []).append("ε" if a is EPS else a)
    for (q, r), syms in sorted(merged.items()):
        yield f"  n{q} -> n{r} [label={_gvquote(','.join(syms))}];"
    yield "}"


def _gvquote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def with_endpoints(graph: TransitionGraph, start: int, ends: int | Iterable[int]) -> Nfa:
    """View ``graph`` as an automaton from ``start`` to ``ends``."""
    if isinstance(ends, int):
        ends = (ends,)
    return Nfa(graph, start, frozenset(ends))


class _Builder:
    """Assigns dense ids to hashable state keys in discovery order."""

    def __init__(self):
        self.ids: dict[Hashable, int] = {}
        self.keys: list[Hashable] = []
        self.trans: set[tuple[int, str | None, int]] = set()

    def state(self, key: Hashable) -> int:
        sid = self.ids.get(key)
        if sid is None:
            sid = self.ids[key] = len(self.keys)
            self.keys.append(key)
        return sid

    def graph(self, labels: Sequence | None = None) -> TransitionGraph:
        return TransitionGraph(len(self.keys), frozenset(self.trans), tuple(labels) if labels else None)


def _thompson(r: rx.Regex, b: _Builder) -> tuple[int, int]:
    s = b.state(len(b.keys))
    t = b.state(len(b.keys))
    if isinstance(r, rx.Empty):
        pass
    elif isinstance(r, rx.Epsilon):
        b.trans.add((s, EPS, t))
    elif isinstance(r, rx.Lit):
        b.trans.add((s, r.symbol, t))
    elif isinstance(r, rx.Union):
        for part in (r.left, r.right):
            ps, pt = _thompson(part, b)
            b.trans.update({(s, EPS, ps), (pt, EPS, t)})
    elif isinstance(r, rx.Concat):
        ls, lt = _thompson(r.left, b)
        rs, rt = _thompson(r.right, b)
        b.trans.update({(s, EPS, ls), (lt, EPS, rs), (rt, EPS, t)})
    elif isinstance(r, rx.Star):
        ps, pt = _thompson(r.inner, b)
        b.trans.update({(s, EPS, ps), (pt, EPS, t), (s, EPS, t), (pt, EPS, ps)})
    else:
        raise TypeError(f"not a regex node: {r!r}")
    return s, t


def remove_epsilon(a: Nfa) -> Nfa:
    """Equivalent epsilon-free automaton on the same states."""
    g, closures = epsilon_free_graph(a.graph)
    finals = frozenset(q for q in range(g.n) if closures[q] & a.finals)
    return Nfa(g, a.initial, finals)


def epsilon_free_graph(g: TransitionGraph) -> tuple[TransitionGraph, list[frozenset[int]]]:
    """Drop epsilon edges by saturating letters; also returns each state's closure."""
    closures = [g.closure([q]) for q in range(g.n)]
    trans = set()
    for q in range(g.n):
        for p in closures[q]:
            for a, rs in g.succ.get(p, {}).items():
                if a is EPS:
                    continue
                for r in rs:
                    trans.add((q, a, r))
    return TransitionGraph(g.n, frozenset(trans), g.labels), closures


def trim(a: Nfa) -> Nfa:
    """Restrict to accessible and co-accessible states, renumbered in BFS order.

    An automaton with empty language becomes a single non-final state.
    """
    g = a.graph
    useful = g.reachable([a.initial]) & g.coreachable(a.finals)
    if a.initial not in useful:
        return Nfa(TransitionGraph(1, frozenset()), 0, frozenset())
    order = {a.initial: 0}
    queue = deque([a.initial])
    while queue:
        q = queue.popleft()
        for sym in sorted(k for k in g.succ.get(q, {}) if k is not EPS) + (
            [EPS] if EPS in g.succ.get(q, {}) else []
        ):
            for r in g.succ[q][sym]:
                if r in useful and r not in order:
                    order[r] = len(order)
                    queue.append(r)
    trans = frozenset(
        (order[q], s, order[r]) for q, s, r in g.transitions if q in order and r in order
    )
    labels = None
    if g.labels is not None:
        inv = sorted(order, key=order.get)
        labels = tuple(g.labels[q] for q in inv)
    return Nfa(
        TransitionGraph(len(order), trans, labels),
        0,
        frozenset(order[q] for q in a.finals if q in order),
    )


_compile_cache: dict[rx.Regex, Nfa] = {}


def compile_regex(r: rx.Regex) -> Nfa:
    """Trimmed epsilon-free automaton recognising ``r``."""
    hit = _compile_cache.get(r)
    if hit is not None:
        return hit
    b = _Builder()
    s, t = _thompson(r, b)
    raw = Nfa(b.graph(), s, frozenset([t]))
    out = trim(remove_epsilon(raw))
    if len(_compile_cache) < 4096:
        _compile_cache[r] = out
    return out


def product(a: Nfa, b: Nfa, max_states: int | None = None) -> Nfa:
    """Synchronous product over reachable pairs; requires epsilon-free inputs."""
    ids = {(a.initial, b.initial): 0}
    keys = [(a.initial, b.initial)]
    trans = set()
    queue = deque(keys)
    while queue:
        p, q = queue.popleft()
        src = ids[(p, q)]
        sa, sb = a.graph.succ.get(p, {}), b.graph.succ.get(q, {})
        for sym in sorted(k for k in sa if k is not EPS and k in sb):
            for p2 in sa[sym]:
                for q2 in sb[sym]:
                    key = (p2, q2)
                    if key not in ids:
                        ids[key] = len(keys)
                        keys.append(key)
                        queue.append(key)
                        if max_states is not None and len(keys) > max_states:
                            raise ResourceExhausted("product state budget exceeded")
                    trans.add((src, sym, ids[key]))
    finals = frozenset(i for (p, q), i in ids.items() if p in a.finals and q in b.finals)
    labels = tuple(f"({a.graph.label(p)},{b.graph.label(q)})" for p, q in keys)
    return Nfa(TransitionGraph(len(keys), frozenset(trans), labels), 0, finals)


@dataclass(frozen=True)
class Witness:
    word: str
    run: tuple[tuple[int, ...], ...]


def shortest_witness(
    automata: Sequence[Nfa],
    alphabet: Iterable[str] | None = None,
    max_states: int | None = None,
) -> Witness | None:
    """Shortest, then lexicographically least (in ``alphabet`` order), word accepted by every automaton.

    The search is a breadth-first exploration of the implicit product of the
    subset constructions, so the full product is never built. Automata sharing
    a graph and initial state share their subset component. ``run`` holds one
    accepting state per automaton at every position. Inputs must be
    epsilon-free. An empty sequence accepts every word, so the empty word is
    returned.
    """
    automata = list(automata)
    if not automata:
        return Witness("", ((),))
    groups: dict[tuple[int, int], int] = {}
    slot_of: list[int] = []
    heads: list[tuple[TransitionGraph, int]] = []
    for a in automata:
        key = (id(a.graph), a.initial)
        if key not in groups:
            groups[key] = len(heads)
            heads.append((a.graph, a.initial))
        slot_of.append(groups[key])
    if alphabet is None:
        syms = sorted(set().union(*(set(a.graph.symbols) for a in automata)))
    else:
        syms = list(dict.fromkeys(alphabet))

    def accepting(state: tuple[frozenset[int], ...]) -> bool:
        return all(state[slot_of[i]] & a.finals for i, a in enumerate(automata))

    # prune dead subsets early: a subset that cannot reach some automaton's
    # finals makes the whole tuple dead.
    live = [a.graph.coreachable(a.finals) for a in automata]

    def alive(state) -> bool:
        return all(state[slot_of[i]] & live[i] for i in range(len(automata)))

    start = tuple(frozenset([q]) for _, q in heads)
    if not alive(start):
        return None
    parent: dict[tuple, tuple | None] = {start: None}
    queue = deque([start])
    found = None
    while queue:
        cur = queue.popleft()
        if accepting(cur):
            found = cur
            break
        for a in syms:
            nxt = tuple(g.step(s, a) for (g, _), s in zip(heads, cur))
            if nxt in parent or not alive(nxt):
                continue
            parent[nxt] = (cur, a)
            if max_states is not None and len(parent) > max_states:
                raise ResourceExhausted("witness search state budget exceeded")
            queue.append(nxt)
    if found is None:
        return None
    letters = []
    node = found
    while parent[node] is not None:
        node, a = parent[node]
        letters.append(a)
    word = "".join(reversed(letters))
    runs = [accepting_run(a, word) for a in automata]
    return Witness(word, tuple(zip(*runs)))


def accepting_run(a: Nfa, word: str) -> tuple[int, ...]:
    """Least accepting run (state per position) of an epsilon-free automaton."""
    g = a.graph
    layers = [frozenset([a.initial])]
    for sym in word:
        layers.append(g.step(layers[-1], sym))
    ends = sorted(layers[-1] & a.finals)
    if not ends:
        raise ValueError(f"word {word!r} is not accepted")
    run = [ends[0]]
    for i in range(len(word) - 1, -1, -1):
        target = run[-1]
        prev = min(q for q in layers[i] if target in g.succ.get(q, {}).get(word[i], ()))
        run.append(prev)
    return tuple(reversed(run))


def words_up_to(alphabet: Iterable[str], max_len: int) -> Iterator[str]:
    """All words of length at most ``max_len``, length-lexicographic in the given letter order."""
    syms = list(dict.fromkeys(alphabet))
    for n in range(max_len + 1):
        for t in _cartesian(syms, repeat=n):
            yield "".join(t)
