"""Eliminating replaceall definitions one vertex at a time.

Every variable carries a list of succinct constraints ``(graph, pairs)``;
a pair ``(start, ends)`` demands that the variable's value labels a path in
``graph`` from ``start`` to one of ``ends``. Eliminating ``x := replaceall(y,
pattern, z)`` turns each constraint of ``x`` into one for ``y`` (a rewritten
graph, see ``rewrite``) and, through a guessed set ``tz`` of state pairs, one
for ``z``: the value of ``z`` must label a path ``q -> q'`` for every
``(q, q')`` in ``tz``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from . import model as m
from . import regex as rx
from .automata import (
    EPS,
    Nfa,
    ResourceExhausted,
    TransitionGraph,
    compile_regex,
    epsilon_free_graph,
    shortest_witness,
)
from .parsing import ROLES, ParsingAutomaton, parsing_automaton

Pair = tuple[int, frozenset[int]]
Guess = frozenset[tuple[int, int]]


@dataclass(frozen=True, eq=False)
class SuccinctConstraint:
    graph: TransitionGraph
    pairs: tuple[Pair, ...]

    @classmethod
    def make(cls, graph: TransitionGraph, pairs: Iterable[tuple[int, Iterable[int]]]) -> "SuccinctConstraint":
        canon = sorted({(p, frozenset(e)) for p, e in pairs}, key=lambda pe: (pe[0], sorted(pe[1])))
        return cls(graph, tuple(canon))

    @property
    def key(self) -> tuple:
        return (id(self.graph), self.pairs)

    def automata(self) -> list[Nfa]:
        return [Nfa(self.graph, p, ends) for p, ends in self.pairs]

    def __repr__(self) -> str:
        body = ", ".join(f"({p}, {sorted(e)})" for p, e in self.pairs)
        return f"<{self.graph.n} states: {body}>"


@dataclass(frozen=True)
class PatternSpec:
    kind: str  # "letter", "const", "epsilon", "regex" or "nullable"
    word: str | None = None
    regex: rx.Regex | None = None

    @classmethod
    def of(cls, p: m.Pattern) -> "PatternSpec":
        if isinstance(p, m.VarPattern):
            raise ValueError("variable patterns are not supported")
        w = m.pattern_word(p)
        if w is not None:
            if len(w) == 1:
                return cls("letter", word=w)
            if len(w) > 1:
                return cls("const", word=w)
            return cls("epsilon")
        r = p.regex
        return cls("nullable" if rx.nullable(r) else "regex", regex=r)

    def as_regex(self) -> rx.Regex:
        if self.regex is not None:
            return self.regex
        return rx.literal(self.word or "")

    def __str__(self) -> str:
        if self.regex is not None:
            return str(m.RegexPattern(self.regex))
        return m._quote(self.word or "")


@dataclass(frozen=True)
class Step:
    """A definition ``var := replaceall(subject, pattern, replacement)`` over vertex names."""

    var: str
    subject: str
    pattern: PatternSpec
    replacement: str


@dataclass(frozen=True, eq=False)
class Problem:
    """A concat-free straight-line formula in the shape the engine works on."""

    alphabet: tuple[str, ...]
    working: tuple[str, ...]
    steps: tuple[Step, ...]
    memberships: tuple[tuple[str, Nfa], ...]
    constants: Mapping[str, str]
    variables: tuple[str, ...]

    @classmethod
    def from_formula(cls, f: m.Formula) -> "Problem":
        f = m.desugar_concat(f)
        ordered = m.check_straight_line(f)
        defs, consts = m.constant_vertices(m.Formula(f.alphabet, tuple(ordered), fresh=f.fresh))
        steps = tuple(
            Step(d.var, d.rhs.subject.name, PatternSpec.of(d.rhs.pattern), d.rhs.replacement.name)
            for d in defs
        )
        variables = dict.fromkeys(f.variables)
        variables.update(dict.fromkeys(consts))
        members = tuple((mb.var, compile_regex(mb.regex)) for mb in f.memberships)
        return cls(f.alphabet, f.working_alphabet, steps, members, consts, tuple(variables))

    @property
    def defined(self) -> frozenset[str]:
        return frozenset(s.var for s in self.steps)

    @property
    def sources(self) -> tuple[str, ...]:
        d = self.defined
        return tuple(v for v in self.variables if v not in d and v not in self.constants)

    def letters_for(self, var: str) -> tuple[str, ...]:
        """Letters a value of ``var`` may use."""
        if var in self.constants:
            return tuple(sorted(set(self.constants[var])))
        if var in self.defined:
            return self.working
        return self.alphabet


@dataclass(frozen=True, eq=False)
class ConstraintEnv:
    constraints: Mapping[str, tuple[SuccinctConstraint, ...]]
    remaining: tuple[Step, ...]

    def of(self, var: str) -> tuple[SuccinctConstraint, ...]:
        return self.constraints.get(var, ())

    def next_vertex(self) -> Step | None:
        """Last remaining definition whose variable no remaining definition uses."""
        used = {s.subject for s in self.remaining} | {s.replacement for s in self.remaining}
        for s in reversed(self.remaining):
            if s.var not in used:
                return s
        return None

    def total_constraints(self) -> int:
        return sum(len(cs) for cs in self.constraints.values())


@dataclass(frozen=True)
class GuessTrace:
    finals: tuple[int | None, ...]
    steps: tuple[tuple[str, tuple[Guess, ...]], ...] = ()

    def extend(self, var: str, guesses: tuple[Guess, ...]) -> "GuessTrace":
        return GuessTrace(self.finals, self.steps + ((var, guesses),))

    def dump(self) -> str:
        lines = ["finals " + " ".join("*" if f is None else str(f) for f in self.finals)]
        for var, guesses in self.steps:
            parts = ["{" + ",".join(f"({q},{r})" for q, r in sorted(g)) + "}" for g in guesses]
            lines.append(f"eliminate {var} " + " ".join(parts))
        return "\n".join(lines)


def word_graph(word: str) -> TransitionGraph:
    return TransitionGraph(len(word) + 1, frozenset((i, a, i + 1) for i, a in enumerate(word)))


def final_choices(problem: Problem) -> list[tuple[int, ...]]:
    """Every way to pick one final state per membership, in canonical order."""
    out: list[tuple[int, ...]] = [()]
    for _, a in problem.memberships:
        out = [c + (f,) for c in out for f in sorted(a.finals)]
    return out


def initial_env(problem: Problem, finals: Sequence[int | None]) -> ConstraintEnv:
    """Constraints from memberships (``None`` keeps all finals) and constants."""
    cons: dict[str, list[SuccinctConstraint]] = {}
    for (var, a), f in zip(problem.memberships, finals):
        ends = a.finals if f is None else frozenset([f])
        cons.setdefault(var, []).append(SuccinctConstraint.make(a.graph, [(a.initial, ends)]))
    for var, word in problem.constants.items():
        cons.setdefault(var, []).append(SuccinctConstraint.make(word_graph(word), [(0, [len(word)])]))
    return ConstraintEnv({v: tuple(cs) for v, cs in cons.items()}, problem.steps)


# ---------------------------------------------------------------- rewriting


@dataclass(frozen=True, eq=False)
class Rewrite:
    """Rewritten subject-side graph plus the map from old pairs to new ones."""

    graph: TransitionGraph
    starts: Mapping[int, int]
    end_map: Mapping[int, frozenset[int]]

    def lift(self, pair: Pair) -> Pair:
        p, ends = pair
        new_ends = frozenset().union(*(self.end_map.get(f, frozenset()) for f in ends))
        return self.starts[p], new_ends


def _by_source(tz: Iterable[tuple[int, int]]) -> dict[int, list[int]]:
    out: dict[int, list[int]] = {}
    for q, r in sorted(tz):
        out.setdefault(q, []).append(r)
    return out


def build_B_single(t: TransitionGraph, a: str, tz: Guess) -> Rewrite:
    """Drop the a-edges of ``t`` and add ``q -a-> q'`` for every pair in ``tz``."""
    trans = {(q, b, r) for q, b, r in t.transitions if b != a}
    trans |= {(q, a, r) for q, r in tz}
    ident = {q: q for q in range(t.n)}
    return Rewrite(
        TransitionGraph(t.n, frozenset(trans), t.labels),
        ident,
        {q: frozenset([q]) for q in range(t.n)},
    )


def build_B_epsilon(t: TransitionGraph, tz: Guess) -> Rewrite:
    """Rewrite for the pattern matching only the empty word.

    The result is ``v a1 v a2 ... an v``: exactly one ``tz`` jump before each
    letter and one at the end. State ``2q`` still owes a jump, ``2q+1`` has
    made it; epsilon jumps are then saturated away.
    """
    trans: set[tuple[int, str | None, int]] = set()
    for q, r in tz:
        trans.add((2 * q, EPS, 2 * r + 1))
    for q, a, r in t.transitions:
        trans.add((2 * q + 1, a, 2 * r))
    labels = tuple(f"{t.label(q)}{'+' if layer else '-'}" for q in range(t.n) for layer in (0, 1))
    layered = TransitionGraph(2 * t.n, frozenset(trans), labels)
    g, closures = epsilon_free_graph(layered)
    end_map = {
        f: frozenset(s for s in range(g.n) if 2 * f + 1 in closures[s]) for f in range(t.n)
    }
    return Rewrite(g, {q: 2 * q for q in range(t.n)}, end_map)


def build_B_parsed(
    t: TransitionGraph,
    pa: ParsingAutomaton,
    tz: Guess,
    starts: Iterable[int],
    max_states: int | None = None,
) -> Rewrite:
    """Product of ``t`` with a parsing automaton, with matches replaced by ``tz`` jumps.

    Only states reachable from ``(q, initial)`` for ``q`` in ``starts`` are built.
    """
    jumps = _by_source(tz)
    moves = pa.moves_from()
    ids: dict[tuple[int, int], int] = {}
    keys: list[tuple[int, int]] = []
    trans: set[tuple[int, str, int]] = set()

    def sid(key):
        i = ids.get(key)
        if i is None:
            i = ids[key] = len(keys)
            keys.append(key)
            queue.append(key)
            if max_states is not None and len(keys) > max_states:
                raise ResourceExhausted("rewritten automaton exceeds the state budget")
        return i

    queue: deque = deque()
    start_ids = {q: sid((q, pa.initial)) for q in sorted(set(starts))}
    while queue:
        q, p = queue.popleft()
        src = ids[(q, p)]
        tsucc = t.succ.get(q, {})
        for a, p2, fam in moves.get(p, ()):
            role = ROLES[fam]
            if role == "read":
                targets = tsucc.get(a, ())
            elif role == "stay":
                targets = (q,) if q in jumps else ()
            elif role == "jump":
                targets = jumps.get(q, ())
            else:
                targets = [r for q2 in jumps.get(q, ()) for r in t.succ.get(q2, {}).get(a, ())]
            for r in targets:
                trans.add((src, a, sid((r, p2))))

    end_map: dict[int, set[int]] = {}
    for (q, p), i in ids.items():
        if p not in pa.finals:
            continue
        if pa.kind == "nullable":
            for f in jumps.get(q, ()):
                end_map.setdefault(f, set()).add(i)
        else:
            end_map.setdefault(q, set()).add(i)
    labels = tuple(f"({t.label(q)}, {pa.nfa.graph.label(p)})" for q, p in keys)
    return Rewrite(
        TransitionGraph(len(keys), frozenset(trans), labels),
        start_ids,
        {f: frozenset(s) for f, s in end_map.items()},
    )


def build_B_const(t: TransitionGraph, u: str, tz: Guess, alphabet: Iterable[str], starts=None) -> Rewrite:
    pa = parsing_automaton(u, alphabet)
    return build_B_parsed(t, pa, tz, range(t.n) if starts is None else starts)


def build_B_regex(t: TransitionGraph, e0: rx.Regex, tz: Guess, alphabet: Iterable[str], starts=None) -> Rewrite:
    pa = parsing_automaton(e0, alphabet)
    return build_B_parsed(t, pa, tz, range(t.n) if starts is None else starts)


@dataclass
class Context:
    """Per-solve caches, budgets and counters."""

    working: tuple[str, ...]
    max_states: int | None = None
    rewrites: dict = field(default_factory=dict)
    emptiness: dict = field(default_factory=dict)
    guesses: dict = field(default_factory=dict)
    keep: list = field(default_factory=list)
    largest_graph: int = 0
    rewrites_built: int = 0

    def rewrite(self, c: SuccinctConstraint, spec: PatternSpec, tz: Guess) -> Rewrite:
        starts = tuple(sorted({p for p, _ in c.pairs}))
        key = (id(c.graph), spec, tz, starts)
        hit = self.rewrites.get(key)
        if hit is not None:
            return hit
        t = c.graph
        if spec.kind == "letter":
            rw = build_B_single(t, spec.word, tz)
        elif spec.kind == "epsilon":
            rw = build_B_epsilon(t, tz)
        else:
            pat = spec.word if spec.kind == "const" else spec.regex
            pa = parsing_automaton(pat, self.working)
            rw = build_B_parsed(t, pa, tz, starts, self.max_states)
        self.keep.append(t)  # keeps id(t) stable for the cache's lifetime
        self.rewrites[key] = rw
        self.rewrites_built += 1
        self.largest_graph = max(self.largest_graph, rw.graph.n)
        return rw

    def satisfiable(self, cs: Sequence[SuccinctConstraint], letters: Sequence[str]) -> bool:
        key = (tuple(sorted({c.key for c in cs})), tuple(letters))
        hit = self.emptiness.get(key)
        if hit is None:
            automata = [a for c in cs for a in c.automata()]
            hit = shortest_witness(automata, letters, self.max_states) is not None
            self.keep.extend(c.graph for c in cs)
            self.emptiness[key] = hit
        return hit


def eliminate_vertex(
    env: ConstraintEnv, x: str, guesses: Sequence[Guess], ctx: Context
) -> ConstraintEnv:
    """Remove the definition of ``x``, moving its constraints to subject and replacement."""
    step = next((s for s in env.remaining if s.var == x), None)
    if step is None:
        raise ValueError(f"{x} has no remaining definition")
    if any(x in (s.subject, s.replacement) for s in env.remaining):
        raise ValueError(f"{x} is still used by another definition")
    ex = env.of(x)
    if len(guesses) != len(ex):
        raise ValueError(f"need one guess per constraint of {x}: {len(ex)}, got {len(guesses)}")
    y, z = step.subject, step.replacement
    new_y = list(env.of(y))
    new_z = new_y if y == z else list(env.of(z))
    for c, tz in zip(ex, guesses):
        rw = ctx.rewrite(c, step.pattern, frozenset(tz))
        new_y.append(SuccinctConstraint.make(rw.graph, [rw.lift(p) for p in c.pairs]))
        if tz:
            new_z.append(SuccinctConstraint.make(c.graph, [(q, [r]) for q, r in tz]))
    cons = dict(env.constraints)
    cons[y] = _dedupe(new_y)
    cons[z] = _dedupe(new_z)
    return ConstraintEnv(cons, tuple(s for s in env.remaining if s.var != x))


def _dedupe(cs: list[SuccinctConstraint]) -> tuple[SuccinctConstraint, ...]:
    seen: dict[tuple, SuccinctConstraint] = {}
    for c in cs:
        seen.setdefault(c.key, c)
    return tuple(seen.values())


def candidate_guesses(
    env: ConstraintEnv,
    step: Step,
    problem: Problem,
    ctx: Context,
    limit: int | None = None,
) -> list[tuple[Guess, ...]]:
    """Guess tuples worth trying when eliminating ``step``, in canonical order.

    Each candidate is ``(R_w restricted to useful pairs)`` for one word ``w``
    the replacement could take, where ``R_w[j]`` relates states of the j-th
    subject constraint graph joined by a ``w``-labelled path. Only words that
    satisfy the replacement's current constraints are considered. If some
    guess leads to a solution, the candidate built from the replacement's
    value in that solution does too, so nothing is lost by skipping the rest.
    Order: fewer pairs first, then lexicographic.
    """
    ex = env.of(step.var)
    if not ex:
        return [()]
    z = step.replacement
    ez = env.of(z)
    rows, cols = [], []
    for c in ex:
        starts = [p for p, _ in c.pairs]
        ends = frozenset().union(*(e for _, e in c.pairs))
        rows.append(tuple(sorted(c.graph.reachable(starts))))
        cols.append(c.graph.coreachable(ends))
    z_nfas = [a for d in ez for a in d.automata()]
    z_live = [a.graph.coreachable(a.finals) for a in z_nfas]

    def guess_of(rels) -> tuple[Guess, ...]:
        return tuple(
            frozenset((q, r) for q, rs in zip(rows[j], rel) for r in rs) for j, rel in enumerate(rels)
        )

    def advance(state, a):
        rels, zs = state
        new_rels = tuple(
            tuple(ex[j].graph.step(rs, a) & cols[j] for rs in rel) for j, rel in enumerate(rels)
        )
        new_zs = tuple(a_.graph.step(s, a) for a_, s in zip(z_nfas, zs))
        return new_rels, new_zs

    start = (
        tuple(tuple(frozenset([q]) & cols[j] for q in rows[j]) for j in range(len(ex))),
        tuple(frozenset([a.initial]) for a in z_nfas),
    )

    if z in problem.constants:
        state = start
        for a in problem.constants[z]:
            state = advance(state, a)
        found = {guess_of(state[0])} if all(s & a.finals for s, a in zip(state[1], z_nfas)) else set()
    else:
        letters = problem.letters_for(z)
        seen = {start}
        queue = deque([start])
        found = set()
        while queue:
            state = queue.popleft()
            rels, zs = state
            if all(s & a.finals for s, a in zip(zs, z_nfas)):
                found.add(guess_of(rels))
            for a in letters:
                nxt = advance(state, a)
                if nxt in seen or not all(s & live for s, live in zip(nxt[1], z_live)):
                    continue
                seen.add(nxt)
                if limit is not None and len(seen) > limit:
                    raise ResourceExhausted("guess enumeration exceeds the state budget")
                queue.append(nxt)
    return sorted(found, key=lambda g: (sum(len(t) for t in g), [sorted(t) for t in g]))
